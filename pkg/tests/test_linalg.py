import numpy as np
import pytest
import scipy.sparse as sp

from nosas import (
    DivergenceError,
    NotSpdError,
    PatternSpec,
    assemble_subdomain,
    build_mesh,
    build_partition,
    dense_schur,
    factor_spd,
    generalized_symmetric_eigen,
    generate_coefficients,
    pcg,
    solve_spd,
)


def floating_subdomain(sps=3, cps=4, variant="constant", **kw):
    mesh = build_mesh(sps, cps)
    part = build_partition(mesh)
    coeffs = generate_coefficients(mesh, PatternSpec(variant=variant, **kw))
    return assemble_subdomain(mesh, coeffs, part, (sps * sps) // 2)


def test_identity_solve():
    fact = factor_spd(np.eye(3))
    assert np.allclose(solve_spd(fact, np.array([1.0, 0.0, 0.0])), [1, 0, 0])


def test_two_by_two_hand_inverse():
    fact = factor_spd(np.array([[4.0, -1.0], [-1.0, 4.0]]))
    assert np.allclose(fact.solve(np.array([1.0, 0.0])), [4 / 15, 1 / 15])


def test_sparse_solve_residual():
    rng = np.random.default_rng(0)
    n = 50
    a = sp.random(n, n, density=0.1, random_state=0)
    a = (a @ a.T + sp.eye(n) * n).tocsc()
    fact = factor_spd(a)
    b = rng.standard_normal(n)
    x = fact.solve(b)
    assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_floating_neumann_rejected():
    sm = floating_subdomain()
    ng, ni = sm.n_gamma, sm.n_interior
    full = np.zeros((ng + ni, ng + ni))
    full[:ng, :ng] = sm.a_gg
    full[:ng, ng:] = sm.a_gi
    full[ng:, :ng] = sm.a_gi.T
    full[ng:, ng:] = sm.a_ii.toarray()
    with pytest.raises(NotSpdError):
        factor_spd(sp.csc_matrix(full))
    with pytest.raises(NotSpdError) as err:
        factor_spd(full)
    assert err.value.pivot is not None


def test_dense_non_spd_reports_pivot():
    with pytest.raises(NotSpdError) as err:
        factor_spd(np.diag([1.0, -1.0, 2.0]))
    assert err.value.pivot == 1


def test_schur_empty_interior():
    mesh = build_mesh(2, 1)  # no interior nodes at all
    part = build_partition(mesh)
    coeffs = generate_coefficients(mesh, PatternSpec(variant="constant"))
    sm = assemble_subdomain(mesh, coeffs, part, 0)
    assert sm.n_interior == 0
    assert np.array_equal(dense_schur(sm), sm.a_gg)


def test_schur_constant_kernel():
    sm = floating_subdomain()
    s = dense_schur(sm)
    ones = np.ones(sm.n_gamma)
    assert np.abs(s @ ones).max() <= 1e-10 * np.abs(s).max()


def test_schur_below_interface_block():
    # harmonic extension minimizes energy, so S <= a_gg in quadratic form
    sm = floating_subdomain(variant="inclusion_grid", cps=8)
    s = dense_schur(sm)
    values = generalized_symmetric_eigen(s, sm.a_gg).values
    assert values[-1] <= 1.0 + 1e-10


def test_schur_energy_is_harmonic_extension_energy():
    sm = floating_subdomain()
    s = dense_schur(sm)
    fact = factor_spd(sm.a_ii)
    rng = np.random.default_rng(1)
    for _ in range(5):
        u = rng.standard_normal(sm.n_gamma)
        interior = -fact.solve(sm.a_gi.T @ u)
        full = np.concatenate([u, interior])
        energy = full @ sm.full_matvec(full)
        assert u @ s @ u == pytest.approx(energy, rel=1e-10)


def test_eigen_diagonal_case():
    pairs = generalized_symmetric_eigen(np.diag([2.0, 1.0]), np.eye(2))
    assert np.allclose(pairs.values, [1.0, 2.0])


def test_eigen_hand_computed():
    s = np.array([[1.0, 0.0], [0.0, 0.0]])
    b = np.array([[2.0, 1.0], [1.0, 2.0]])
    pairs = generalized_symmetric_eigen(s, b)
    assert np.allclose(pairs.values, [0.0, 2.0 / 3.0])


def test_eigen_zero_matrix():
    b = np.array([[2.0, 1.0], [1.0, 2.0]])
    pairs = generalized_symmetric_eigen(np.zeros((2, 2)), b)
    assert np.array_equal(pairs.values, [0.0, 0.0])


def test_eigen_requires_spd_b():
    with pytest.raises(NotSpdError):
        generalized_symmetric_eigen(np.eye(2), np.diag([1.0, -1.0]))


def test_eigen_residual_and_b_orthogonality():
    sm = floating_subdomain(variant="inclusion_grid", cps=8)
    s = dense_schur(sm)
    b = sm.a_gg
    pairs = generalized_symmetric_eigen(s, b)
    v = pairs.vectors
    assert np.allclose(v.T @ b @ v, np.eye(v.shape[1]), atol=1e-8)
    resid = s @ v - b @ v @ np.diag(pairs.values)
    assert np.abs(resid).max() <= 1e-8 * np.abs(s).max()


def test_pcg_identity():
    b = np.array([1.0, 2.0, 3.0])
    x, rep = pcg(lambda v: v, lambda v: v, b)
    assert rep.iterations == 1 and rep.converged
    assert rep.cond_estimate == pytest.approx(1.0)
    assert np.allclose(x, b)


def test_pcg_two_distinct_eigenvalues():
    a = np.diag([1.0, 10.0])
    b = np.array([1.0, 1.0])
    x, rep = pcg(lambda v: a @ v, lambda v: v, b, rtol=1e-12)
    assert rep.iterations <= 2
    assert np.allclose(x, [1.0, 0.1])


def test_pcg_cond_estimate_tracks_spectrum():
    rng = np.random.default_rng(2)
    d = np.linspace(1.0, 25.0, 40)
    q, _ = np.linalg.qr(rng.standard_normal((40, 40)))
    a = q @ np.diag(d) @ q.T
    b = rng.standard_normal(40)
    _, rep = pcg(lambda v: a @ v, lambda v: v, b, rtol=1e-12, max_iter=200)
    assert rep.cond_estimate == pytest.approx(25.0, rel=0.05)


def test_pcg_divergence_on_indefinite_operator():
    a = np.diag([1.0, -1.0])
    with pytest.raises(DivergenceError):
        pcg(lambda v: a @ v, lambda v: v, np.array([0.0, 1.0]))


def test_pcg_max_iter_flag():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((30, 30)))
    a = q @ np.diag(np.linspace(1, 1e4, 30)) @ q.T
    b = rng.standard_normal(30)
    _, rep = pcg(lambda v: a @ v, lambda v: v, b, rtol=1e-14, max_iter=3)
    assert rep.iterations == 3 and not rep.converged


def test_pcg_zero_rhs():
    x, rep = pcg(lambda v: v, lambda v: v, np.zeros(4))
    assert rep.converged and np.all(x == 0.0)
