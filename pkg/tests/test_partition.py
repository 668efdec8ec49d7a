import numpy as np
import pytest

from nosas import build_mesh, build_partition, gather, scatter_add


def test_two_by_two_partition():
    mesh = build_mesh(2, 2)
    part = build_partition(mesh)
    assert part.n_subdomains == 4
    assert part.n_gamma == 5  # the interior cross
    assert [g.size for g in part.gamma_i] == [3, 3, 3, 3]
    assert [g.size for g in part.interior_i] == [1, 1, 1, 1]


def test_single_subdomain():
    mesh = build_mesh(1, 4)
    part = build_partition(mesh)
    assert part.n_subdomains == 1
    assert part.n_gamma == 0
    assert part.interior_i[0].size == 9
    assert part.n_free == 9


def test_floating_interface_size():
    mesh = build_mesh(4, 8)
    part = build_partition(mesh)
    for i in (5, 6, 9, 10):  # interior subdomains of the 4x4 grid
        assert part.gamma_i[i].size == 4 * 8
        assert not part.touches_dirichlet[i]
    assert part.touches_dirichlet[0]


@pytest.mark.parametrize("sps,cps", [(2, 2), (3, 4), (4, 8), (1, 3)])
def test_counts_and_disjointness(sps, cps):
    mesh = build_mesh(sps, cps)
    part = build_partition(mesh)
    interiors = np.concatenate([ix for ix in part.interior_i]) if part.n_subdomains else []
    total = part.n_gamma + sum(ix.size for ix in part.interior_i)
    assert total == part.n_free == int((~mesh.dirichlet).sum())
    if len(interiors):
        assert np.unique(interiors).size == len(interiors)
        assert interiors.min() >= part.n_gamma


def test_gamma_excludes_dirichlet():
    mesh = build_mesh(2, 4)
    part = build_partition(mesh)
    assert not mesh.dirichlet[part.gamma_nodes].any()
    for g_nodes in part.gamma_i_nodes:
        assert not mesh.dirichlet[g_nodes].any()


def test_interface_multiplicity():
    mesh = build_mesh(2, 2)
    part = build_partition(mesh)
    mult = np.zeros(part.n_gamma)
    for i in range(part.n_subdomains):
        mult[part.gamma_i[i]] += 1
    n = mesh.cells_per_side
    ix = part.gamma_nodes % (n + 1)
    iy = part.gamma_nodes // (n + 1)
    m = mesh.cells_per_subdomain_side
    is_cross = (ix % m == 0) & (iy % m == 0)
    assert np.all(mult[is_cross] == 4)
    assert np.all(mult[~is_cross] == 2)


def test_aas_denominator_counts_all_boundary_nodes():
    mesh = build_mesh(2, 2)
    part = build_partition(mesh)
    # every 2x2-cell subdomain boundary has 8 lattice nodes
    assert np.all(part.gamma_i_all_boundary_count == 8)


def test_gather_scatter_partition_identity():
    mesh = build_mesh(2, 3)
    part = build_partition(mesh)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(part.n_free)
    out = np.zeros_like(v)
    for i in range(part.n_subdomains):
        scatter_add(part, i, gather(part, i, v, "interior_i"), out, "interior_i")
        scatter_add(part, i, gather(part, i, v, "gamma_i"), out, "gamma_i")
    mult = np.zeros(part.n_free)
    for i in range(part.n_subdomains):
        mult[part.gamma_i[i]] += 1
    mult[part.n_gamma:] = 1
    assert np.allclose(out, v * mult)


def test_gather_empty_interface():
    mesh = build_mesh(1, 3)
    part = build_partition(mesh)
    assert gather(part, 0, np.ones(part.n_free), "gamma_i").size == 0


def test_basis_vector_round_trip():
    mesh = build_mesh(2, 2)
    part = build_partition(mesh)
    v = np.zeros(part.n_free)
    target = part.interior_i[2][0]
    v[target] = 1.0
    local = gather(part, 2, v, "interior_i")
    out = np.zeros_like(v)
    scatter_add(part, 2, local, out, "interior_i")
    assert np.array_equal(out, v)


def test_shape_errors():
    mesh = build_mesh(2, 2)
    part = build_partition(mesh)
    with pytest.raises(ValueError):
        gather(part, 0, np.ones(3), "gamma_i")
    with pytest.raises(ValueError):
        scatter_add(part, 0, np.ones(99), np.zeros(part.n_free), "gamma_i")
    with pytest.raises(ValueError):
        gather(part, 0, np.ones(part.n_free), "nonsense")
