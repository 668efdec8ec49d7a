"""Core kernels: SPD factorization, Schur complements, generalized eigensolver, PCG.

Dense work goes through LAPACK (scipy.linalg), sparse factorizations
through SuperLU in symmetric mode with a positive-pivot check so that
semidefinite input is reported as such instead of silently mis-factored.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "NotSpdError",
    "DivergenceError",
    "SpdFactorization",
    "EigenPairs",
    "PcgReport",
    "factor_spd",
    "solve_spd",
    "dense_schur",
    "generalized_symmetric_eigen",
    "pcg",
]


class NotSpdError(ValueError):
    """Matrix expected to be SPD is not; carries the offending pivot index."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class DivergenceError(RuntimeError):
    """PCG produced non-finite values."""


class SpdFactorization:
    """Cholesky-type factorization of a symmetric positive definite matrix.

    Dense inputs use LAPACK potrf; sparse inputs use SuperLU with symmetric
    mode and diagonal pivoting, whose pivots must all be positive.
    """

    def __init__(self, matrix):
        if sp.issparse(matrix):
            self._dense = False
            mat = matrix.tocsc()
            try:
                self._lu = spla.splu(
                    mat,
                    diag_pivot_thresh=0.0,
                    permc_spec="MMD_AT_PLUS_A",
                    options=dict(SymmetricMode=True),
                )
            except RuntimeError as exc:  # singular factor
                raise NotSpdError(f"sparse factorization failed: {exc}") from exc
            pivots = self._lu.U.diagonal()
            bad = np.flatnonzero(pivots <= 0.0)
            if bad.size:
                raise NotSpdError(
                    f"non-positive pivot at index {bad[0]} (value {pivots[bad[0]]:.3e})",
                    pivot=int(bad[0]),
                )
            self.n = mat.shape[0]
        else:
            self._dense = True
            mat = np.asarray(matrix, dtype=float)
            c, info = sla.lapack.dpotrf(mat, lower=1)
            if info > 0:
                raise NotSpdError(
                    f"non-positive pivot at index {info - 1}", pivot=int(info - 1)
                )
            if info < 0:
                raise ValueError(f"illegal value in argument {-info} of potrf")
            self._chol = c
            self.n = mat.shape[0]

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise ValueError(f"rhs has {rhs.shape[0]} rows, factorization has {self.n}")
        if self._dense:
            x, info = sla.lapack.dpotrs(self._chol, rhs, lower=1)
            if info != 0:
                raise ValueError(f"potrs failed with info={info}")
            return x
        if rhs.ndim == 1:
            return self._lu.solve(rhs)
        return np.column_stack([self._lu.solve(rhs[:, j]) for j in range(rhs.shape[1])])


def factor_spd(matrix) -> SpdFactorization:
    """Factor a symmetric positive definite matrix (dense or sparse)."""
    return SpdFactorization(matrix)


def solve_spd(fact: SpdFactorization, rhs) -> np.ndarray:
    return fact.solve(rhs)


def dense_schur(sm) -> np.ndarray:
    """Interface Schur complement a_gg - a_gi a_ii^{-1} a_ig of one subdomain.

    The quadratic form u^T S u is the energy of the discrete harmonic
    extension of the interface data u.  Symmetric PSD; for a floating
    subdomain the constant vector spans its kernel.
    """
    if sm.n_interior == 0:
        return sm.a_gg.copy()
    fact = factor_spd(sm.a_ii)
    x = fact.solve(sm.a_gi.T)        # a_ii^{-1} a_ig
    s = sm.a_gg - sm.a_gi @ x
    return 0.5 * (s + s.T)


@dataclass(frozen=True)
class EigenPairs:
    """Full generalized spectrum, ascending, with B-orthonormal vectors."""

    values: np.ndarray
    vectors: np.ndarray


def generalized_symmetric_eigen(s: np.ndarray, b: np.ndarray,
                                clamp_rel: float = 1e-12) -> EigenPairs:
    """Solve S v = lambda B v for symmetric PSD S and SPD B (full spectrum).

    Eigenvalues within ``clamp_rel * lambda_max`` of zero are clamped to
    exactly zero (floating-subdomain kernel).  Raises :class:`NotSpdError`
    if B is not positive definite.
    """
    s = np.asarray(s, dtype=float)
    b = np.asarray(b, dtype=float)
    if s.shape != b.shape or s.shape[0] != s.shape[1]:
        raise ValueError(f"shape mismatch: S is {s.shape}, B is {b.shape}")
    try:
        values, vectors = sla.eigh(s, b)
    except sla.LinAlgError as exc:
        raise NotSpdError(f"right-hand side matrix is not SPD: {exc}") from exc
    lam_max = float(np.max(np.abs(values))) if values.size else 0.0
    if lam_max > 0.0:
        values = values.copy()
        values[np.abs(values) <= clamp_rel * lam_max] = 0.0
    values[values < 0.0] = 0.0
    return EigenPairs(values=values, vectors=vectors)


@dataclass
class PcgReport:
    """Convergence record of one PCG run.

    ``cond_estimate`` is lambda_max/lambda_min of the Lanczos tridiagonal
    built from the alpha/beta recurrence coefficients, i.e. an estimate of
    the preconditioned operator's condition number.
    """

    iterations: int
    converged: bool
    residuals: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    cond_estimate: float = float("nan")


def _lanczos_condition(alphas, betas):
    k = len(alphas)
    if k == 0:
        return float("nan")
    if k == 1:
        return 1.0
    diag = np.empty(k)
    off = np.empty(k - 1)
    diag[0] = 1.0 / alphas[0]
    for j in range(1, k):
        diag[j] = 1.0 / alphas[j] + betas[j - 1] / alphas[j - 1]
        off[j - 1] = np.sqrt(betas[j - 1]) / alphas[j - 1]
    ritz = sla.eigh_tridiagonal(diag, off, eigvals_only=True)
    lo, hi = ritz[0], ritz[-1]
    if lo <= 0.0:
        return float("inf")
    return float(hi / lo)


def pcg(apply_operator, apply_preconditioner, b: np.ndarray,
        rtol: float = 1e-6, max_iter: int = 1000):
    """Preconditioned conjugate gradients from x0 = 0.

    Stops when ||b - A x||_2 <= rtol * ||b||_2 or after ``max_iter``
    iterations (flagged in the report).  Operator and preconditioner are
    callables; both must be SPD as linear maps.
    """
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b)
    r = b.copy()
    norm_b = float(np.linalg.norm(b))
    report = PcgReport(iterations=0, converged=False)
    if norm_b == 0.0:
        report.converged = True
        report.cond_estimate = 1.0
        return x, report

    z = apply_preconditioner(r)
    p = z.copy()
    rz = float(r @ z)
    report.residuals.append(1.0)
    for it in range(1, max_iter + 1):
        ap = apply_operator(p)
        pap = float(p @ ap)
        if not np.isfinite(pap) or pap <= 0.0:
            raise DivergenceError(f"breakdown at iteration {it}: p^T A p = {pap}")
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        report.alphas.append(alpha)
        rel = float(np.linalg.norm(r)) / norm_b
        if not np.isfinite(rel):
            raise DivergenceError(f"non-finite residual at iteration {it}")
        report.residuals.append(rel)
        report.iterations = it
        if rel <= rtol:
            report.converged = True
            break
        z = apply_preconditioner(r)
        rz_new = float(r @ z)
        beta = rz_new / rz
        report.betas.append(beta)
        p = z + beta * p
        rz = rz_new
    report.cond_estimate = _lanczos_condition(report.alphas, report.betas)
    return x, report
