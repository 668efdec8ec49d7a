"""Coarse spaces for the Schwarz preconditioner family and the coarse solve.

Every variant extends interface data into subdomain interiors through a
low-rank per-subdomain map and induces a coarse interface matrix of the
form ``base - U B U^T`` (base = assembled interface matrix, exact or its
block-diagonal/diagonal surrogate; B = small symmetric invertible blocks).
The coarse inverse is applied with the Woodbury identity, so the only
globally coupled pieces are the base factorization and one dense solve of
size N_E = sum of the per-subdomain coarse ranks.

Variants: subdomain-boundary averaging (AAS, rank 1), energy-minimal
constant extension (MES, rank 1), spectral extensions from the local
generalized eigenproblem S q = lambda Ahat q with the exact interface
block or its block-diagonal/diagonal version (rank = eigenvalues below the
threshold eta = c*h/H).  The discrete harmonic extension is kept as a
separate exact path: it reproduces the Schur complement and serves as a
direct-solver oracle.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .assembly import SubdomainMatrices
from .linalg import SpdFactorization, dense_schur, factor_spd, generalized_symmetric_eigen
from .mesh import StructuredMesh
from .partition import DofPartition

__all__ = [
    "NumericalBreakdownError",
    "CoarseKind",
    "CoarseBasis",
    "CoarseOperator",
    "HarmonicCoarse",
    "interface_groups",
    "inexact_interface_matrix",
    "aas_basis",
    "mes_basis",
    "nosas_basis",
    "assemble_coarse",
    "apply_coarse_inverse",
    "coarse_prolong",
    "coarse_restrict",
]

KIND_NAMES = ("harmonic", "aas", "mes", "nosas_exact", "nosas_block_diagonal", "nosas_diagonal")


class NumericalBreakdownError(RuntimeError):
    """Woodbury core lost positive definiteness (threshold too aggressive)."""


@dataclass(frozen=True)
class CoarseKind:
    """Preconditioner variant selector; ``c`` sets eta = c*h/H for spectral kinds."""

    name: str
    c: float = 0.25

    def __post_init__(self):
        if self.name not in KIND_NAMES:
            raise ValueError(f"unknown coarse kind {self.name!r}; expected one of {KIND_NAMES}")
        if self.c <= 0.0:
            raise ValueError(f"threshold constant must be positive, got {self.c}")

    @property
    def is_nosas(self) -> bool:
        return self.name.startswith("nosas")

    @property
    def is_inexact(self) -> bool:
        return self.name in ("nosas_block_diagonal", "nosas_diagonal")

    def eta(self, mesh: StructuredMesh) -> float:
        return self.c / mesh.cells_per_subdomain_side


@dataclass
class CoarseBasis:
    """Per-subdomain coarse data.

    ``k`` is the coarse rank (contribution to N_E).  The interior
    extension of interface data u is ``p @ (ext @ u)``; the subdomain's
    coarse matrix contribution is ``ahat - ucols @ bmid @ ucols^T``.  For
    spectral kinds ``q`` holds the kept eigenvectors (B-orthonormal, so
    ``qaq`` is the identity), ``d = 1 - lambda`` and ``spectrum`` the full
    eigenvalue list; the averaging kinds store their weight vector in ``q``.
    """

    k: int
    q: np.ndarray
    p: np.ndarray
    ext: np.ndarray
    ucols: np.ndarray
    bmid: np.ndarray
    ahat: np.ndarray
    lambdas: np.ndarray = field(default_factory=lambda: np.empty(0))
    d: np.ndarray = field(default_factory=lambda: np.empty(0))
    qaq: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    spectrum: np.ndarray = field(default_factory=lambda: np.empty(0))


def interface_groups(mesh: StructuredMesh, partition: DofPartition, i: int) -> np.ndarray:
    """Label each interface node of subdomain i by open side or corner.

    Sides of the subdomain square get labels 0..3 (W, E, S, N); the four
    corners get unique labels 4..7.  Couplings between different labels are
    the ones dropped by the block-diagonal interface surrogate.
    """
    m = mesh.cells_per_subdomain_side
    sps = mesh.subdomains_per_side
    sy, sx = divmod(i, sps)
    x0, x1 = sx * m, (sx + 1) * m
    y0, y1 = sy * m, (sy + 1) * m
    nodes = partition.gamma_i_nodes[i]
    n = mesh.cells_per_side
    ix = nodes % (n + 1)
    iy = nodes // (n + 1)

    groups = np.full(nodes.size, -1, dtype=np.int64)
    on_w, on_e = ix == x0, ix == x1
    on_s, on_n = iy == y0, iy == y1
    corner = (on_w | on_e) & (on_s | on_n)
    groups[on_w & ~corner] = 0
    groups[on_e & ~corner] = 1
    groups[on_s & ~corner] = 2
    groups[on_n & ~corner] = 3
    groups[corner & on_w & on_s] = 4
    groups[corner & on_e & on_s] = 5
    groups[corner & on_w & on_n] = 6
    groups[corner & on_e & on_n] = 7
    return groups


def inexact_interface_matrix(a_gg: np.ndarray, kind: CoarseKind,
                             groups: np.ndarray | None = None) -> np.ndarray:
    """Block-diagonal or diagonal surrogate of a subdomain interface block."""
    if kind.name == "nosas_diagonal":
        return np.diag(np.diag(a_gg))
    if kind.name == "nosas_block_diagonal":
        if groups is None:
            raise ValueError("block-diagonal surrogate needs interface groups")
        mask = groups[:, None] == groups[None, :]
        return np.where(mask, a_gg, 0.0)
    return a_gg.copy()


def _rank0_basis(sm: SubdomainMatrices, ahat: np.ndarray) -> CoarseBasis:
    ng = sm.n_gamma
    return CoarseBasis(
        k=0,
        q=np.empty((ng, 0)),
        p=np.empty((sm.n_interior, 0)),
        ext=np.empty((0, ng)),
        ucols=np.empty((ng, 0)),
        bmid=np.empty((0, 0)),
        ahat=ahat,
    )


def aas_basis(sm: SubdomainMatrices, partition: DofPartition, i: int) -> CoarseBasis:
    """Averaging coarse record: interior extension by the mean over all
    subdomain-boundary nodes (Dirichlet nodes contribute zero and are
    counted in the denominator)."""
    ng, ni = sm.n_gamma, sm.n_interior
    if ni == 0:
        return _rank0_basis(sm, sm.a_gg.copy())
    m_i = float(partition.gamma_i_all_boundary_count[i])
    q = np.full((ng, 1), 1.0 / m_i)
    ones = np.ones(ni)
    u = sm.a_gi @ ones
    s = float(ones @ (sm.a_ii @ ones))
    # a(ext u, ext v) adds u q^T + q u^T + s q q^T to a_gg; written as
    # -(U B U^T) with two columns and an indefinite middle block.
    ucols = np.column_stack([u, u + s * q[:, 0]])
    bmid = np.diag([1.0 / s, -1.0 / s])
    return CoarseBasis(
        k=1,
        q=q,
        p=ones[:, None],
        ext=q.T.copy(),
        ucols=ucols,
        bmid=bmid,
        ahat=sm.a_gg.copy(),
    )


def mes_basis(sm: SubdomainMatrices, partition: DofPartition, i: int) -> CoarseBasis:
    """Energy-minimal constant extension: interior value w^T u_gamma with
    w = -(1^T a_ii 1)^{-1} a_gi 1."""
    ng, ni = sm.n_gamma, sm.n_interior
    if ni == 0:
        return _rank0_basis(sm, sm.a_gg.copy())
    ones = np.ones(ni)
    u = sm.a_gi @ ones
    s = float(ones @ (sm.a_ii @ ones))
    w = -u / s
    return CoarseBasis(
        k=1,
        q=w[:, None],
        p=ones[:, None],
        ext=w[None, :].copy(),
        ucols=u[:, None],
        bmid=np.array([[1.0 / s]]),
        ahat=sm.a_gg.copy(),
    )


def nosas_basis(mesh: StructuredMesh, partition: DofPartition, sm: SubdomainMatrices,
                i: int, kind: CoarseKind) -> CoarseBasis:
    """Spectral coarse record from the local generalized eigenproblem.

    Solves S q = lambda Ahat q (S the interface Schur complement, Ahat the
    exact interface block or its block-diagonal/diagonal surrogate), keeps
    every eigenvalue strictly below eta = c*h/H, and builds the kept
    eigenvector matrix q, its interior harmonic extension p, d = 1-lambda
    and the coarse-block correction columns.
    """
    if not kind.is_nosas:
        raise ValueError(f"nosas_basis called with kind {kind.name!r}")
    s_mat = dense_schur(sm)
    groups = interface_groups(mesh, partition, i) if kind.name == "nosas_block_diagonal" else None
    ahat = inexact_interface_matrix(sm.a_gg, kind, groups)
    pairs = generalized_symmetric_eigen(s_mat, ahat)
    eta = kind.eta(mesh)
    k = int(np.count_nonzero(pairs.values < eta))
    if k == sm.n_gamma:
        warnings.warn(
            f"subdomain {i}: all {k} interface eigenvalues fall below eta={eta:g}; "
            "coarse space equals the full interface",
            stacklevel=2,
        )
    q = pairs.vectors[:, :k]
    lambdas = pairs.values[:k]
    d = 1.0 - lambdas
    qaq = q.T @ ahat @ q
    if sm.n_interior:
        fact = factor_spd(sm.a_ii)
        p = -fact.solve(sm.a_gi.T @ q) if k else np.empty((sm.n_interior, 0))
    else:
        p = np.empty((0, k))
    aq = ahat @ q
    qaq_diag = np.diag(qaq).copy() if k else np.empty(0)
    ext = aq.T / qaq_diag[:, None] if k else np.empty((0, sm.n_gamma))
    # columns with 1 - lambda = 0 carry zero weight in the low-rank
    # correction; dropping them keeps the middle block invertible when the
    # whole interface spectrum is kept
    live = d > 1e-14 if k else np.zeros(0, dtype=bool)
    ucols = aq[:, live]
    bmid = np.diag(d[live] / qaq_diag[live]) if np.any(live) else np.empty((0, 0))
    return CoarseBasis(
        k=k,
        q=q,
        p=p,
        ext=ext,
        ucols=ucols,
        bmid=bmid,
        ahat=ahat,
        lambdas=lambdas,
        d=d,
        qaq=qaq,
        spectrum=pairs.values,
    )


@dataclass
class CoarseOperator:
    """Assembled coarse matrix base - U B U^T with its Woodbury factorization."""

    kind: CoarseKind
    n_gamma: int
    n_coarse: int                    # N_E = sum of coarse ranks
    base: sp.csr_matrix
    base_fact: SpdFactorization
    u_mat: np.ndarray                # (n_gamma, R) correction columns
    w_mat: np.ndarray                # base^{-1} u_mat
    core: np.ndarray                 # B^{-1} - U^T base^{-1} U
    d_vals: np.ndarray               # concatenated 1-lambda (spectral kinds)
    _core_cho: tuple | None = None
    _core_lu: tuple | None = None

    def solve(self, r_gamma: np.ndarray) -> np.ndarray:
        return apply_coarse_inverse(self, r_gamma)

    def dense(self) -> np.ndarray:
        """Materialize the coarse matrix (verification only)."""
        a0 = self.base.toarray()
        if self.u_mat.shape[1]:
            binv = self.core + self.u_mat.T @ self.w_mat          # recover B^{-1}
            bmid = np.linalg.inv(binv)
            a0 = a0 - self.u_mat @ bmid @ self.u_mat.T
        return a0


def assemble_coarse(bases: list, partition: DofPartition, kind: CoarseKind) -> CoarseOperator:
    """Assemble the global coarse operator from per-subdomain records."""
    ng = partition.n_gamma
    rows, cols, vals = [], [], []
    u_blocks = []
    binv_blocks = []
    n_coarse = 0
    for i, basis in enumerate(bases):
        gi = partition.gamma_i[i]
        if gi.size:
            r = np.repeat(gi, gi.size)
            c = np.tile(gi, gi.size)
            rows.append(r)
            cols.append(c)
            vals.append(basis.ahat.ravel())
        n_coarse += basis.k
        if basis.ucols.shape[1]:
            u_blocks.append((gi, basis.ucols, basis.bmid))
    if not rows:
        raise ValueError("cannot assemble a coarse operator on an empty interface")
    base = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ng, ng),
    ).tocsc()
    base_fact = factor_spd(base)

    width = sum(u.shape[1] for _, u, _ in u_blocks)
    u_mat = np.zeros((ng, width))
    binv = np.zeros((width, width))
    at = 0
    for gi, ucols, bmid in u_blocks:
        r = ucols.shape[1]
        u_mat[gi, at:at + r] = ucols
        binv[at:at + r, at:at + r] = np.linalg.inv(bmid)
        at += r

    w_mat = base_fact.solve(u_mat) if width else np.zeros((ng, 0))
    core = binv - u_mat.T @ w_mat if width else np.zeros((0, 0))

    d_vals = np.concatenate([b.d for b in bases]) if kind.is_nosas else np.empty(0)
    op = CoarseOperator(
        kind=kind, n_gamma=ng, n_coarse=n_coarse, base=base.tocsr(),
        base_fact=base_fact, u_mat=u_mat, w_mat=w_mat, core=core, d_vals=d_vals,
    )
    if width:
        if kind.name == "aas":
            op._core_lu = sla.lu_factor(core)
        else:
            try:
                op._core_cho = sla.cho_factor(core)
            except sla.LinAlgError as exc:
                raise NumericalBreakdownError(
                    f"Woodbury core is not positive definite ({exc}); "
                    "the eigenvalue threshold is too aggressive"
                ) from exc
    return op


def apply_coarse_inverse(op: CoarseOperator, r_gamma: np.ndarray) -> np.ndarray:
    """Solve (base - U B U^T) x = r via the Woodbury identity."""
    if r_gamma.shape[0] != op.n_gamma:
        raise ValueError(f"interface vector has {r_gamma.shape[0]} entries, expected {op.n_gamma}")
    x = op.base_fact.solve(r_gamma)
    if op.u_mat.shape[1]:
        rhs = op.u_mat.T @ x
        if op._core_cho is not None:
            y = sla.cho_solve(op._core_cho, rhs)
        else:
            y = sla.lu_solve(op._core_lu, rhs)
        x = x + op.w_mat @ y
    return x


def coarse_prolong(bases: list, partition: DofPartition, w_gamma: np.ndarray) -> np.ndarray:
    """Extend interface data to all free dofs through the coarse records."""
    z = np.zeros(partition.n_free)
    z[:partition.n_gamma] = w_gamma
    for i, basis in enumerate(bases):
        if basis.k == 0 or basis.p.shape[0] == 0:
            continue
        local = w_gamma[partition.gamma_i[i]]
        z[partition.interior_i[i]] = basis.p @ (basis.ext @ local)
    return z


def coarse_restrict(bases: list, partition: DofPartition, r: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`coarse_prolong` acting on full residuals."""
    w = r[:partition.n_gamma].copy()
    for i, basis in enumerate(bases):
        if basis.k == 0 or basis.p.shape[0] == 0:
            continue
        local = basis.ext.T @ (basis.p.T @ r[partition.interior_i[i]])
        np.add.at(w, partition.gamma_i[i], local)
    return w


class HarmonicCoarse:
    """Exact coarse solver: discrete harmonic extension + Schur complement.

    Reproduces the Schur complement bilinear form exactly, which makes the
    two-level preconditioner a direct solver; kept as a verification
    oracle, not a practical variant.
    """

    def __init__(self, sms: list, partition: DofPartition):
        self.partition = partition
        ng = partition.n_gamma
        self._facts = [factor_spd(sm.a_ii) if sm.n_interior else None for sm in sms]
        self._a_gi = [sm.a_gi for sm in sms]
        rows, cols, vals = [], [], []
        for i, sm in enumerate(sms):
            gi = partition.gamma_i[i]
            if gi.size == 0:
                continue
            s_i = dense_schur(sm)
            rows.append(np.repeat(gi, gi.size))
            cols.append(np.tile(gi, gi.size))
            vals.append(s_i.ravel())
        schur = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(ng, ng),
        ).tocsc()
        self.schur = schur.tocsr()
        self.schur_fact = factor_spd(schur)
        self.n_gamma = ng
        self.n_coarse = ng

    def solve(self, r_gamma):
        return self.schur_fact.solve(r_gamma)

    def prolong(self, w_gamma):
        z = np.zeros(self.partition.n_free)
        z[:self.n_gamma] = w_gamma
        for i, fact in enumerate(self._facts):
            if fact is None:
                continue
            local = w_gamma[self.partition.gamma_i[i]]
            z[self.partition.interior_i[i]] = -fact.solve(self._a_gi[i].T @ local)
        return z

    def restrict(self, r):
        w = r[:self.n_gamma].copy()
        for i, fact in enumerate(self._facts):
            if fact is None:
                continue
            local = -(self._a_gi[i] @ fact.solve(r[self.partition.interior_i[i]]))
            np.add.at(w, self.partition.gamma_i[i], local)
        return w
