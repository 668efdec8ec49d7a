"""Two-level additive Schwarz preconditioner M^{-1} = R0^T A0^{-1} R0 + sum_i R_i^T A_i^{-1} R_i.

The local solves act on subdomain interiors (A_i = the interior block of
the subdomain Neumann matrix, which equals R_i A R_i^T); the coarse solve
goes through the variant's coarse operator.  A dense "verify mode"
materializes M^{-1} and computes the exact spectrum of the preconditioned
operator for small systems.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .assembly import GlobalSystem, assemble_subdomain
from .coarse import (
    CoarseKind,
    HarmonicCoarse,
    aas_basis,
    assemble_coarse,
    coarse_prolong,
    coarse_restrict,
    mes_basis,
    nosas_basis,
)
from .linalg import NotSpdError, factor_spd
from .mesh import CoefficientField, StructuredMesh
from .partition import DofPartition

__all__ = [
    "Preconditioner",
    "BoundReport",
    "build_preconditioner",
    "bound_report",
    "preconditioned_spectrum",
    "VERIFY_MODE_CAP",
]

VERIFY_MODE_CAP = 2000  # free-dof limit for dense materialization


@dataclass
class Preconditioner:
    """Immutable-after-build preconditioner state."""

    kind: CoarseKind
    partition: DofPartition
    local_facts: list
    coarse: object            # CoarseOperator | HarmonicCoarse | None
    bases: list | None
    subdomain_matrices: list

    @property
    def n_free(self) -> int:
        return self.partition.n_free

    @property
    def n_coarse(self) -> int:
        if self.coarse is None:
            return 0
        return self.coarse.n_coarse

    @property
    def coarse_ranks(self) -> list:
        if self.bases is None:
            return []
        return [b.k for b in self.bases]

    def apply(self, r: np.ndarray) -> np.ndarray:
        """z = M^{-1} r."""
        if r.shape[0] != self.n_free:
            raise ValueError(f"residual has {r.shape[0]} entries, expected {self.n_free}")
        z = np.zeros_like(r)
        part = self.partition
        for i, fact in enumerate(self.local_facts):
            if fact is None:
                continue
            idx = part.interior_i[i]
            z[idx] += fact.solve(r[idx])
        if self.coarse is not None:
            if isinstance(self.coarse, HarmonicCoarse):
                w = self.coarse.restrict(r)
                z += self.coarse.prolong(self.coarse.solve(w))
            else:
                w = coarse_restrict(self.bases, part, r)
                z += coarse_prolong(self.bases, part, self.coarse.solve(w))
        return z


def build_preconditioner(system: GlobalSystem, mesh: StructuredMesh,
                         coeffs: CoefficientField, partition: DofPartition,
                         kind: CoarseKind) -> Preconditioner:
    """Assemble subdomain blocks, factor local solvers and build the coarse space.

    All factorizations and eigensolves happen here; ``apply`` only runs
    triangular solves and small dense products.  Errors from a subdomain
    are re-raised with its index attached.
    """
    sms = []
    local_facts = []
    for i in range(partition.n_subdomains):
        sm = assemble_subdomain(mesh, coeffs, partition, i)
        sms.append(sm)
        try:
            local_facts.append(factor_spd(sm.a_ii) if sm.n_interior else None)
        except NotSpdError as exc:
            raise NotSpdError(f"subdomain {i}: interior block not SPD: {exc}",
                              pivot=exc.pivot) from exc

    coarse = None
    bases = None
    if partition.n_gamma > 0:
        if kind.name == "harmonic":
            coarse = HarmonicCoarse(sms, partition)
        else:
            bases = []
            for i, sm in enumerate(sms):
                try:
                    if kind.name == "aas":
                        bases.append(aas_basis(sm, partition, i))
                    elif kind.name == "mes":
                        bases.append(mes_basis(sm, partition, i))
                    else:
                        bases.append(nosas_basis(mesh, partition, sm, i, kind))
                except NotSpdError as exc:
                    raise NotSpdError(f"subdomain {i}: {exc}", pivot=exc.pivot) from exc
            coarse = assemble_coarse(bases, partition, kind)
    return Preconditioner(
        kind=kind,
        partition=partition,
        local_facts=local_facts,
        coarse=coarse,
        bases=bases,
        subdomain_matrices=sms,
    )


def preconditioned_spectrum(precond: Preconditioner, system: GlobalSystem) -> np.ndarray:
    """Exact eigenvalues of M^{-1} A (dense verify mode, ascending).

    Materializes M^{-1} column by column, inverts it, and solves the
    symmetric definite pencil (A, M); usable up to ``VERIFY_MODE_CAP``
    free dofs.
    """
    n = system.n_free
    if n > VERIFY_MODE_CAP:
        raise ValueError(f"verify mode limited to {VERIFY_MODE_CAP} dofs, system has {n}")
    minv = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        minv[:, j] = precond.apply(e)
        e[j] = 0.0
    minv = 0.5 * (minv + minv.T)
    m = np.linalg.inv(minv)
    m = 0.5 * (m + m.T)
    a = system.a.toarray()
    return sla.eigh(a, m, eigvals_only=True)


@dataclass
class BoundReport:
    """Measured conditioning against the closed-form theoretical bound."""

    kind_name: str
    lambda_min_eta: float     # smallest first-excluded eigenvalue over subdomains
    theoretical_upper: float
    measured_cond: float
    lambda_max_bound: float   # 2 (exact coarse bilinear form) or 4 (inexact)


def bound_report(precond: Preconditioner, system: GlobalSystem,
                 pcg_cond: float | None = None) -> BoundReport:
    """Condition-number bound for the built preconditioner.

    ``measured_cond`` comes from verify mode when the system is small
    enough, otherwise from the supplied PCG estimate.
    """
    kind = precond.kind
    lam_min_eta = float("inf")
    if precond.bases is not None and kind.is_nosas:
        for basis in precond.bases:
            if basis.spectrum.size > basis.k:
                lam_min_eta = min(lam_min_eta, float(basis.spectrum[basis.k]))
    if kind.name in ("nosas_exact", "harmonic", "aas", "mes"):
        lam_max_bound = 2.0
    else:
        lam_max_bound = 4.0
    if kind.name == "nosas_exact":
        upper = 2.0 * (2.0 + 3.0 / lam_min_eta)
    elif kind.is_inexact:
        upper = 4.0 * (2.0 + 7.0 * max(1.0, 1.0 / lam_min_eta))
    elif kind.name == "harmonic":
        upper = 1.0
    else:
        upper = float("nan")
    if system.n_free <= VERIFY_MODE_CAP:
        spec = preconditioned_spectrum(precond, system)
        measured = float(spec[-1] / spec[0])
    elif pcg_cond is not None:
        measured = float(pcg_cond)
    else:
        measured = float("nan")
    return BoundReport(
        kind_name=kind.name,
        lambda_min_eta=lam_min_eta,
        theoretical_upper=upper,
        measured_cond=measured,
        lambda_max_bound=lam_max_bound,
    )
