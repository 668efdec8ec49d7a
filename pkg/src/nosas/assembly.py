"""P1 stiffness assembly: element matrices, subdomain Neumann blocks, global system.

The load vector integrates f = 1 exactly against the P1 hat functions
(area/3 per vertex).  Dirichlet dofs are eliminated, not penalized; the
global matrix lives on the free dofs in the partition's interface-first
ordering.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import StructuredMesh, CoefficientField
from .partition import DofPartition

__all__ = [
    "DegenerateGeometryError",
    "SubdomainMatrices",
    "GlobalSystem",
    "element_stiffness",
    "assemble_subdomain",
    "assemble_global",
]


class DegenerateGeometryError(ValueError):
    """Raised for zero-area elements."""


@dataclass(frozen=True)
class SubdomainMatrices:
    """Neumann matrix of one subdomain in 2x2 block form plus load restrictions.

    Local ordering is [interface dofs of the subdomain (node order),
    interior dofs (node order)]; ``a_gg`` couples interface dofs, ``a_ii``
    the interior, ``a_gi`` is the interface x interior coupling.  The full
    block matrix is symmetric PSD; for a floating subdomain its kernel is
    the constant vector.
    """

    a_gg: np.ndarray       # dense (n_gamma_i, n_gamma_i)
    a_gi: np.ndarray       # dense (n_gamma_i, n_interior_i)
    a_ii: sp.csc_matrix    # sparse SPD (n_interior_i, n_interior_i)
    b_g: np.ndarray
    b_i: np.ndarray

    @property
    def n_gamma(self) -> int:
        return self.a_gg.shape[0]

    @property
    def n_interior(self) -> int:
        return self.a_ii.shape[0]

    def full_matvec(self, v: np.ndarray) -> np.ndarray:
        """Apply the full Neumann block matrix to [v_gamma; v_interior]."""
        ng = self.n_gamma
        vg, vi = v[:ng], v[ng:]
        top = self.a_gg @ vg + self.a_gi @ vi
        bottom = self.a_gi.T @ vg + self.a_ii @ vi
        return np.concatenate([top, bottom])


@dataclass(frozen=True)
class GlobalSystem:
    """Assembled stiffness matrix and load vector over the free dofs."""

    a: sp.csr_matrix
    b: np.ndarray

    @property
    def n_free(self) -> int:
        return self.b.shape[0]


def element_stiffness(vertices: np.ndarray, rho_k: float) -> np.ndarray:
    """3x3 P1 stiffness matrix of one triangle with constant coefficient.

    Standard gradient formula: with edge coefficients b_i = y_j - y_k,
    c_i = x_k - x_j (cyclic), K = rho/(4A) (b b^T + c c^T).  Symmetric PSD
    with zero row sums; raises for degenerate triangles.
    """
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    b = np.array([y[1] - y[2], y[2] - y[0], y[0] - y[1]])
    c = np.array([x[2] - x[1], x[0] - x[2], x[1] - x[0]])
    area2 = x[0] * b[0] + x[1] * b[1] + x[2] * b[2]  # 2*signed area
    if area2 == 0.0:
        raise DegenerateGeometryError(f"zero-area triangle with vertices {v.tolist()}")
    return (rho_k / (2.0 * abs(area2))) * (np.outer(b, b) + np.outer(c, c))


def _element_geometry(mesh, element_ids):
    """Vectorized gradient coefficients and areas for a set of elements."""
    tri = mesh.elements[element_ids]
    pts = mesh.nodes[tri]                       # (ne, 3, 2)
    x, y = pts[..., 0], pts[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area2 = x[:, 0] * b[:, 0] + x[:, 1] * b[:, 1] + x[:, 2] * b[:, 2]
    return tri, b, c, np.abs(area2)


def _element_matrices(mesh, coeffs, element_ids):
    tri, b, c, area2 = _element_geometry(mesh, element_ids)
    rho = coeffs.rho[element_ids]
    scale = rho / (2.0 * area2)
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) * scale[:, None, None]
    return tri, ke, area2


def _assemble_on_dofs(mesh, coeffs, element_ids, dof_of_node, n_dofs):
    """Scatter element stiffness and f=1 loads onto a dof numbering.

    Nodes mapped to -1 (eliminated Dirichlet dofs) are dropped.
    """
    tri, ke, area2 = _element_matrices(mesh, coeffs, element_ids)
    dofs = dof_of_node[tri]                     # (ne, 3)

    rows = np.repeat(dofs, 3, axis=1).ravel()
    cols = np.tile(dofs, (1, 3)).ravel()
    vals = ke.reshape(ke.shape[0], -1).ravel()
    keep = (rows >= 0) & (cols >= 0)
    a = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n_dofs, n_dofs)).tocsr()

    load = np.zeros(n_dofs)
    contrib = np.repeat(area2 / 6.0, 3)
    flat = dofs.ravel()
    good = flat >= 0
    np.add.at(load, flat[good], contrib[good])
    return a, load


def _subdomain_elements(mesh, i):
    sps = mesh.subdomains_per_side
    m = mesh.cells_per_subdomain_side
    n = mesh.cells_per_side
    sy, sx = divmod(i, sps)
    cx = np.arange(sx * m, (sx + 1) * m)
    cy = np.arange(sy * m, (sy + 1) * m)
    cells = (cy[:, None] * n + cx[None, :]).ravel()
    return np.concatenate([2 * cells, 2 * cells + 1])


def assemble_subdomain(mesh: StructuredMesh, coeffs: CoefficientField,
                       partition: DofPartition, i: int) -> SubdomainMatrices:
    """Assemble the Neumann matrix of subdomain i in 2x2 block form."""
    if not (0 <= i < partition.n_subdomains):
        raise ValueError(f"subdomain index {i} out of range 0..{partition.n_subdomains - 1}")
    g_nodes = partition.gamma_i_nodes[i]
    interior_nodes = partition.interior_i_nodes[i]

    local_of_node = np.full(mesh.n_nodes, -1, dtype=np.int64)
    local_of_node[g_nodes] = np.arange(g_nodes.size)
    local_of_node[interior_nodes] = g_nodes.size + np.arange(interior_nodes.size)

    n_local = g_nodes.size + interior_nodes.size
    elems = _subdomain_elements(mesh, i)
    a, load = _assemble_on_dofs(mesh, coeffs, elems, local_of_node, n_local)

    ng = g_nodes.size
    a = a.tocsc()
    a_gg = a[:ng, :ng].toarray()
    a_gi = a[:ng, ng:].toarray()
    a_ii = a[ng:, ng:].tocsc()
    return SubdomainMatrices(a_gg=a_gg, a_gi=a_gi, a_ii=a_ii,
                             b_g=load[:ng], b_i=load[ng:])


def assemble_global(mesh: StructuredMesh, coeffs: CoefficientField,
                    partition: DofPartition) -> GlobalSystem:
    """Assemble A u = b on the free dofs (f = 1, Dirichlet rows eliminated)."""
    all_elements = np.arange(mesh.n_elements)
    a, load = _assemble_on_dofs(mesh, coeffs, all_elements,
                                partition.free_of_node, partition.n_free)
    a = 0.5 * (a + a.T)  # symmetric storage regardless of accumulation order
    return GlobalSystem(a=a.tocsr(), b=load)
