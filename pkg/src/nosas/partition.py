"""Non-overlapping subdomain decomposition of the free degrees of freedom.

Free dofs are ordered interface-first: the global interface Gamma (all
subdomain-boundary nodes that are not on the outer Dirichlet boundary) gets
ids 0..|Gamma|-1 in node order, followed by the interior dofs grouped by
subdomain.  Restriction/extension operators are realized as index arrays,
so gathers are fancy-indexing reads and scatters are index-adds.
"""

from dataclasses import dataclass

import numpy as np

from .mesh import StructuredMesh

__all__ = ["DofPartition", "build_partition", "gather", "scatter_add"]


@dataclass(frozen=True)
class DofPartition:
    """Index sets realizing the interface/interior splitting.

    gamma_nodes:
        node ids of the interface dofs; interface dof k is free dof k.
    free_of_node:
        node id -> free dof id (-1 for Dirichlet nodes).
    gamma_i:
        per subdomain, the free dof ids (== positions in gamma) of its
        interface nodes, in node order.
    interior_i:
        per subdomain, the free dof ids of its interior nodes.
    gamma_i_all_boundary_count:
        per subdomain, the total number of nodes on the subdomain boundary
        (free or not); the AAS averaging denominator m_i.
    touches_dirichlet:
        per subdomain, whether it has a side on the outer boundary.
    """

    n_free: int
    n_subdomains: int
    gamma_nodes: np.ndarray
    free_of_node: np.ndarray
    gamma_i: list
    interior_i: list
    gamma_i_nodes: list
    interior_i_nodes: list
    gamma_i_all_boundary_count: np.ndarray
    touches_dirichlet: np.ndarray

    @property
    def n_gamma(self) -> int:
        return self.gamma_nodes.shape[0]


def build_partition(mesh: StructuredMesh) -> DofPartition:
    """Compute interface/interior index sets for every subdomain."""
    sps = mesh.subdomains_per_side
    m = mesh.cells_per_subdomain_side
    n = mesh.cells_per_side
    n_nodes = mesh.n_nodes

    ids = np.arange(n_nodes)
    ix = ids % (n + 1)
    iy = ids // (n + 1)
    on_skeleton = (ix % m == 0) | (iy % m == 0)
    free = ~mesh.dirichlet

    gamma_mask = on_skeleton & free
    gamma_nodes = ids[gamma_mask]

    free_of_node = np.full(n_nodes, -1, dtype=np.int64)
    free_of_node[gamma_nodes] = np.arange(gamma_nodes.size)

    gamma_i = []
    interior_i = []
    gamma_i_nodes = []
    interior_i_nodes = []
    m_i = np.empty(sps * sps, dtype=np.int64)
    touches = np.zeros(sps * sps, dtype=bool)

    next_free = gamma_nodes.size
    for sy in range(sps):
        for sx in range(sps):
            i = sy * sps + sx
            x0, x1 = sx * m, (sx + 1) * m
            y0, y1 = sy * m, (sy + 1) * m
            in_closure = (ix >= x0) & (ix <= x1) & (iy >= y0) & (iy <= y1)
            on_own_boundary = in_closure & ((ix == x0) | (ix == x1) | (iy == y0) | (iy == y1))
            m_i[i] = int(np.count_nonzero(on_own_boundary))
            touches[i] = sx == 0 or sy == 0 or sx == sps - 1 or sy == sps - 1

            g_nodes = ids[on_own_boundary & free]
            gamma_i_nodes.append(g_nodes)
            gamma_i.append(free_of_node[g_nodes].copy())

            inner = ids[in_closure & ~on_own_boundary]
            count = inner.size
            free_of_node[inner] = np.arange(next_free, next_free + count)
            interior_i.append(np.arange(next_free, next_free + count))
            interior_i_nodes.append(inner)
            next_free += count

    return DofPartition(
        n_free=next_free,
        n_subdomains=sps * sps,
        gamma_nodes=gamma_nodes,
        free_of_node=free_of_node,
        gamma_i=gamma_i,
        interior_i=interior_i,
        gamma_i_nodes=gamma_i_nodes,
        interior_i_nodes=interior_i_nodes,
        gamma_i_all_boundary_count=m_i,
        touches_dirichlet=touches,
    )


def _index_set(partition, i, which):
    if which == "gamma_i":
        return partition.gamma_i[i]
    if which == "interior_i":
        return partition.interior_i[i]
    raise ValueError(f"unknown index set {which!r}")


def gather(partition: DofPartition, i: int, global_vector: np.ndarray, which: str) -> np.ndarray:
    """Restrict a global free-dof vector to a subdomain's index set."""
    if global_vector.shape[-1] != partition.n_free:
        raise ValueError(
            f"expected a vector of {partition.n_free} free dofs, got {global_vector.shape[-1]}"
        )
    return global_vector[..., _index_set(partition, i, which)]


def scatter_add(partition: DofPartition, i: int, local_vector: np.ndarray,
                out: np.ndarray, which: str) -> np.ndarray:
    """Add a subdomain-local vector into a global free-dof vector (transposed gather)."""
    idx = _index_set(partition, i, which)
    if out.shape[-1] != partition.n_free:
        raise ValueError(
            f"expected an output of {partition.n_free} free dofs, got {out.shape[-1]}"
        )
    if local_vector.shape[-1] != idx.size:
        raise ValueError(
            f"local vector has {local_vector.shape[-1]} entries, index set has {idx.size}"
        )
    np.add.at(out, idx, local_vector)
    return out
