"""High-permeability island counting and its spectral consequence.

An island is a connected union (node-sharing adjacency: elements are
closed sets) of high-coefficient elements inside one subdomain closure.
Islands that touch the subdomain interface in at least one node and do not
touch the outer Dirichlet boundary each contribute one generalized
eigenvalue of size O(rho_low/rho_high); ``observed_small_count`` counts
the eigenvalues below the geometric-midpoint cut between that cluster and
the O(1) cluster.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .assembly import _subdomain_elements
from .mesh import CoefficientField, InvalidParameterError, StructuredMesh
from .partition import DofPartition

__all__ = ["Island", "IslandReport", "find_islands", "observed_small_count"]


@dataclass(frozen=True)
class Island:
    elements: np.ndarray
    touches_gamma: bool
    touches_dirichlet: bool


@dataclass(frozen=True)
class IslandReport:
    subdomain: int
    islands: list
    predicted_small: int
    observed_small: int | None = None


def find_islands(mesh: StructuredMesh, coeffs: CoefficientField,
                 partition: DofPartition, i: int, high_cut: float) -> IslandReport:
    """Connected components of high elements in subdomain i with contact flags.

    ``high_cut`` classifies elements: rho >= high_cut is high.  A subdomain
    with no high element is contrast-free (the labeling of a constant field
    is arbitrary), so the whole subdomain counts as a single island; that
    convention makes the island count predict the floating subdomain's zero
    eigenvalue.
    """
    elems = _subdomain_elements(mesh, i)
    high = elems[coeffs.rho[elems] >= high_cut]
    if high.size == 0:
        high = elems
    tri = mesh.elements[high]

    node_ids, local_nodes = np.unique(tri, return_inverse=True)
    ne = high.size
    incidence = sp.coo_matrix(
        (np.ones(3 * ne), (np.repeat(np.arange(ne), 3), local_nodes.reshape(ne, 3).ravel())),
        shape=(ne, node_ids.size),
    ).tocsr()
    adjacency = incidence @ incidence.T
    n_comp, labels = connected_components(adjacency, directed=False)

    gamma_nodes = set(partition.gamma_i_nodes[i].tolist())
    islands = []
    predicted = 0
    for comp in range(n_comp):
        members = high[labels == comp]
        comp_nodes = np.unique(mesh.elements[members])
        touches_gamma = any(int(nid) in gamma_nodes for nid in comp_nodes)
        touches_dirichlet = bool(np.any(mesh.dirichlet[comp_nodes]))
        islands.append(Island(members, touches_gamma, touches_dirichlet))
        if touches_gamma and not touches_dirichlet:
            predicted += 1
    return IslandReport(subdomain=i, islands=islands, predicted_small=predicted)


def observed_small_count(eigenvalues: np.ndarray, rho1: float, rho2: float) -> int:
    """Count eigenvalues below sqrt(rho2/rho1) (zero eigenvalues included).

    ``rho1`` is the high coefficient, ``rho2`` the low one; the square-root
    cut sits geometrically between the O(rho2/rho1) cluster and the O(1)
    cluster.
    """
    if rho1 <= rho2 or rho2 <= 0.0:
        raise InvalidParameterError(
            f"need rho1 > rho2 > 0 to classify eigenvalue clusters, got {rho1} and {rho2}"
        )
    cut = float(np.sqrt(rho2 / rho1))
    values = np.asarray(eigenvalues, dtype=float)
    return int(np.count_nonzero(values < cut))
