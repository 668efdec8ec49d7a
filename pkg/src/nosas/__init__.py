"""Non-overlapping additive Schwarz preconditioners for 2D P1 finite elements.

Solver library and benchmark harness for the AAS / MES / NOSAS family of
two-level preconditioners on heterogeneous-coefficient elliptic problems,
including exact spectral coarse spaces, block-diagonal and diagonal inexact
variants, island counting, and reproduction of the reference experiment
tables.
"""

from .mesh import (
    CoefficientField,
    InvalidParameterError,
    PatternSpec,
    RasterFormatError,
    StructuredMesh,
    build_mesh,
    generate_coefficients,
    load_coefficient_grid,
)
from .partition import DofPartition, build_partition, gather, scatter_add
from .assembly import (
    DegenerateGeometryError,
    GlobalSystem,
    SubdomainMatrices,
    assemble_global,
    assemble_subdomain,
    element_stiffness,
)
from .linalg import (
    DivergenceError,
    EigenPairs,
    NotSpdError,
    PcgReport,
    SpdFactorization,
    dense_schur,
    factor_spd,
    generalized_symmetric_eigen,
    pcg,
    solve_spd,
)
from .coarse import (
    CoarseBasis,
    CoarseKind,
    CoarseOperator,
    HarmonicCoarse,
    NumericalBreakdownError,
    aas_basis,
    apply_coarse_inverse,
    assemble_coarse,
    coarse_prolong,
    coarse_restrict,
    mes_basis,
    nosas_basis,
)
from .precond import (
    BoundReport,
    Preconditioner,
    bound_report,
    build_preconditioner,
    preconditioned_spectrum,
)
from .islands import Island, IslandReport, find_islands, observed_small_count

__version__ = "0.1.0"
