"""Structured triangulations of the unit square and coefficient fields.

The solver family operates on a fixed mesh hierarchy: the unit square is
split into ``subdomains_per_side**2`` congruent square subdomains, each
subdomain into ``cells_per_subdomain_side**2`` grid squares, and each grid
square into two right triangles along the lower-left -> upper-right
diagonal.  Coefficients are constant per element; the named patterns
reproduce the benchmark geometries (uniform field, thin crossing channel,
comb, string, inclusion grid, dual stripe, extra high-permeability
channels) and a CSV raster can be ingested for externally supplied fields.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "InvalidParameterError",
    "RasterFormatError",
    "StructuredMesh",
    "CoefficientField",
    "PatternSpec",
    "build_mesh",
    "generate_coefficients",
    "load_coefficient_grid",
]


class InvalidParameterError(ValueError):
    """Raised when mesh or pattern parameters are inconsistent."""


class RasterFormatError(ValueError):
    """Raised when a coefficient raster does not match the expected layout."""


@dataclass(frozen=True)
class StructuredMesh:
    """Uniform right-triangle mesh of (0,1)^2 aligned with the subdomain grid.

    Nodes lie on the lattice with spacing ``h = 1/(subdomains_per_side *
    cells_per_subdomain_side)`` and are numbered row-major from the bottom
    left, node ``(ix, iy) -> iy*(n+1) + ix``.  Grid square ``(cx, cy)`` is
    cell ``cy*n + cx`` and owns elements ``2*cell`` (lower-right triangle)
    and ``2*cell + 1`` (upper-left triangle); every square is split by the
    same lower-left -> upper-right diagonal, which yields the classical
    5-point stencil for constant coefficients.
    """

    subdomains_per_side: int
    cells_per_subdomain_side: int
    nodes: np.ndarray          # (n_nodes, 2) lattice coordinates
    elements: np.ndarray       # (n_elements, 3) node indices, CCW
    dirichlet: np.ndarray      # (n_nodes,) bool, True on the outer boundary

    @property
    def cells_per_side(self) -> int:
        return self.subdomains_per_side * self.cells_per_subdomain_side

    @property
    def h(self) -> float:
        return 1.0 / self.cells_per_side

    @property
    def coarse_h(self) -> float:
        """Subdomain diameter parameter H."""
        return 1.0 / self.subdomains_per_side

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    def node_id(self, ix, iy):
        return iy * (self.cells_per_side + 1) + ix

    def cell_id(self, cx, cy):
        return cy * self.cells_per_side + cx


@dataclass(frozen=True)
class CoefficientField:
    """One positive coefficient per element plus a descriptive tag."""

    rho: np.ndarray
    pattern_tag: str

    def __post_init__(self):
        if np.any(self.rho <= 0.0):
            raise InvalidParameterError("coefficients must be strictly positive")


@dataclass(frozen=True)
class PatternSpec:
    """Deterministic description of a named coefficient geometry.

    variant:
        one of ``constant``, ``channel``, ``comb``, ``string``,
        ``inclusion_grid``, ``dual_stripe``, ``added_channels``.
    high_value / low_value:
        the two base coefficient levels (``constant`` uses ``low_value``).
    extra_value:
        level of the extra channels in ``added_channels``.
    channels:
        number of extra channels for ``added_channels`` (0..4).
    channel_offset:
        cell rows between a channel and the subdomain interface below it;
        default is ``cells_per_subdomain_side // 4``, the offset that
        reproduces the reference channel eigenvalues (see README).
    broken:
        for ``string``: use the three-piece variant instead of the
        connected one.
    """

    variant: str
    high_value: float = 1.0e6
    low_value: float = 1.0
    extra_value: float = 1.0e12
    channels: int = 0
    channel_offset: int | None = None
    broken: bool = False

    _VARIANTS = (
        "constant",
        "channel",
        "comb",
        "string",
        "inclusion_grid",
        "dual_stripe",
        "added_channels",
    )

    def __post_init__(self):
        if self.variant not in self._VARIANTS:
            raise InvalidParameterError(
                f"unknown pattern variant {self.variant!r}; expected one of {self._VARIANTS}"
            )
        if self.high_value <= 0 or self.low_value <= 0 or self.extra_value <= 0:
            raise InvalidParameterError("pattern values must be strictly positive")

    @property
    def tag(self) -> str:
        parts = [self.variant]
        if self.variant != "constant":
            parts.append(f"hi={self.high_value:g}")
            parts.append(f"lo={self.low_value:g}")
        if self.variant == "added_channels":
            parts.append(f"extra={self.extra_value:g}x{self.channels}")
        if self.variant == "string" and self.broken:
            parts.append("broken")
        return ",".join(parts)


def build_mesh(subdomains_per_side: int, cells_per_subdomain_side: int) -> StructuredMesh:
    """Build the structured triangulation.

    Node, element and boundary layouts are documented on
    :class:`StructuredMesh`.  Raises :class:`InvalidParameterError` for
    non-positive sizes.
    """
    sps = int(subdomains_per_side)
    cps = int(cells_per_subdomain_side)
    if sps < 1 or cps < 1:
        raise InvalidParameterError(
            f"mesh sizes must be >= 1, got subdomains_per_side={subdomains_per_side}, "
            f"cells_per_subdomain_side={cells_per_subdomain_side}"
        )
    n = sps * cps
    coords = np.arange(n + 1, dtype=float) / n
    xs, ys = np.meshgrid(coords, coords, indexing="xy")
    nodes = np.column_stack([xs.ravel(), ys.ravel()])

    cx, cy = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    cx = cx.ravel()
    cy = cy.ravel()
    ll = cy * (n + 1) + cx
    lr = ll + 1
    ul = ll + (n + 1)
    ur = ul + 1
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    elements = np.empty((2 * n * n, 3), dtype=np.int64)
    elements[0::2] = lower
    elements[1::2] = upper

    ix = np.tile(np.arange(n + 1), n + 1)
    iy = np.repeat(np.arange(n + 1), n + 1)
    dirichlet = (ix == 0) | (ix == n) | (iy == 0) | (iy == n)

    return StructuredMesh(sps, cps, nodes, elements, dirichlet)


# ---------------------------------------------------------------------------
# Pattern generators.  Each returns an (n, n) array of per-cell values
# indexed [cy, cx]; rho assigns every cell value to both of its triangles.
# ---------------------------------------------------------------------------


def _constant_cells(mesh, spec):
    n = mesh.cells_per_side
    return np.full((n, n), spec.low_value)


def _channel_cells(mesh, spec):
    """One h-wide horizontal high band crossing the whole domain.

    The band sits ``channel_offset`` cell rows above the horizontal
    subdomain interface at y = 1/2 (offset H/4 by default).
    """
    sps = mesh.subdomains_per_side
    m = mesh.cells_per_subdomain_side
    offset = spec.channel_offset if spec.channel_offset is not None else m // 4
    if sps < 2 or sps % 2 != 0:
        raise InvalidParameterError(
            f"channel pattern needs an even subdomain count per side >= 2, got {sps}"
        )
    if spec.channel_offset is None and m % 4 != 0:
        raise InvalidParameterError(
            f"channel pattern needs cells_per_subdomain_side divisible by 4 for the "
            f"default H/4 offset, got {m}"
        )
    if not (0 <= offset < m):
        raise InvalidParameterError(
            f"channel offset {offset} outside the subdomain row (0..{m - 1})"
        )
    cells = _constant_cells(mesh, spec)
    row = (sps // 2) * m + offset
    cells[row, :] = spec.high_value
    return cells


def _inclusion_channel_slices(m):
    """Cell-row slices of the two low channels splitting a subdomain into 3 bands.

    The motif is geometrically fixed (subdomain-similar): on the unit
    8-cell layout the channels occupy rows 2 and 5, so at resolution m the
    channel width is m/8 cells (H/8) and the three high bands are m/4
    wide.  Requires m divisible by 8.
    """
    if m % 8 != 0:
        raise InvalidParameterError(
            f"inclusion grid needs cells_per_subdomain_side divisible by 8, got {m}"
        )
    f = m // 8
    return slice(2 * f, 3 * f), slice(5 * f, 6 * f)


def _paint_inclusion_subdomain(cells, sx, sy, m, spec, touch_boundary=True):
    """Fill one subdomain with the 9-inclusion motif.

    High background, two horizontal plus two vertical low channels of
    width H/8.  With ``touch_boundary=False`` the channels stop one
    channel-width short of the subdomain boundary, so the high region
    stays connected.
    """
    r0, r1 = _inclusion_channel_slices(m)
    x0, y0 = sx * m, sy * m
    block = np.full((m, m), spec.high_value)
    f = m // 8
    lo, hi = (0, m) if touch_boundary else (f, m - f)
    block[r0, lo:hi] = spec.low_value
    block[r1, lo:hi] = spec.low_value
    block[lo:hi, r0] = spec.low_value
    block[lo:hi, r1] = spec.low_value
    cells[y0:y0 + m, x0:x0 + m] = block


def _inclusion_grid_cells(mesh, spec):
    """Fig.-5 style field: every subdomain carries the 9-inclusion motif."""
    m = mesh.cells_per_subdomain_side
    _inclusion_channel_slices(m)
    cells = _constant_cells(mesh, spec)
    for sy in range(mesh.subdomains_per_side):
        for sx in range(mesh.subdomains_per_side):
            _paint_inclusion_subdomain(cells, sx, sy, m, spec)
    return cells


def _dual_stripe_cells(mesh, spec):
    """Two special floating subdomains touching the domain center node.

    The below-left one gets the inclusion motif with channels that do not
    reach its boundary (one high island), the above-right one the full
    motif (eight boundary-touching islands); the rest of the domain is low.
    """
    sps = mesh.subdomains_per_side
    m = mesh.cells_per_subdomain_side
    if sps < 4 or sps % 2 != 0:
        raise InvalidParameterError(
            f"dual_stripe needs an even subdomain count per side >= 4, got {sps}"
        )
    _inclusion_channel_slices(m)
    cells = _constant_cells(mesh, spec)
    c = sps // 2
    _paint_inclusion_subdomain(cells, c - 1, c - 1, m, spec, touch_boundary=False)
    _paint_inclusion_subdomain(cells, c, c, m, spec, touch_boundary=True)
    return cells


def _added_channels_cells(mesh, spec):
    """Inclusion grid plus n extra full-width channels at extra_value.

    Channels are h wide and live in distinct subdomain rows (middle
    outward) at the same offset as the Fig.-4 channel.
    """
    sps = mesh.subdomains_per_side
    m = mesh.cells_per_subdomain_side
    if not (0 <= spec.channels <= 4):
        raise InvalidParameterError(f"added_channels supports 0..4 channels, got {spec.channels}")
    if spec.channels > sps:
        raise InvalidParameterError(
            f"{spec.channels} channels need at least that many subdomain rows, got {sps}"
        )
    cells = _inclusion_grid_cells(mesh, spec)
    # default offset: through the middle of the central inclusion band
    offset = spec.channel_offset if spec.channel_offset is not None else m // 2
    order = []
    lo, hi = sps // 2, sps // 2 - 1
    while len(order) < sps:
        if lo < sps:
            order.append(lo)
            lo += 1
        if hi >= 0 and len(order) < sps:
            order.append(hi)
            hi -= 1
    for srow in order[: spec.channels]:
        cells[srow * m + offset, :] = spec.extra_value
    return cells


# Comb motif (Fig.-2 style), frozen at its native resolution: 2x2 subdomains
# of 16x16 cells.  The comb body (spine on the left boundary, a double tooth
# and a crossing tooth) lives in the upper-left subdomain and pokes into the
# upper-right one; a bar hugging the interface inside the upper-right
# subdomain and a short detached bar in the upper-left complete the two and
# one interface-touching islands of the reference spectra.  Calibrated with
# scripts/calibrate_patterns.py; entries are (cx, cy) cells painted high.
_COMB_CELLS = (
    [(0, cy) for cy in range(16, 30)]                      # spine, touches x=0
    + [(cx, cy) for cx in range(1, 16) for cy in (22, 23)]  # double tooth in #2
    + [(cx, 28) for cx in range(1, 18)]                     # tooth crossing x=1/2
    + [(16, cy) for cy in range(16, 26)]                    # bar along the interface in #1
    + [(9, 16), (10, 16)]                                   # detached bar in #2
)


def _comb_rho(mesh, spec):
    if mesh.subdomains_per_side != 2 or mesh.cells_per_subdomain_side != 16:
        raise InvalidParameterError(
            "comb pattern is defined on 2 subdomains per side with 16 cells each "
            f"(got {mesh.subdomains_per_side} and {mesh.cells_per_subdomain_side})"
        )
    n = mesh.cells_per_side
    rho = np.full(mesh.n_elements, spec.low_value)
    for cx, cy in _COMB_CELLS:
        c = cy * n + cx
        rho[2 * c] = rho[2 * c + 1] = spec.high_value
    return rho


# String motif (Fig.-3 style) on an 8x8-cell floating subdomain, local cell
# coordinates with triangle selectors ('both'/'lower'/'upper').  Connected
# variant: a full-width horizontal bar plus a vertical arm reaching the top
# (one island touching the interface on three sides).  Broken variant: three
# separate pieces, each touching one side through a single-node triangle
# contact.  Calibrated with scripts/calibrate_patterns.py.
_STRING_CONNECTED = (
    [(cx, 2, "both") for cx in range(8)]
    + [(2, cy, "both") for cy in range(3, 8)]
)
_STRING_BROKEN = (
    [(0, 2, "lower"), (1, 2, "both"), (2, 2, "both")]
    + [(4, 2, "both"), (5, 2, "both"), (6, 2, "both"), (7, 2, "upper")]
    + [(4, 4, "both"), (4, 5, "both"), (4, 6, "both"), (4, 7, "lower")]
)


def _string_rho(mesh, spec):
    sps = mesh.subdomains_per_side
    m = mesh.cells_per_subdomain_side
    if m != 8 or sps < 3:
        raise InvalidParameterError(
            "string pattern is defined on 8 cells per subdomain side inside a mesh "
            f"with at least 3 subdomains per side (got {m} and {sps})"
        )
    n = mesh.cells_per_side
    rho = np.full(mesh.n_elements, spec.low_value)
    x0 = y0 = (sps // 2) * m
    motif = _STRING_BROKEN if spec.broken else _STRING_CONNECTED
    for cx, cy, which in motif:
        c = (y0 + cy) * n + (x0 + cx)
        if which in ("both", "lower"):
            rho[2 * c] = spec.high_value
        if which in ("both", "upper"):
            rho[2 * c + 1] = spec.high_value
    return rho


_CELL_GENERATORS = {
    "constant": _constant_cells,
    "channel": _channel_cells,
    "inclusion_grid": _inclusion_grid_cells,
    "dual_stripe": _dual_stripe_cells,
    "added_channels": _added_channels_cells,
}
_ELEMENT_GENERATORS = {
    "comb": _comb_rho,
    "string": _string_rho,
}


def generate_coefficients(mesh: StructuredMesh, spec: PatternSpec) -> CoefficientField:
    """Generate the per-element coefficient field for a named pattern.

    Pure function of (mesh, spec); incompatible geometry raises
    :class:`InvalidParameterError` naming the violated constraint.
    """
    if spec.variant in _ELEMENT_GENERATORS:
        rho = _ELEMENT_GENERATORS[spec.variant](mesh, spec)
    else:
        cells = _CELL_GENERATORS[spec.variant](mesh, spec)
        rho = np.repeat(cells.ravel(), 2)
    return CoefficientField(rho=rho, pattern_tag=spec.tag)


def load_coefficient_grid(stream, mesh: StructuredMesh) -> CoefficientField:
    """Read a comma-separated raster of per-grid-square coefficients.

    The raster must be ``cells_per_side`` rows of ``cells_per_side``
    comma-separated positive numbers, top row first; each value is assigned
    to both triangles of its grid square.  ``stream`` is a text file object
    or a string.
    """
    if isinstance(stream, str):
        text = stream
    else:
        text = stream.read()
    n = mesh.cells_per_side
    rows = [line for line in text.splitlines() if line.strip()]
    if len(rows) != n:
        raise RasterFormatError(f"expected {n} raster rows, got {len(rows)}")
    cells = np.empty((n, n))
    for file_row, line in enumerate(rows):
        parts = line.split(",")
        if len(parts) != n:
            raise RasterFormatError(
                f"raster row {file_row} has {len(parts)} values, expected {n}"
            )
        try:
            values = np.array([float(p) for p in parts])
        except ValueError as exc:
            raise RasterFormatError(f"raster row {file_row}: {exc}") from exc
        cells[n - 1 - file_row, :] = values
    if np.any(cells <= 0.0):
        bad = np.argwhere(cells <= 0.0)[0]
        raise InvalidParameterError(
            f"raster value at cell (cx={bad[1]}, cy={bad[0]}) is not positive"
        )
    rho = np.repeat(cells.ravel(), 2)
    return CoefficientField(rho=rho, pattern_tag="raster")
