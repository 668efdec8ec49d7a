import io

import numpy as np
import pytest

from nosas import (
    InvalidParameterError,
    PatternSpec,
    RasterFormatError,
    build_mesh,
    generate_coefficients,
    load_coefficient_grid,
)


def signed_areas(mesh):
    pts = mesh.nodes[mesh.elements]
    x, y = pts[..., 0], pts[..., 1]
    return 0.5 * ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
                  - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))


def test_smallest_mesh():
    mesh = build_mesh(1, 1)
    assert mesh.n_nodes == 4
    assert mesh.n_elements == 2
    assert mesh.dirichlet.all()


def test_two_by_two_counts():
    mesh = build_mesh(2, 2)
    assert mesh.n_nodes == 25
    assert mesh.n_elements == 32
    assert int((~mesh.dirichlet).sum()) == 9
    assert int(mesh.dirichlet.sum()) == 16


def test_closed_form_counts():
    mesh = build_mesh(4, 8)
    assert mesh.n_nodes == (4 * 8 + 1) ** 2 == 1089
    assert mesh.n_elements == 2 * 32 ** 2 == 2048


@pytest.mark.parametrize("sps,cps", [(0, 1), (1, 0), (-1, 2)])
def test_invalid_sizes(sps, cps):
    with pytest.raises(InvalidParameterError):
        build_mesh(sps, cps)


def test_uniform_positive_areas():
    mesh = build_mesh(3, 4)
    areas = signed_areas(mesh)
    assert np.allclose(areas, mesh.h ** 2 / 2.0)


def test_node_lattice_spacing():
    mesh = build_mesh(2, 3)
    # total nodes = (sps*cps + 1)^2 on the h-lattice
    n = mesh.cells_per_side
    assert mesh.n_nodes == (n + 1) ** 2
    xs = np.unique(mesh.nodes[:, 0])
    assert np.allclose(np.diff(xs), mesh.h)


def test_generation_is_deterministic():
    mesh = build_mesh(4, 8)
    spec = PatternSpec(variant="inclusion_grid")
    a = generate_coefficients(mesh, spec)
    b = generate_coefficients(mesh, spec)
    assert np.array_equal(a.rho, b.rho)
    assert a.pattern_tag == b.pattern_tag


def test_constant_pattern():
    mesh = build_mesh(2, 2)
    field = generate_coefficients(mesh, PatternSpec(variant="constant", low_value=1.0))
    assert np.all(field.rho == 1.0)


def test_channel_is_one_cell_row():
    mesh = build_mesh(4, 8)
    field = generate_coefficients(mesh, PatternSpec(variant="channel"))
    n = mesh.cells_per_side
    cells = field.rho[0::2].reshape(n, n)
    high_rows = np.flatnonzero((cells == 1e6).any(axis=1))
    assert high_rows.tolist() == [2 * 8 + 8 // 4]
    assert np.all(cells[high_rows[0]] == 1e6)
    # both triangles of every high cell carry the value
    assert np.array_equal(field.rho[0::2], field.rho[1::2])


def test_channel_requires_even_subdomains():
    with pytest.raises(InvalidParameterError):
        generate_coefficients(build_mesh(3, 8), PatternSpec(variant="channel"))


def test_channel_offset_must_fit():
    with pytest.raises(InvalidParameterError):
        generate_coefficients(build_mesh(4, 8),
                              PatternSpec(variant="channel", channel_offset=8))


def test_inclusion_grid_needs_divisible_cells():
    with pytest.raises(InvalidParameterError):
        generate_coefficients(build_mesh(4, 12), PatternSpec(variant="inclusion_grid"))


def test_inclusion_grid_channel_fraction():
    # geometric similarity: the low fraction of a subdomain is the same at
    # every resolution (4 channels of width m/8 minus overlaps)
    fractions = []
    for m in (8, 16, 32):
        mesh = build_mesh(2, m)
        field = generate_coefficients(mesh, PatternSpec(variant="inclusion_grid"))
        fractions.append(np.mean(field.rho == 1.0))
    assert fractions[0] == fractions[1] == fractions[2]


def test_comb_requires_native_resolution():
    with pytest.raises(InvalidParameterError):
        generate_coefficients(build_mesh(2, 8), PatternSpec(variant="comb"))


def test_string_requires_native_resolution():
    with pytest.raises(InvalidParameterError):
        generate_coefficients(build_mesh(2, 8), PatternSpec(variant="string"))


def test_dual_stripe_needs_even_grid():
    with pytest.raises(InvalidParameterError):
        generate_coefficients(build_mesh(3, 8), PatternSpec(variant="dual_stripe"))


def test_added_channels_count_range():
    with pytest.raises(InvalidParameterError):
        generate_coefficients(build_mesh(4, 16),
                              PatternSpec(variant="added_channels", channels=5))


def test_raster_constant():
    mesh = build_mesh(1, 2)
    field = load_coefficient_grid("1,1\n1,1\n", mesh)
    assert np.all(field.rho == 1.0)


def test_raster_single_high_cell_maps_to_two_elements():
    mesh = build_mesh(1, 2)
    field = load_coefficient_grid("1,1\n1e6,1\n", mesh)
    assert int((field.rho == 1e6).sum()) == 2
    # bottom-left cell: file rows are top-down
    assert field.rho[0] == 1e6 and field.rho[1] == 1e6


def test_raster_orientation_top_row_first():
    mesh = build_mesh(1, 2)
    field = load_coefficient_grid("9,1\n1,1\n", mesh)
    n = mesh.cells_per_side
    cells = field.rho[0::2].reshape(n, n)
    assert cells[1, 0] == 9.0  # top-left of the domain


def test_raster_malformed_row_reports_index():
    mesh = build_mesh(1, 2)
    with pytest.raises(RasterFormatError, match="row 1"):
        load_coefficient_grid("1,1\n1,1,1\n", mesh)


def test_raster_wrong_row_count():
    mesh = build_mesh(1, 2)
    with pytest.raises(RasterFormatError, match="rows"):
        load_coefficient_grid("1,1\n", mesh)


def test_raster_nonpositive_value():
    mesh = build_mesh(1, 2)
    with pytest.raises(InvalidParameterError, match="positive"):
        load_coefficient_grid(io.StringIO("1,1\n0,1\n"), mesh)


def test_coefficients_must_be_positive():
    from nosas import CoefficientField
    with pytest.raises(InvalidParameterError):
        CoefficientField(rho=np.array([1.0, -1.0]), pattern_tag="bad")
