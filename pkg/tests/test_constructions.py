"""Unit tests for window realization, constructions, and oracles."""

import math
from fractions import Fraction

import pytest

from zakbench.constructions import (
    SQPSpec,
    WindowSpec,
    boundary_smoothness_defect,
    bspline_value,
    construct_from_sqp,
    dilate_normalize,
    example1_corrected_sqp_spec,
    example1_window,
    example2_sqp_spec,
    example2_window,
    indicator_spec,
    measured_support,
    membership_residual_oracle,
    piecewise_window,
    realize,
    sqp_check,
    standard_window,
    trivial_sqp_spec,
)
from zakbench.gabor_analysis import RationalLattice, invariance_test, riesz_bounds, zz_field
from zakbench.zak_core import GridAlignmentError, TimeFrequencyShift, same_signal, zak

F = Fraction


def sample_at(w, x):
    j = F(x) * w.sample_rate
    assert j.denominator == 1
    i = int(j) - w.start_index
    if 0 <= i < len(w):
        return complex(w.samples[i])
    return 0j


def test_displayed_window_point_values(displayed):
    assert sample_at(displayed, F(1, 10)) == 2.0
    assert sample_at(displayed, F(-3, 4)) == 0.5
    assert sample_at(displayed, F(5, 12)) == 2.0
    assert sample_at(displayed, F(3, 4)) == 1.0
    assert sample_at(displayed, 2) == 0.0
    assert sample_at(displayed, F(1, 4)) == 0.0  # gap between cells
    assert displayed.exact_energy == F(15, 8)


def test_corrected_window_point_values(corrected):
    w, _ = corrected
    assert sample_at(w, F(1, 4)) == 2.0
    assert sample_at(w, F(3, 4)) == 1.0
    assert sample_at(w, F(13, 12)) == 0.5
    assert sample_at(w, F(17, 12)) == 0.5
    assert sample_at(w, F(1, 12)) == 0.0
    assert w.exact_energy == F(5, 4)


def test_piecewise_breakpoints_must_align():
    from zakbench.zak_core import ResolutionError

    with pytest.raises(ResolutionError, match="6"):
        example1_window(721)


def test_piecewise_overlapping_pieces_add():
    w = piecewise_window(((F(0), F(1), 1), (F(1, 2), F(1), 1)), 8, "steps")
    assert sample_at(w, F(1, 4)) == 1.0
    assert sample_at(w, F(3, 4)) == 2.0


@pytest.mark.parametrize("x,val", [
    (F(0), F(0)), (F(1, 2), F(1, 2)), (F(1), F(1)),
    (F(3, 2), F(1, 2)), (F(2), F(0)),
])
def test_bspline_hat_values(x, val):
    assert bspline_value(2, x) == val


def test_bspline_order_three_partition_of_unity():
    for x in (F(1, 4), F(7, 8), F(3, 2)):
        total = sum(bspline_value(3, x + k) for k in range(-3, 4))
        assert total == 1


def test_gaussian_normalized_energy():
    w = standard_window("gaussian", 720, normalized=True)
    assert w.energy == pytest.approx(1.0, rel=1e-12)


def test_gaussian_tail_below_cutoff():
    w = standard_window("gaussian", 48)
    assert w.tail_bound > 0
    assert w.tail_bound < 1e-80
    edge = abs(w.samples[0])
    assert edge == pytest.approx(math.exp(-math.pi * 64), rel=1e-9)


def test_dilation_preserves_energy_and_support():
    spec = indicator_spec(F(0), F(1), 60)
    for a in (F(1, 2), F(1, 3), F(2)):
        w = realize(WindowSpec(**{**spec.__dict__, "dilation": a}))
        assert w.energy == pytest.approx(1.0, rel=1e-12)
        lo, hi = measured_support(w)
        assert lo == 0 and hi == a


def test_dilate_normalize_reduces_lattice():
    spec = indicator_spec(F(0), F(1), 120)
    dspec, lat = dilate_normalize(spec, F(1, 2), F(1, 2))
    assert (lat.q, lat.p) == (4, 1)
    assert dspec.dilation == F(1, 2)
    w = realize(dspec)
    b = riesz_bounds(zz_field(zak(w, 16), lat))
    # Four half-supported bumps overlap in pairs: upper bound 4, and the
    # four vectors in a one-dimensional fiber are dependent, so lower is 0.
    assert b.upper == pytest.approx(4.0, abs=1e-12)
    assert b.lower == 0.0


def test_dilate_normalize_rejects_nonpositive_steps():
    spec = indicator_spec(F(0), F(1), 48)
    with pytest.raises(Exception):
        dilate_normalize(spec, F(0), F(1, 2))
    with pytest.raises(Exception):
        dilate_normalize(spec, F(1, 2), F(-3, 2))


def test_trivial_sqp_builds_indicator():
    spec = trivial_sqp_spec()
    grid, w, h = construct_from_sqp(spec, 144, 16)
    assert same_signal(w, standard_window("indicator", 144))
    d = sqp_check(grid, h, spec.r, spec.p, spec.sign)
    assert d.shift_defect == 0.0
    assert d.periodicity_defect == 0.0
    assert d.product_defect == pytest.approx(2.0, abs=1e-12)


def test_corrected_sqp_reproduces_exact_window(corrected):
    spec = example1_corrected_sqp_spec()
    grid, w, h = construct_from_sqp(spec, 720, 64)
    assert same_signal(w, corrected[0], tol=1e-15)
    d = sqp_check(grid, h, spec.r, spec.p, spec.sign)
    assert d.shift_defect == 0.0
    assert d.product_defect == 0.0
    assert d.periodicity_defect == 0.0


def test_example2_window_matches_sqp_route(smooth):
    grid, w, h = smooth
    w2, u, v = example2_window(0.3, 720, 64)
    assert same_signal(w, w2)
    assert u(0.0) == pytest.approx(1.0)
    assert u(0.25) == pytest.approx(math.exp(0.3 * math.sin(1.5 * math.pi)))
    assert v(0.5) == 0.0 and v(1.0) == 0.0
    assert v(0.75) == pytest.approx(math.exp(-16.0), rel=1e-12)


def test_example2_rejects_bad_eps():
    with pytest.raises(ValueError):
        example2_sqp_spec(0.0)
    with pytest.raises(ValueError):
        example2_sqp_spec(0.8)  # exceeds ln 2


def test_example2_support_and_sign_mirror():
    _, wm, _ = construct_from_sqp(example2_sqp_spec(0.3, -1), 720, 64)
    lo, hi = measured_support(wm)
    assert F(1, 2) <= lo < hi <= F(3, 2)
    # The opposite sign sends the modulated strip to the k=-1 translate:
    # support splits across [-1,-1/2] and [1/2,1].
    _, wp, _ = construct_from_sqp(example2_sqp_spec(0.3, +1), 720, 64)
    lo_p, hi_p = measured_support(wp)
    assert F(-1) <= lo_p <= F(-1, 2)
    assert F(1, 2) <= hi_p <= F(1)


def test_smooth_window_boundary_smoothness():
    _, w, _ = construct_from_sqp(example2_sqp_spec(0.3), 2880, 64)
    defects = boundary_smoothness_defect(w, max_order=3)
    assert all(d <= 1e-6 for d in defects)


def test_discontinuous_window_boundary_defect_is_large(displayed):
    defects = boundary_smoothness_defect(displayed, max_order=1)
    assert defects[0] >= 0.4


def test_oracle_matches_pipeline_on_coarse_grid(chi_grid):
    lat = RationalLattice(1, 3)
    s = TimeFrequencyShift(F(0), F(3, 2))
    rep = invariance_test(chi_grid, lat, s)
    oracle = membership_residual_oracle(chi_grid, lat, s,
                                        nx_points=48, nw_points=16)
    assert abs(rep.residual - oracle) <= 1e-12


def test_oracle_requires_embedding_subgrid(chi_grid):
    lat = RationalLattice(1, 3)
    s = TimeFrequencyShift(F(1, 2), F(0))
    with pytest.raises(GridAlignmentError):
        membership_residual_oracle(chi_grid, lat, s, nx_points=36, nw_points=16)


def test_spec_json_round_trips():
    specs = [
        indicator_spec(F(-1, 2), F(1, 2), 60),
        WindowSpec("gaussian", 96, width=F(2, 3), normalized=True,
                   dilation=F(1, 2), label="g"),
        WindowSpec("bspline", 48, order=3),
        WindowSpec("example2", 720, eps=0.25, n_omega=32, sign=1),
    ]
    for spec in specs:
        assert WindowSpec.from_json(spec.to_json()) == spec


def test_raw_spec_json_round_trip():
    base = standard_window("bspline", 24, order=2)
    spec = WindowSpec("raw", 24, raw=base, label="wrapped")
    back = WindowSpec.from_json(spec.to_json())
    assert back.variant == "raw" and back.label == "wrapped"
    assert same_signal(back.raw, base)
    assert same_signal(realize(back), base)


def test_realize_rejects_fractional_base_rate():
    spec = WindowSpec("gaussian", 10, width=F(1), dilation=F(1, 3))
    with pytest.raises(Exception, match="rate"):
        realize(spec)


def test_sqp_spec_validation():
    from zakbench.zak_core import ZakError

    with pytest.raises(ZakError):
        SQPSpec(1, 3, lambda x, om: 1.0, lambda x, om: 1.0)  # R must be >= 2
    with pytest.raises(ZakError):
        trivial_sqp_spec(2, 2)  # R and P must be coprime
