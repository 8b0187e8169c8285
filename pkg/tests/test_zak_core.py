"""Unit tests for the transform layer: identities, round trips, moments."""

import math
import os
from fractions import Fraction

import numpy as np
import pytest

from zakbench.zak_core import (
    GridAlignmentError,
    ResolutionError,
    SampledWindow,
    TimeFrequencyShift,
    ZakError,
    dump_zak_csv,
    feichtinger_norm_estimate,
    same_signal,
    tf_shift,
    time_frequency_spread,
    validate_zak,
    zak,
    zak_invert,
    zak_lookup,
)
from zakbench.constructions import standard_window

F = Fraction


def test_indicator_zak_is_constant_one(chi, chi_grid):
    assert chi_grid.values.shape == (720, 64)
    assert np.array_equal(chi_grid.values, np.ones((720, 64), dtype=complex))
    assert chi_grid.k_min == chi_grid.k_max == 0


@pytest.mark.parametrize("x,n", [(F(1, 4), 1), (F(7, 10), 2), (F(1, 6), -1)])
def test_quasiperiodicity_in_x(displayed_grid, x, n):
    base = zak_lookup(displayed_grid, x, F(3, 64))
    moved = zak_lookup(displayed_grid, x + n, F(3, 64))
    phase = np.exp(2j * np.pi * n * 3 / 64)
    assert moved == pytest.approx(base * phase, abs=1e-15)


def test_periodicity_in_omega(displayed_grid):
    a = zak_lookup(displayed_grid, F(1, 8), F(5, 64))
    b = zak_lookup(displayed_grid, F(1, 8), F(5, 64) + 1)
    assert a == b


def test_displayed_zak_cell_values(displayed_grid):
    # Six cells of width 1/6; on the second cell the value is half a full
    # turn of omega, elsewhere it is constant.
    for m in range(8):
        om = F(m, 64)
        assert zak_lookup(displayed_grid, F(1, 12), om) == pytest.approx(2.0)
        assert zak_lookup(displayed_grid, F(3, 12), om) == pytest.approx(
            0.5 * np.exp(2j * np.pi * float(om)), abs=1e-15
        )
        assert zak_lookup(displayed_grid, F(5, 12), om) == pytest.approx(2.0)
        for cell in (7, 9, 11):
            assert zak_lookup(displayed_grid, F(cell, 12), om) == pytest.approx(1.0)


@pytest.mark.parametrize("kind,kwargs,n_omega", [
    ("indicator", {}, 16),
    ("bspline", {"order": 3}, 16),
    ("gaussian", {}, 18),
])
def test_inversion_round_trip(kind, kwargs, n_omega):
    w = standard_window(kind, 144, **kwargs)
    back = zak_invert(zak(w, n_omega))
    tol = 0.0 if w.exact is not None else 1e-14
    assert same_signal(w, back, tol=tol)


def test_validate_exact_window_is_exactly_zero(corrected, corrected_grid):
    d = validate_zak(corrected[0], corrected_grid,
                     TimeFrequencyShift(F(3, 4), F(5, 8)))
    assert d.exact
    assert d.unitarity_defect == 0.0
    assert d.covariance_defect == 0.0


def test_validate_float_window_near_zero(gaussian):
    g = zak(gaussian, 64)
    d = validate_zak(gaussian, g, TimeFrequencyShift(F(1, 3), F(1, 4)))
    assert not d.exact
    assert d.unitarity_defect <= 1e-12
    assert d.covariance_defect <= 1e-12


def test_shift_misaligned_with_grid_raises(chi, chi_grid):
    with pytest.raises(GridAlignmentError):
        validate_zak(chi, chi_grid, TimeFrequencyShift(F(1, 7), F(0)))
    with pytest.raises(GridAlignmentError):
        validate_zak(chi, chi_grid, TimeFrequencyShift(F(0), F(1, 5)))


def test_wide_support_needs_enough_omega_rows():
    w = standard_window("bspline", 48, order=3)  # support [0, 4)
    with pytest.raises(ResolutionError):
        zak(w, 2)


def test_tf_shift_composition_phase(gaussian):
    s1 = TimeFrequencyShift(F(1, 4), F(1, 3))
    s2 = TimeFrequencyShift(F(1, 2), F(1, 6))
    combined = TimeFrequencyShift(s1.u + s2.u, s1.eta + s2.eta)
    a = tf_shift(tf_shift(gaussian, s1), s2)
    b = tf_shift(gaussian, combined)
    phase = np.exp(-2j * np.pi * float(s1.eta * s2.u))
    assert a.start_index == b.start_index
    np.testing.assert_allclose(a.samples, phase * b.samples, atol=1e-15)


def test_tf_shift_preserves_energy_and_exact_layer(corrected):
    w = corrected[0]
    moved = tf_shift(w, TimeFrequencyShift(F(2, 3), F(5, 8)))
    assert moved.exact is not None
    assert moved.exact_energy == w.exact_energy
    assert moved.position(0) == w.position(0) + F(2, 3)


def test_zero_shift_is_identity(displayed):
    assert same_signal(displayed,
                       tf_shift(displayed, TimeFrequencyShift(F(0), F(0))))


def test_spread_of_indicator(chi):
    r = time_frequency_spread(chi, 0.5, 0.0, pad=8)
    assert r.time_spread == pytest.approx(1 / 12, abs=1e-6)
    assert r.product == pytest.approx(r.time_spread * r.frequency_spread)


def test_spread_pad_refinement_is_cauchy(chi):
    vals = [time_frequency_spread(chi, 0.5, 0.0, pad=p).frequency_spread
            for p in (2, 4, 8, 16)]
    diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    assert diffs[1] < diffs[0] and diffs[2] < diffs[1]
    assert diffs[2] / vals[-1] < 1e-6


def test_spread_rejects_bad_pad(chi):
    with pytest.raises(ZakError):
        time_frequency_spread(chi, 0.0, 0.0, pad=0)


def test_gaussian_spread_saturates_uncertainty(gaussian):
    r = time_frequency_spread(gaussian, 0.0, 0.0, pad=8)
    target = 1 / (16 * math.pi**2)
    assert r.product == pytest.approx(target, abs=1e-6)


def test_feichtinger_estimate_homogeneous(gaussian):
    base = feichtinger_norm_estimate(gaussian, 8.0, 16.0, 0.5)
    scaled = SampledWindow(gaussian.sample_rate, gaussian.start_index,
                           3.0 * gaussian.samples, "scaled")
    assert feichtinger_norm_estimate(scaled, 8.0, 16.0, 0.5) == pytest.approx(
        3 * base, rel=1e-12
    )


def test_feichtinger_estimate_time_range_saturates(gaussian):
    a = feichtinger_norm_estimate(gaussian, 8.0, 16.0, 0.5)
    b = feichtinger_norm_estimate(gaussian, 16.0, 16.0, 0.5)
    assert abs(b - a) / a < 1e-3


def test_csv_dump_format(tmp_path, chi):
    g = zak(standard_window("indicator", 6), 4)
    path = os.fspath(tmp_path / "grid.csv")
    dump_zak_csv(g, path)
    lines = open(path).read().splitlines()
    assert lines[0] == "x,omega,re,im"
    assert len(lines) == 1 + 6 * 4
    # x-major ordering with exact rational labels
    assert lines[1].startswith("0,0,")
    assert lines[2].startswith("0,1/4,")
    assert lines[5].startswith("1/6,0,")
    for line in lines[1:]:
        x, om, re, im = line.split(",")
        assert float(re) == 1.0 and float(im) == 0.0


def test_csv_values_round_trip_17_digits(tmp_path):
    g = zak(standard_window("gaussian", 48), 20)
    path = os.fspath(tmp_path / "g.csv")
    dump_zak_csv(g, path)
    lines = open(path).read().splitlines()[1:]
    parsed = np.array([complex(float(l.split(",")[2]), float(l.split(",")[3]))
                       for l in lines])
    assert np.array_equal(parsed, g.values.reshape(-1))


def test_window_sample_validation():
    with pytest.raises(ZakError):
        SampledWindow(0, 0, np.ones(4, dtype=complex), "bad rate")
    w = SampledWindow(4, -2, np.array([1.0, 2.0, 3.0], dtype=complex), "ok")
    assert w.position(0) == F(-1, 2)
    assert w.energy == pytest.approx((1 + 4 + 9) / 4)
