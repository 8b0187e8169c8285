"""Unit tests for matrix fields, bounds, membership, and certificates."""

from fractions import Fraction

import numpy as np
import pytest

from zakbench.gabor_analysis import (
    HGrid,
    RankDeficiencyError,
    RationalLattice,
    coefficients_from_h,
    divisibility_certificate,
    dual_field,
    h_product_check,
    invariance_test,
    reconstruct_from_coefficients,
    riesz_bounds,
    winding_numbers,
    zz_field,
)
from zakbench.zak_core import PhaseError, TimeFrequencyShift, zak, zak_lookup
from zakbench.constructions import standard_window

F = Fraction


def test_lattice_validation_and_density():
    lat = RationalLattice(2, 3)
    assert str(lat) == "(1/2)Z x 3Z"
    assert lat.density == F(2, 3)
    with pytest.raises(ValueError):
        RationalLattice(2, 4)  # not coprime
    with pytest.raises(ValueError):
        RationalLattice(0, 3)


def test_zz_entries_match_zak_lookups(displayed_grid):
    lat = RationalLattice(2, 3)
    field = zz_field(displayed_grid, lat)
    assert field.matrices.shape == (240, 64, 2, 3)
    rng = np.random.default_rng(7)
    for _ in range(20):
        j = int(rng.integers(0, 240))
        m = int(rng.integers(0, 64))
        qi = int(rng.integers(0, 2))
        pi = int(rng.integers(0, 3))
        x = F(j, 720) - F(qi, 2) - F(pi, 3)
        want = zak_lookup(displayed_grid, x, F(m, 64))
        got = complex(field.matrices[j, m, qi, pi])
        assert got == pytest.approx(want, abs=1e-13)


def test_zz_rejects_misaligned_resolution(displayed):
    g = zak(displayed, 64)
    with pytest.raises(Exception) as err:
        zz_field(g, RationalLattice(7, 2))
    assert "divisible" in str(err.value)


def test_riesz_bounds_indicator_integer_lattice(chi_grid):
    b = riesz_bounds(zz_field(chi_grid, RationalLattice(1, 1)))
    assert b.lower == pytest.approx(1.0, abs=1e-12)
    assert b.upper == pytest.approx(1.0, abs=1e-12)
    assert b.rank_margin == pytest.approx(1.0, abs=1e-12)


def test_riesz_bounds_on_q1_match_row_sums(displayed_grid):
    # Q=1: squared singular value is just the row norm of the 1xP matrix.
    field = zz_field(displayed_grid, RationalLattice(1, 3))
    b = riesz_bounds(field)
    rows = np.sum(np.abs(field.matrices) ** 2, axis=(2, 3))
    assert b.lower == pytest.approx(float(rows.min()), rel=1e-12)
    assert b.upper == pytest.approx(float(rows.max()), rel=1e-12)


def test_riesz_bounds_oversampled_lattice_has_zero_lower():
    w = standard_window("gaussian", 144)
    g = zak(w, 18)
    b = riesz_bounds(zz_field(g, RationalLattice(3, 2)))  # density 3/2 > 1
    assert b.lower == 0.0
    assert b.upper > 0.0


def test_bounds_monotone_when_time_step_refines(gaussian):
    g = zak(gaussian, 64)
    b1 = riesz_bounds(zz_field(g, RationalLattice(1, 3)))
    b2 = riesz_bounds(zz_field(g, RationalLattice(2, 3)))
    # Halving the time step adds vectors: the span only grows, so the
    # extremal Gram eigenvalues widen.
    assert b2.upper >= b1.upper - 1e-12
    assert b2.lower <= b1.lower + 1e-12


def test_dual_field_reproduces_identity():
    w = standard_window("gaussian", 360)
    g = zak(w, 48)
    field = zz_field(g, RationalLattice(2, 3))
    dual = dual_field(field)
    prod = np.einsum("xwqp,xwrp->xwqr", field.matrices, dual.matrices.conj())
    eye = np.eye(2)
    assert np.max(np.abs(prod - eye)) <= 1e-10
    assert dual.kind == "dual"


def test_dual_field_stable_under_grid_refinement():
    lat = RationalLattice(2, 3)
    coarse = dual_field(zz_field(zak(standard_window("gaussian", 360), 48), lat))
    fine = dual_field(zz_field(zak(standard_window("gaussian", 720), 96), lat))
    assert np.max(np.abs(fine.matrices[::2, ::2] - coarse.matrices)) <= 1e-10


def test_dual_field_rejects_rank_deficient():
    w = standard_window("gaussian", 144)
    g = zak(w, 18)
    with pytest.raises(RankDeficiencyError):
        dual_field(zz_field(g, RationalLattice(3, 2)))


def test_membership_accepts_lattice_shift(chi_grid):
    rep = invariance_test(chi_grid, RationalLattice(1, 3),
                          TimeFrequencyShift(F(1), F(0)))
    assert rep.residual <= 1e-12
    assert rep.decision
    h = rep.multipliers[0].values
    # Multiplier of the unit time shift is the quasiperiodic turn in omega:
    # Zf(x - 1, omega) = exp(-2j pi omega) Zf(x, omega).
    target = np.exp(-2j * np.pi * np.arange(64) / 64)[None, :]
    assert np.max(np.abs(h - target)) <= 1e-12


def test_membership_invariant_under_window_scaling(displayed_grid, displayed):
    from zakbench.zak_core import SampledWindow

    lat = RationalLattice(1, 3)
    s = TimeFrequencyShift(F(1, 2), F(0))
    base = invariance_test(displayed_grid, lat, s).residual
    scaled = SampledWindow(displayed.sample_rate, displayed.start_index,
                           (1.7 + 0.3j) * displayed.samples, "scaled")
    rep = invariance_test(zak(scaled, 64), lat, s)
    assert rep.residual == pytest.approx(base, rel=1e-12)


def test_membership_residual_bounded_by_one_for_q1(displayed_grid):
    rep = invariance_test(displayed_grid, RationalLattice(1, 3),
                          TimeFrequencyShift(F(1, 2), F(0)))
    assert 0.0 <= rep.residual <= 1.0 + 1e-12
    assert rep.residual == pytest.approx(4 / 9, abs=1e-12)
    assert not rep.decision


def test_membership_shift_must_align(displayed_grid):
    from zakbench.zak_core import GridAlignmentError

    with pytest.raises(GridAlignmentError):
        invariance_test(displayed_grid, RationalLattice(1, 3),
                        TimeFrequencyShift(F(1, 7), F(0)))


def test_h_product_check_exponential():
    h = HGrid.from_function(
        lambda x, om: np.exp(2j * np.pi * (2 * float(x))), 1, 1, 48, 16
    )
    s = TimeFrequencyShift(F(1, 2), F(0))
    # prod over r of h(x + r/2) = exp(2j pi (4x + 1)) = exp(2j pi * 4x)
    assert h_product_check(h, 2, s, 4, 0, 1) <= 1e-12
    assert h_product_check(h, 2, s, 4, 0, -1) > 0.5


def test_winding_numbers_pure_modes():
    h = HGrid.from_function(
        lambda x, om: np.exp(2j * np.pi * (3 * float(x) - 2 * float(om))),
        1, 1, 64, 32,
    )
    assert winding_numbers(h) == (-3, 2)


def test_winding_rejects_zero_crossing():
    h = HGrid.from_function(lambda x, om: np.cos(2 * np.pi * float(x)),
                            1, 1, 64, 16)
    with pytest.raises(PhaseError, match="zero crossing"):
        winding_numbers(h)


def test_winding_rejects_aliased_phase():
    # 30 turns on 64 points: adjacent phase steps approach pi.
    h = HGrid.from_function(
        lambda x, om: np.exp(2j * np.pi * (30 * float(x))), 1, 1, 64, 8
    )
    with pytest.raises(PhaseError, match="phase aliasing"):
        winding_numbers(h)


def test_divisibility_certificate_consistent_instance():
    # h(x, om) = exp(2j pi (p1 x + 2 p2 om)) with shift (1/p1, 1/p2): the
    # R-fold product is exp(2j pi (R p1 x + 2 R p2 om)) and the cell
    # windings are (-1, -2), so both residues vanish with sign +1.
    p1, p2, r = 3, 2, 6
    h = HGrid.from_function(
        lambda x, om: np.exp(2j * np.pi * (p1 * float(x) + 2 * p2 * float(om))),
        p1, p2, 30, 24,
    )
    s = TimeFrequencyShift(F(1, p1), F(1, p2))
    cert = divisibility_certificate(h, r, s, r * p1, 2 * r * p2, 1,
                                    product_tol=1e-8)
    assert cert.product_ok
    assert cert.q1 == -1 and cert.q2 == -2
    assert cert.identities_ok
    assert cert.passed


def test_divisibility_certificate_detects_tampered_m():
    p1, p2, r = 3, 2, 6
    h = HGrid.from_function(
        lambda x, om: np.exp(2j * np.pi * (p1 * float(x) + 2 * p2 * float(om))),
        p1, p2, 30, 24,
    )
    s = TimeFrequencyShift(F(1, p1), F(1, p2))
    cert = divisibility_certificate(h, r, s, r * p1 + 1, 2 * r * p2, 1,
                                    product_tol=1e-8)
    assert not cert.passed


def test_coefficient_table_band_limited_round_trip():
    def h_fn(x, om):
        return (2.0 + 0.5 * np.exp(2j * np.pi * 3 * float(x))
                + 0.25 * np.exp(-2j * np.pi * float(om)))

    h = HGrid.from_function(h_fn, 1, 1, 48, 32)
    table = coefficients_from_h(h, 6, 6)
    assert table.coefficient(0, 0) == pytest.approx(2.0, abs=1e-12)
    assert table.coefficient(3, 0) == pytest.approx(0.5, abs=1e-12)
    assert table.coefficient(0, -1) == pytest.approx(0.25, abs=1e-12)
    rec = reconstruct_from_coefficients(table, 48, 32)
    assert np.max(np.abs(rec - h.values)) <= 1e-10
    assert not table.aliasing_warning
    assert table.partial_l1[-1] == pytest.approx(2.75, abs=1e-12)


def test_coefficient_table_flags_undersampling():
    h = HGrid.from_function(lambda x, om: float(x), 1, 1, 16, 16)
    from zakbench.zak_core import ResolutionError

    with pytest.raises(ResolutionError):
        coefficients_from_h(h, 8, 2)
    table = coefficients_from_h(h, 7, 7)
    assert table.aliasing_warning  # sawtooth spectrum is not band-limited


def test_perturbed_multiplier_breaks_product(corrected):
    _, hstar = corrected
    bad = HGrid(hstar.p1, hstar.p2, hstar.values + 0.1, "perturbed")
    s = TimeFrequencyShift(F(1, 2), F(0))
    good = h_product_check(hstar, 2, s, 0, 1, -1)
    assert good <= 1e-12
    assert h_product_check(bad, 2, s, 0, 1, -1) >= 0.05
