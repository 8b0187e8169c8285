"""Release acceptance checks, shared by the test suite and the CLI selftest.

Each ``criterion_*`` function bundles one themed battery of checks into a
:class:`CriterionResult`; :func:`run_all` executes the whole battery.  The
``quick`` level runs everything at the base resolution (N=720, 64 omega
points); ``full`` additionally doubles the sample rate where a criterion
makes a refinement-stability claim.

The checks pin down, at stated tolerances:

1.  Zak unitarity/covariance identities on five fixture windows (exactly
    zero for the piecewise-rational ones, which carry exact amplitudes).
2.  The six-cell displayed window's Riesz bounds (9/4, 9).
3.  The corrected six-cell window's shift membership: tiny residual,
    the recovered multiplier, and the structural (shift/product/period)
    defects.
4.  Agreement between the least-squares membership residual and the
    independent closed-form oracle on every fixture/shift pair, including
    the hand-derived residual 4/9 of the displayed window.
5.  Dilated-Gaussian behavior on the density-2/3 lattice: healthy lower
    Riesz bound, solidly positive residuals for non-lattice shifts, both
    stable under grid refinement (full level).
6.  Winding-number divisibility certificates: three pinned cases, the
    phase-aliasing rejection of the discontinuous multiplier, and twenty
    randomized smooth-exponential instances.
7.  Slow (non-absolute) coefficient convergence of the corrected
    multiplier: ell-1 partial sums keep growing by >= 3% per box doubling.
8.  The smooth two-sided construction: its defining conditions, the
    failure of 1/3-periodicity (defect > 1), and oracle-matched residual
    reported without an asserted target.
9.  Time-frequency spread of the Gaussian (1/(16 pi^2)) and the growing
    short-time-transform mass of the discontinuous six-cell window.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

import numpy as np

from .constructions import (
    WindowSpec,
    construct_from_sqp,
    corrected_multiplier,
    dilate_normalize,
    example1_corrected,
    example1_window,
    example2_sqp_spec,
    example2_u,
    membership_residual_oracle,
    realize,
    sqp_check,
    standard_window,
)
from .gabor_analysis import (
    HGrid,
    PhaseError,
    RationalLattice,
    coefficients_from_h,
    divisibility_certificate,
    h_product_check,
    invariance_test,
    riesz_bounds,
    winding_numbers,
    zz_field,
)
from .zak_core import (
    SampledWindow,
    TimeFrequencyShift,
    feichtinger_norm_estimate,
    time_frequency_spread,
    validate_zak,
    zak,
)

BASE_N = 720
BASE_L = 64
EPS_SMOOTH = 0.3
RANDOM_SEED = 20260823

Shift = TimeFrequencyShift


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    checks: Tuple[Check, ...]
    seconds: float

    def as_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number} [{status}] {self.title} ({self.seconds:.1f}s)"

    def failure_text(self) -> str:
        lines = [c.detail for c in self.checks if not c.passed]
        return "; ".join(lines) if lines else ""


_CACHE: Dict[tuple, object] = {}


def _cached(key: tuple, builder: Callable[[], object]):
    if key not in _CACHE:
        _CACHE[key] = builder()
    return _CACHE[key]


def chi_window(n: int = BASE_N) -> SampledWindow:
    return _cached(("chi", n), lambda: standard_window("indicator", n))


def displayed_window(n: int = BASE_N) -> SampledWindow:
    return _cached(("displayed", n), lambda: example1_window(n))


def corrected_pair(n: int = BASE_N, l: int = BASE_L) -> Tuple[SampledWindow, HGrid]:
    return _cached(("corrected", n, l), lambda: example1_corrected(n, l))


def gaussian_window(n: int = BASE_N) -> SampledWindow:
    return _cached(("gaussian", n), lambda: standard_window("gaussian", n))


def dilated_gaussian_system(n: int = BASE_N) -> Tuple[SampledWindow, RationalLattice]:
    def build():
        spec, lattice = dilate_normalize(
            WindowSpec("gaussian", n, width=Fraction(1), label="gaussian"),
            1,
            Fraction(3, 2),
        )
        return realize(spec, n), lattice

    return _cached(("dilated-gaussian", n), build)


def smooth_triple(n: int = BASE_N, l: int = BASE_L):
    return _cached(
        ("smooth", n, l),
        lambda: construct_from_sqp(example2_sqp_spec(EPS_SMOOTH), n, l),
    )


def grid_for(name: str, w: SampledWindow, l: int = BASE_L):
    return _cached(
        ("grid", name, w.sample_rate, l, len(w.samples)), lambda: zak(w, l)
    )


def _check(name: str, passed: bool, detail: str) -> Check:
    return Check(name, bool(passed), detail)


def _le(name: str, value: float, bound: float) -> Check:
    return _check(name, value <= bound, f"{name}: {value:.3e} (allowed <= {bound:.1e})")


def _eq0(name: str, value: float) -> Check:
    return _check(name, value == 0.0, f"{name}: {value!r} (required exactly 0.0)")


def _timed(number: int, title: str, body: Callable[[], List[Check]]) -> CriterionResult:
    t0 = time.perf_counter()
    checks = body()
    dt = time.perf_counter() - t0
    return CriterionResult(
        number, title, all(c.passed for c in checks), tuple(checks), dt
    )


def criterion_1(level: str = "quick") -> CriterionResult:
    """Unitarity and covariance defects on the five fixture windows."""

    def body() -> List[Check]:
        shift = Shift(Fraction(1, 2), Fraction(1, 4))
        fixtures = [
            ("indicator", chi_window(), True),
            ("six-cell displayed", displayed_window(), True),
            ("six-cell corrected", corrected_pair()[0], True),
            ("smooth two-sided", smooth_triple()[1], False),
            ("gaussian", gaussian_window(), False),
        ]
        checks: List[Check] = []
        for name, w, exact in fixtures:
            diag = validate_zak(w, grid_for(name, w), shift)
            if exact:
                checks.append(_eq0(f"{name}: unitarity defect", diag.unitarity_defect))
                checks.append(_eq0(f"{name}: covariance defect", diag.covariance_defect))
                checks.append(
                    _check(
                        f"{name}: exact path", diag.exact,
                        f"{name}: exact-arithmetic path used = {diag.exact}",
                    )
                )
            else:
                checks.append(
                    _le(f"{name}: unitarity defect", diag.unitarity_defect, 1e-10)
                )
                checks.append(
                    _le(f"{name}: covariance defect", diag.covariance_defect, 1e-10)
                )
        return checks

    return _timed(1, "Zak unitarity and covariance identities", body)


def criterion_2(level: str = "quick") -> CriterionResult:
    """Riesz bounds (9/4, 9) of the displayed six-cell window."""

    def body() -> List[Check]:
        grid = grid_for("six-cell displayed", displayed_window())
        bounds = riesz_bounds(zz_field(grid, RationalLattice(1, 3)))
        return [
            _le("lower bound vs 9/4", abs(bounds.lower - 2.25), 1e-9),
            _le("upper bound vs 9", abs(bounds.upper - 9.0), 1e-9),
        ]

    return _timed(2, "Riesz bounds (9/4, 9) for the displayed window", body)


def criterion_3(level: str = "quick") -> CriterionResult:
    """Membership of the half-shifted corrected window, with certificates."""

    def body() -> List[Check]:
        w, h_star = corrected_pair()
        grid = grid_for("six-cell corrected", w)
        lattice = RationalLattice(1, 3)
        report = invariance_test(grid, lattice, Shift(Fraction(1, 2), Fraction(0)))
        checks = [
            _le("membership residual", report.residual, 1e-9),
            _check("decision", report.decision, f"member = {report.decision}"),
        ]
        h_err = float(
            np.max(np.abs(report.multipliers[0].values - h_star.values))
        )
        checks.append(_le("recovered multiplier vs reference", h_err, 1e-9))
        defects = sqp_check(grid, h_star, 2, 3, -1)
        checks.append(_le("shift-recursion defect", defects.shift_defect, 1e-12))
        checks.append(_le("product defect", defects.product_defect, 1e-12))
        checks.append(
            _le("periodicity defect", defects.periodicity_defect, 1e-12)
        )
        # Mutation sensitivity: the opposite sign convention must fail loudly.
        tampered = sqp_check(grid, h_star, 2, 3, +1)
        checks.append(
            _check(
                "sign tampering detected",
                tampered.product_defect > 1.0,
                f"product defect with flipped sign = "
                f"{tampered.product_defect:.3f} (required > 1)",
            )
        )
        return checks

    return _timed(3, "Corrected six-cell window is shift-invariant", body)


def _oracle_cases(level: str):
    chi = chi_window()
    displayed = displayed_window()
    corrected = corrected_pair()[0]
    smooth = smooth_triple()[1]
    gauss_d, gauss_lat = dilated_gaussian_system()
    unit = RationalLattice(1, 1)
    three = RationalLattice(1, 3)
    half = Fraction(1, 2)
    # (fixture name, window, lattice, shift, oracle x/omega points or None)
    return [
        ("indicator", chi, unit, Shift(half, Fraction(0)), 48, 16),
        ("indicator", chi, unit, Shift(Fraction(0), half), 48, 16),
        ("indicator", chi, unit, Shift(Fraction(1, 3), Fraction(1, 4)), 48, 16),
        ("six-cell displayed", displayed, three, Shift(half, Fraction(0)), 48, 16),
        ("six-cell displayed", displayed, three, Shift(Fraction(1), Fraction(0)), 48, 16),
        ("six-cell displayed", displayed, three, Shift(Fraction(0), Fraction(1)), 48, 16),
        ("six-cell displayed", displayed, three, Shift(Fraction(1, 6), Fraction(0)), 48, 16),
        ("six-cell corrected", corrected, three, Shift(half, Fraction(0)), 48, 16),
        ("six-cell corrected", corrected, three, Shift(Fraction(1, 6), Fraction(0)), 48, 16),
        ("smooth two-sided", smooth, three, Shift(half, Fraction(0)), None, None),
        ("dilated gaussian", gauss_d, gauss_lat, Shift(Fraction(1, 4), Fraction(0)), None, None),
        ("dilated gaussian", gauss_d, gauss_lat, Shift(Fraction(1, 12), Fraction(0)), None, None),
        ("dilated gaussian", gauss_d, gauss_lat, Shift(Fraction(0), Fraction(3, 2)), None, None),
    ]


def criterion_4(level: str = "quick") -> CriterionResult:
    """Pipeline residuals match the closed-form oracle on all fixtures."""

    def body() -> List[Check]:
        checks: List[Check] = []
        for name, w, lattice, shift, nxp, nwp in _oracle_cases(level):
            grid = grid_for(name, w)
            pipeline = invariance_test(grid, lattice, shift).residual
            oracle = membership_residual_oracle(grid, lattice, shift, nxp, nwp)
            checks.append(
                _le(
                    f"{name} shift {shift}: |pipeline - oracle|",
                    abs(pipeline - oracle),
                    1e-8,
                )
            )
        displayed = displayed_window()
        grid = grid_for("six-cell displayed", displayed)
        res = invariance_test(
            grid, RationalLattice(1, 3), Shift(Fraction(1, 2), Fraction(0))
        ).residual
        checks.append(
            _le("displayed window residual vs hand value 4/9", abs(res - 4.0 / 9.0), 1e-12)
        )
        checks.append(
            _check(
                "displayed window residual strictly positive",
                res > 0.01,
                f"residual = {res:.6f} (must exceed 0.01)",
            )
        )
        return checks

    return _timed(4, "Least-squares residuals agree with the brute-force oracle", body)


def criterion_5(level: str = "quick") -> CriterionResult:
    """Dilated Gaussian on the density-2/3 lattice: bounds and residual stability."""

    def body() -> List[Check]:
        w, lattice = dilated_gaussian_system(BASE_N)
        grid = grid_for("dilated gaussian", w)
        bounds = riesz_bounds(zz_field(grid, lattice))
        checks = [
            _check(
                "lower Riesz bound healthy",
                bounds.lower >= 0.01,
                f"A = {bounds.lower:.6f} (required >= 0.01)",
            )
        ]
        shifts = [
            Shift(Fraction(1, 4), Fraction(0)),
            Shift(Fraction(1, 12), Fraction(0)),
            Shift(Fraction(0), Fraction(3, 2)),
        ]
        base_res = {}
        for shift in shifts:
            r = invariance_test(grid, lattice, shift).residual
            base_res[shift] = r
            checks.append(
                _check(
                    f"residual at shift {shift} bounded away from zero",
                    r >= 0.01,
                    f"residual {shift} = {r:.6f} (required >= 0.01)",
                )
            )
        if level == "full":
            w2, lattice2 = dilated_gaussian_system(2 * BASE_N)
            grid2 = grid_for("dilated gaussian", w2)
            bounds2 = riesz_bounds(zz_field(grid2, lattice2))
            rel = abs(bounds2.lower - bounds.lower) / bounds.lower
            checks.append(
                _check(
                    "lower bound stable under refinement",
                    rel < 0.10,
                    f"A(2N)/A(N) relative change = {rel:.4f} (required < 0.10)",
                )
            )
            for shift in shifts:
                r2 = invariance_test(grid2, lattice2, shift).residual
                rel = abs(r2 - base_res[shift]) / base_res[shift]
                checks.append(
                    _check(
                        f"residual at {shift} stable under refinement",
                        rel < 0.10,
                        f"relative change at {shift} = {rel:.4f} (required < 0.10)",
                    )
                )
        return checks

    return _timed(5, "Dilated-Gaussian lattice: bounds and non-member residuals", body)


def criterion_6(level: str = "quick") -> CriterionResult:
    """Winding-number divisibility certificates and phase-failure detection."""

    def body() -> List[Check]:
        checks: List[Check] = []
        zero = Shift(Fraction(0), Fraction(0))

        h1 = HGrid.from_function(
            lambda x, o: np.exp(2j * np.pi * 3 * float(x)), 3, 1, 24, 8
        )
        c1 = divisibility_certificate(h1, 1, zero, 3, 0, +1)
        checks.append(
            _check(
                "pinned case 1 (R=1, turn -1) passes",
                c1.passed and c1.q1 == -1,
                f"case 1: q1={c1.q1}, residues=({c1.residue1},{c1.residue2}), "
                f"passed={c1.passed}",
            )
        )

        h2 = HGrid.from_function(
            lambda x, o: np.exp(2j * np.pi * 2 * float(x)), 1, 1, 32, 8
        )
        c2 = divisibility_certificate(
            h2, 2, Shift(Fraction(1, 2), Fraction(0)), 4, 0, +1
        )
        checks.append(
            _check(
                "pinned case 2 (R=2, doubled exponent) passes",
                c2.passed and c2.q1 == -2,
                f"case 2: q1={c2.q1}, residues=({c2.residue1},{c2.residue2}), "
                f"passed={c2.passed}",
            )
        )

        c3 = divisibility_certificate(
            h2, 2, Shift(Fraction(1, 2), Fraction(0)), 3, 0, +1
        )
        checks.append(
            _check(
                "pinned case 3 (odd target) fails by parity",
                (not c3.passed) and c3.residue1 == -1,
                f"case 3: residue1={c3.residue1}, passed={c3.passed}",
            )
        )

        _, h_star = corrected_pair()
        try:
            winding_numbers(h_star)
            checks.append(
                _check("discontinuous multiplier rejected", False,
                       "winding_numbers accepted a discontinuous multiplier")
            )
        except PhaseError as exc:
            checks.append(
                _check(
                    "discontinuous multiplier rejected",
                    "phase aliasing" in str(exc),
                    f"winding error message: {exc}",
                )
            )

        rng = np.random.default_rng(RANDOM_SEED)
        all_ok = True
        msg = "all 20 randomized instances certified"
        for i in range(20):
            a = int(rng.integers(-3, 4))
            b = int(rng.integers(-3, 4))
            p1 = int(rng.integers(1, 4))
            p2 = int(rng.integers(1, 4))
            r = int(rng.integers(1, 4))
            cu = int(rng.integers(0, 3))
            dv = int(rng.integers(0, 3))
            h = HGrid.from_function(
                lambda x, o, a=a, b=b, p1=p1, p2=p2: np.exp(
                    2j * np.pi * (a * p1 * float(x) + b * p2 * float(o))
                ),
                p1, p2, 32, 32,
            )
            shift = Shift(Fraction(cu, p1), Fraction(dv, p2))
            m1, m2 = r * a * p1, r * b * p2
            defect = h_product_check(h, r, shift, m1, m2, +1)
            cert = divisibility_certificate(h, r, shift, m1, m2, +1)
            ok = (
                defect <= 1e-8
                and cert.passed
                and cert.q1 == -a
                and cert.q2 == -b
            )
            if not ok:
                all_ok = False
                msg = (
                    f"instance {i}: a={a} b={b} p1={p1} p2={p2} R={r} "
                    f"defect={defect:.2e} q=({cert.q1},{cert.q2}) "
                    f"residues=({cert.residue1},{cert.residue2})"
                )
                break
        checks.append(_check("randomized divisibility identities", all_ok, msg))
        return checks

    return _timed(6, "Divisibility certificates and phase-failure detection", body)


def criterion_7(level: str = "quick") -> CriterionResult:
    """ell-1 coefficient mass of the corrected multiplier keeps growing."""

    def body() -> List[Check]:
        h = HGrid.from_function(corrected_multiplier, 3, 1, 240, 256)
        table = coefficients_from_h(h, 64, 64)
        sums = table.partial_l1
        checks: List[Check] = []
        for rho in (8, 16, 32):
            lo, hi = sums[rho], sums[2 * rho]
            growth = (hi - lo) / lo
            checks.append(
                _check(
                    f"partial ell-1 growth radius {rho} -> {2 * rho}",
                    growth >= 0.03,
                    f"radius {rho}->{2*rho}: {lo:.4f} -> {hi:.4f} "
                    f"(+{100*growth:.1f}%, required >= 3%)",
                )
            )
        return checks

    return _timed(7, "Coefficient partial sums grow (non-absolute convergence)", body)


def criterion_8(level: str = "quick") -> CriterionResult:
    """Audit of the smooth two-sided construction (eps = 0.3)."""

    def body() -> List[Check]:
        u = example2_u(EPS_SMOOTH)
        checks = [
            _le("u(0) = 1", abs(u(0.0) - 1.0), 1e-12),
        ]
        xs = [Fraction(j, 720) for j in range(720)]
        uv = [u(x) for x in xs]
        recip = max(abs(u(x) * u(x + Fraction(1, 6)) - 1.0) for x in xs)
        checks.append(_le("u(x)*u(x+1/6) = 1", recip, 1e-12))
        lo, hi = min(uv), max(uv)
        checks.append(
            _check(
                "u ranges within [1/2, 2]",
                0.5 - 1e-12 <= lo and hi <= 2.0 + 1e-12,
                f"u range = [{lo:.6f}, {hi:.6f}] (must lie in [1/2, 2])",
            )
        )
        period = max(abs(u(x) - u(x + Fraction(1, 3))) for x in xs)
        checks.append(_le("u is 1/3-periodic", period, 1e-12))

        grid, w, h = smooth_triple()
        defects = sqp_check(grid, h, 2, 3, -1)
        checks.append(_le("shift-recursion defect", defects.shift_defect, 1e-12))
        checks.append(_le("product defect", defects.product_defect, 1e-12))
        checks.append(
            _check(
                "1/3-periodicity fails decisively",
                defects.periodicity_defect > 1.0,
                f"periodicity defect = {defects.periodicity_defect:.4f} "
                "(must exceed 1)",
            )
        )

        lattice = RationalLattice(1, 3)
        shift = Shift(Fraction(1, 2), Fraction(0))
        pipeline = invariance_test(grid, lattice, shift).residual
        oracle = membership_residual_oracle(grid, lattice, shift)
        checks.append(
            _le("membership residual vs oracle", abs(pipeline - oracle), 1e-8)
        )
        checks.append(
            _check(
                "membership residual reported",
                True,
                f"measured residual = {pipeline:.6f} (reported, no asserted target)",
            )
        )
        return checks

    return _timed(8, "Smooth two-sided construction audit", body)


def criterion_9(level: str = "quick") -> CriterionResult:
    """Spread of the Gaussian and growing S0-type mass of the six-cell window."""

    def body() -> List[Check]:
        w = gaussian_window()
        dt2, dw2, product = time_frequency_spread(w, 0.0, 0.0, 8)
        target = 1.0 / (16 * math.pi**2)
        checks = [
            _le("gaussian uncertainty product", abs(product - target), 1e-6),
        ]
        w1 = displayed_window()
        est = {k: feichtinger_norm_estimate(w1, 4.0, float(k), 0.5)
               for k in (16, 32, 64)}
        for k in (16, 32):
            growth = (est[2 * k] - est[k]) / est[k]
            checks.append(
                _check(
                    f"short-time mass grows K={k} -> {2 * k}",
                    growth >= 0.05,
                    f"K {k}->{2*k}: {est[k]:.4f} -> {est[2*k]:.4f} "
                    f"(+{100*growth:.1f}%, required >= 5%)",
                )
            )
        return checks

    return _timed(9, "Uncertainty and short-time-mass diagnostics", body)


ALL_CRITERIA: Tuple[Callable[[str], CriterionResult], ...] = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
)


def run_all(level: str = "quick") -> List[CriterionResult]:
    if level not in ("quick", "full"):
        raise ValueError(f"unknown selftest level {level!r}")
    return [fn(level) for fn in ALL_CRITERIA]
