"""Window constructions, invariant-pair builders, and audit utilities.

Three families of signals are built here:

* **Specified windows** -- :class:`WindowSpec` describes a window analytically
  (piecewise-constant with rational breakpoints, Gaussian, B-spline,
  the smooth two-sided construction of :func:`example2_window`, or raw
  samples) together with a requested sample rate, and :func:`realize`
  turns a spec into a :class:`~zakbench.zak_core.SampledWindow`.
  Piecewise-rational data carries the exact amplitude layer, so Zak-domain
  identities evaluate to exactly zero for them.

* **Invariant pairs** -- :func:`construct_from_sqp` takes a multiplier
  ``h`` and seed values on the top strip ``[(R-1)/R, 1)`` and fills a
  Zak-domain field ``F`` downward through the shift recursion

      ``F(x, omega) = h(x + 1/R, omega) * F(x + 1/R, omega)``,

  then recovers the window by Zak inversion.  :func:`sqp_check` measures
  how far a produced pair is from the three structural conditions: the
  shift recursion itself, the ``R``-fold product of ``h`` matching
  ``exp(sign * 2j*pi*omega)``, and ``1/P``-periodicity of ``h``.

* **Named fixtures** -- the two explicit six-cell windows (a displayed
  variant whose shift ratio fails ``1/3``-periodicity and a corrected
  variant that is genuinely shift-invariant), and a smooth compactly
  supported window built from ``u(x) = exp(eps*sin(6*pi*x))`` and the
  standard bump ``v(x) = exp(-1/((x-1/2)(1-x)))``.

The module also hosts an intentionally naive membership oracle
(:func:`membership_residual_oracle`): per grid point it minimizes the
weighted variance over the multiplier value in closed form (no SVD, no
batching) and integrates.  Tests compare it against the least-squares
pipeline; the two share only the Zak-grid accessor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .exact import ExactSamples, amp, rational_sqrt
from .gabor_analysis import HGrid, RationalLattice
from .zak_core import (
    GridAlignmentError,
    SampledWindow,
    TimeFrequencyShift,
    ZakError,
    ZakGrid,
    as_fraction,
    require_divisible,
    synthesize_grid,
    window_from_exact,
    zak_invert,
    zak_lookup,
)

PieceValue = Union[Fraction, complex]
Piece = Tuple[Fraction, Fraction, PieceValue]  # (lo, hi, value) on [lo, hi)

GAUSS_TAIL_HALF_WIDTH = 8  # truncate e^{-pi (x/w)^2} at |x| <= 8w; tail e^{-64 pi}


@dataclass(frozen=True)
class WindowSpec:
    """Analytic description of a window plus a requested sample rate.

    ``dilation`` composes the unitary rescaling ``(D_a f)(x) =
    a^{-1/2} f(x/a)`` on top of the base variant; :func:`realize` applies
    it without interpolation by sampling the base window at rate ``n*a``
    and reinterpreting the grid.
    """

    variant: str  # piecewise | gaussian | bspline | example2 | raw
    n: int
    pieces: Optional[Tuple[Piece, ...]] = None
    width: Optional[Fraction] = None
    normalized: bool = False
    order: Optional[int] = None
    eps: Optional[float] = None
    n_omega: int = 64
    sign: int = -1
    raw: Optional[SampledWindow] = None
    dilation: Fraction = Fraction(1)
    label: str = ""

    def __post_init__(self):
        if self.variant not in ("piecewise", "gaussian", "bspline", "example2", "raw"):
            raise ZakError(f"unknown window variant {self.variant!r}")
        if self.n < 1:
            raise ZakError(f"sample rate must be positive, got {self.n}")
        if self.dilation <= 0:
            raise ZakError(f"dilation must be positive, got {self.dilation}")

    def to_json(self) -> str:
        params: Dict[str, object] = {"label": self.label}
        if self.dilation != 1:
            params["dilation"] = str(self.dilation)
        if self.variant == "piecewise":
            params["pieces"] = [
                {"lo": str(lo), "hi": str(hi), "value": _value_to_json(v)}
                for lo, hi, v in (self.pieces or ())
            ]
        elif self.variant == "gaussian":
            params["width"] = str(self.width)
            params["normalized"] = self.normalized
        elif self.variant == "bspline":
            params["order"] = self.order
        elif self.variant == "example2":
            params["eps"] = self.eps
            params["L"] = self.n_omega
            params["sign"] = self.sign
        elif self.variant == "raw":
            w = self.raw
            params.update(
                {
                    "rate": w.sample_rate,
                    "start": w.start_index,
                    "re": [float(v) for v in w.samples.real],
                    "im": [float(v) for v in w.samples.imag],
                    "window_label": w.label,
                }
            )
        return json.dumps(
            {"variant": self.variant, "N": self.n, "params": params}, sort_keys=True
        )

    @classmethod
    def from_json(cls, text: str) -> "WindowSpec":
        doc = json.loads(text)
        variant = doc["variant"]
        n = int(doc["N"])
        params = doc.get("params", {})
        dilation = as_fraction(params.get("dilation", 1))
        label = params.get("label", "")
        if variant == "piecewise":
            pieces = tuple(
                (
                    as_fraction(p["lo"]),
                    as_fraction(p["hi"]),
                    _value_from_json(p["value"]),
                )
                for p in params["pieces"]
            )
            return cls("piecewise", n, pieces=pieces, dilation=dilation, label=label)
        if variant == "gaussian":
            return cls(
                "gaussian",
                n,
                width=as_fraction(params["width"]),
                normalized=bool(params.get("normalized", False)),
                dilation=dilation,
                label=label,
            )
        if variant == "bspline":
            return cls("bspline", n, order=int(params["order"]),
                       dilation=dilation, label=label)
        if variant == "example2":
            return cls(
                "example2",
                n,
                eps=float(params["eps"]),
                n_omega=int(params.get("L", 64)),
                sign=int(params.get("sign", -1)),
                dilation=dilation,
                label=label,
            )
        if variant == "raw":
            samples = np.asarray(params["re"], dtype=np.float64) + 1j * np.asarray(
                params["im"], dtype=np.float64
            )
            w = SampledWindow(
                int(params["rate"]), int(params["start"]), samples,
                params.get("window_label", "")
            )
            return cls("raw", n, raw=w, dilation=dilation, label=label)
        raise ZakError(f"unknown window variant {variant!r}")


def _value_to_json(v: PieceValue):
    if isinstance(v, Fraction):
        return str(v)
    c = complex(v)
    return [c.real, c.imag]


def _value_from_json(v) -> PieceValue:
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (int, float)):
        return Fraction(v)
    return complex(v[0], v[1])


def breakpoint_divisor(spec: WindowSpec) -> int:
    """Rate divisor D such that realize() succeeds whenever D divides n.

    Covers both the base variant's breakpoints and the dilation: the base
    is sampled at rate ``n * a``, which must be an integer divisible by
    every breakpoint denominator.
    """
    base = 1
    if spec.variant == "piecewise":
        for lo, hi, _ in spec.pieces or ():
            base = _lcm(base, lo.denominator, hi.denominator)
    elif spec.variant == "example2":
        base = 6
    a = spec.dilation
    return base * a.denominator // math.gcd(base, a.numerator)


def _lcm(*vals: int) -> int:
    out = 1
    for v in vals:
        out = out * v // math.gcd(out, v)
    return out


def piecewise_window(
    pieces: Sequence[Piece], sample_rate: int, label: str = ""
) -> SampledWindow:
    """Exact samples of a sum of ``value * chi_[lo, hi)`` pieces.

    Breakpoints must land on the sample grid; overlapping pieces add.
    Rational values flow into the exact amplitude layer.
    """
    if not pieces:
        raise ZakError("piecewise window needs at least one piece")
    all_rational = all(isinstance(v, Fraction) for _, _, v in pieces)
    acc_exact: Dict[int, Fraction] = {}
    acc_float: Dict[int, complex] = {}
    for lo, hi, value in pieces:
        lo = as_fraction(lo)
        hi = as_fraction(hi)
        if hi <= lo:
            raise ZakError(f"empty piece [{lo}, {hi})")
        ilo = lo * sample_rate
        ihi = hi * sample_rate
        if ilo.denominator != 1 or ihi.denominator != 1:
            bad = lo if ilo.denominator != 1 else hi
            raise GridAlignmentError(
                f"breakpoint {bad} requires a rate divisible by {bad.denominator}, "
                f"got {sample_rate}"
            )
        for i in range(int(ilo), int(ihi)):
            if all_rational:
                acc_exact[i] = acc_exact.get(i, Fraction(0)) + value
            else:
                acc_float[i] = acc_float.get(i, 0.0) + complex(value)
    if all_rational:
        exact: ExactSamples = {
            i: amp(v) for i, v in acc_exact.items() if v != 0
        }
        if not exact:
            raise ZakError("piecewise window is identically zero")
        return window_from_exact(sample_rate, exact, label=label)
    idx = sorted(acc_float)
    start, stop = idx[0], idx[-1]
    samples = np.zeros(stop - start + 1, dtype=np.complex128)
    for i, v in acc_float.items():
        samples[i - start] = v
    return SampledWindow(sample_rate, start, samples, label)


def indicator_spec(lo, hi, n: int, label: str = "") -> WindowSpec:
    lo, hi = as_fraction(lo), as_fraction(hi)
    return WindowSpec(
        "piecewise", n, pieces=((lo, hi, Fraction(1)),),
        label=label or f"indicator[{lo},{hi})"
    )


def example1_spec(n: int) -> WindowSpec:
    """The displayed six-cell window: four pieces with values 1/2, 2, 2, 1."""
    pieces = (
        (Fraction(-5, 6), Fraction(-2, 3), Fraction(1, 2)),
        (Fraction(0), Fraction(1, 6), Fraction(2)),
        (Fraction(1, 3), Fraction(1, 2), Fraction(2)),
        (Fraction(1, 2), Fraction(1), Fraction(1)),
    )
    return WindowSpec("piecewise", n, pieces=pieces, label="six-cell displayed")


def example1_window(n: int) -> SampledWindow:
    require_divisible(n, 6, "for the six-cell window's breakpoints")
    return realize(example1_spec(n))


def example1_corrected_spec(n: int) -> WindowSpec:
    """The shift-invariant six-cell variant (support [1/6, 3/2))."""
    pieces = (
        (Fraction(1, 6), Fraction(1, 3), Fraction(2)),
        (Fraction(1, 2), Fraction(1), Fraction(1)),
        (Fraction(1), Fraction(7, 6), Fraction(1, 2)),
        (Fraction(4, 3), Fraction(3, 2), Fraction(1, 2)),
    )
    return WindowSpec("piecewise", n, pieces=pieces, label="six-cell corrected")


def corrected_multiplier(x: Fraction, omega: Fraction) -> complex:
    """The 1/3-periodic multiplier of the corrected six-cell window."""
    cell = as_fraction(x) % Fraction(1, 3)
    if cell < Fraction(1, 6):
        return 2.0 + 0.0j
    return 0.5 * np.exp(-2j * np.pi * float(omega))


def example1_corrected(n: int, n_omega: int = 64) -> Tuple[SampledWindow, HGrid]:
    """Corrected window plus its multiplier sampled at (n/3) x n_omega."""
    require_divisible(n, 6, "for the six-cell window's breakpoints")
    w = realize(example1_corrected_spec(n))
    h = HGrid.from_function(
        corrected_multiplier, 3, 1, n // 3, n_omega, label="six-cell multiplier"
    )
    return w, h


def example2_u(eps: float) -> Callable[[object], float]:
    """u(x) = exp(eps*sin(6*pi*x)): positive, smooth, u(x)*u(x+1/6) = 1."""

    def u(x) -> float:
        return math.exp(eps * math.sin(6 * math.pi * float(x)))

    return u


def example2_v() -> Callable[[object], float]:
    """Bump exp(-1/((x-1/2)(1-x))) on (1/2,1): flat to all orders at the ends."""

    def v(x) -> float:
        t = float(x)
        q = (t - 0.5) * (1.0 - t)
        if q <= 0.0:
            return 0.0
        return math.exp(-1.0 / q)

    return v


@dataclass(frozen=True)
class SQPSpec:
    """Input to the strip-descent builder.

    ``h`` and ``seed`` are evaluated pointwise at exact rational grid
    coordinates; ``h_period_x``/``h_period_omega`` declare the periodicity
    cell of ``h`` (verified bit-for-bit on the sampled grid before the
    multiplier is folded onto its cell).
    """

    r: int
    p: int
    h: Callable[[Fraction, Fraction], complex]
    seed: Callable[[Fraction, Fraction], complex]
    sign: int = -1
    h_period_x: int = 1
    h_period_omega: int = 1
    label: str = ""

    def __post_init__(self):
        if self.r < 2 or self.p < 1:
            raise ZakError(
                f"need R >= 2 strips and P >= 1, got R={self.r}, P={self.p}"
            )
        if math.gcd(self.r, self.p) != 1:
            raise ZakError(f"R={self.r} and P={self.p} must be coprime")
        if self.sign not in (-1, 1):
            raise ZakError(f"sign must be +1 or -1, got {self.sign}")


def trivial_sqp_spec(r: int = 2, p: int = 3) -> SQPSpec:
    return SQPSpec(
        r, p, lambda x, w: 1.0 + 0.0j, lambda x, w: 1.0 + 0.0j,
        sign=-1, h_period_x=p, label="constant"
    )


def example1_corrected_sqp_spec() -> SQPSpec:
    return SQPSpec(
        2,
        3,
        corrected_multiplier,
        lambda x, w: 1.0 + 0.0j,
        sign=-1,
        h_period_x=3,
        label="six-cell corrected",
    )


def example2_sqp_spec(eps: float, sign: int = -1) -> SQPSpec:
    if not 0 < abs(eps) <= math.log(2):
        raise ZakError(
            f"eps must satisfy 0 < |eps| <= ln 2 = {math.log(2):.6f}, got {eps}"
        )
    u = example2_u(eps)
    v = example2_v()

    def h(x: Fraction, omega: Fraction) -> complex:
        if x < Fraction(1, 2):
            return complex(u(x))
        return np.exp(sign * 2j * np.pi * float(omega)) / u(x - Fraction(1, 2))

    def seed(x: Fraction, omega: Fraction) -> complex:
        return complex(v(x))

    return SQPSpec(2, 3, h, seed, sign=sign, h_period_x=1,
                   label=f"smooth eps={eps}")


def _grid_eval(
    fn: Callable[[Fraction, Fraction], complex],
    nx: int,
    n_omega: int,
    j_lo: int = 0,
    j_hi: Optional[int] = None,
) -> np.ndarray:
    j_hi = nx if j_hi is None else j_hi
    out = np.empty((j_hi - j_lo, n_omega), dtype=np.complex128)
    omegas = [Fraction(m, n_omega) for m in range(n_omega)]
    for row, j in enumerate(range(j_lo, j_hi)):
        xf = Fraction(j, nx)
        for m in range(n_omega):
            out[row, m] = fn(xf, omegas[m])
    return out


def construct_from_sqp(
    spec: SQPSpec, nx: int, n_omega: int, trim_tol: float = 1e-13
) -> Tuple[ZakGrid, SampledWindow, HGrid]:
    """Build (field, window, multiplier) by strip descent from the seed.

    The field satisfies the shift recursion exactly by construction (each
    lower-strip value is literally the product ``h * F`` of stored
    values).  The window comes from Zak inversion with margins below
    ``trim_tol`` times the peak amplitude removed; the returned field's
    translate range reflects the trimmed support.
    """
    require_divisible(nx, spec.r, "to split [0,1) into R strips")
    require_divisible(nx, spec.p, "for the x-periodicity cell")
    require_divisible(nx, spec.h_period_x, "for the declared x-period of h")
    require_divisible(n_omega, spec.h_period_omega,
                      "for the declared omega-period of h")
    step = nx // spec.r
    h_full = _grid_eval(spec.h, nx, n_omega)
    values = np.empty((nx, n_omega), dtype=np.complex128)
    values[nx - step:, :] = _grid_eval(spec.seed, nx, n_omega, nx - step, nx)
    for j in range(nx - step - 1, -1, -1):
        values[j, :] = h_full[j + step, :] * values[j + step, :]
    if not np.all(np.isfinite(values)):
        raise ZakError("strip descent produced non-finite field values")

    h_grid = _fold_multiplier(h_full, spec.h_period_x, spec.h_period_omega,
                              spec.label)

    # Invert over a centered block of translates so windows extending to
    # either side of [0,1) (sign +1 pushes mass to k=-1) land where they
    # belong instead of aliasing to the far end of the range.
    full = synthesize_grid(
        values, -(n_omega // 2), n_omega - n_omega // 2 - 1, label=spec.label
    )
    w_raw = zak_invert(full)
    w = _trim_window(w_raw, trim_tol)
    k_min = w.start_index // nx
    k_max = (w.start_index + len(w.samples) - 1) // nx
    grid = synthesize_grid(values, k_min, k_max, label=spec.label)
    return grid, w, h_grid


def _fold_multiplier(h_full: np.ndarray, p1: int, p2: int, label: str) -> HGrid:
    nx, n_omega = h_full.shape
    if p1 > 1 and not np.array_equal(h_full, np.roll(h_full, -nx // p1, axis=0)):
        raise ZakError(
            f"declared x-period 1/{p1} is violated by the sampled multiplier"
        )
    if p2 > 1 and not np.array_equal(
        h_full, np.roll(h_full, -n_omega // p2, axis=1)
    ):
        raise ZakError(
            f"declared omega-period 1/{p2} is violated by the sampled multiplier"
        )
    return HGrid(p1, p2, h_full[: nx // p1, : n_omega // p2], label)


def _trim_window(w: SampledWindow, rel_tol: float) -> SampledWindow:
    mags = np.abs(w.samples)
    cut = rel_tol * float(mags.max())
    keep = np.nonzero(mags > cut)[0]
    if keep.size == 0:
        raise ZakError("window vanished under trimming")
    lo, hi = int(keep[0]), int(keep[-1]) + 1
    return SampledWindow(
        w.sample_rate, w.start_index + lo,
        w.samples[lo:hi], w.label, tail_bound=w.tail_bound
    )


def example2_window(
    eps: float, n: int = 720, n_omega: int = 64, sign: int = -1
) -> Tuple[SampledWindow, Callable[[object], float], Callable[[object], float]]:
    """Smooth compactly supported window from the (u, v) construction.

    Returns the window together with the evaluators ``u`` and ``v`` so the
    defining conditions (range of u, the reciprocal identity
    ``u(x)*u(x+1/6) = 1``, flatness of v) can be audited directly.
    """
    require_divisible(n, 6, "for the oscillation period of u")
    _, w, _ = construct_from_sqp(example2_sqp_spec(eps, sign), n, n_omega)
    return w, example2_u(eps), example2_v()


class SqpDefects(NamedTuple):
    shift_defect: float
    product_defect: float
    periodicity_defect: float


def _h_on_grid(h: HGrid, nx: int, n_omega: int) -> np.ndarray:
    """Sample the periodic extension of ``h`` on the (nx, n_omega) torus grid."""
    full = h.full_torus()
    gx, gw = full.shape
    if gx % nx != 0:
        raise GridAlignmentError(
            f"multiplier x-resolution {gx} does not cover a {nx}-point grid "
            f"({gx} not divisible by {nx})"
        )
    if gw % n_omega != 0:
        raise GridAlignmentError(
            f"multiplier omega-resolution {gw} does not cover a {n_omega}-point "
            f"grid ({gw} not divisible by {n_omega})"
        )
    return full[:: gx // nx, :: gw // n_omega]


def sqp_check(
    grid: ZakGrid,
    h: HGrid,
    r_steps: int,
    p: int,
    sign: int,
    support_tol: float = 1e-12,
) -> SqpDefects:
    """Defects of the three structural conditions for a field/multiplier pair.

    * shift: ``max |F(x - 1/R, w) - h(x, w) F(x, w)|`` over ``x in [1/R, 1)``;
    * product: ``max |prod_{r<R} h(x + r/R, w) - exp(sign*2j*pi*w)]`` over
      the part of ``[0, 1/P)`` where ``F`` carries support;
    * periodicity: ``max |h(x + 1/P, w) - h(x, w)|`` over the torus.
    """
    if sign not in (-1, 1):
        raise ZakError(f"sign must be +1 or -1, got {sign}")
    nx, lom = grid.nx, grid.n_omega
    require_divisible(nx, r_steps, "to split [0,1) into R strips")
    require_divisible(nx, p, "for the x-periodicity cell")
    hv = _h_on_grid(h, nx, lom)
    step = nx // r_steps
    f = grid.values
    shift_defect = float(
        np.max(np.abs(f[: nx - step, :] - hv[step:, :] * f[step:, :]))
    ) if nx > step else 0.0

    prod = np.ones((step, lom), dtype=np.complex128)
    for r in range(r_steps):
        prod = prod * hv[r * step: (r + 1) * step, :]
    target = np.exp(sign * 2j * np.pi * np.arange(lom) / lom)[None, :]
    row_peak = np.max(np.abs(f), axis=1)
    supported = row_peak[: nx // p] > support_tol * float(row_peak.max())
    cell = min(step, nx // p)
    mask = supported[:cell]
    if np.any(mask):
        product_defect = float(np.max(np.abs(prod[:cell][mask] - target)))
    else:
        product_defect = 0.0

    periodicity_defect = float(
        np.max(np.abs(np.roll(hv, -nx // p, axis=0) - hv))
    )
    return SqpDefects(shift_defect, product_defect, periodicity_defect)


def bspline_value(order: int, x: Fraction) -> Fraction:
    """Cardinal B-spline of the given order on uniform knots, support [0, order]."""
    if order < 1:
        raise ZakError(f"B-spline order must be >= 1, got {order}")
    if order == 1:
        return Fraction(1) if 0 <= x < 1 else Fraction(0)
    if x <= 0 or x >= order:
        return Fraction(0)
    m = order - 1
    return (
        x * bspline_value(m, x) + (order - x) * bspline_value(m, x - 1)
    ) / m


def standard_window(
    kind: str,
    n: int,
    width=Fraction(1),
    order: int = 2,
    lo=Fraction(0),
    hi=Fraction(1),
    normalized: bool = False,
) -> SampledWindow:
    """Reference fixtures: 'gaussian', 'bspline', or 'indicator'."""
    if kind == "indicator":
        return realize(indicator_spec(lo, hi, n))
    if kind == "bspline":
        exact: ExactSamples = {}
        for i in range(0, order * n + 1):
            v = bspline_value(order, Fraction(i, n))
            if v != 0:
                exact[i] = amp(v)
        return window_from_exact(n, exact, label=f"bspline order {order}")
    if kind == "gaussian":
        return realize(
            WindowSpec("gaussian", n, width=as_fraction(width),
                       normalized=normalized, label="gaussian")
        )
    raise ZakError(f"unknown standard window kind {kind!r}")


def _realize_base(spec: WindowSpec, rate: int) -> SampledWindow:
    if spec.variant == "piecewise":
        return piecewise_window(spec.pieces, rate, spec.label)
    if spec.variant == "gaussian":
        w = float(spec.width)
        if w <= 0:
            raise ZakError(f"gaussian width must be positive, got {spec.width}")
        half = int(math.floor(GAUSS_TAIL_HALF_WIDTH * w * rate))
        idx = np.arange(-half, half + 1)
        xs = idx / rate
        samples = np.exp(-np.pi * (xs / w) ** 2).astype(np.complex128)
        if spec.normalized:
            samples = samples * (2.0 ** 0.25 / math.sqrt(w))
        return SampledWindow(
            rate, -half, samples, spec.label or "gaussian",
            tail_bound=math.exp(-math.pi * GAUSS_TAIL_HALF_WIDTH**2),
        )
    if spec.variant == "bspline":
        return standard_window("bspline", rate, order=spec.order)
    if spec.variant == "example2":
        w, _, _ = example2_window(spec.eps, rate, spec.n_omega, spec.sign)
        return w
    if spec.variant == "raw":
        if spec.raw.sample_rate != rate:
            raise GridAlignmentError(
                f"raw window is sampled at rate {spec.raw.sample_rate}, "
                f"requested {rate}"
            )
        return spec.raw
    raise ZakError(f"unknown window variant {spec.variant!r}")


def realize(spec: WindowSpec, n: Optional[int] = None) -> SampledWindow:
    """Materialize a spec at rate ``n`` (default: the spec's own rate).

    Dilation by ``a`` is exact: the base window is sampled at rate ``n*a``
    and the identical sample array is reinterpreted at rate ``n`` with
    amplitudes scaled by ``a^{-1/2}`` -- no interpolation ever happens.
    """
    rate = spec.n if n is None else n
    a = spec.dilation
    base_rate = a * rate
    if base_rate.denominator != 1:
        raise GridAlignmentError(
            f"dilation {a} requires a rate divisible by {a.denominator}, "
            f"got {rate}"
        )
    base = _realize_base(spec, int(base_rate))
    if a == 1:
        return base
    scale2 = Fraction(1) / a  # amplitude factor squared
    root = rational_sqrt(scale2)
    if base.exact is not None and root is not None:
        exact = {i: amp(ampl[0] * root, ampl[1]) for i, ampl in base.exact.items()}
        return window_from_exact(rate, exact, label=base.label)
    samples = base.samples * math.sqrt(float(scale2))
    return SampledWindow(rate, base.start_index, samples, base.label,
                         tail_bound=base.tail_bound * math.sqrt(float(scale2)))


def dilate_normalize(
    spec: WindowSpec, alpha, beta
) -> Tuple[WindowSpec, RationalLattice]:
    """Map a Gabor system on alpha*Z x beta*Z to the canonical lattice.

    With ``alpha*beta = P/Q`` in lowest terms, the unitary dilation by
    ``a = 1/(Q*alpha)`` carries the system onto ``(1/Q)Z x PZ``; Riesz
    bounds and membership residuals are invariant under this move.
    """
    alpha, beta = as_fraction(alpha), as_fraction(beta)
    if alpha <= 0 or beta <= 0:
        raise ZakError(f"lattice parameters must be positive, got ({alpha}, {beta})")
    prod = alpha * beta
    p, q = prod.numerator, prod.denominator
    a = Fraction(1) / (q * alpha)
    out = replace(spec, dilation=spec.dilation * a)
    return out, RationalLattice(q=q, p=p)


def measured_support(
    w: SampledWindow, threshold: float = 1e-13
) -> Tuple[Fraction, Fraction]:
    """Smallest grid interval containing all samples above threshold*peak."""
    mags = np.abs(w.samples)
    cut = threshold * float(mags.max())
    keep = np.nonzero(mags > cut)[0]
    n = w.sample_rate
    lo = w.start_index + int(keep[0])
    hi = w.start_index + int(keep[-1]) + 1
    return Fraction(lo, n), Fraction(hi, n)


def boundary_smoothness_defect(
    w: SampledWindow, max_order: int = 3, margin: int = 5
) -> Tuple[float, ...]:
    """Scaled finite differences near the two support edges, per order.

    Order-``k`` entries approximate the k-th derivative
    (``N^k * Delta^k``) on stencils within ``margin`` samples of either
    edge of the stored support, with implicit zeros outside.  Windows
    that meet zero smoothly report uniformly small values; a jump shows
    up as an order-0 defect of the jump size.
    """
    pad = margin + max_order + 1
    arr = np.concatenate(
        [np.zeros(pad), w.samples, np.zeros(pad)]
    )
    out = []
    n = w.sample_rate
    span = 2 * pad
    for k in range(max_order + 1):
        d = np.diff(arr, k) if k else arr
        scaled = np.abs(d) * float(n) ** k
        out.append(float(max(scaled[:span].max(), scaled[-span:].max())))
    return tuple(out)


def membership_residual_oracle(
    grid: ZakGrid,
    lattice: RationalLattice,
    shift: TimeFrequencyShift,
    nx_points: Optional[int] = None,
    nw_points: Optional[int] = None,
) -> float:
    """Brute-force membership residual via pointwise closed-form variance.

    At each sampled ``(x0, w0)`` the best multiplier value is found by the
    weighted-variance formula (Q=1) or explicit 2x2 normal equations
    (Q=2): no SVD, no batching, every Zak value read through the
    quasiperiodic accessor one at a time.  The squared pointwise residuals
    are integrated over ``[0, 1/P) x [0, 1)`` and normalized by the window
    norm, mirroring the pipeline's aggregate definition.
    """
    p, q = lattice.p, lattice.q
    if q > 2:
        raise ZakError(f"oracle implemented for Q <= 2, got Q={q}")
    npx_full = grid.nx // p
    nx_points = npx_full if nx_points is None else nx_points
    nw_points = grid.n_omega if nw_points is None else nw_points
    if npx_full % nx_points:
        raise GridAlignmentError(
            f"{nx_points} x-points do not embed in the {npx_full}-point "
            "fundamental grid"
        )
    if grid.n_omega % nw_points:
        raise GridAlignmentError(
            f"{nw_points} omega-points do not embed in the {grid.n_omega}-point "
            "omega grid"
        )
    sx = npx_full // nx_points
    sw = grid.n_omega // nw_points
    u, eta = shift.u, shift.eta
    col_offsets = [Fraction(qi, q) for qi in range(q)]
    row_offsets = [Fraction(pi, p) for pi in range(p)]
    total = 0.0
    for t in range(nx_points):
        x0 = Fraction(t * sx, grid.nx)
        for s in range(nw_points):
            w0 = Fraction(s * sw, grid.n_omega)
            rows = []
            rhs = []
            for po in row_offsets:
                xp = x0 + po
                rows.append(
                    [zak_lookup(grid, xp - qo, w0) for qo in col_offsets]
                )
                phase = np.exp(2j * np.pi * float(eta * xp))
                rhs.append(phase * zak_lookup(grid, xp - u, w0 - eta))
            total += _pointwise_residual2(rows, rhs)
    area_sum = total / (nx_points * nw_points * p)
    return math.sqrt(max(area_sum, 0.0)) / math.sqrt(grid.grid_norm2)


def _pointwise_residual2(rows: List[List[complex]], rhs: List[complex]) -> float:
    b2 = sum(abs(b) ** 2 for b in rhs)
    if len(rows[0]) == 1:
        wsum = sum(abs(r[0]) ** 2 for r in rows)
        if wsum == 0.0:
            return b2
        cross = sum(r[0].conjugate() * b for r, b in zip(rows, rhs))
        return max(b2 - abs(cross) ** 2 / wsum, 0.0)
    g00 = sum(abs(r[0]) ** 2 for r in rows)
    g11 = sum(abs(r[1]) ** 2 for r in rows)
    g01 = sum(r[0].conjugate() * r[1] for r in rows)
    c0 = sum(r[0].conjugate() * b for r, b in zip(rows, rhs))
    c1 = sum(r[1].conjugate() * b for r, b in zip(rows, rhs))
    det = g00 * g11 - abs(g01) ** 2
    scale = max(g00, g11)
    if det > 1e-28 * scale * scale:
        h0 = (g11 * c0 - g01 * c1) / det
        h1 = (g00 * c1 - g01.conjugate() * c0) / det
        fit = (c0.conjugate() * h0 + c1.conjugate() * h1).real
        return max(b2 - fit, 0.0)
    if scale == 0.0:
        return b2
    if g00 >= g11:
        return max(b2 - abs(c0) ** 2 / g00, 0.0)
    return max(b2 - abs(c1) ** 2 / g11, 0.0)
