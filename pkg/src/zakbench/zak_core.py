"""Sampled windows and the discrete Zak transform.

Conventions
-----------
A window is sampled on the uniform grid ``x = i / N`` where ``N`` is the
number of samples per unit interval; sample ``j`` of a
:class:`SampledWindow` lives at ``x = (start_index + j) / N``.  Energy is
the Riemann sum ``(1/N) * sum |w|^2``, so it approximates the continuum
``L^2`` norm squared of the window these samples were drawn from.

The Zak transform used throughout is

    ``Zw(x, omega) = sum_k w(x + k) * exp(-2j*pi*k*omega)``

with ``k`` running over the integer translates that meet the support.  It
is stored on ``x = j / Nx`` for ``j = 0..Nx-1`` and ``omega = m / L`` for
``m = 0..L-1`` (``L of omega = n_omega`` columns).  Values off that
fundamental cell follow from

* quasiperiodicity  ``Zw(x + n, omega) = exp(2j*pi*n*omega) * Zw(x, omega)``,
* periodicity       ``Zw(x, omega + m) = Zw(x, omega)``,

which is exactly what :func:`zak_lookup` implements.  Because each stored
value is a finite sum over at most ``n_omega`` distinct translates, the
transform is unitary on the grid:

    ``(1/(Nx*L)) * sum |Zw|^2  ==  energy(w)``

and it inverts by a plain inverse DFT in the ``omega`` axis,

    ``w(x + k) = (1/L) * sum_m Zw(x, m/L) * exp(2j*pi*k*m/L)``.

Shifts are the usual time-frequency operators ``pi(u, eta) = M_eta T_u``,
i.e. ``(pi(u,eta) w)(x) = exp(2j*pi*eta*x) * w(x - u)``, and satisfy the
covariance identity

    ``Z(pi(u,eta) w)(x, omega) = exp(2j*pi*eta*x) * Zw(x - u, omega - eta)``

exactly on the grid whenever ``u`` is a multiple of ``1/Nx`` and ``eta`` a
multiple of ``1/L``.  All breakpoints, shifts and query points are handled
as exact rationals (:class:`fractions.Fraction`); windows whose samples are
rational additionally carry an exact amplitude layer (see
:mod:`zakbench.exact`) so the identities above check out with defect 0.0
rather than round-off noise.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exact import (
    Amp,
    ExactSamples,
    amp_abs2,
    amp_turned,
    dense_from_exact,
)


class ZakError(ValueError):
    """Base class for precondition violations in this package."""


class GridAlignmentError(ZakError):
    """A rational quantity does not land on the sampling grid."""


class ResolutionError(ZakError):
    """A grid resolution is too small or has the wrong divisibility."""


class PhaseError(RuntimeError):
    """Phase unwrapping failed ('zero crossing' or 'phase aliasing')."""


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and (exactly representable) floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise GridAlignmentError(f"expected a rational number, got {x!r}")


def require_divisible(n: int, d: int, what: str) -> None:
    if d <= 0 or n % d != 0:
        raise ResolutionError(f"{n} not divisible by {d} (required {what})")


@dataclass(frozen=True)
class TimeFrequencyShift:
    """Lattice-free time-frequency shift ``pi(u, eta) = M_eta T_u``."""

    u: Fraction
    eta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "u", as_fraction(self.u))
        object.__setattr__(self, "eta", as_fraction(self.eta))

    def __str__(self):
        return f"({self.u},{self.eta})"


@dataclass(frozen=True, eq=False)
class SampledWindow:
    """A finitely supported window sampled at ``sample_rate`` points per unit.

    Attributes
    ----------
    sample_rate : int
        Samples per unit interval (``N``).
    start_index : int
        Grid index of the first stored sample; its position is
        ``start_index / sample_rate``.
    samples : ndarray
        Complex amplitudes; everything outside the stored range is zero.
    exact : dict, optional
        Sparse exact amplitudes ``{absolute index: (coeff, turn)}`` for
        windows with rational data.  When present, ``samples`` is its float
        realization.
    tail_bound : float
        For truncated analytic windows, a bound on the discarded amplitude
        at the truncation edge (0.0 for exactly supported windows).
    """

    sample_rate: int
    start_index: int
    samples: np.ndarray
    label: str = ""
    exact: Optional[ExactSamples] = None
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.sample_rate < 1:
            raise ResolutionError(f"sample_rate must be >= 1, got {self.sample_rate}")
        arr = np.ascontiguousarray(np.asarray(self.samples, dtype=np.complex128))
        if arr.ndim != 1 or arr.size == 0:
            raise ZakError("samples must be a nonempty 1-d array")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ZakError("samples must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2)) / self.sample_rate

    @property
    def exact_energy(self) -> Optional[Fraction]:
        if self.exact is None:
            return None
        total = sum((amp_abs2(a) for a in self.exact.values()), Fraction(0))
        return total / self.sample_rate

    def position(self, j: int) -> Fraction:
        return Fraction(self.start_index + j, self.sample_rate)

    def positions(self) -> np.ndarray:
        return (self.start_index + np.arange(self.samples.size)) / self.sample_rate

    @property
    def support(self) -> Tuple[Fraction, Fraction]:
        """Grid interval ``[first sample, one past last sample)``."""
        return (
            Fraction(self.start_index, self.sample_rate),
            Fraction(self.start_index + len(self), self.sample_rate),
        )


def window_from_exact(
    sample_rate: int,
    exact: ExactSamples,
    label: str = "",
    tail_bound: float = 0.0,
) -> SampledWindow:
    """Build a window from sparse exact samples (trimming zero margins)."""
    nonzero = {i: a for i, a in exact.items() if a[0] != 0}
    if not nonzero:
        return SampledWindow(sample_rate, 0, np.zeros(1, dtype=np.complex128), label)
    start = min(nonzero)
    length = max(nonzero) - start + 1
    dense = dense_from_exact(nonzero, start, length)
    return SampledWindow(sample_rate, start, dense, label, nonzero, tail_bound)


def same_signal(a: SampledWindow, b: SampledWindow, tol: float = 0.0) -> bool:
    """Compare two windows as functions, ignoring zero padding."""
    if a.sample_rate != b.sample_rate:
        return False
    lo = min(a.start_index, b.start_index)
    hi = max(a.start_index + len(a), b.start_index + len(b))
    va = np.zeros(hi - lo, dtype=np.complex128)
    vb = np.zeros(hi - lo, dtype=np.complex128)
    va[a.start_index - lo : a.start_index - lo + len(a)] = a.samples
    vb[b.start_index - lo : b.start_index - lo + len(b)] = b.samples
    if tol == 0.0:
        return bool(np.array_equal(va, vb))
    scale = max(np.max(np.abs(va)), np.max(np.abs(vb)), 1e-300)
    return bool(np.max(np.abs(va - vb)) <= tol * scale)


def tf_shift(w: SampledWindow, shift: TimeFrequencyShift) -> SampledWindow:
    """Apply ``pi(u, eta)``: translate by ``u``, then modulate by ``eta``.

    ``u`` must be a multiple of ``1/sample_rate``; the result is
    ``exp(2j*pi*eta*x) * w(x - u)`` with energy preserved (exactly so for
    windows carrying the exact layer).
    """
    n = w.sample_rate
    du = shift.u * n
    if du.denominator != 1:
        raise GridAlignmentError(
            f"shift u={shift.u} not grid-aligned: u*{n} is not an integer"
        )
    di = int(du)
    start = w.start_index + di
    xs = (start + np.arange(len(w))) / n
    phases = np.exp(2j * np.pi * float(shift.eta) * xs)
    # exp() of a real float argument can lose the last bit of |.|=1; for
    # exact-layer windows the modulation is tracked as a rational turn
    # instead, which keeps energy exactly invariant.
    samples = w.samples * phases if shift.eta != 0 else w.samples.copy()
    exact = None
    if w.exact is not None:
        exact = {}
        for i, a in w.exact.items():
            j = i + di
            exact[j] = amp_turned(a, shift.eta * Fraction(j, n))
        samples = dense_from_exact(exact, start, len(w))
    label = f"shift{shift}[{w.label}]" if w.label else f"shift{shift}"
    return SampledWindow(n, start, samples, label, exact, w.tail_bound)


@dataclass(frozen=True, eq=False)
class ZakGrid:
    """Discrete Zak transform values on ``[0,1) x [0,1)``.

    ``values[j, m] = Zw(j/nx, m/n_omega)``; ``k_min..k_max`` is the range of
    integer translates that contributed (the window support in units).
    ``exact_gathers``, when present, stores for each ``j`` the sparse exact
    translate data ``{k: (coeff, turn)}`` with
    ``w(j/nx + k) = coeff * exp(2j*pi*turn)``.
    """

    nx: int
    n_omega: int
    values: np.ndarray
    k_min: int
    k_max: int
    exact_gathers: Optional[Tuple[Dict[int, Amp], ...]] = None
    label: str = ""

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=np.complex128))
        if arr.shape != (self.nx, self.n_omega):
            raise ZakError(
                f"values shape {arr.shape} != (nx, n_omega) = "
                f"({self.nx}, {self.n_omega})"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        if self.k_max - self.k_min + 1 > self.n_omega:
            raise ResolutionError(
                f"omega resolution below support span: need n_omega >= "
                f"{self.k_max - self.k_min + 1}, got {self.n_omega}"
            )

    @property
    def span(self) -> int:
        return self.k_max - self.k_min + 1

    def x_fractions(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(j, self.nx) for j in range(self.nx))

    def omega_fractions(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(m, self.n_omega) for m in range(self.n_omega))

    @property
    def grid_norm2(self) -> float:
        """Discrete ``L^2([0,1)^2)`` norm squared; equals window energy."""
        return float(np.sum(np.abs(self.values) ** 2)) / (self.nx * self.n_omega)

    def lookup(self, x, omega) -> complex:
        return zak_lookup(self, x, omega)


def _translate_matrix(w: SampledWindow, k_min: int, k_max: int) -> np.ndarray:
    """Gather ``G[j, k-k_min] = w(j/N + k)`` as a dense matrix."""
    n = w.sample_rate
    ks = np.arange(k_min, k_max + 1)
    idx = np.arange(n)[:, None] + ks[None, :] * n - w.start_index
    valid = (idx >= 0) & (idx < len(w))
    g = np.zeros((n, ks.size), dtype=np.complex128)
    g[valid] = w.samples[idx[valid]]
    return g


def zak(w: SampledWindow, n_omega: int) -> ZakGrid:
    """Discrete Zak transform of ``w`` with ``n_omega`` frequency rows.

    ``n_omega`` must be at least the number of unit intervals covered by the
    support so the translate sum is alias-free and invertible.
    """
    n = w.sample_rate
    k_min = w.start_index // n
    k_max = (w.start_index + len(w) - 1) // n
    span = k_max - k_min + 1
    if n_omega < span:
        raise ResolutionError(
            f"omega resolution below support span: need n_omega >= {span}, "
            f"got {n_omega}"
        )
    g = _translate_matrix(w, k_min, k_max)
    ks = np.arange(k_min, k_max + 1)
    ms = np.arange(n_omega)
    twiddle = np.exp(-2j * np.pi * np.outer(ks, ms) / n_omega)
    values = g @ twiddle
    gathers = None
    if w.exact is not None:
        rows = []
        for j in range(n):
            row: Dict[int, Amp] = {}
            for k in range(k_min, k_max + 1):
                a = w.exact.get(j + k * n)
                if a is not None:
                    row[k] = a
            rows.append(row)
        gathers = tuple(rows)
    return ZakGrid(n, n_omega, values, k_min, k_max, gathers, w.label)


def zak_lookup(grid: ZakGrid, x, omega) -> complex:
    """Evaluate the quasiperiodic extension at an exact rational point."""
    xf = as_fraction(x)
    of = as_fraction(omega)
    jx = xf * grid.nx
    if jx.denominator != 1:
        raise GridAlignmentError(f"query not on grid: x={xf} (nx={grid.nx})")
    mo = of * grid.n_omega
    if mo.denominator != 1:
        raise GridAlignmentError(
            f"query not on grid: omega={of} (n_omega={grid.n_omega})"
        )
    n, j = divmod(int(jx), grid.nx)
    m = int(mo) % grid.n_omega
    value = complex(grid.values[j, m])
    if n == 0:
        return value
    turn = float((n * of) % 1)
    return value * complex(np.exp(2j * np.pi * turn))


def zak_invert(grid: ZakGrid) -> SampledWindow:
    """Recover the window:  ``w(x+k) = (1/L) sum_m Zw(x, m/L) e^{2pi i k m/L}``.

    For grids built by :func:`zak` from an exact-layer window this round
    trip is bit-exact; otherwise it is accurate to the inverse-DFT round-off
    (<= 1e-12 relative for well-scaled data).
    """
    n, lom = grid.nx, grid.n_omega
    if grid.exact_gathers is not None:
        exact: ExactSamples = {}
        for j, row in enumerate(grid.exact_gathers):
            for k, a in row.items():
                exact[j + k * n] = a
        return window_from_exact(n, exact, label=f"invert[{grid.label}]")
    ks = np.arange(grid.k_min, grid.k_max + 1)
    ms = np.arange(lom)
    twiddle = np.exp(2j * np.pi * np.outer(ms, ks) / lom)
    g = (grid.values @ twiddle) / lom  # (nx, span)
    start = grid.k_min * n
    samples = np.ascontiguousarray(g.T).reshape(-1)
    # trim margins that are exactly zero so trivial padding does not grow
    nz = np.nonzero(samples)[0]
    if nz.size == 0:
        return SampledWindow(n, 0, np.zeros(1, dtype=np.complex128), grid.label)
    samples = samples[nz[0] : nz[-1] + 1]
    return SampledWindow(n, start + int(nz[0]), samples, f"invert[{grid.label}]")


def synthesize_grid(
    values: np.ndarray, k_min: int, k_max: int, label: str = ""
) -> ZakGrid:
    """Wrap raw quasiperiodic data as a ZakGrid (for constructed fields)."""
    arr = np.asarray(values, dtype=np.complex128)
    return ZakGrid(arr.shape[0], arr.shape[1], arr, k_min, k_max, None, label)


class ZakDiagnostics(NamedTuple):
    unitarity_defect: float
    covariance_defect: float
    exact: bool
    tail_bound: float


def _check_alignment(grid: ZakGrid, shift: TimeFrequencyShift) -> Tuple[int, int]:
    du = shift.u * grid.nx
    if du.denominator != 1:
        raise GridAlignmentError(
            f"shift u={shift.u} not grid-aligned: u*{grid.nx} is not an integer"
        )
    dm = shift.eta * grid.n_omega
    if dm.denominator != 1:
        raise GridAlignmentError(
            f"shift eta={shift.eta} not grid-aligned: eta*{grid.n_omega} "
            "is not an integer"
        )
    return int(du), int(dm)


def _covariance_rhs(grid: ZakGrid, shift: TimeFrequencyShift) -> np.ndarray:
    """``exp(2j*pi*eta*x) * Zw(x-u, omega-eta)`` assembled from lookups."""
    nx, lom = grid.nx, grid.n_omega
    di, dm = _check_alignment(grid, shift)
    js = np.arange(nx)
    jstar = js - di
    jsrc = jstar % nx
    wraps = (jstar - jsrc) // nx
    msrc = (np.arange(lom) - dm) % lom
    omega_shifted = np.arange(lom) / lom - float(shift.eta)
    base = grid.values[np.ix_(jsrc, msrc)]
    mod = np.exp(2j * np.pi * float(shift.eta) * (js / nx))[:, None]
    quasi = np.exp(2j * np.pi * np.outer(wraps, omega_shifted))
    return mod * quasi * base


def _covariance_exact_matches(
    src: ZakGrid, shifted: ZakGrid, shift: TimeFrequencyShift
) -> bool:
    nx = src.nx
    di = int(shift.u * nx)
    for j in range(nx):
        jstar = j - di
        jsrc = jstar % nx
        wrap = (jstar - jsrc) // nx
        expected: Dict[int, Amp] = {}
        for k, a in src.exact_gathers[jsrc].items():
            kk = k - wrap
            expected[kk] = amp_turned(a, shift.eta * Fraction(j + kk * nx, nx))
        if expected != shifted.exact_gathers[j]:
            return False
    return True


def validate_zak(
    w: SampledWindow, grid: ZakGrid, shift: TimeFrequencyShift
) -> ZakDiagnostics:
    """Measure the unitarity and covariance defects of ``grid = zak(w)``.

    Unitarity defect: ``| ||Zw||^2_grid - energy | / energy``.
    Covariance defect: ``max | Z(pi(u,eta)w) - exp(2j*pi*eta*x) Zw(.-u,.-eta) |``
    over the grid.  Both are exactly 0.0 for windows carrying the exact
    amplitude layer; for float windows they sit at the round-off floor.
    """
    if grid.nx != w.sample_rate:
        raise ZakError(
            f"grid nx={grid.nx} does not match window sample_rate={w.sample_rate}"
        )
    _check_alignment(grid, shift)
    exact_mode = w.exact is not None and grid.exact_gathers is not None

    if exact_mode:
        total = sum(
            (amp_abs2(a) for row in grid.exact_gathers for a in row.values()),
            Fraction(0),
        )
        grid_norm2 = Fraction(total, w.sample_rate)
        energy = w.exact_energy
        unit = float(abs(grid_norm2 - energy) / energy) if energy else 0.0
    else:
        energy = w.energy
        unit = abs(grid.grid_norm2 - energy) / energy

    shifted_grid = zak(tf_shift(w, shift), grid.n_omega)
    if exact_mode and shifted_grid.exact_gathers is not None:
        if _covariance_exact_matches(grid, shifted_grid, shift):
            cov = 0.0
        else:  # pragma: no cover - structural identity, kept as a guard
            cov = float(
                np.max(np.abs(shifted_grid.values - _covariance_rhs(grid, shift)))
            )
    else:
        cov = float(
            np.max(np.abs(shifted_grid.values - _covariance_rhs(grid, shift)))
        )
    return ZakDiagnostics(unit, cov, exact_mode, w.tail_bound)


class SpreadResult(NamedTuple):
    time_spread: float
    frequency_spread: float
    product: float


def time_frequency_spread(
    w: SampledWindow, a: float = 0.0, b: float = 0.0, pad: int = 8
) -> SpreadResult:
    """Second moments about ``(a, b)`` in time and frequency.

    Time: ``(1/N) sum (x_j - a)^2 |w_j|^2 / energy``.  Frequency: the same
    moment of the zero-padded DFT (pad factor ``pad``), whose frequency grid
    ``fftfreq(pad*len, 1/N)`` covers the band ``[-N/2, N/2)``; the padded
    periodogram satisfies the discrete Parseval identity exactly, so the
    reported moment is the Riemann sum of ``(nu-b)^2 |what|^2`` at spacing
    ``N/(pad*len)``.
    """
    if pad < 1:
        raise ZakError(f"pad must be >= 1, got {pad}")
    energy = w.energy
    if energy <= 0:
        raise ZakError("window has zero energy")
    xs = w.positions()
    p2 = np.abs(w.samples) ** 2
    dt2 = float(np.sum((xs - a) ** 2 * p2)) / (w.sample_rate * energy)
    m = pad * len(w)
    spec = np.fft.fft(w.samples, n=m)
    nu = np.fft.fftfreq(m, d=1.0 / w.sample_rate)
    dw2 = float(np.sum((nu - b) ** 2 * np.abs(spec) ** 2)) / (
        w.sample_rate * m * energy
    )
    return SpreadResult(dt2, dw2, dt2 * dw2)


def feichtinger_norm_estimate(
    w: SampledWindow, t_max: float, k_max: float, step: float = 0.5
) -> float:
    """Riemann-sum modulation-space norm proxy.

    Integrates ``|V w(t, nu)|`` over ``[-t_max, t_max] x [-k_max, k_max]``
    at spacing ``step``, where ``V`` is the Gaussian-windowed transform
    ``V w(t, nu) = (1/N) sum_j w_j exp(-(x_j - t)^2) exp(2j*pi*x_j*nu)``.
    The grids contain every multiple of ``step`` in range, so the estimate
    is monotone nondecreasing in both ``t_max`` and ``k_max``.
    """
    if t_max <= 0 or k_max <= 0 or step <= 0:
        raise ZakError("t_max, k_max and step must be positive")
    nt = int(np.floor(t_max / step + 1e-9))
    nk = int(np.floor(k_max / step + 1e-9))
    ts = step * np.arange(-nt, nt + 1)
    nus = step * np.arange(-nk, nk + 1)
    xs = w.positions()
    kernel = np.exp(2j * np.pi * np.outer(xs, nus))
    total = 0.0
    for t in ts:
        weighted = w.samples * np.exp(-((xs - t) ** 2))
        row = weighted @ kernel / w.sample_rate
        total += float(np.sum(np.abs(row)))
    return total * step * step


def write_grid_csv(
    path: str,
    x_fractions: Sequence[Fraction],
    omega_fractions: Sequence[Fraction],
    values: np.ndarray,
) -> None:
    """Dump a complex grid as ``x,omega,re,im`` rows (x-major order).

    Rationals are rendered exactly (``p/q``); amplitudes get 17 significant
    digits.  The file is written atomically: either the complete dump
    appears at ``path`` or nothing does.
    """
    arr = np.asarray(values)
    if arr.shape != (len(x_fractions), len(omega_fractions)):
        raise ZakError(
            f"grid shape {arr.shape} does not match axes "
            f"({len(x_fractions)}, {len(omega_fractions)})"
        )
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write("x,omega,re,im\n")
        for xf, row in zip(x_fractions, arr):
            xs = str(xf)
            for of, v in zip(omega_fractions, row):
                c = complex(v)
                fh.write(f"{xs},{of},{c.real:.17g},{c.imag:.17g}\n")
    os.replace(tmp, path)


def dump_zak_csv(grid: ZakGrid, path: str) -> None:
    write_grid_csv(path, grid.x_fractions(), grid.omega_fractions(), grid.values)
