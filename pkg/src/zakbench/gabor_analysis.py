"""Gabor frame analysis on rational lattices through the Zak domain.

A lattice ``(1/Q)Z x PZ`` with ``gcd(P, Q) = 1`` has density ``Q/P``.  The
Gabor system it generates from a window ``w`` is governed, after a Zak
transform, by the ``Q x P`` matrix field

    ``Phi[q][p](x, omega) = Zw(x - q/Q - p/P, omega)``

on the fundamental domain ``[0, 1/P) x [0, 1)``: the system is a Riesz
sequence precisely when the singular values of ``Phi`` are bounded away
from zero and infinity, and the optimal bounds are

    ``A = ess-inf sigma_min(Phi)^2,   B = ess-sup sigma_max(Phi)^2``.

For ``Q = 1`` this reduces to the classical scalar criterion
``A <= sum_p |Zw(x - p/P, omega)|^2 <= B``.

Membership of a shifted window ``pi(u, eta) w`` in the closed span of the
system is a pointwise least-squares problem: multipliers ``h_q(x, omega)``
that are ``1/P``-periodic in ``x`` must satisfy, for every residue
``p = 0..P-1``,

    ``sum_q h_q(x0, w0) * Zw(x0 + p/P - q/Q, w0)
        = exp(2j*pi*eta*(x0 + p/P)) * Zw(x0 + p/P - u, w0 - eta)``.

:func:`invariance_test` solves this ``P x Q`` system on every grid point of
the fundamental domain and aggregates the residual into a relative ``L^2``
distance; a residual at round-off level certifies membership, a residual
bounded away from zero certifies obstruction.

The remaining operations quantify *why* obstructions appear for smooth
windows: products ``prod_r h(x + r*u, omega + r*eta)`` of a continuous
multiplier must match pure exponentials ``exp(2j*pi*sign*(M1*x + M2*w))``,
and the winding numbers of ``h`` along its periods then satisfy integer
identities (``R*P1*q1 + sign*M1 = 0`` and likewise in omega) that force
divisibility constraints -- the discrete heart of the Balian-Low-type
obstruction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

import numpy as np

from .zak_core import (
    GridAlignmentError,
    PhaseError,
    ResolutionError,
    TimeFrequencyShift,
    ZakError,
    ZakGrid,
    as_fraction,
    require_divisible,
)


class RankDeficiencyError(ZakError):
    """A matrix field lost full row rank where it was required."""


@dataclass(frozen=True)
class RationalLattice:
    """Time-frequency lattice ``(1/Q)Z x PZ`` with coprime ``P`` and ``Q``."""

    q: int
    p: int

    def __post_init__(self):
        if self.q < 1 or self.p < 1:
            raise ZakError(f"lattice parameters must be positive, got {self}")
        if math.gcd(self.p, self.q) != 1:
            raise ZakError(
                f"lattice parameters must be coprime, got P={self.p}, Q={self.q}"
            )

    @property
    def density(self) -> Fraction:
        return Fraction(self.q, self.p)

    def __str__(self):
        return f"(1/{self.q})Z x {self.p}Z"


@dataclass(frozen=True, eq=False)
class ZZField:
    """Matrix field over the fundamental domain ``[0,1/P) x [0,1)``.

    ``matrices[j, m]`` is the ``Q x P`` matrix at ``x = j/nx``,
    ``omega = m/n_omega``; entries are exact quasiperiodic lookups into the
    source :class:`~zakbench.zak_core.ZakGrid` (no Zak sums are recomputed).
    """

    lattice: RationalLattice
    nx: int
    n_omega: int
    matrices: np.ndarray
    kind: str = "analysis"
    label: str = ""

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.matrices, dtype=np.complex128))
        expected = (self.nx // self.lattice.p, self.n_omega,
                    self.lattice.q, self.lattice.p)
        if arr.shape != expected:
            raise ZakError(f"matrix field shape {arr.shape} != {expected}")
        arr.flags.writeable = False
        object.__setattr__(self, "matrices", arr)

    def x_fractions(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(j, self.nx) for j in range(self.nx // self.lattice.p))

    def omega_fractions(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(m, self.n_omega) for m in range(self.n_omega))


def _quasiperiodic_block(
    grid: ZakGrid,
    j_points: np.ndarray,
    x_offset: Fraction,
    eta: Fraction = Fraction(0),
) -> np.ndarray:
    """Rows ``Zw(x_j + x_offset, omega - eta)`` for the given x indices.

    Implements exactly the quasiperiodic accessor of :func:`zak_lookup`
    in vectorized form: reduce the x argument mod 1, multiply by
    ``exp(2j*pi*n*(omega - eta))`` for the unit wraps ``n``, and shift the
    omega axis cyclically by ``eta``.
    """
    nx, lom = grid.nx, grid.n_omega
    dj = x_offset * nx
    if dj.denominator != 1:
        raise GridAlignmentError(
            f"offset {x_offset} not grid-aligned: times {nx} is not an integer"
        )
    dm = eta * lom
    if dm.denominator != 1:
        raise GridAlignmentError(
            f"offset eta={eta} not grid-aligned: times {lom} is not an integer"
        )
    jstar = j_points + int(dj)
    jsrc = jstar % nx
    wraps = (jstar - jsrc) // nx
    msrc = (np.arange(lom) - int(dm)) % lom
    omega_actual = np.arange(lom) / lom - float(eta)
    base = grid.values[np.ix_(jsrc, msrc)]
    if np.any(wraps != 0):
        base = base * np.exp(2j * np.pi * np.outer(wraps, omega_actual))
    return base


def zz_field(grid: ZakGrid, lattice: RationalLattice) -> ZZField:
    """Assemble ``Phi[q][p](x,w) = Zw(x - q/Q - p/P, w)`` on ``[0,1/P)x[0,1)``."""
    p, q = lattice.p, lattice.q
    step = p * q // math.gcd(p, q)
    require_divisible(grid.nx, step, f"for lattice {lattice}")
    npx = grid.nx // p
    js = np.arange(npx)
    mats = np.empty((npx, grid.n_omega, q, p), dtype=np.complex128)
    for qi in range(q):
        for pi in range(p):
            off = -Fraction(qi, q) - Fraction(pi, p)
            mats[:, :, qi, pi] = _quasiperiodic_block(grid, js, off)
    return ZZField(lattice, grid.nx, grid.n_omega, mats, "analysis", grid.label)


@dataclass(frozen=True)
class SpectralBounds:
    """Extremal squared singular values of a matrix field.

    ``lower``/``upper`` are the best Riesz-type constants for the lattice
    system; ``argmin``/``argmax`` are the grid points attaining them and
    ``rank_margin`` is the smallest singular value seen anywhere (a row-rank
    certificate when positive).
    """

    lower: float
    upper: float
    argmin: Tuple[Fraction, Fraction]
    argmax: Tuple[Fraction, Fraction]
    rank_margin: float

    @property
    def bounds(self) -> Tuple[float, float]:
        return (self.lower, self.upper)

    def as_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "argmin": [str(self.argmin[0]), str(self.argmin[1])],
            "argmax": [str(self.argmax[0]), str(self.argmax[1])],
            "rank_margin": self.rank_margin,
        }


def riesz_bounds(field: ZZField) -> SpectralBounds:
    """Extremes of ``sigma(Phi)^2`` over the grid (lower bound 0 if Q > P)."""
    svals = np.linalg.svd(field.matrices, compute_uv=False)
    smin = svals[..., -1]
    smax = svals[..., 0]
    imin = np.unravel_index(np.argmin(smin), smin.shape)
    imax = np.unravel_index(np.argmax(smax), smax.shape)
    xfr = field.x_fractions()
    ofr = field.omega_fractions()
    full_row_rank_possible = field.lattice.q <= field.lattice.p
    margin = float(smin[imin]) if full_row_rank_possible else 0.0
    lower = margin**2
    return SpectralBounds(
        lower,
        float(smax[imax]) ** 2,
        (xfr[imin[0]], ofr[imin[1]]),
        (xfr[imax[0]], ofr[imax[1]]),
        margin,
    )


def dual_field(field: ZZField, rank_tol: float = 1e-8) -> ZZField:
    """Canonical dual ``Psi = S^{-1} Phi`` with ``S = Phi Phi*``.

    Requires the rank margin to clear ``rank_tol``; the dual then satisfies
    the reproducing identity ``Phi Psi* = I_Q`` pointwise.
    """
    bounds = riesz_bounds(field)
    if bounds.rank_margin <= rank_tol:
        raise RankDeficiencyError(
            f"rank margin {bounds.rank_margin:.3e} <= {rank_tol:.1e} "
            f"at (x, omega) = {bounds.argmin}"
        )
    mats = field.matrices
    gram = mats @ mats.conj().swapaxes(-1, -2)
    psi = np.linalg.solve(gram, mats)
    return ZZField(field.lattice, field.nx, field.n_omega, psi, "dual", field.label)


@dataclass(frozen=True, eq=False)
class HGrid:
    """A multiplier sampled on one periodicity cell ``[0,1/p1) x [0,1/p2)``.

    The accessor extends periodically; ``values[j, m]`` sits at
    ``x = j/(p1*nx_cell)``, ``omega = m/(p2*nw_cell)``.
    """

    p1: int
    p2: int
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=np.complex128))
        if arr.ndim != 2:
            raise ZakError("HGrid values must be 2-d")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def nx_cell(self) -> int:
        return self.values.shape[0]

    @property
    def nw_cell(self) -> int:
        return self.values.shape[1]

    def lookup(self, x, omega) -> complex:
        xf = as_fraction(x) % Fraction(1, self.p1)
        of = as_fraction(omega) % Fraction(1, self.p2)
        jx = xf * self.p1 * self.nx_cell
        mo = of * self.p2 * self.nw_cell
        if jx.denominator != 1 or mo.denominator != 1:
            raise GridAlignmentError(
                f"query not on grid: (x, omega) = ({x}, {omega})"
            )
        return complex(self.values[int(jx), int(mo)])

    def full_torus(self) -> np.ndarray:
        """Periodic extension to ``[0,1) x [0,1)``."""
        return np.tile(self.values, (self.p1, self.p2))

    @classmethod
    def from_function(
        cls,
        fn: Callable[[Fraction, Fraction], complex],
        p1: int,
        p2: int,
        nx_cell: int,
        nw_cell: int,
        label: str = "",
    ) -> "HGrid":
        vals = np.empty((nx_cell, nw_cell), dtype=np.complex128)
        for j in range(nx_cell):
            xf = Fraction(j, p1 * nx_cell)
            for m in range(nw_cell):
                vals[j, m] = fn(xf, Fraction(m, p2 * nw_cell))
        return cls(p1, p2, vals, label)


@dataclass(frozen=True)
class InvarianceCertificates:
    """Optional product/winding evidence attached to a membership test."""

    r: int
    m1: int
    m2: int
    product_defect_minus: float
    product_defect_plus: float
    winding: Optional[Tuple[int, int]]
    winding_error: Optional[str]


@dataclass(frozen=True, eq=False)
class InvarianceReport:
    """Outcome of the least-squares membership test for one shift."""

    lattice: RationalLattice
    shift: TimeFrequencyShift
    tol: float
    residual: float
    decision: bool
    residual_grid: np.ndarray
    multipliers: Tuple[HGrid, ...]
    degenerate_points: Tuple[Tuple[Fraction, Fraction], ...]
    certificates: Optional[InvarianceCertificates] = None

    def as_dict(self) -> dict:
        doc = {
            "lattice": {"Q": self.lattice.q, "P": self.lattice.p},
            "shift": [str(self.shift.u), str(self.shift.eta)],
            "tol": self.tol,
            "residual": self.residual,
            "member": self.decision,
            "degenerate_points": [
                [str(a), str(b)] for a, b in self.degenerate_points
            ],
        }
        if self.certificates is not None:
            c = self.certificates
            doc["certificates"] = {
                "R": c.r,
                "M1": c.m1,
                "M2": c.m2,
                "product_defect_minus": c.product_defect_minus,
                "product_defect_plus": c.product_defect_plus,
                "winding": list(c.winding) if c.winding else None,
                "winding_error": c.winding_error,
            }
        return doc


def invariance_test(
    grid: ZakGrid,
    lattice: RationalLattice,
    shift: TimeFrequencyShift,
    tol: float = 1e-6,
    certificates: bool = False,
    svd_tol: float = 1e-12,
) -> InvarianceReport:
    """Least-squares test for ``pi(u, eta) w`` in the lattice Gabor space.

    Solves the ``P``-equation, ``Q``-unknown system described in the module
    docstring at every point of ``[0, 1/P) x [0, 1)`` with a rank-revealing
    SVD (singular values below ``svd_tol`` times the global maximum are
    treated as zero).  The aggregate residual

        ``sqrt( sum cell_area * ||M h - b||^2 ) / ||w||``

    is a relative L^2 distance, so it lies in ``[0, 1]`` up to round-off.
    Grid points whose matrix vanishes entirely are flagged, excluded from
    multiplier recovery, and contribute ``||b||^2`` to the residual.
    """
    p, q = lattice.p, lattice.q
    require_divisible(grid.nx, p * q // math.gcd(p, q), f"for lattice {lattice}")
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
    nx, lom = grid.nx, grid.n_omega
    npx = nx // p
    js = np.arange(npx)

    mat = np.empty((npx, lom, p, q), dtype=np.complex128)
    rhs = np.empty((npx, lom, p), dtype=np.complex128)
    for pi in range(p):
        for qi in range(q):
            off = Fraction(pi, p) - Fraction(qi, q)
            mat[:, :, pi, qi] = _quasiperiodic_block(grid, js, off)
        branch = _quasiperiodic_block(grid, js, Fraction(pi, p) - shift.u, shift.eta)
        xs = js / nx + pi / p
        rhs[:, :, pi] = branch * np.exp(2j * np.pi * float(shift.eta) * xs)[:, None]

    m_flat = mat.reshape(-1, p, q)
    b_flat = rhs.reshape(-1, p)
    u_svd, s, vh = np.linalg.svd(m_flat, full_matrices=False)
    global_smax = float(s.max()) if s.size else 0.0
    cut = svd_tol * global_smax
    sinv = np.where(s > cut, 1.0 / np.where(s > cut, s, 1.0), 0.0)
    coeff = np.einsum("npk,np->nk", u_svd.conj(), b_flat)
    h = np.einsum("nkq,nk->nq", vh.conj(), sinv * coeff)
    resid_vec = np.einsum("npq,nq->np", m_flat, h) - b_flat
    rnorm2 = np.sum(np.abs(resid_vec) ** 2, axis=1)

    degenerate_mask = s[:, 0] <= cut
    degenerate: List[Tuple[Fraction, Fraction]] = []
    if np.any(degenerate_mask):
        for idx in np.nonzero(degenerate_mask)[0]:
            jj, mm = divmod(int(idx), lom)
            degenerate.append((Fraction(jj, nx), Fraction(mm, lom)))

    norm = math.sqrt(grid.grid_norm2)
    residual = math.sqrt(float(np.sum(rnorm2)) / (nx * lom)) / norm
    residual_grid = np.sqrt(rnorm2).reshape(npx, lom)
    multipliers = tuple(
        HGrid(p, 1, h.reshape(npx, lom, q)[:, :, qi], f"h[{qi}]")
        for qi in range(q)
    )

    certs = None
    if certificates and q == 1:
        certs = _membership_certificates(multipliers[0], lattice, shift)

    return InvarianceReport(
        lattice,
        shift,
        tol,
        residual,
        residual <= tol,
        residual_grid,
        multipliers,
        tuple(degenerate),
        certs,
    )


def _membership_certificates(
    h: HGrid, lattice: RationalLattice, shift: TimeFrequencyShift
) -> InvarianceCertificates:
    u, eta = shift.u, shift.eta
    r = 1
    if u != 0:
        r = u.denominator
    if eta != 0:
        eta_over_p = eta / lattice.p
        r = r * eta_over_p.denominator // math.gcd(r, eta_over_p.denominator)
    m2 = int(r * u)
    m1 = int(r * eta)
    d_minus = h_product_check(h, r, shift, m1, m2, -1)
    d_plus = h_product_check(h, r, shift, m1, m2, +1)
    winding = None
    winding_error = None
    try:
        winding = winding_numbers(h)
    except PhaseError as exc:
        winding_error = str(exc)
    return InvarianceCertificates(r, m1, m2, d_minus, d_plus, winding, winding_error)


def h_product_check(
    h: HGrid,
    r_steps: int,
    shift: TimeFrequencyShift,
    m1: int,
    m2: int,
    sign: int,
) -> float:
    """Sup defect of ``prod_{r=0}^{R-1} h(x+r*u, w+r*eta)`` vs a pure exponential.

    The target is ``exp(2j*pi*sign*(m1*x + m2*omega))``; ``sign`` selects
    between the two phase conventions in circulation.  Shifts must land on
    the torus grid spanned by the multiplier's resolution.
    """
    if sign not in (-1, 1):
        raise ZakError(f"sign must be +1 or -1, got {sign}")
    if r_steps < 1:
        raise ZakError(f"need at least one factor, got R={r_steps}")
    full = h.full_torus()
    gx, gw = full.shape
    du = shift.u * gx
    dm = shift.eta * gw
    if du.denominator != 1 or dm.denominator != 1:
        raise GridAlignmentError(
            f"shift {shift} not aligned with the multiplier grid "
            f"({gx} x {gw} on the torus)"
        )
    prod = np.ones_like(full)
    for r in range(r_steps):
        prod = prod * np.roll(full, (-r * int(du), -r * int(dm)), axis=(0, 1))
    xs = np.arange(gx) / gx
    ws = np.arange(gw) / gw
    target = np.exp(2j * np.pi * sign * (m1 * xs[:, None] + m2 * ws[None, :]))
    return float(np.max(np.abs(prod - target)))


def winding_numbers(h: HGrid, zero_tol: float = 1e-9) -> Tuple[int, int]:
    """Winding of a nonvanishing multiplier along each of its periods.

    Returns ``(q1, q2)`` with
    ``q1 = (arg h(0,0) - arg h(1/p1, 0)) / (2 pi)`` after unwrapping along
    x (and the analogue along omega).  Unwrapping runs along every grid row
    and column, so a jump anywhere on the torus -- not just on the axes --
    is detected.

    Raises
    ------
    PhaseError
        ``"zero crossing ..."`` when ``|h|`` dips below ``zero_tol`` times
        its maximum; ``"phase aliasing ..."`` when a single step moves the
        phase by ``>= 0.9 pi`` or the per-row windings fail to agree with a
        common integer within 0.01.
    """
    vals = h.values
    amax = float(np.max(np.abs(vals)))
    amin = float(np.min(np.abs(vals)))
    if amax == 0.0 or amin <= zero_tol * amax:
        raise PhaseError(
            f"zero crossing: min |h| = {amin:.3e} on the grid "
            f"(max |h| = {amax:.3e})"
        )
    steps_x = np.angle(np.roll(vals, -1, axis=0) * np.conj(vals))
    steps_w = np.angle(np.roll(vals, -1, axis=1) * np.conj(vals))
    worst = max(float(np.max(np.abs(steps_x))), float(np.max(np.abs(steps_w))))
    if worst >= 0.9 * np.pi:
        raise PhaseError(
            f"phase aliasing: step of {worst:.3f} rad >= 0.9*pi on the grid"
        )
    wind_x = -np.sum(steps_x, axis=0) / (2 * np.pi)
    wind_w = -np.sum(steps_w, axis=1) / (2 * np.pi)
    q1 = int(np.round(wind_x[0]))
    q2 = int(np.round(wind_w[0]))
    defect = max(float(np.max(np.abs(wind_x - q1))), float(np.max(np.abs(wind_w - q2))))
    if defect > 0.01:
        raise PhaseError(
            f"phase aliasing: winding defect {defect:.3e} exceeds 0.01"
        )
    return q1, q2


@dataclass(frozen=True)
class DivisibilityCertificate:
    """Integer obstruction record for a product identity.

    A passing certificate verifies the product defect *and* the integer
    identities ``R*p1*q1 + sign*m1 = 0`` and ``R*p2*q2 + sign*m2 = 0``; a
    failing one certifies that no continuous multiplier with the stated
    periodicities can satisfy the product identity.
    """

    r: int
    p1: int
    p2: int
    m1: int
    m2: int
    sign: int
    product_defect: float
    q1: int
    q2: int
    residue1: int
    residue2: int
    product_ok: bool
    identities_ok: bool
    passed: bool

    def as_dict(self) -> dict:
        return {
            "R": self.r,
            "p1": self.p1,
            "p2": self.p2,
            "M1": self.m1,
            "M2": self.m2,
            "sign": self.sign,
            "product_defect": self.product_defect,
            "q1": self.q1,
            "q2": self.q2,
            "residue1": self.residue1,
            "residue2": self.residue2,
            "product_ok": self.product_ok,
            "identities_ok": self.identities_ok,
            "passed": self.passed,
        }


def divisibility_certificate(
    h: HGrid,
    r_steps: int,
    shift: TimeFrequencyShift,
    m1: int,
    m2: int,
    sign: int,
    product_tol: float = 1e-8,
) -> DivisibilityCertificate:
    """Check the winding-number divisibility identities for ``h``.

    Phase-unwrapping failures (zero crossings, aliasing) propagate as
    :class:`~zakbench.zak_core.PhaseError`; everything else is recorded in
    the returned certificate.
    """
    defect = h_product_check(h, r_steps, shift, m1, m2, sign)
    q1, q2 = winding_numbers(h)
    residue1 = r_steps * h.p1 * q1 + sign * m1
    residue2 = r_steps * h.p2 * q2 + sign * m2
    product_ok = defect <= product_tol
    identities_ok = residue1 == 0 and residue2 == 0
    return DivisibilityCertificate(
        r_steps,
        h.p1,
        h.p2,
        m1,
        m2,
        sign,
        defect,
        q1,
        q2,
        residue1,
        residue2,
        product_ok,
        identities_ok,
        product_ok and identities_ok,
    )


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Centered 2-D Fourier coefficients of a multiplier.

    ``coeffs[k + k_radius, l + l_radius]`` multiplies
    ``exp(2j*pi*(p1*l*x + p2*k*omega))``.  ``partial_l1[rho]`` is the ell-1
    mass of the sub-box ``max(|k|, |l|) <= rho`` -- nondecreasing in
    ``rho`` by construction.  ``aliasing_warning`` is set when the energy
    sitting on the box boundary exceeds ``1e-6`` of the boxed total, i.e.
    when the sampled grid cannot have resolved the tail.
    """

    p1: int
    p2: int
    k_radius: int
    l_radius: int
    coeffs: np.ndarray
    partial_l1: Tuple[float, ...]
    boundary_energy_ratio: float
    aliasing_warning: bool

    def coefficient(self, k: int, l: int) -> complex:
        return complex(self.coeffs[k + self.k_radius, l + self.l_radius])


def coefficients_from_h(h: HGrid, k_radius: int, l_radius: int) -> CoefficientTable:
    """Discrete Fourier coefficients of ``h`` on the centered index box.

    ``coefficient(k, l)`` multiplies ``exp(2j*pi*(k*x_cell + l*omega_cell))``
    in cell coordinates, so the cell grid must strictly oversample the box
    (``nx_cell >= 2*k_radius + 1`` and ``nw_cell >= 2*l_radius + 1``).
    """
    nxc, nwc = h.values.shape
    if nxc < 2 * k_radius + 1:
        raise ResolutionError(
            f"{nxc} x-samples cannot resolve k-radius {k_radius} "
            f"(need >= {2 * k_radius + 1})"
        )
    if nwc < 2 * l_radius + 1:
        raise ResolutionError(
            f"{nwc} omega-samples cannot resolve l-radius {l_radius} "
            f"(need >= {2 * l_radius + 1})"
        )
    full = np.fft.fft2(h.values) / (nxc * nwc)
    ks = np.arange(-k_radius, k_radius + 1)
    ls = np.arange(-l_radius, l_radius + 1)
    coeffs = full[np.ix_(ks % nxc, ls % nwc)]
    mags = np.abs(coeffs)
    rho_max = min(k_radius, l_radius)
    partial = []
    kk = np.abs(ks)[:, None] * np.ones_like(ls)[None, :]
    ll = np.ones_like(ks)[:, None] * np.abs(ls)[None, :]
    radius = np.maximum(kk, ll)
    for rho in range(rho_max + 1):
        partial.append(float(np.sum(mags[radius <= rho])))
    energy = mags**2
    boundary = (np.abs(ks)[:, None] == k_radius) | (
        np.abs(ls)[None, :] == l_radius
    )
    total = float(np.sum(energy))
    ratio = float(np.sum(energy[boundary])) / total if total > 0 else 0.0
    return CoefficientTable(
        h.p1,
        h.p2,
        k_radius,
        l_radius,
        coeffs,
        tuple(partial),
        ratio,
        ratio > 1e-6,
    )


def reconstruct_from_coefficients(
    table: CoefficientTable, nx_cell: int, nw_cell: int
) -> np.ndarray:
    """Evaluate the coefficient expansion back on a cell grid (test aid)."""
    xs = np.arange(nx_cell) / nx_cell
    ws = np.arange(nw_cell) / nw_cell
    out = np.zeros((nx_cell, nw_cell), dtype=np.complex128)
    for ki, k in enumerate(range(-table.k_radius, table.k_radius + 1)):
        for li, l in enumerate(range(-table.l_radius, table.l_radius + 1)):
            c = table.coeffs[ki, li]
            if c == 0:
                continue
            out += c * np.exp(2j * np.pi * (k * xs[:, None] + l * ws[None, :]))
    return out
