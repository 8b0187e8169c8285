"""Batch command-line front-end with JSON reports.

Subcommands: ``zak``, ``bounds``, ``invariance``, ``construct``,
``certify``, ``spread``, ``s0norm``, ``selftest``.  Every run echoes its
full parsed command into the report, so any published number can be
reproduced from the report alone.  Reports are deterministic byte-for-byte
for identical inputs apart from the ``timing_seconds`` field.

Exit codes: 0 success; 2 precondition failure (bad flags, malformed
rationals, divisibility violations, misaligned shifts); 3 numerical
certificate failure (failed selftest criterion, failed divisibility
identity, or a certificate-grade defect out of tolerance).

The environment variable ``ZAKBENCH_THREADS`` caps BLAS parallelism; it is
applied before the numerical modules load.  Results do not depend on the
thread count (all reductions are fixed-order), only timing does.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ._threads import apply_thread_cap

SCHEMA = "zakbench/1"

SUBCOMMANDS = (
    "zak",
    "bounds",
    "invariance",
    "construct",
    "certify",
    "spread",
    "s0norm",
    "selftest",
)


class CommandError(ValueError):
    """A malformed or inconsistent command line (exit code 2)."""


def configure_threads() -> Optional[str]:
    """Validate and apply the ZAKBENCH_THREADS cap to the BLAS knobs."""
    cap = os.environ.get("ZAKBENCH_THREADS")
    if cap and (not cap.isdigit() or int(cap) < 1):
        raise CommandError(
            f"ZAKBENCH_THREADS must be a positive integer, got {cap!r}"
        )
    return apply_thread_cap()


@dataclass(frozen=True)
class CommandSpec:
    """Fully validated description of one CLI invocation."""

    subcommand: str
    window: str = ""
    q: Optional[int] = None
    p: Optional[int] = None
    alpha: Optional[Fraction] = None
    beta: Optional[Fraction] = None
    shift_u: Fraction = Fraction(0)
    shift_eta: Fraction = Fraction(0)
    n: int = 720
    l: int = 64
    tol: float = 1e-6
    sign: int = -1
    a_center: float = 0.0
    b_center: float = 0.0
    pad: int = 8
    t_max: float = 8.0
    k_max: float = 16.0
    step: float = 0.5
    certificates: bool = False
    level: str = "quick"
    out: Optional[str] = None
    csv: Optional[str] = None

    def as_dict(self) -> dict:
        doc = asdict(self)
        for key in ("alpha", "beta", "shift_u", "shift_eta"):
            if doc[key] is not None:
                doc[key] = str(doc[key])
        return doc

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CommandSpec":
        doc = json.loads(text)
        for key in ("alpha", "beta"):
            if doc.get(key) is not None:
                doc[key] = Fraction(doc[key])
        for key in ("shift_u", "shift_eta"):
            doc[key] = Fraction(doc[key])
        return cls(**doc)


@dataclass
class ReportDocument:
    version: str
    command: dict
    results: dict
    provenance: dict
    timing_seconds: float
    exit_code: int = 0

    def as_dict(self, include_timing: bool = True) -> dict:
        doc = {
            "schema": SCHEMA,
            "version": self.version,
            "command": self.command,
            "results": self.results,
            "provenance": self.provenance,
        }
        if include_timing:
            doc["timing_seconds"] = self.timing_seconds
        return doc

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.as_dict(include_timing), sort_keys=True, indent=2)


def _parse_fraction(text: str, what: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise CommandError(
            f"malformed rational for {what}: {text!r} (write it as p/q, e.g. 1/2)"
        ) from exc


def _parse_shift(text: str) -> Tuple[Fraction, Fraction]:
    parts = text.split(",")
    if len(parts) != 2:
        raise CommandError(
            f"malformed shift {text!r} (write u,eta as two rationals, e.g. 1/2,0)"
        )
    return (_parse_fraction(parts[0], "shift u"),
            _parse_fraction(parts[1], "shift eta"))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zakbench",
        description="Zak-domain analysis of lattice Gabor systems",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, window=True, lattice=False, shift=False):
        if window:
            p.add_argument("--window", default="chi",
                           help="chi | indicator:lo,hi | example1 | "
                                "example1-corrected | example2[:eps] | "
                                "gaussian[:width] | bspline[:order] | @spec.json")
        p.add_argument("--N", dest="n", type=int, default=720,
                       help="samples per unit length")
        p.add_argument("--L", dest="l", type=int, default=64,
                       help="omega points per unit interval")
        if lattice:
            p.add_argument("--Q", dest="q", type=int, default=None)
            p.add_argument("--P", dest="p", type=int, default=None)
            p.add_argument("--alpha", default=None,
                           help="lattice step alpha (rational), with --beta")
            p.add_argument("--beta", default=None,
                           help="lattice step beta (rational), with --alpha")
        if shift:
            p.add_argument("--shift", default="0,0",
                           help="time-frequency shift u,eta (rationals)")
        p.add_argument("--out", default=None, help="write the JSON report here")

    p_zak = sub.add_parser("zak", help="Zak transform and identity diagnostics")
    common(p_zak, shift=True)
    p_zak.add_argument("--csv", default=None, help="dump the Zak grid as CSV")

    p_bounds = sub.add_parser("bounds", help="Riesz bounds via the matrix field")
    common(p_bounds, lattice=True)

    p_inv = sub.add_parser("invariance", help="shift-membership least squares")
    common(p_inv, lattice=True, shift=True)
    p_inv.add_argument("--tol", type=float, default=1e-6)
    p_inv.add_argument("--certificates", action="store_true",
                       help="attach product/winding certificates (Q=1 only)")
    p_inv.add_argument("--csv", default=None,
                       help="dump the per-point residual grid as CSV")

    p_con = sub.add_parser("construct", help="build a field/window/multiplier triple")
    p_con.add_argument("--spec", dest="window", default="corrected",
                       help="trivial | corrected | smooth:eps")
    p_con.add_argument("--N", dest="n", type=int, default=720)
    p_con.add_argument("--L", dest="l", type=int, default=64)
    p_con.add_argument("--sign", default="-1", choices=("+1", "-1", "1"))
    p_con.add_argument("--out", default=None)
    p_con.add_argument("--csv", default=None, help="dump the built field as CSV")

    p_cert = sub.add_parser("certify", help="membership + divisibility certificates")
    common(p_cert, lattice=True, shift=True)
    p_cert.add_argument("--tol", type=float, default=1e-6)
    p_cert.add_argument("--sign", default="-1", choices=("+1", "-1", "1"))

    p_spread = sub.add_parser("spread", help="time-frequency second moments")
    common(p_spread)
    p_spread.add_argument("--a", dest="a_center", type=float, default=0.0)
    p_spread.add_argument("--b", dest="b_center", type=float, default=0.0)
    p_spread.add_argument("--pad", type=int, default=8)

    p_s0 = sub.add_parser("s0norm", help="short-time-transform mass estimate")
    common(p_s0)
    p_s0.add_argument("--T", dest="t_max", type=float, default=8.0)
    p_s0.add_argument("--K", dest="k_max", type=float, default=16.0)
    p_s0.add_argument("--step", type=float, default=0.5)

    p_self = sub.add_parser("selftest", help="run the acceptance battery")
    p_self.add_argument("--level", default="quick", choices=("quick", "full"))
    p_self.add_argument("--out", default=None)
    return parser


def _window_requirement(name: str, n: int) -> Tuple[int, str]:
    """(divisor required of N, human reason) for an inline window name."""
    from .constructions import breakpoint_divisor

    spec = _window_spec(name, n)
    if spec is None:  # construct-style names
        return 6, "the strip and cell structure"
    return breakpoint_divisor(spec), "the window's breakpoints"


def _window_spec(name: str, n: int):
    """Inline window name -> WindowSpec (None for construct-style names)."""
    from .constructions import (
        WindowSpec,
        example1_corrected_spec,
        example1_spec,
        indicator_spec,
    )

    if name.startswith("@"):
        with open(name[1:], "r", encoding="utf-8") as fh:
            from .constructions import WindowSpec as WS

            return WS.from_json(fh.read())
    base, _, arg = name.partition(":")
    if base in ("chi", "indicator"):
        if arg:
            lo_s, _, hi_s = arg.partition(",")
            lo = _parse_fraction(lo_s, "indicator lower end")
            hi = _parse_fraction(hi_s, "indicator upper end")
        else:
            lo, hi = Fraction(0), Fraction(1)
        return indicator_spec(lo, hi, n)
    if base == "example1":
        return example1_spec(n)
    if base == "example1-corrected":
        return example1_corrected_spec(n)
    if base == "example2":
        eps = float(arg) if arg else 0.3
        return WindowSpec("example2", n, eps=eps, label="smooth two-sided")
    if base == "gaussian":
        width = _parse_fraction(arg, "gaussian width") if arg else Fraction(1)
        return WindowSpec("gaussian", n, width=width, label="gaussian")
    if base == "bspline":
        order = int(arg) if arg else 2
        return WindowSpec("bspline", n, order=order, label=f"bspline {order}")
    if base in ("trivial", "corrected", "smooth"):
        return None
    raise CommandError(
        f"unknown window {name!r} (try chi, indicator:lo,hi, example1, "
        "example1-corrected, example2:eps, gaussian:width, bspline:order, "
        "or @spec.json)"
    )


def _lcm(*vals: int) -> int:
    out = 1
    for v in vals:
        out = out * v // math.gcd(out, v)
    return out


def _validate(spec: CommandSpec) -> None:
    """Eager divisibility checks so errors surface before any computation."""
    if spec.subcommand in ("selftest",):
        return
    needs: List[Tuple[int, str]] = []
    if spec.subcommand in ("zak", "bounds", "invariance", "certify",
                           "spread", "s0norm", "construct"):
        div, why = _window_requirement(spec.window, spec.n)
        if div > 1:
            needs.append((div, why))
    if spec.q is not None and spec.p is not None:
        needs.append((_lcm(spec.p, spec.q), f"the (1/{spec.q})Z x {spec.p}Z lattice"))
    if spec.shift_u != 0:
        needs.append((spec.shift_u.denominator, f"the shift u={spec.shift_u}"))
    required = _lcm(*(d for d, _ in needs)) if needs else 1
    if spec.n % required:
        reasons = ", ".join(why for _, why in needs)
        raise CommandError(
            f"N={spec.n} not divisible by {required} (needed for {reasons}); "
            f"use a multiple of {required}"
        )
    if spec.shift_eta != 0 and spec.l % spec.shift_eta.denominator:
        raise CommandError(
            f"L={spec.l} not divisible by {spec.shift_eta.denominator} "
            f"(needed for the shift eta={spec.shift_eta}); "
            f"use a multiple of {spec.shift_eta.denominator}"
        )
    if (spec.alpha is None) != (spec.beta is None):
        raise CommandError("--alpha and --beta must be given together")
    if spec.alpha is not None and (spec.q is not None or spec.p is not None):
        raise CommandError("give either --Q/--P or --alpha/--beta, not both")
    if spec.subcommand in ("bounds", "invariance", "certify"):
        if spec.alpha is None and (spec.q is None or spec.p is None):
            raise CommandError(
                f"{spec.subcommand} needs a lattice: --Q and --P, "
                "or --alpha and --beta"
            )


def parse_command(argv: Optional[List[str]] = None) -> CommandSpec:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    kwargs: Dict[str, object] = {"subcommand": ns.subcommand}
    for key in ("window", "n", "l", "tol", "certificates", "level", "out",
                "csv", "a_center", "b_center", "pad", "t_max", "k_max", "step"):
        if hasattr(ns, key):
            kwargs[key] = getattr(ns, key)
    if getattr(ns, "q", None) is not None:
        kwargs["q"] = ns.q
    if getattr(ns, "p", None) is not None:
        kwargs["p"] = ns.p
    if getattr(ns, "alpha", None) is not None:
        kwargs["alpha"] = _parse_fraction(ns.alpha, "alpha")
    if getattr(ns, "beta", None) is not None:
        kwargs["beta"] = _parse_fraction(ns.beta, "beta")
    if hasattr(ns, "shift"):
        kwargs["shift_u"], kwargs["shift_eta"] = _parse_shift(ns.shift)
    if hasattr(ns, "sign"):
        kwargs["sign"] = 1 if ns.sign in ("+1", "1") else -1
    spec = CommandSpec(**kwargs)
    _validate(spec)
    return spec


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _realized_window(spec: CommandSpec):
    from .constructions import dilate_normalize, realize
    from .gabor_analysis import RationalLattice

    wspec = _window_spec(spec.window, spec.n)
    if wspec is None:
        raise CommandError(
            f"window {spec.window!r} is a construct spec; use the construct "
            "subcommand"
        )
    lattice = None
    if spec.alpha is not None:
        wspec, lattice = dilate_normalize(wspec, spec.alpha, spec.beta)
    elif spec.q is not None and spec.p is not None:
        lattice = RationalLattice(spec.q, spec.p)
    return realize(wspec, spec.n), lattice


def _shift(spec: CommandSpec):
    from .zak_core import TimeFrequencyShift

    return TimeFrequencyShift(spec.shift_u, spec.shift_eta)


def _provenance(spec: CommandSpec, w=None, extra: Optional[dict] = None) -> dict:
    doc: Dict[str, object] = {
        "n": spec.n,
        "l": spec.l,
        "threads_cap": os.environ.get("ZAKBENCH_THREADS"),
    }
    if w is not None:
        doc["window_label"] = w.label
        doc["window_samples"] = len(w.samples)
        doc["window_energy"] = w.energy
        doc["tail_bound"] = w.tail_bound
        doc["exact_amplitudes"] = w.exact is not None
    if extra:
        doc.update(extra)
    return doc


def _run_zak(spec: CommandSpec) -> Tuple[dict, dict]:
    from .zak_core import dump_zak_csv, validate_zak, zak

    w, _ = _realized_window(spec)
    grid = zak(w, spec.l)
    diag = validate_zak(w, grid, _shift(spec))
    if spec.csv:
        dump_zak_csv(grid, spec.csv)
    from .constructions import measured_support

    lo, hi = measured_support(w)
    results = {
        "unitarity_defect": diag.unitarity_defect,
        "covariance_defect": diag.covariance_defect,
        "exact_path": diag.exact,
        "translate_range": [grid.k_min, grid.k_max],
        "measured_support": [str(lo), str(hi)],
        "grid_norm_squared": grid.grid_norm2,
        "csv": spec.csv,
    }
    return results, _provenance(spec, w)


def _run_bounds(spec: CommandSpec) -> Tuple[dict, dict]:
    from .gabor_analysis import riesz_bounds, zz_field
    from .zak_core import zak

    w, lattice = _realized_window(spec)
    grid = zak(w, spec.l)
    bounds = riesz_bounds(zz_field(grid, lattice))
    results = bounds.as_dict()
    results["lattice"] = {"Q": lattice.q, "P": lattice.p,
                          "density": str(lattice.density)}
    return results, _provenance(spec, w)


def _run_invariance(spec: CommandSpec) -> Tuple[dict, dict]:
    import numpy as np

    from .gabor_analysis import invariance_test
    from .zak_core import write_grid_csv, zak

    w, lattice = _realized_window(spec)
    grid = zak(w, spec.l)
    report = invariance_test(
        grid, lattice, _shift(spec), tol=spec.tol,
        certificates=spec.certificates and lattice.q == 1,
    )
    if spec.csv:
        npx = grid.nx // lattice.p
        xs = tuple(Fraction(j, grid.nx) for j in range(npx))
        write_grid_csv(
            spec.csv, xs, grid.omega_fractions(),
            report.residual_grid.astype(np.complex128),
        )
    results = report.as_dict()
    results["csv"] = spec.csv
    return results, _provenance(spec, w)


def _construct_spec(spec: CommandSpec):
    from .constructions import (
        example1_corrected_sqp_spec,
        example2_sqp_spec,
        trivial_sqp_spec,
    )

    base, _, arg = spec.window.partition(":")
    if base == "trivial":
        return trivial_sqp_spec()
    if base == "corrected":
        return example1_corrected_sqp_spec()
    if base == "smooth":
        eps = float(arg) if arg else 0.3
        return example2_sqp_spec(eps, spec.sign)
    raise CommandError(
        f"unknown construct spec {spec.window!r} (try trivial, corrected, "
        "or smooth:eps)"
    )


def _run_construct(spec: CommandSpec) -> Tuple[dict, dict, int]:
    from .constructions import measured_support, sqp_check
    from .zak_core import dump_zak_csv

    sqp = _construct_spec(spec)
    from .constructions import construct_from_sqp

    grid, w, h = construct_from_sqp(sqp, spec.n, spec.l)
    defects = sqp_check(grid, h, sqp.r, sqp.p, sqp.sign)
    if spec.csv:
        dump_zak_csv(grid, spec.csv)
    lo, hi = measured_support(w)
    results = {
        "R": sqp.r,
        "P": sqp.p,
        "sign": sqp.sign,
        "shift_recursion_defect": defects.shift_defect,
        "product_defect": defects.product_defect,
        "periodicity_defect": defects.periodicity_defect,
        "measured_support": [str(lo), str(hi)],
        "energy": w.energy,
        "translate_range": [grid.k_min, grid.k_max],
        "csv": spec.csv,
    }
    code = 3 if defects.shift_defect > 1e-12 else 0
    return results, _provenance(spec, w), code


def _run_certify(spec: CommandSpec) -> Tuple[dict, dict, int]:
    from .gabor_analysis import divisibility_certificate, invariance_test
    from .zak_core import zak

    w, lattice = _realized_window(spec)
    if lattice.q != 1:
        raise CommandError("certify requires a Q=1 lattice (scalar multiplier)")
    grid = zak(w, spec.l)
    report = invariance_test(grid, lattice, _shift(spec), tol=spec.tol,
                             certificates=True)
    certs = report.certificates
    results = report.as_dict()
    status = "winding-unavailable"
    code = 0
    if certs.winding is not None:
        h = report.multipliers[0]
        cert = divisibility_certificate(
            h, certs.r, _shift(spec), certs.m1, certs.m2, spec.sign
        )
        results["divisibility"] = cert.as_dict()
        status = "certified" if cert.passed else "failed"
        code = 0 if cert.passed else 3
    else:
        results["winding_error"] = certs.winding_error
    results["status"] = status
    return results, _provenance(spec, w), code


def _run_spread(spec: CommandSpec) -> Tuple[dict, dict]:
    from .zak_core import time_frequency_spread

    w, _ = _realized_window(spec)
    dt2, dw2, product = time_frequency_spread(
        w, spec.a_center, spec.b_center, spec.pad
    )
    results = {
        "time_spread": dt2,
        "frequency_spread": dw2,
        "product": product,
        "pad": spec.pad,
    }
    return results, _provenance(spec, w)


def _run_s0norm(spec: CommandSpec) -> Tuple[dict, dict]:
    from .zak_core import feichtinger_norm_estimate

    w, _ = _realized_window(spec)
    value = feichtinger_norm_estimate(w, spec.t_max, spec.k_max, spec.step)
    results = {
        "estimate": value,
        "T": spec.t_max,
        "K": spec.k_max,
        "step": spec.step,
    }
    return results, _provenance(spec, w)


def _run_selftest(spec: CommandSpec) -> Tuple[dict, dict, int]:
    from .acceptance import run_all

    outcomes = run_all(spec.level)
    for item in outcomes:
        print(item.summary_line())
    ok = all(item.passed for item in outcomes)
    print("selftest:", "PASS" if ok else "FAIL")
    results = {
        "level": spec.level,
        "passed": ok,
        "criteria": [item.as_dict() for item in outcomes],
    }
    return results, {"threads_cap": os.environ.get("ZAKBENCH_THREADS")}, (
        0 if ok else 3
    )


def run(spec: CommandSpec) -> ReportDocument:
    from . import __version__

    t0 = time.perf_counter()
    code = 0
    if spec.subcommand == "zak":
        results, prov = _run_zak(spec)
    elif spec.subcommand == "bounds":
        results, prov = _run_bounds(spec)
    elif spec.subcommand == "invariance":
        results, prov = _run_invariance(spec)
    elif spec.subcommand == "construct":
        results, prov, code = _run_construct(spec)
    elif spec.subcommand == "certify":
        results, prov, code = _run_certify(spec)
    elif spec.subcommand == "spread":
        results, prov = _run_spread(spec)
    elif spec.subcommand == "s0norm":
        results, prov = _run_s0norm(spec)
    elif spec.subcommand == "selftest":
        results, prov, code = _run_selftest(spec)
    else:
        raise CommandError(f"unknown subcommand {spec.subcommand!r}")
    doc = ReportDocument(
        version=__version__,
        command=spec.as_dict(),
        results=results,
        provenance=prov,
        timing_seconds=time.perf_counter() - t0,
        exit_code=code,
    )
    if spec.out:
        _atomic_write(spec.out, doc.to_json() + "\n")
    return doc


def main(argv: Optional[List[str]] = None) -> int:
    try:
        configure_threads()
        spec = parse_command(argv)
    except CommandError as exc:
        print(f"zakbench: error: {exc}", file=sys.stderr)
        return 2
    try:
        doc = run(spec)
    except CommandError as exc:
        print(f"zakbench: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - map library errors to exit codes
        from .gabor_analysis import RankDeficiencyError
        from .zak_core import PhaseError, ZakError

        if isinstance(exc, (PhaseError, RankDeficiencyError)):
            print(f"zakbench: certificate failure: {exc}", file=sys.stderr)
            return 3
        if isinstance(exc, (ZakError, ValueError, OSError)):
            print(f"zakbench: error: {exc}", file=sys.stderr)
            return 2
        raise
    if spec.subcommand != "selftest":
        print(doc.to_json())
    return doc.exit_code


if __name__ == "__main__":
    sys.exit(main())
