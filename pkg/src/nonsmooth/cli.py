"""``nk``: command-line front end.

Each subcommand reads its inputs (CSV grids, JSON forms/profiles, set
literals), runs one operation and prints a report. Exit status is 0 on
success or PASS, 1 on FALSIFIED/FAIL verdicts and 2 on input or contract
errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import conjugate, drcalc, envelope, geom, homogeneous, io
from .certificate import CertificateStatus
from .deriv import Side, TSchedule, dini_derivative, directional_profile
from .exceptions import NonsmoothError, InputError
from .grid import GridSpec, NormTag

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every command; embedded verbatim in each report."""

    tolerance: float = 1e-9
    norm: str = None
    M: int = homogeneous.DEFAULT_M
    seed_order: str = "row-major"

    def __post_init__(self):
        if not (self.tolerance > 0 and math.isfinite(self.tolerance)):
            raise InputError("tolerance must be positive and finite")
        if self.norm is not None:
            object.__setattr__(self, "norm", NormTag.parse(self.norm).value)
        if self.seed_order not in ("row-major", "reverse"):
            raise InputError("seed order must be row-major or reverse")

    def norm_or(self, default: NormTag) -> NormTag:
        return NormTag.parse(self.norm) if self.norm else default

    def to_dict(self) -> dict:
        return asdict(self)


def _point(text: str) -> tuple:
    try:
        return tuple(float(c) for c in text.split(","))
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, text: str):
    if path:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")


def _grid(path):
    return io.parse_grid_csv(_read(path))


def _p_object(path):
    obj = io._load(_read(path))
    return io.parse_profile_json(obj) if "values" in obj else io.parse_form_json(obj)


def _schedule(args):
    if args.t_max is None:
        return None
    return TSchedule(args.t_max, args.ratio, args.steps)


def _status_code(status) -> int:
    return EXIT_FAIL if status in (CertificateStatus.FALSIFIED, drcalc.Verdict.FAIL) else EXIT_OK


# --- commands ----------------------------------------------------------------


def cmd_envelope(args, cfg):
    f = _grid(args.input)
    norm = cfg.norm_or(NormTag.L1)
    out = envelope.pasch_hausdorff(f, args.k, norm, args.mode)
    _write(args.out, io.write_grid_csv(out))
    return {"k": args.k, "mode": args.mode, "norm": norm.value,
            "saturated": envelope.saturation_warning(f, args.k, norm), "values": out.values}, EXIT_OK


def cmd_closure(args, cfg):
    f = _grid(args.input)
    norm = cfg.norm_or(NormTag.L1)
    sched = envelope.KSchedule(args.k_min, args.factor, args.steps)
    out = envelope.semicontinuous_closure(f, sched, norm, args.direction, args.mode)
    _write(args.out, io.write_grid_csv(out))
    return {"schedule": list(sched.values()), "direction": args.direction, "norm": norm.value,
            "values": out.values}, EXIT_OK


def cmd_conjugate(args, cfg):
    f = _grid(args.input)
    dual = None
    if args.dual_range or args.dual_count:
        base = conjugate.default_dual_spec(f)
        lo, hi = (args.dual_range if args.dual_range else
                  (base.origin[0], base.origin[0] + base.spacing[0] * (base.counts[0] - 1)))
        n = args.dual_count or base.counts[0]
        d = f.spec.dims
        grid = GridSpec.from_bounds([lo] * d, [hi] * d, [n] * d)
        dual = conjugate.DualGridSpec(grid.origin, grid.spacing, grid.counts)
    dual = conjugate.default_dual_spec(f) if dual is None else dual
    out = conjugate.legendre_conjugate(f, dual)
    _write(args.out, io.write_grid_csv(out))
    return {"dual": {"origin": dual.origin, "spacing": dual.spacing, "counts": dual.counts},
            "range_truncated": conjugate.dual_range_truncated(f, dual), "values": out.values}, EXIT_OK


def cmd_convexify(args, cfg):
    out = conjugate.convex_envelope(_grid(args.input))
    _write(args.out, io.write_grid_csv(out))
    return {"values": out.values}, EXIT_OK


def cmd_minimal_majorant(args, cfg):
    f, seed = _grid(args.f), _grid(args.seed)
    if args.check_only:
        if args.delta is None:
            raise InputError("--check-only needs --delta")
        cert = conjugate.certify_minimal_convex_majorant(seed, f, args.delta, cfg.tolerance, cfg.seed_order)
        return {"certificate": cert}, _status_code(cert.status)
    sched = None if args.delta is None else [args.delta]
    g, cert = conjugate.extract_minimal_convex_majorant(f, seed, sched, cfg.tolerance, cfg.seed_order)
    _write(args.out, io.write_grid_csv(g))
    report = {"values": g.values}
    if args.certify:
        report["certificate"] = cert
        return report, _status_code(cert.status)
    return report, EXIT_OK


def cmd_ph_test(args, cfg):
    form = io.parse_form_json(_read(args.form))
    p = _p_object(args.p)
    check = homogeneous.ph_majorant_minorant_test(form, p, args.role, cfg.M, cfg.tolerance)
    return {"role": args.role, "passed": check.ok, "witness": check.witness, "info": check.info}, (
        EXIT_OK if check else EXIT_FAIL)


def cmd_ph_extract(args, cfg):
    p = _p_object(args.p)
    seed = io.parse_form_json(_read(args.seed))
    if isinstance(seed, homogeneous.SublinearForm):
        g, cert = homogeneous.extract_minimal_sublinear_majorant(p, seed, cfg.M, tol=cfg.tolerance)
    elif isinstance(seed, homogeneous.SuperlinearForm):
        g, cert = homogeneous.extract_maximal_superlinear_minorant(p, seed, cfg.M, tol=cfg.tolerance)
    else:
        raise InputError("the seed must be a sublinear or superlinear form")
    _write(args.out, io.form_to_json(g))
    return {"form": g, "certificate": cert}, _status_code(cert.status)


def cmd_deriv(args, cfg):
    est = dini_derivative(args.fn, _point(args.at), _point(args.dir), _schedule(args))
    report = {"fn": args.fn, "at": _point(args.at), "dir": _point(args.dir), "tail_window": est.tail_window,
              "t_range": est.t_range}
    if args.side in ("both", "lower"):
        report["lower"] = est.lower
    if args.side in ("both", "upper"):
        report["upper"] = est.upper
    return report, EXIT_OK


def cmd_profile(args, cfg):
    prof = directional_profile(args.fn, _point(args.at), cfg.M, _schedule(args), Side.parse(args.side))
    _write(args.out, io.profile_to_json(prof))
    return {"fn": args.fn, "at": _point(args.at), "side": args.side, "profile": prof}, EXIT_OK


def cmd_dr_member(args, cfg):
    cand = io.parse_form_json(_read(args.candidate))
    cert = drcalc.dr_membership(cand, args.fn, _point(args.at), args.which, cfg.M, _schedule(args),
                                args.delta, cfg.tolerance)
    return {"which": args.which, "certificate": cert}, _status_code(cert.status)


def cmd_optimality(args, cfg):
    x = _point(args.at)
    if args.mode == "necessary":
        rep = drcalc.necessary_optimality(args.fn, x, cfg.M, _schedule(args), tol=cfg.tolerance)
    else:
        if args.gamma is None:
            raise InputError("--mode sufficient needs --gamma")
        rep = drcalc.sufficient_optimality(args.fn, x, args.gamma, cfg.M, _schedule(args),
                                           cfg.norm_or(NormTag.L2), cfg.tolerance)
    return {"mode": args.mode, "report": rep}, _status_code(rep.verdict)


def cmd_components(args, cfg):
    Q = geom.parse_set(args.set)
    report = {"set": str(Q), "components": [str(c) for c in geom.convex_components_1d(Q)],
              "recession_cone": geom.recession_cone_1d(Q).value}
    if not Q.complement().empty:
        report["complements"] = [str(c) for c in geom.convex_complements_1d(Q)]
        report["recession_check"] = geom.recession_intersection_check(Q)
        code = EXIT_OK if report["recession_check"] else EXIT_FAIL
    else:
        report["complements"] = []
        code = EXIT_OK
    return report, code


# --- parser ------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=1e-9, help="comparison tolerance (default 1e-9)")
    p.add_argument("--norm", choices=[n.value for n in NormTag], default=None,
                   help="norm; defaults to l1 for grid transforms and l2 for optimality")
    p.add_argument("--M", type=int, default=homogeneous.DEFAULT_M, help="number of unit directions")
    p.add_argument("--seed-order", choices=["row-major", "reverse"], default="row-major",
                   help="dent sweep order for grid majorants")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    return p


def _schedule_flags(p):
    p.add_argument("--t-max", type=float, default=None, help="largest step (default 0.1 x box radius)")
    p.add_argument("--ratio", type=float, default=0.7)
    p.add_argument("--steps", type=int, default=100)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="nk", description="Envelopes, convex majorants and DR calculus on grids.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=fn)
        return p

    p = add("envelope", cmd_envelope, "Pasch-Hausdorff envelope of a grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--mode", choices=[m.value for m in envelope.EnvelopeMode], default="exact")
    p.add_argument("--out")

    p = add("closure", cmd_closure, "schedule-truncated semicontinuous closure")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k-min", type=float, required=True)
    p.add_argument("--factor", type=float, default=2.0)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--direction", choices=[d.value for d in envelope.Direction], default="upper")
    p.add_argument("--mode", choices=[m.value for m in envelope.EnvelopeMode], default="exact")
    p.add_argument("--out")

    p = add("conjugate", cmd_conjugate, "discrete Legendre-Fenchel conjugate")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--dual-range", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--dual-count", type=int)
    p.add_argument("--out")

    p = add("convexify", cmd_convexify, "convex envelope of a grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")

    p = add("minimal-majorant", cmd_minimal_majorant, "extract or certify a minimal convex majorant")
    p.add_argument("--f", required=True)
    p.add_argument("--seed", required=True)
    p.add_argument("--out")
    p.add_argument("--certify", action="store_true", help="exit 1 unless the result is certified")
    p.add_argument("--check-only", action="store_true", help="certify the seed itself instead of extracting")
    p.add_argument("--delta", type=float, default=None)

    p = add("ph-test", cmd_ph_test, "majorant/minorant test for p.h. forms")
    p.add_argument("--form", required=True)
    p.add_argument("--p", required=True, help="form JSON or profile JSON")
    p.add_argument("--role", choices=[r.value for r in homogeneous.Role], default="majorant")

    p = add("ph-extract", cmd_ph_extract, "extract a minimal sublinear (maximal superlinear) form")
    p.add_argument("--p", required=True)
    p.add_argument("--seed", required=True)
    p.add_argument("--out")

    p = add("deriv", cmd_deriv, "Dini directional derivatives")
    p.add_argument("--fn", required=True)
    p.add_argument("--at", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--side", choices=["both", "lower", "upper"], default="both")
    _schedule_flags(p)

    p = add("profile", cmd_profile, "directional derivative profile")
    p.add_argument("--fn", required=True)
    p.add_argument("--at", required=True)
    p.add_argument("--side", choices=["lower", "upper"], default="lower")
    p.add_argument("--out")
    _schedule_flags(p)

    p = add("dr-member", cmd_dr_member, "DR sub/superdifferential membership")
    p.add_argument("--fn", required=True)
    p.add_argument("--at", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--which", choices=[w.value for w in drcalc.Which], default="lower-sub")
    p.add_argument("--delta", type=float, default=None)
    _schedule_flags(p)

    p = add("optimality", cmd_optimality, "necessary or sufficient optimality test")
    p.add_argument("--fn", required=True)
    p.add_argument("--at", required=True)
    p.add_argument("--mode", choices=["necessary", "sufficient"], default="necessary")
    p.add_argument("--gamma", type=float)
    _schedule_flags(p)

    p = add("components", cmd_components, "convex components of a 1D set")
    p.add_argument("--set", required=True, help='set literal, e.g. "[0,1]u[2,3]"')
    return parser


def _text(report: dict) -> str:
    plain = io.to_plain(report)
    lines = []
    for key in sorted(plain):
        val = plain[key]
        if isinstance(val, (dict, list)):
            val = io.dumps(val, indent=0)
        elif isinstance(val, float):
            val = io.format_float(val)
        lines.append(f"{key}: {val}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.tol, args.norm, args.M, args.seed_order)
        report, code = args.func(args, cfg)
    except (NonsmoothError, ValueError, KeyError) as exc:
        report, code = {"error": type(exc).__name__, "message": str(exc).strip("'\"")}, EXIT_ERROR
        cfg = None
    report = dict(report, command=args.command, config=cfg.to_dict() if cfg else _raw_config(args),
                  exit_code=code)
    stream = sys.stdout if code != EXIT_ERROR else sys.stderr
    print(io.dumps(report) if args.json else _text(report), file=stream)
    return code


def _raw_config(args) -> dict:
    return {"tolerance": args.tol, "norm": args.norm, "M": args.M, "seed_order": args.seed_order}


if __name__ == "__main__":
    sys.exit(main())
