"""Command line interface: ``quadbounds {run,sweep,truncation,threshold,verify,export}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import appendix
from .assembly import Potential, assemble_forms, write_coordinate
from .errors import QuadBoundsError
from .experiments import (DEFAULT_N_GRID, CaseConfig, case_to_csv, case_to_json, invariant_checks,
                          load_config,
                          points_to_csv, residual_sweep, run_case, sweep_to_csv, sweep_to_json,
                          threshold_exploration, threshold_to_csv, truncation_sweep,
                          truncation_to_csv)
from .hermite_fem import MeshSpec, build_mesh

log = logging.getLogger("quadbounds")


def parse_int_list(text: str) -> list[int]:
    """``"1,2,5"``, ``"1-5"`` or ``"100:400:50"`` (inclusive stop)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            a, b, s = (int(v) for v in part.split(":"))
            out.extend(range(a, b + 1, s))
        elif "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def parse_float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _common(p: argparse.ArgumentParser, n_list: bool = False):
    p.add_argument("--config", type=Path, help="JSON file with CaseConfig fields")
    p.add_argument("--potential", help="harmonic, anharmonic or poly:c0,c1,...")
    p.add_argument("--L", type=float, dest="L")
    if n_list:
        p.add_argument("--n", type=parse_int_list, help="mesh sizes, e.g. 100:400:50")
    else:
        p.add_argument("--n", type=int)
    p.add_argument("--targets", type=parse_int_list, help="eigenvalue indices, e.g. 1-5")
    p.add_argument("--d-fraction", type=float, dest="d_fraction")
    p.add_argument("--im-max", type=float, dest="im_max")
    p.add_argument("--residual-gate", type=float, dest="residual_gate")
    p.add_argument("--pair-tol", type=float, dest="pair_tol")
    p.add_argument("--no-balance", action="store_const", const=False, dest="balance")
    p.add_argument("--no-refine", action="store_const", const=False, dest="refine",
                   help="report raw companion eigenvalues without Newton polishing")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_config(args, n_list: bool = False) -> CaseConfig:
    data = load_config(args.config) if args.config else {}
    for key in ("potential", "L", "targets", "d_fraction", "im_max", "residual_gate",
                "pair_tol", "balance", "refine"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if not n_list and args.n is not None:
        data["n"] = args.n
    if isinstance(data.get("potential"), str):
        data["potential"] = Potential.parse(data["potential"])
    return CaseConfig.from_dict(data)


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)
        log.info("wrote %s", out)


def cmd_run(args) -> int:
    cfg = build_config(args)
    res = run_case(cfg)
    for w in res.warnings:
        log.warning(w)
    for t in res.targets:
        enc = t.enclosure.format(args.digits) if t.enclosure else "no certified enclosure"
        log.info("j=%d galerkin=%.15g enclosure %s", t.j, t.galerkin, enc)
    _emit(case_to_json(res) if args.format == "json" else case_to_csv(res), args.out)
    if args.points:
        args.points.write_text(points_to_csv(res))
    return 0


def cmd_sweep(args) -> int:
    cfg = build_config(args, n_list=True)
    n_list = args.n or list(DEFAULT_N_GRID)
    res = residual_sweep(cfg, n_list, cfg.targets)
    for j, s in sorted(res.slopes.items()):
        log.info("j=%d slope %.4f", j, s)
    for row in res.flagged:
        log.warning("j=%d n=%d: no certified enclosure, excluded from fit", row.j, row.n)
    _emit(sweep_to_json(res) if args.format == "json" else sweep_to_csv(res), args.out)
    return 0


def cmd_truncation(args) -> int:
    cfg = build_config(args)
    rows = truncation_sweep(cfg, args.L_list, cfg.targets, h=args.h)
    if args.format == "json":
        text = json.dumps([r.__dict__ for r in rows], indent=2) + "\n"
    else:
        text = truncation_to_csv(rows)
    _emit(text, args.out)
    return 0


def cmd_threshold(args) -> int:
    cfg = build_config(args, n_list=True)
    n_list = args.n or list(range(100, 1201, 50))
    results = []
    for j in cfg.targets:
        res = threshold_exploration(cfg, j, n_list, factor=args.factor)
        if res.exceeded_at is None:
            log.info("j=%d: r(j,n) kept decreasing up to n=%d", j, n_list[-1])
        else:
            log.info("j=%d: N_j ~ %s (r jumped at n=%d)", j, res.threshold, res.exceeded_at)
        results.append(res)
    _emit(threshold_to_csv(results), args.out)
    return 0


def cmd_verify(args) -> int:
    rows = appendix.verify_closed_forms(args.tol)
    report = appendix.format_report(rows)
    checks = invariant_checks()
    lines = [report, ""]
    ok = all(r.status == "verified" for r in rows if r.key in appendix.REQUIRED_ROWS)
    for name, passed, detail in checks:
        lines.append(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
        ok = ok and passed
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if ok else 1


def cmd_export(args) -> int:
    cfg = build_config(args)
    forms = assemble_forms(build_mesh(MeshSpec(cfg.L, cfg.n)), cfg.potential)
    outdir = args.out or Path(".")
    outdir.mkdir(parents=True, exist_ok=True)
    for ell in range(3):
        path = outdir / f"A{ell}.txt"
        with open(path, "w") as fh:
            count = write_coordinate(forms.dense(ell), fh)
        log.info("wrote %s (%d nonzeros)", path, count)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadbounds", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="enclosures for one mesh")
    _common(p)
    p.add_argument("--digits", type=int, default=5, help="display rounding for the log summary")
    p.add_argument("--points", type=Path, help="also write the second-order spectrum as CSV")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="r(j,n) over a mesh grid with log-log slope")
    _common(p, n_list=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("truncation", help="Galerkin values at fixed h for growing L")
    _common(p)
    p.add_argument("--L-list", type=parse_float_list, dest="L_list", default=[3.0, 4.0, 5.0, 6.0])
    p.add_argument("--h", type=float, default=0.03)
    p.set_defaults(func=cmd_truncation)

    p = sub.add_parser("threshold", help="explore where r(j,n) stops decreasing (raw mode)")
    _common(p, n_list=True)
    p.add_argument("--factor", type=float, default=1.5)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("verify", help="appendix cross-check and invariant suite")
    p.add_argument("--tol", type=float, default=appendix.VERIFY_TOL)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="dump A0, A1, A2 in coordinate format")
    _common(p)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.command == "threshold" and args.refine is None:
        args.refine = False
    try:
        return args.func(args)
    except (QuadBoundsError, ValueError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
