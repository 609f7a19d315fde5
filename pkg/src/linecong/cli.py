"""Command-line front end."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import formats
from .bde import phase_portrait
from .classify import classify_point, scan_domain
from .config import Numerics
from .congruence import LineCongruence
from .errors import ConfigError, LineCongruenceError
from .formats import Config
from .tracer import find_singular_discriminant_points, trace_discriminant, trace_ridges

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _point(text: str):
    try:
        u, v = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected u,v, got {text!r}") from None
    return (u, v)


def _sweep(text: str):
    try:
        name, rng = text.split("=", 1)
        start, stop, count = rng.split(":")
        return name.strip(), np.linspace(float(start), float(stop), int(count))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected name=start:stop:count, got {text!r}") from None


def _suffixed(path: str, suffix: str) -> Path:
    p = Path(path)
    if not suffix:
        return p
    return p.with_name(p.stem + suffix + p.suffix) if p.suffix else p.with_name(p.name + suffix)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_analyze(C: LineCongruence, num: Numerics, args, suffix: str) -> int:
    if args.point is not None:
        reports = classify_point(C, args.point, num.degree, num.tol)
        if args.oracle:
            from .suites import ak_agreement
            for rep, ak in ak_agreement(C, args.point, num.tol):
                rep.oracle_verdict = ak
    else:
        reports = scan_domain(C, num, with_oracle=args.oracle)
    if not reports:
        print("no real principal directions at this point (delta < 0)")
    for rep in reports:
        print(formats.human_report(rep))
    out = args.report or f"{C.name or 'congruence'}.report"
    _write(_suffixed(out, suffix), formats.format_reports(reports))
    return EXIT_OK


def cmd_portrait(C, num, args, suffix) -> int:
    seeds = args.seeds if args.seeds is not None else num.portrait_seeds
    pt = phase_portrait(C, seeds, num)
    for f in pt.failures:
        print(f"warning: {f}", file=sys.stderr)
    _write(_suffixed(args.out, suffix), formats.portrait_svg(pt, C.domain))
    print(f"{len(pt.principal)} principal lines, {len(pt.discriminant)} discriminant curves, "
          f"{len(pt.ridges)} ridges, {len(pt.singular_points)} singular points")
    return EXIT_OK


def cmd_trace(C, num, args, suffix) -> int:
    disc = trace_discriminant(C, num)
    ridges = trace_ridges(C, num)
    sps = find_singular_discriminant_points(C, disc, num)
    files = []
    for kind, curves in (("discriminant", disc), ("ridge", ridges)):
        for k, pl in enumerate(curves):
            path = Path(f"{args.out}{suffix}_{kind}_{k}.csv")
            _write(path, formats.polyline_csv(pl))
            files.append(path)
    for sp in sps:
        print(f"singular discriminant point {sp.point[0]:.10g},{sp.point[1]:.10g}")
    for f in files:
        print(f)
    return EXIT_OK


def cmd_focal(C, num, args, suffix) -> int:
    n = args.grid or num.grid
    disc = trace_discriminant(C, num)
    ridges = trace_ridges(C, num)
    for br in (1, 2):
        mesh = formats.focal_mesh(C, br, n, num.tol)
        _write(Path(f"{args.out}{suffix}_F{br}.obj"), formats.mesh_obj(mesh))
    curves = []
    for pl in disc:
        curves.append(formats.curve_image(C, pl, 1, num.tol))
    for pl in ridges:
        tag = int(pl.tags[0]) if len(pl.tags) else 1
        curves.append(formats.curve_image(C, pl, 2 if tag == 2 else 1, num.tol))
    _write(Path(f"{args.out}{suffix}_curves.obj"), formats.mesh_obj(formats.polylines_obj(curves)))
    print(f"wrote {args.out}{suffix}_F1.obj, _F2.obj, _curves.obj")
    return EXIT_OK


def cmd_verify(C, num, args, suffix) -> int:
    from .suites import verify
    points = [args.point] if args.point is not None else []
    if not points:
        disc = trace_discriminant(C, num)
        points = [tuple(float(x) for x in sp.point) for sp in find_singular_discriminant_points(C, disc, num)]
        c = C.domain.center
        points.append((float(c[0]), float(c[1])))
    res = verify(C, points, num, seed=args.seed)
    for line in res.lines():
        print(line)
    print("verify: " + ("ok" if res.passed else "FAILED"))
    return EXIT_OK if res.passed else EXIT_VERIFY


COMMANDS = {"analyze": cmd_analyze, "portrait": cmd_portrait, "trace": cmd_trace, "focal": cmd_focal,
            "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="linecong", description="Singularities of line congruences.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="congruence definition file")
        p.add_argument("--sweep", type=_sweep, help="name=start:stop:count, one run per parameter value")
        p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE", help="override a parameter")
        return p

    p = common(sub.add_parser("analyze", help="classify a point or scan the domain"))
    p.add_argument("--point", type=_point)
    p.add_argument("--report", help="machine-readable report file")
    p.add_argument("--oracle", action="store_true", help="attach the support-function A_k type")
    p = common(sub.add_parser("portrait", help="phase portrait as SVG"))
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", type=int)
    p = common(sub.add_parser("trace", help="discriminant and ridge curves as CSV"))
    p.add_argument("--out", required=True, help="output prefix")
    p = common(sub.add_parser("focal", help="focal surfaces as OBJ"))
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--grid", type=int)
    p = common(sub.add_parser("verify", help="run the oracle suites"))
    p.add_argument("--point", type=_point)
    p.add_argument("--seed", type=int, default=0)
    return ap


def _overrides(cfg: Config, items) -> Config:
    params = dict(cfg.congruence.params)
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        try:
            params[k.strip()] = float(v)
        except ValueError:
            raise ConfigError(f"--set {k}: not a number: {v!r}") from None
    return replace(cfg, congruence=cfg.congruence.with_params(**params))


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _overrides(formats.load_config(args.config), args.set)
    except ConfigError as err:
        print(f"config error: {args.config}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    cmd = COMMANDS[args.command]
    runs = [("", cfg.congruence)]
    if args.sweep is not None:
        name, values = args.sweep
        runs = [(f"_{name}={formats._num(x)}", cfg.congruence.with_params(**{name: float(x)})) for x in values]
    code = EXIT_OK
    for suffix, C in runs:
        if suffix:
            print(f"# {suffix[1:]}")
        try:
            code = max(code, cmd(C, cfg.numerics, args, suffix))
        except LineCongruenceError as err:
            print(f"numeric failure: {type(err).__name__}: {err}", file=sys.stderr)
            return EXIT_NUMERIC
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
