"""Command-line interface: ``bergman-sense <command> ...``.

Exit status is 0 on success, 1 when ``verify`` finds a certificate violation
and 2 for usage or configuration errors. Any option can also come from a JSON
file given with ``--config``; its keys are option names (dashes or
underscores) and command-line flags take precedence.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from math import pi

import numpy as np

from . import io
from .errors import SensingError

LOGGER = logging.getLogger("bergman_sense")


class ConfigError(ValueError):
    pass


# -- argument types ----------------------------------------------------------------

def complex_arg(text: str) -> complex:
    """``"re,im"`` or ``"re"`` -> complex."""
    try:
        parts = [float(p) for p in str(text).split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected re,im, got {text!r}") from exc
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise argparse.ArgumentTypeError(f"expected re,im, got {text!r}")


def points_arg(text: str) -> list[complex]:
    """``"x,y;x,y;..."`` -> list of complex."""
    return [complex_arg(p) for p in str(text).split(";") if p.strip()]


def floats_arg(n: int):
    def parse(text: str) -> list[float]:
        try:
            vals = [float(p) for p in str(text).split(",")]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers") from exc
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {len(vals)}")
        return vals
    parse.__name__ = f"{n} floats"
    return parse


def positive(text: str) -> float:
    val = float(text)
    if not val > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return val


def _config_value(val) -> str:
    """Render a JSON config value in command-line form."""
    if isinstance(val, list):
        if val and all(isinstance(v, list) for v in val):
            return ";".join(",".join(repr(float(x)) for x in v) for v in val)
        return ",".join(repr(float(x)) for x in val)
    return str(val)


# -- parser ------------------------------------------------------------------------

def _omega_options(p) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--omega-rect", type=floats_arg(4), metavar="X0,X1,Y0,Y1",
                   help="ambient rectangle (x0, x1) x (y0, y1)")
    g.add_argument("--omega-disc", type=floats_arg(3), metavar="CX,CY,R", help="ambient disc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bergman-sense",
                                     description="Certified remote-sensing identities.")
    parser.add_argument("--config", help="JSON file with option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sense-disc", help="identity on the unit disc")
    p.add_argument("--a", type=complex_arg, default=complex(0))
    p.add_argument("--b", type=complex_arg, required=True)
    p.add_argument("--eps", type=positive)
    p.add_argument("--mode", choices=["l2", "sup"], default="l2")
    p.add_argument("--r", type=positive, help="radius for sup mode")
    p.add_argument("--order", type=int)
    p.add_argument("--method", choices=["taylor", "gram"], default="taylor")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sense_disc)

    p = sub.add_parser("sense-probe", help="probe domain, transported identity and harmonic table")
    p.add_argument("--a", type=complex_arg, required=True)
    p.add_argument("--b", type=complex_arg, required=True)
    p.add_argument("--waypoints", type=points_arg, required=True, metavar="X,Y;X,Y;...")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--mu", type=positive, default=0.1)
    p.add_argument("--sigma", type=positive)
    _omega_options(p)
    p.add_argument("--eps", type=positive)
    p.add_argument("--order", type=int)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("-o", "--output", required=True, help="prefix for the three JSON files")
    p.set_defaults(func=cmd_sense_probe)

    p = sub.add_parser("runge", help="pole pushing along a polyline from b to a")
    p.add_argument("--curve", type=points_arg, required=True, metavar="X,Y;X,Y;...")
    p.add_argument("--delta", type=positive, required=True)
    p.add_argument("--eps", type=positive, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--boundary-circle", type=floats_arg(3), metavar="CX,CY,R")
    g.add_argument("--boundary-length", type=positive)
    p.add_argument("-o", "--output", required=True, help="prefix for the two JSON files")
    p.set_defaults(func=cmd_runge)

    p = sub.add_parser("table", help="convert an identity to a real table")
    p.add_argument("identity")
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--area", type=positive)
    p.add_argument("--path-length", type=float)
    p.add_argument("--dist", type=positive, help="distance from the probe to the boundary of Omega")
    _omega_options(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="measure residuals against certificates")
    p.add_argument("artifact", nargs="?")
    p.add_argument("--suite", action="store_true", help="run the standard suite")
    p.add_argument("--family", choices=["polynomial", "probe", "harmonic", "runge", "exactness"])
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--container", type=floats_arg(3), default=[0.0, 0.0, 3.0], metavar="CX,CY,R")
    p.add_argument("--boundary", type=floats_arg(3), default=[0.0, 0.0, 1.0], metavar="CX,CY,R")
    p.add_argument("--scale", type=positive, default=1.0, help="suite family size factor")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="CSV of l2_bound and measured residual against order")
    p.add_argument("--b", type=complex_arg, required=True)
    p.add_argument("--Nmax", type=int, required=True)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--degree", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    first, rest = pre.parse_known_args(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    command = next((a for a in rest if a in subparsers), None)
    if not first.config or command is None:
        return parser.parse_args(argv)
    try:
        with open(first.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {first.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    subparser = subparsers[command]
    known = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("help", "func"):
            raise ConfigError(f"unknown config key {key!r} for {command}")
        action = known[dest]
        if action.option_strings:
            action.required = False
        if action.type is not None:
            try:
                defaults[dest] = action.type(_config_value(val))
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
        else:
            defaults[dest] = val
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def resolved_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    return io.jsonable(cfg)


def _omega(args):
    from .domains import DiscDomain, PolygonDomain

    if getattr(args, "omega_rect", None):
        x0, x1, y0, y1 = args.omega_rect
        if not (x0 < x1 and y0 < y1):
            raise ConfigError("omega rectangle needs x0 < x1 and y0 < y1")
        return PolygonDomain.rectangle(x0, x1, y0, y1)
    if getattr(args, "omega_disc", None):
        cx, cy, r = args.omega_disc
        if not r > 0:
            raise ConfigError("omega disc radius must be positive")
        return DiscDomain(complex(cx, cy), r)
    return None


# -- commands ----------------------------------------------------------------------

def cmd_sense_disc(args) -> int:
    from .disc import disc_identity, optimal_weights_gram, taylor_identity

    if args.a == args.b:
        raise ConfigError("a and b must differ")
    if args.method == "gram":
        if args.order is None:
            raise ConfigError("--method gram needs --order")
        ident = optimal_weights_gram(args.a, args.b, args.order)
    else:
        if args.a != 0:
            raise ConfigError("taylor identities sit at a = 0; use --method gram for other a")
        if args.order is not None:
            ident = taylor_identity(args.b, args.order)
        elif args.eps is not None:
            ident = disc_identity(args.b, args.eps, args.mode, args.r)
        else:
            raise ConfigError("give --eps or --order")
    io.write_json(args.output, io.identity_to_dict(ident, resolved_config(args)))
    LOGGER.info("order %d, l2_bound %.3e", ident.order, ident.l2_bound)
    return 0


def cmd_sense_probe(args) -> int:
    from .harmonic import harmonic_certificate, to_real_table
    from .probe import build_probe, probe_identity

    if args.a == args.b:
        raise ConfigError("a and b must differ")
    if len(args.waypoints) < 2:
        raise ConfigError("a probe needs at least two waypoints")
    if (args.eps is None) == (args.order is None):
        raise ConfigError("give exactly one of --eps and --order")
    omega = _omega(args)
    if omega is None:
        raise ConfigError("sense-probe needs --omega-rect or --omega-disc")
    probe, diag = build_probe(args.waypoints, args.a, args.b, args.degree, args.mu, args.sigma, omega)
    ident = probe_identity(probe, order=args.order, eps=args.eps)
    geometry = probe.geometry(omega)
    table = harmonic_certificate(ident, to_real_table(ident), geometry, args.M)
    cfg = resolved_config(args)
    io.write_json(f"{args.output}.probe.json", io.probe_to_dict(probe, diag, geometry, cfg))
    io.write_json(f"{args.output}.identity.json", io.identity_to_dict(ident, cfg))
    io.write_json(f"{args.output}.table.json", io.table_to_dict(table, cfg))
    LOGGER.info("order %d, l2_bound %.3e, bound %.3e", ident.order, ident.l2_bound, table.bound())
    return 0


def cmd_runge(args) -> int:
    from .runge import push_pole, runge_weights

    curve = np.array(args.curve, dtype=complex)
    if curve.size < 2:
        raise ConfigError("a curve needs at least two vertices")
    R = push_pole(curve, args.delta, args.eps)
    boundary = None
    if args.boundary_circle:
        cx, cy, r = args.boundary_circle
        length = 2 * pi * r
        boundary = complex(cx, cy) + r * np.exp(2j * pi * np.arange(4096) / 4096)
    else:
        length = args.boundary_length
    ident = runge_weights(R, length, boundary)
    cfg = resolved_config(args)
    io.write_json(f"{args.output}.approximant.json", io.approximant_to_dict(R, cfg))
    io.write_json(f"{args.output}.identity.json", io.identity_to_dict(ident, cfg))
    LOGGER.info("degree %d, eps %.3e", R.degree, R.eps)
    return 0


def cmd_table(args) -> int:
    from .harmonic import harmonic_certificate, to_real_table
    from .probe import ProbeDomain

    kind, ident, _ = io.load_artifact(args.identity)
    if kind != "identity":
        raise ConfigError(f"table needs an identity artifact, got {kind}")
    table = to_real_table(ident)
    geometry = None
    omega = _omega(args)
    if args.area is not None or args.path_length is not None or args.dist is not None:
        if None in (args.area, args.path_length, args.dist):
            raise ConfigError("give all of --area, --path-length and --dist")
        geometry = {"area": args.area, "path_length": args.path_length, "dist_to_boundary": args.dist}
    elif omega is not None:
        if ident.domain.get("kind") != "probe":
            raise ConfigError("--omega needs an identity on a probe domain")
        geometry = ProbeDomain.from_dict(ident.domain).geometry(omega)
    if geometry is not None:
        table = harmonic_certificate(ident, table, geometry, args.M)
    io.write_json(args.output, io.table_to_dict(table, resolved_config(args)))
    return 0


def _family_report(kind, obj, args):
    from . import verify as vf

    if kind == "table":
        family = args.family or "harmonic"
        if family != "harmonic":
            raise ConfigError("tables are verified with the harmonic family")
        cx, cy, r = args.container
        return vf.harmonic_family_report(obj, args.count or 500, args.M, (complex(cx, cy), r),
                                         args.degree or 8, args.seed)
    if kind != "identity":
        raise ConfigError(f"cannot verify a {kind} artifact")
    dom = obj.domain.get("kind")
    default = {"disc": "polynomial", "probe": "probe", "runge": "runge"}.get(dom, "polynomial")
    family = args.family or default
    if family == "polynomial":
        return vf.polynomial_family_report(obj, args.count or 1000, args.degree or 60, args.seed)
    if family == "exactness":
        return vf.exactness_report(obj, args.count or 100, args.seed)
    if family == "probe":
        from .probe import ProbeDomain

        probe = ProbeDomain.from_dict(obj.domain)
        return vf.probe_family_report(obj, probe, args.count or 200, args.degree or 8, args.seed)
    if family == "runge":
        cx, cy, r = args.boundary
        return vf.runge_family_report(obj, (complex(cx, cy), r), args.count or 100,
                                      args.degree or 10, args.seed)
    raise ConfigError(f"family {family} does not apply to identities")


def cmd_verify(args) -> int:
    from .verify import verify_suite

    if args.suite:
        if args.artifact:
            raise ConfigError("--suite takes no artifact")
        report = verify_suite(args.seed, args.scale)
    else:
        if not args.artifact:
            raise ConfigError("give an artifact or --suite")
        kind, obj, _ = io.load_artifact(args.artifact)
        rep = _family_report(kind, obj, args)
        report = {"artifact_type": kind, "report": rep.to_dict(), "violations": rep.violations}
    text = io.dumps(io.report_to_dict(report, resolved_config(args)))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if report["violations"] > 0 else 0


def cmd_sweep(args) -> int:
    from .disc import taylor_identity
    from .verify import polynomial_family_report

    if args.Nmax < 0:
        raise ConfigError("--Nmax must be nonnegative")
    rows = []
    for N in range(args.Nmax + 1):
        ident = taylor_identity(args.b, N)
        rep = polynomial_family_report(ident, args.count, args.degree, args.seed)
        rows.append({"N": N, "l2_bound": ident.l2_bound, "max_residual": rep.max_residual})
    io.write_sweep_csv(args.output, rows)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _apply_config(parser, argv)
    except ConfigError as exc:
        print(f"bergman-sense: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, SensingError, io.ArtifactError, ValueError) as exc:
        print(f"bergman-sense: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
