"""Command-line front end.

Every command reads a lattice (a JSON file, or ``integer`` for Z^d) and,
where needed, one or more bodies (a JSON file or an inline JSON object).
Options may also come from ``--config FILE``; flags given on the command
line win.  Randomized commands require ``--seed`` and are reproducible
byte for byte for a fixed seed and package version.

Exit status is 0 on success, 1 on a library error (printed as a single
``error: <code>: <message>`` line on stderr) and 2 on a configuration error.
"""
import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bodies import body_from_json
from .enumeration import enumerate_in_body
from .errors import LatsliceError
from .gaussian import ExactSampler, klein_sample_coeffs, poisson_check, prob_zero, theta
from .lattice import Lattice
from .slicing import (
    BoundReport,
    FinderConfig,
    best_slice_dual_search,
    best_slice_exact,
    randomized_finder,
    verify_bound,
)

RANDOMIZED = {"sample", "slice-random", "verify", "suite", "calibrate"}
CONFIG_KEYS = {"body", "lattice", "dim", "seed", "s", "n", "sampler", "norm_bound", "big_C",
               "small_c", "max_attempts", "out", "format", "method"}


class ConfigError(Exception):
    pass


# -- parsing ------------------------------------------------------------------


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default option values")
    common.add_argument("--body", action="append",
                        help="body JSON file or inline JSON object (repeatable for suite)")
    common.add_argument("--lattice", help='lattice JSON file, or "integer" for Z^d')
    common.add_argument("--dim", type=int, help="dimension of the integer lattice")
    common.add_argument("--seed", type=int)
    common.add_argument("--s", type=float, help="Gaussian width")
    common.add_argument("--n", type=int, help="number of samples")
    common.add_argument("--sampler", choices=("exact", "klein", "auto"))
    common.add_argument("--norm-bound", dest="norm_bound", type=float)
    common.add_argument("--big-C", dest="big_C", type=float)
    common.add_argument("--small-c", dest="small_c", type=float)
    common.add_argument("--max-attempts", dest="max_attempts", type=int)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    p = argparse.ArgumentParser(prog="latslice", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"latslice {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("enumerate", parents=[common], help="lattice points of a body (CSV)")
    sub.add_parser("theta", parents=[common], help="theta series and Poisson residual")
    sub.add_parser("sample", parents=[common], help="discrete Gaussian samples")
    sub.add_parser("slice-random", parents=[common], help="randomized hyperplane finder")
    best = sub.add_parser("slice-best", parents=[common], help="best dual hyperplane")
    best.add_argument("method", nargs="?", choices=("exact", "dual"))
    sub.add_parser("verify", parents=[common], help="bound report for one body")
    sub.add_parser("suite", parents=[common], help="bound reports over the standard suite")
    sub.add_parser("calibrate", parents=[common], help="sweep the finder constants")
    return p


def _merge_config(args):
    if not args.config:
        return args
    try:
        conf = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(conf, dict):
        raise ConfigError("config must be a JSON object")
    flat = dict(conf)
    for key, val in (conf.get("constants") or {}).items():
        flat.setdefault(key, val)
    if "bodies" in conf:
        flat.setdefault("body", conf["bodies"])
    if "sample_count" in conf:
        flat.setdefault("n", conf["sample_count"])
    output = conf.get("output")
    if isinstance(output, dict):
        flat.setdefault("out", output.get("path"))
        flat.setdefault("format", output.get("format"))
    elif isinstance(output, str):
        flat.setdefault("out", output)
    for key in CONFIG_KEYS:
        if key in flat and getattr(args, key, None) is None and hasattr(args, key):
            val = flat[key]
            if key == "body" and not isinstance(val, list):
                val = [val]
            setattr(args, key, val)
    return args


def _load_json_arg(value, what):
    if isinstance(value, dict):
        return value
    text = str(value).strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid inline {what} JSON: {exc}") from None
    try:
        return json.loads(Path(text).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {text}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid {what} JSON in {text}: {exc}") from None


def _bodies(args):
    out = []
    for i, item in enumerate(args.body or []):
        if isinstance(item, dict) and "body" in item:
            bid, obj = str(item.get("id", f"body{i}")), _load_json_arg(item["body"], "body")
        else:
            obj = _load_json_arg(item, "body")
            bid = Path(item).stem if isinstance(item, str) and not item.strip().startswith("{") \
                else f"body{i}"
        out.append((bid, body_from_json(obj)))
    return out


def _one_body(args):
    bodies = _bodies(args)
    if len(bodies) != 1:
        raise ConfigError(f"{args.command} needs exactly one --body")
    return bodies[0][1]


def _lattice(args, body=None):
    item = args.lattice or "integer"
    if item == "integer":
        d = args.dim if args.dim is not None else (body.dim if body is not None else None)
        if d is None or d < 1:
            raise ConfigError("the integer lattice needs --dim or a --body")
        return Lattice.integer(d)
    return Lattice.from_json(_load_json_arg(item, "lattice"))


def _finder_config(args):
    kw = {"seed": args.seed if args.seed is not None else 0}
    for key in ("big_C", "small_c", "max_attempts"):
        if getattr(args, key) is not None:
            kw[key] = getattr(args, key)
    if args.sampler is not None:
        kw["sampler"] = args.sampler
    try:
        return FinderConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ConfigError(f"{args.command} requires --{name.replace('_', '-')}")


# -- output ------------------------------------------------------------------


def _json_text(obj):
    return json.dumps(obj, indent=2) + "\n"


def _csv_text(header, rows, comment=None):
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, text):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------


def cmd_enumerate(args):
    body = _one_body(args)
    ps = enumerate_in_body(_lattice(args, body), body)
    if args.format == "json":
        return _json_text({"coeffs": ps.coeffs.tolist(), "points": ps.points.tolist(),
                           "count": len(ps), "version": __version__})
    return f"# latslice {__version__}\n" + ps.to_csv()


def cmd_theta(args):
    _require(args, "s")
    body = _one_body(args) if args.body else None
    lat = _lattice(args, body)
    res = theta(lat, args.s)
    out = {"dim": lat.dim, "s": args.s, "value": res.value,
           "truncation_radius": res.truncation_radius, "terms_used": res.terms_used,
           "tail_bound": res.tail_bound, "poisson_residual": poisson_check(lat, args.s),
           "version": __version__}
    if args.format == "csv":
        return _csv_text(list(out), [[repr(v) if isinstance(v, float) else v
                                      for v in out.values()]])
    return _json_text(out)


def cmd_sample(args):
    _require(args, "s", "n", "seed")
    body = _one_body(args) if args.body else None
    lat = _lattice(args, body)
    rng = np.random.default_rng(args.seed)
    kind = args.sampler or "exact"
    if kind == "klein":
        coeffs = klein_sample_coeffs(lat, args.s, rng, args.n)
    else:
        coeffs = ExactSampler(lat, args.s).sample_coeffs(rng, args.n)
    pts = lat.points(coeffs)
    zeros = int(np.count_nonzero(np.all(coeffs == 0, axis=1)))
    p0 = prob_zero(lat, args.s)
    sigma = math.sqrt(p0 * (1 - p0) / args.n)
    summary = {"n": args.n, "sampler": kind, "s": args.s, "seed": args.seed,
               "zero_frequency": zeros / args.n, "prob_zero": p0, "sigma": sigma,
               "z_score": (zeros / args.n - p0) / sigma if sigma > 0 else 0.0,
               "version": __version__}
    d = lat.dim
    if args.format == "json":
        return _json_text({"summary": summary, "coeffs": coeffs.tolist(),
                           "points": pts.tolist()})
    sys.stderr.write(json.dumps(summary) + "\n")
    rows = [c + [repr(float(v)) for v in x] for c, x in zip(coeffs.tolist(), pts.tolist())]
    return _csv_text([f"c{i}" for i in range(d)] + [f"x{i}" for i in range(d)], rows,
                     comment=f"latslice {__version__} sampler={kind} s={args.s!r} "
                             f"seed={args.seed}")


def cmd_slice_random(args):
    _require(args, "seed")
    body = _one_body(args)
    lat = _lattice(args, body)
    res = randomized_finder(lat, body, _finder_config(args), np.random.default_rng(args.seed))
    return _json_text(res.to_json())


def cmd_slice_best(args):
    body = _one_body(args)
    lat = _lattice(args, body)
    method = args.method or "exact"
    if method == "dual":
        res = best_slice_dual_search(lat, body, norm_bound=args.norm_bound)
    else:
        res = best_slice_exact(lat, body)
    return _json_text(res.to_json())


def _reports_text(args, reports):
    if args.format == "json":
        return _json_text([r.to_json() for r in reports])
    return _csv_text(BoundReport.CSV_COLUMNS, [r.csv_row() for r in reports])


def cmd_verify(args):
    _require(args, "seed")
    body = _one_body(args)
    lat = _lattice(args, body)
    bid = _bodies(args)[0][0]
    report = verify_bound(lat, body, _finder_config(args), np.random.default_rng(args.seed),
                          body_id=bid)
    if args.format == "csv":
        return _reports_text(args, [report])
    return _json_text(report.to_json())


def cmd_suite(args):
    from .suite import run_suite
    _require(args, "seed")
    bodies = _bodies(args) or None
    reports = run_suite(args.seed, _finder_config(args), bodies=bodies)
    return _reports_text(args, reports)


def cmd_calibrate(args):
    from .suite import calibrate
    _require(args, "seed")
    bodies = _bodies(args) or None
    report = calibrate(args.seed, bodies=bodies, max_attempts=args.max_attempts)
    report["seed"] = args.seed
    report["version"] = __version__
    return _json_text(report)


COMMANDS = {
    "enumerate": cmd_enumerate,
    "theta": cmd_theta,
    "sample": cmd_sample,
    "slice-random": cmd_slice_random,
    "slice-best": cmd_slice_best,
    "verify": cmd_verify,
    "suite": cmd_suite,
    "calibrate": cmd_calibrate,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        args = _merge_config(args)
        if args.command in RANDOMIZED and args.seed is None:
            raise ConfigError(f"{args.command} is randomized and requires --seed")
        text = COMMANDS[args.command](args)
        _emit(args, text)
    except ConfigError as exc:
        sys.stderr.write(f"error: config: {exc}\n")
        return 2
    except LatsliceError as exc:
        msg = " ".join(str(exc).split())
        sys.stderr.write(f"error: {exc.code}: {msg}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
