"""``zeta``: command-line front end, one subcommand per experiment.

CSV output starts with one ``# {json}`` metadata line, then a header row.
JSON output is ``{"meta": {...}, "data": ...}``. With ``--no-timestamp``
identical flags give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from .correlations import (
    fit_double_exponential,
    spectral_gap_rate,
    tent_corr_polynomial,
    tent_corr_resolvent,
)
from .detseries import build_hardy, build_series
from .gibbs import arcsine_histogram, moment_summary, sample_gibbs
from .orbit import Parameter, compute_orbit, compute_k, lemma1_report
from .rootfind import find_roots, gap_partner, principal_eigenvalue
from .transferop import build_collocation, spectrum, spectrum_extended, tent_eigenpolynomials
from .zerodist import kuiper_statistic, zero_statistics

SCHEMAS = {
    "orbit": ["n", "sign", "lnmag", "r"],
    "det": ["n", "sign", "lnmag"],
    "zeros": ["re", "im", "abs", "arg", "residual"],
    "hardy": ["re", "im", "abs", "arg", "residual"],
    "zerodist": ["c", "t", "k", "n_zeros", "mean_log_ratio", "ks_angle", "frac_band_01", "annulus"],
    "spectrum": ["re", "im", "abs"],
    "tent": ["m", "eigenvalue", "coeffs"],
    "gibbs": ["x"],
    "corr": ["m", "sign", "ln_abs_rho", "rho"],
    "sweep": ["j", "c", "t", "k", "n_zeros", "mean_log_ratio", "ks", "r"],
    "sweep-gibbs": ["j", "c", "mean", "mean_se", "second", "second_se", "moment_distance"],
}

_EPILOG = "output schemas (CSV columns / JSON keys):\n" + "\n".join(
    f"  {name:12s} {', '.join(cols)}" for name, cols in SCHEMAS.items()
)


class CommandError(Exception):
    """A module-level failure; reported on one line with exit status 1."""


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


class Output:
    """Collects one table (or document) and writes it with its metadata."""

    def __init__(self, args, params: dict):
        self.args = args
        self.meta = {
            "subcommand": args.command,
            "parameters": params,
            "version": __version__,
        }
        if getattr(args, "seed", None) is not None:
            self.meta["seed"] = args.seed
        if not args.no_timestamp:
            self.meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")

    def render(self, schema: str, rows=None, doc=None, fmt=None) -> str:
        cols = SCHEMAS[schema]
        buf = io.StringIO()
        if (fmt or self.args.format) == "json":
            if doc is None:
                doc = [dict(zip(cols, r)) for r in rows]
            json.dump({"meta": _jsonable(self.meta), "data": _jsonable(doc)}, buf, indent=2, sort_keys=True)
            buf.write("\n")
            return buf.getvalue()
        if rows is None:
            rows = [[doc[c] for c in cols]]
        buf.write("# " + json.dumps(_jsonable(self.meta), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(v) if not isinstance(v, list) else " ".join(_fmt(u) for u in v) for v in r])
        return buf.getvalue()

    def emit(self, schema: str, rows=None, doc=None, path=None, fmt=None):
        text = self.render(schema, rows, doc, fmt)
        path = path or self.args.out
        if path:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _param(args) -> Parameter:
    if args.c is not None and args.t_exp is not None:
        raise CommandError("give only one of --c and --t-exp")
    if args.t_exp is not None:
        return Parameter.from_t(float(args.base) ** (-args.t_exp))
    if args.c is None:
        raise CommandError("one of --c or --t-exp is required")
    return Parameter.from_c(args.c)


def _zero_rows(zs):
    return [list(r) for r in zs.rows()]


def cmd_orbit(args):
    p = _param(args)
    if p.t > 0:
        k, _ = compute_k(p)
        orb = compute_orbit(p, max(args.n_terms or 0, k + 1))
        orb.k = k
        report = lemma1_report(orb).as_dict()
    else:
        orb = compute_orbit(p, args.n_terms or 16)
        report = None
    rows = [[n, e.sign, e.lnmag, float(v) if math.isfinite(v) else None]
            for n, (e, v) in enumerate(zip(orb.entries, orb.values), start=1)]
    out = Output(args, {"c": p.c, "t": p.t, "n_terms": orb.N, "cutoff_report": report})
    out.emit("orbit", rows)


def cmd_det(args):
    p = _param(args)
    s = build_series(p, args.radius, args.eps)
    out = Output(args, {"c": p.c, "t": p.t, "radius": s.R, "eps": args.eps, "N": s.N,
                        "flagged": s.flagged, "tail_bound": s.tail_bound})
    out.emit("det", s.rows())


def cmd_zeros(args):
    p = _param(args)
    zs = find_roots(build_series(p, args.radius, args.eps), args.radius)
    out = Output(args, {"c": p.c, "t": p.t, "radius": args.radius, "eps": args.eps,
                        "series": zs.series_ref, "n_rejected": zs.n_rejected})
    out.emit("zeros", _zero_rows(zs))


def cmd_hardy(args):
    if args.a is None or not args.a > 1:
        raise CommandError("--a > 1 is required")
    zs = find_roots(build_hardy(args.a, args.radius, args.eps), args.radius)
    v = zs.values
    out = Output(args, {"a": args.a, "radius": args.radius, "eps": args.eps,
                        "mean_log_abs": float(np.mean(np.log(np.abs(v)))) if v.size else None})
    out.emit("hardy", _zero_rows(zs))


def cmd_zerodist(args):
    p = _param(args)
    stats, _, _ = zero_statistics(p, args.radius)
    out = Output(args, {"c": p.c, "t": p.t, "radius": args.radius})
    if args.stats:
        out.emit("zerodist", doc=stats, path=args.stats, fmt="json")
    if args.out or not args.stats:
        out.emit("zerodist", doc=stats)


def cmd_spectrum(args):
    p = _param(args)
    if args.mode == "extended":
        est = spectrum_extended(p, args.degree)
    else:
        est = spectrum(build_collocation(p, args.degree))
    lam0, _ = principal_eigenvalue(p)
    rows = [[complex(e).real, complex(e).imag, abs(e)] for e in est.eigenvalues]
    out = Output(args, {"c": p.c, "t": p.t, "degree": args.degree, "precision": args.mode,
                        "condition_flag": est.condition_flag, "inverse_lambda0": 1.0 / lam0})
    out.emit("spectrum", rows)


def cmd_tent(args):
    rows = [[m, str(mu), [str(q) for q in poly]]
            for m, (mu, poly) in enumerate(tent_eigenpolynomials(args.degree))]
    Output(args, {"degree": args.degree}).emit("tent", rows)


def _require_seed(args):
    if args.seed is None:
        raise CommandError("--seed is required for sampling")


def cmd_gibbs(args):
    p = _param(args)
    _require_seed(args)
    smp = sample_gibbs(p, args.samples, args.seed, args.burn)
    params = {"c": p.c, "t": p.t, "samples": args.samples, "burn_in": args.burn, "seed": args.seed}
    out = Output(args, params)
    if args.format == "json":
        summary = moment_summary(smp)
        edges, emp, ref, tv = arcsine_histogram(smp.points)
        summary.update(hist_edges=edges.tolist(), hist_empirical=emp.tolist(),
                       hist_arcsine=ref.tolist(), hist_tv=tv)
        out.emit("gibbs", doc=summary)
    else:
        out.emit("gibbs", [[x] for x in smp.points])


def _parse_coeffs(text):
    if not text:
        raise CommandError("polynomial mode needs --coeffs-a and --coeffs-b")
    return [Fraction(v.strip()) for v in text.split(",")]


def cmd_corr(args):
    if args.mode == "tent":
        if args.z is None:
            raise CommandError("--z is required in tent mode")
        s = tent_corr_resolvent(args.z, args.m_max)
        params = {"mode": "tent", "z": args.z, "m_max": args.m_max}
        if args.m_max >= 5:
            ln_a, ratios = fit_double_exponential(s, 3, args.m_max)
            params.update(fit_m_lo=3, fit_m_hi=args.m_max, ln_a=ln_a, ratio_check=ratios)
        Output(args, params).emit("corr", [list(r) for r in s.rows()])
    elif args.mode == "polynomial":
        s = tent_corr_polynomial(_parse_coeffs(args.coeffs_a), _parse_coeffs(args.coeffs_b), args.m_max)
        params = {"mode": "polynomial", "coeffs_a": args.coeffs_a, "coeffs_b": args.coeffs_b,
                  "m_max": args.m_max, "k": s.meta["k"], "exact": [str(q) for q in s.exact]}
        Output(args, params).emit("corr", [list(r) for r in s.rows()])
    else:
        p = _param(args)
        r = spectral_gap_rate(p, args.radius)
        Output(args, {"mode": "gap", "c": p.c, "t": p.t, "radius": args.radius}).emit(
            "corr", doc={"m": None, "sign": 1, "ln_abs_rho": math.log(r), "rho": r})


def _sweep_point(job):
    j, base, radius = job
    p = Parameter.from_t(float(base) ** (-j))
    stats, zs, mu = zero_statistics(p, radius)
    lam0, _ = principal_eigenvalue(p)
    r = lam0 / gap_partner(zs, lam0)
    row = [j, p.c, p.t, stats["k"], stats["n_zeros"], stats["mean_log_ratio"], stats["ks_angle"], r]
    return row, np.angle(mu.points) / (2 * np.pi)


def _gibbs_point(job):
    j, base, samples, burn, seed = job
    p = Parameter.from_t(float(base) ** (-j))
    s = moment_summary(sample_gibbs(p, samples, seed, burn))
    return [j, p.c, s["mean"], s["mean_se"], s["second"], s["second_se"], abs(s["second"] - 2.0)]


def _fan_out(fn, jobs, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def cmd_sweep(args):
    js = list(range(args.j_from, args.j_to + 1))
    params = {"j_from": args.j_from, "j_to": args.j_to, "base": args.base, "radius": args.radius}
    if args.gibbs:
        _require_seed(args)
        params.update(samples=args.samples, burn_in=args.burn, seed=args.seed)
        rows = _fan_out(_gibbs_point, [(j, args.base, args.samples, args.burn, args.seed) for j in js],
                        args.jobs)
        Output(args, params).emit("sweep-gibbs", rows)
        return
    res = _fan_out(_sweep_point, [(j, args.base, args.radius) for j in js], args.jobs)
    rows = [r for r, _ in res]
    pooled = np.concatenate([u for _, u in res])
    params.update(pooled_ks=kuiper_statistic(pooled), pooled_n=int(pooled.size))
    out = Output(args, params)
    if args.stats:
        doc = {"rows": [dict(zip(SCHEMAS["sweep"], r)) for r in rows],
               "pooled_ks": params["pooled_ks"], "pooled_n": params["pooled_n"]}
        with open(args.stats, "w", encoding="utf-8") as fh:
            json.dump({"meta": _jsonable(out.meta), "data": _jsonable(doc)}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.out or not args.stats:
        out.emit("sweep", rows)


COMMANDS = {
    "orbit": cmd_orbit,
    "det": cmd_det,
    "zeros": cmd_zeros,
    "zerodist": cmd_zerodist,
    "spectrum": cmd_spectrum,
    "tent": cmd_tent,
    "gibbs": cmd_gibbs,
    "corr": cmd_corr,
    "hardy": cmd_hardy,
    "sweep": cmd_sweep,
}


def _common(sp):
    sp.add_argument("--out", help="output file (default: stdout)")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--no-timestamp", action="store_true", help="omit the timestamp for reproducible files")
    sp.add_argument("--json-config", help="JSON file whose keys set any flag of this subcommand")


def _param_flags(sp):
    sp.add_argument("--c", type=float, help="parameter c <= -2")
    sp.add_argument("--t-exp", type=float, help="use c = -2 - base**(-t_exp)")
    sp.add_argument("--base", type=int, choices=[4, 10], default=4)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zeta",
        description="Zeros and spectra of the Ruelle zeta function of z^2 + c, c <= -2.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, epilog=f"columns: {', '.join(SCHEMAS[name])}",
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        _common(sp)
        return sp

    sp = add("orbit", "critical orbit and cutoff lemma report")
    _param_flags(sp)
    sp.add_argument("--n-terms", type=int, help="orbit length (default k+1)")

    for name, help_, radius in [("det", "determinant coefficients", 1000.0),
                                ("zeros", "validated determinant zeros", 1000.0)]:
        sp = add(name, help_)
        _param_flags(sp)
        sp.add_argument("--radius", type=float, default=radius)
        sp.add_argument("--eps", type=float, default=1e-14)

    sp = add("hardy", "zeros of the Hardy series")
    sp.add_argument("--a", type=float, help="Hardy parameter a > 1")
    sp.add_argument("--radius", type=float, default=100.0)
    sp.add_argument("--eps", type=float, default=1e-14)

    sp = add("zerodist", "empirical zero-measure statistics")
    _param_flags(sp)
    sp.add_argument("--radius", type=float, default=2000.0)
    sp.add_argument("--stats", help="write stats JSON here")

    sp = add("spectrum", "collocation spectrum of the transfer operator")
    _param_flags(sp)
    sp.add_argument("--degree", type=int, default=96)
    sp.add_argument("--mode", choices=["double", "extended"], default="double",
                    help="extended: 200-bit arithmetic, resolves small eigenvalues")

    sp = add("tent", "eigenpolynomials of the tent averaging operator")
    sp.add_argument("--degree", type=int, default=12)

    sp = add("gibbs", "sample the Gibbs state (csv: points, json: moments)")
    _param_flags(sp)
    sp.add_argument("--samples", type=int, default=100000)
    sp.add_argument("--burn", type=int, default=1000)
    sp.add_argument("--seed", type=int)

    sp = add("corr", "correlation decay")
    _param_flags(sp)
    sp.add_argument("--mode", choices=["tent", "polynomial", "gap"], default="tent")
    sp.add_argument("--z", type=float, help="resolvent parameter z > 2 (tent mode)")
    sp.add_argument("--m-max", type=int, default=8)
    sp.add_argument("--coeffs-a", help="comma-separated p_m coefficients of A (polynomial mode)")
    sp.add_argument("--coeffs-b", help="comma-separated p_m coefficients of B (polynomial mode)")
    sp.add_argument("--radius", type=float, default=1000.0)

    sp = add("sweep", "pipeline over c = -2 - base**(-j)")
    sp.add_argument("--j-from", type=int)
    sp.add_argument("--j-to", type=int)
    sp.add_argument("--base", type=int, choices=[4, 10], default=4)
    sp.add_argument("--radius", type=float, default=2000.0)
    sp.add_argument("--stats", help="write per-j rows and pooled statistics as JSON")
    sp.add_argument("--gibbs", action="store_true", help="moment trend of the Gibbs state instead")
    sp.add_argument("--samples", type=int, default=100000)
    sp.add_argument("--burn", type=int, default=1000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


def _apply_json_config(parser, argv):
    """Re-parse with keys from ``--json-config`` as defaults; explicit flags win."""
    args = parser.parse_args(argv)
    if not getattr(args, "json_config", None):
        return args
    try:
        with open(args.json_config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as exc:
        parser.error(f"cannot read --json-config: {exc}")
    if not isinstance(cfg, dict):
        parser.error("--json-config must hold a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    sub = parser._subparsers._group_actions[0].choices[args.command]
    flags = {a.dest: a for a in sub._actions if a.option_strings and a.dest not in ("help", "json_config")}
    unknown = sorted(set(cfg) - set(flags))
    if unknown:
        parser.error(f"unknown keys in --json-config: {', '.join(unknown)}")
    # config keys become leading flags so argparse applies the same types and
    # choices; flags given on the command line come later and win
    pre = []
    for k, v in cfg.items():
        action = flags[k]
        opt = action.option_strings[-1]
        if isinstance(action, argparse._StoreTrueAction):
            if v:
                pre.append(opt)
        elif v is not None:
            pre.append(f"{opt}={v}")
    i = argv.index(args.command)
    return parser.parse_args(argv[: i + 1] + pre + argv[i + 1:])


def _validate(parser, args):
    if args.command == "sweep":
        if args.j_from is None or args.j_to is None:
            parser.error("--j-from and --j-to are required")
        if args.j_from > args.j_to:
            parser.error("--j-from must not exceed --j-to")
        if args.j_to > 12:
            parser.error("--j-to must be <= 12")
        if args.j_from < 1:
            parser.error("--j-from must be >= 1")
    if (args.command == "gibbs" or getattr(args, "gibbs", False)) and args.seed is None:
        parser.error("--seed is required when sampling")
    for name in ("samples", "degree", "m_max", "n_terms"):
        v = getattr(args, name, None)
        if v is not None and v < (0 if name == "m_max" else 1):
            parser.error(f"--{name.replace('_', '-')} out of range")
    if getattr(args, "radius", 1.0) is not None and getattr(args, "radius", 1.0) <= 0:
        parser.error("--radius must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = _apply_json_config(parser, argv)
    _validate(parser, args)
    try:
        COMMANDS[args.command](args)
    except (CommandError, ValueError, ArithmeticError, RuntimeError, np.linalg.LinAlgError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"zeta: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
