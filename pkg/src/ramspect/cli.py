"""Command-line front end: seeded, reproducible, file-oriented runs.

Text/CSV artifacts begin with '#' header lines (version, effective config,
master seed); JSON artifacts embed the same header object at the top level.
Below the header, output is byte-identical across re-runs with the same
config and seed, independent of --workers.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import anticoncentration as ac
from . import graph_core as gc
from . import spectrum_oracle as so
from . import structure_audit as sa
from .double_exposure import ExposureParams, per_m_run, theorem_run
from .errors import (CapacityError, ConstructionFailure, GraphParseError,
                     ParameterError, RamspectError)
from .ramsey_construct import ConstructionParams, construct
from .seeding import derive_seed

VERSION = "0.1.0"
SCHEMA = 1


# ── slope fitting ────────────────────────────────────────────────────────


def fit_slope(points) -> tuple[float, float]:
    """Least-squares slope of log(count) vs log(n) with a 95% interval.

    Returns (slope, half_width); the interval is slope +- half_width where
    half_width = 1.96 * standard error of the slope. Requires >= 3 points,
    pairwise-distinct n, and positive n and counts.
    """
    pts = [(float(n), float(c)) for n, c in points]
    if len(pts) < 3:
        raise ParameterError(f"slope fit needs >= 3 points, got {len(pts)}")
    if any(n <= 0 or c <= 0 for n, c in pts):
        raise ParameterError("slope fit needs positive n and count values")
    if len({n for n, _ in pts}) != len(pts):
        raise ParameterError("slope fit needs pairwise-distinct n values")
    xs = [math.log(n) for n, _ in pts]
    ys = [math.log(c) for _, c in pts]
    k = len(pts)
    xbar = sum(xs) / k
    ybar = sum(ys) / k
    sxx = sum((x - xbar) ** 2 for x in xs)
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    sse = sum((y - ybar - slope * (x - xbar)) ** 2 for x, y in zip(xs, ys))
    se = math.sqrt(max(sse, 0.0) / (k - 2) / sxx)
    return slope, 1.96 * se


# ── plumbing ─────────────────────────────────────────────────────────────


class _Parser(argparse.ArgumentParser):
    # contract: bad usage is a parameter error -> exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _coerce(text: str):
    low = text.lower()
    if low == "none":
        return None
    if low == "true":
        return True
    if low == "false":
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


# seed is set by --seed, never by --set
_CP_KEYS = frozenset(f.name for f in fields(ConstructionParams)) - {"seed"}
_EP_KEYS = frozenset(f.name for f in fields(ExposureParams)) - {"seed"}
_AP_KEYS = frozenset(f.name for f in fields(sa.AuditParams)) - {"seed"}


def _split_overrides(pairs, groups: dict) -> dict:
    out = {name: {} for name in groups}
    for raw in pairs or ():
        key, sep, val = raw.partition("=")
        if not sep or not key:
            raise ParameterError(f"override must be key=value, got {raw!r}")
        key = key.strip()
        hits = [name for name, keys in groups.items() if key in keys]
        if not hits:
            known = sorted(set().union(*groups.values()))
            raise ParameterError(
                f"unknown override key {key!r}; known keys: {', '.join(known)}")
        for name in hits:
            out[name][key] = _coerce(val.strip())
    return out


def _json_default(obj):
    if isinstance(obj, gc.Unit):
        return list(obj.vertices)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_json_default)


def _header_obj(ns, config: dict) -> dict:
    return {"version": VERSION, "seed": getattr(ns, "seed", 0), "config": config}


def _text_header(ns, config: dict) -> str:
    h = _header_obj(ns, config)
    return (f"# ramspect {h['version']}\n"
            f"# seed {h['seed']}\n"
            f"# config {_dumps(config)}\n")


def _emit(ns, header: str, body: str) -> None:
    """File outputs carry the '#' header; stdout stays bare for piping."""
    if not body.endswith("\n"):
        body += "\n"
    if getattr(ns, "out", None):
        Path(ns.out).write_text(header + body)
    else:
        sys.stdout.write(body)


def _emit_json(ns, config: dict, payload: dict) -> None:
    # JSON artifacts embed the header object so the file stays parseable
    doc = {"schema": SCHEMA, "header": _header_obj(ns, config)}
    doc.update(payload)
    _emit(ns, "", _dumps(doc))


def _add_graph_args(p: _Parser) -> None:
    p.add_argument("--graph", metavar="FILE",
                   help="edge-list file: header 'n <count>', then 'u v' lines")
    p.add_argument("--gen", choices=("gnp", "paley", "complete", "empty"),
                   help="generator model (alternative to --graph)")
    p.add_argument("--n", type=int, help="vertex count (prime q for paley)")
    p.add_argument("--p", type=float, default=0.5, help="gnp edge probability")
    p.add_argument("--graph-seed", type=int, default=0, help="generator seed")


def _build_graph(ns) -> tuple[gc.Graph, dict]:
    if bool(ns.graph) == bool(ns.gen):
        raise ParameterError("exactly one of --graph or --gen is required")
    if ns.graph:
        g = gc.load_graph(Path(ns.graph).read_text())
        return g, {"file": ns.graph, "n": g.n}
    if ns.n is None:
        raise ParameterError("--gen requires --n")
    if ns.gen == "paley":
        g = gc.generate("paley", q=ns.n)
        return g, {"model": "paley", "q": ns.n}
    g = gc.generate(ns.gen, n=ns.n, p=ns.p, seed=ns.graph_seed)
    cfg = {"model": ns.gen, "n": ns.n, "seed": ns.graph_seed}
    if ns.gen == "gnp":
        cfg["p"] = ns.p
    return g, cfg


def _units_out(units) -> list:
    return [list(u.vertices) for u in units]


def _construct_payload(res) -> dict:
    return {
        "mode": res.mode,
        "anchor": res.anchor,
        "d": res.d,
        "d_prime": res.d_prime,
        "d_doubleprime": res.d_doubleprime,
        "p": res.p,
        "u0_size": res.u0_mask.bit_count(),
        "gap_floor": res.gap_floor,
        "kappa3": res.kappa3,
        "working_n": res.working_n,
        "a_units": _units_out(res.a_units),
        "s_units": _units_out(res.s_units),
        "t_units": _units_out(res.t_units),
        "x_units": _units_out(res.x_units),
        "diagnostics": res.diagnostics,
    }


def _fmt_cell(cell) -> str:
    k, i = cell
    return f"{k}:{i}"


def _per_m_row(out) -> str:
    ks = "|".join(str(k) for k in out.k_selected)
    ps = "|".join(_fmt_cell(c) for c in out.p_selected)
    return f"{out.m},{out.e_u},{out.distinct_count},{ks},{ps},{out.attempts}"


_PER_M_COLS = "m,e_U,distinct_count,k_selected,p_selected,attempts"


def _dump_outcome(ns, config: dict, out) -> None:
    rec_rows = []
    for r in out.records:
        rec_rows.append({
            "k": r.k,
            "i_values": list(r.i_values),
            "e_values": list(r.e_values),
            "e_hat": r.e_hat,
            "checks": list(r.checks) if r.checks is not None else None,
            "i_pass": list(r.i_pass),
            "x_witnesses": {str(i): [[list(u.vertices), v] for u, v in wit]
                            for i, wit in r.x_witnesses.items()},
        })
    doc = {"schema": SCHEMA, "header": _header_obj(ns, config),
           "m": out.m, "e_u": out.e_u, "u_mask": out.u_mask,
           "k_selected": list(out.k_selected),
           "p_selected": [list(c) for c in out.p_selected],
           "family": [[k, i, list(u.vertices)] for k, i, u in out.family],
           "distinct_sizes": list(out.distinct_sizes),
           "window_center": out.window_center,
           "window_radius": out.window_radius,
           "attempts": out.attempts,
           "constants": out.constants,
           "records": rec_rows,
           "diagnostics": out.diagnostics}
    Path(ns.dump).write_text(_dumps(doc) + "\n")


def _pipeline_params(ns) -> tuple[ConstructionParams, ExposureParams, dict]:
    ov = _split_overrides(ns.set, {"construct": _CP_KEYS, "exposure": _EP_KEYS})
    cp = ConstructionParams(seed=ns.seed, **ov["construct"])
    ep = ExposureParams(seed=derive_seed(ns.seed, "exposure"), **ov["exposure"])
    return cp, ep, ov


def _default_m(cp: ConstructionParams, n: int) -> int:
    # midpoint of the admissible window [c*n^2, 2c*n^2]
    return round(1.5 * cp.c_density * n * n)


# ── subcommands ──────────────────────────────────────────────────────────


def cmd_generate(ns) -> int:
    if ns.gen == "paley":
        g = gc.generate("paley", q=ns.n)
        cfg = {"model": "paley", "q": ns.n}
    else:
        g = gc.generate(ns.gen, n=ns.n, p=ns.p, seed=ns.seed)
        cfg = {"model": ns.gen, "n": ns.n, "seed": ns.seed}
        if ns.gen == "gnp":
            cfg["p"] = ns.p
    _emit(ns, _text_header(ns, cfg), gc.dump_graph(g))
    return 0


def cmd_phi(ns) -> int:
    g, gsrc = _build_graph(ns)
    cfg = {"graph": gsrc, "cap": ns.cap, "workers": ns.workers}
    sizes = so.phi_exact(g, cap=ns.cap, workers=ns.workers).sizes
    body = ",".join(str(s) for s in sizes)
    summary = f"|Phi|={len(sizes)} max={max(sizes)}"
    _emit(ns, _text_header(ns, cfg), body + "\n" + summary + "\n")
    return 0


def cmd_psi(ns) -> int:
    g, gsrc = _build_graph(ns)
    cfg = {"graph": gsrc, "cap": ns.cap, "workers": ns.workers}
    pairs = so.psi_exact(g, cap=ns.cap, workers=ns.workers)
    body = ",".join(f"{k}:{s}" for k, s in pairs)
    summary = f"|Psi|={len(pairs)} max={max(s for _, s in pairs)}"
    _emit(ns, _text_header(ns, cfg), body + "\n" + summary + "\n")
    return 0


def cmd_audit(ns) -> int:
    g, gsrc = _build_graph(ns)
    ov = _split_overrides(ns.set, {"audit": _AP_KEYS})
    params = sa.AuditParams(seed=ns.seed, **ov["audit"])
    cfg = {"graph": gsrc, "params": asdict(params), "exhaustive": ns.exhaustive}

    density, _ = sa.density_bounds_check(g, params.epsilon)
    profile = sa.diversity_profile(g, params.c_div)
    verdict = sa.richness_audit(g, params, exhaustive=ns.exhaustive)
    extract = sa.rich_extract(g, params)
    payload = {
        "density": density,
        "diversity_max_count": max(profile) if profile else 0,
        "close_complement_pairs":
            sa.close_complement_pair_count(g, params.epsilon / 2),
        "richness_status": verdict.status,
        "extract_trace": {
            "status": extract.status,
            "kept_size": extract.u_mask.bit_count(),
            "rounds": [asdict(r) for r in extract.trace],
        },
    }
    _emit_json(ns, cfg, payload)
    return 0


def cmd_lo(ns) -> int:
    n_values = ns.n_list
    cfg = {"model": ns.model, "n_values": n_values, "p": ns.p,
           "trials": ns.trials}
    fit = ac.lo_scaling_fit(n_values, coeff_model=ns.model, p=ns.p,
                            trials=ns.trials, seed=ns.seed)
    lines = ["n,max_prob,method"]
    for n, prob, method in zip(fit.n_values, fit.max_probs, fit.methods):
        lines.append(f"{n},{prob:.12e},{method}")
    lines.append(f"# slope={fit.slope:.6f} stderr={fit.stderr:.6f}")
    _emit(ns, _text_header(ns, cfg), "\n".join(lines) + "\n")
    return 0


def cmd_construct(ns) -> int:
    g, gsrc = _build_graph(ns)
    cp, _, ov = _pipeline_params(ns)
    m = ns.m if ns.m is not None else _default_m(cp, g.n)
    cfg = {"graph": gsrc, "m": m, "cparams": asdict(cp),
           "overrides": ov["construct"]}
    res = construct(g, m, cp)
    _emit_json(ns, cfg, _construct_payload(res))
    return 0


def cmd_per_m(ns) -> int:
    g, gsrc = _build_graph(ns)
    cp, ep, ov = _pipeline_params(ns)
    m = ns.m if ns.m is not None else _default_m(cp, g.n)
    cfg = {"graph": gsrc, "m": m, "cparams": asdict(cp), "eparams": asdict(ep),
           "workers": ns.workers}
    out = per_m_run(g, m, cp, ep)
    body = _PER_M_COLS + "\n" + _per_m_row(out) + "\n"
    _emit(ns, _text_header(ns, cfg), body)
    if ns.dump:
        _dump_outcome(ns, cfg, out)
    return 0


def cmd_theorem(ns) -> int:
    g, gsrc = _build_graph(ns)
    cp, ep, _ = _pipeline_params(ns)
    cfg = {"graph": gsrc, "cparams": asdict(cp), "eparams": asdict(ep),
           "sigma": ns.sigma, "workers": ns.workers}
    out = theorem_run(g, cp, ep, sigma=ns.sigma)
    lines = [_PER_M_COLS]
    lines.extend(_per_m_row(w) for w in out.kept)
    lines.append(f"# total_distinct={out.total_distinct} step={out.step} "
                 f"windows_attempted={len(out.windows)}")
    _emit(ns, _text_header(ns, cfg), "\n".join(lines) + "\n")
    if ns.dump:
        doc = {"schema": SCHEMA, "header": _header_obj(ns, cfg),
               "step": out.step, "total_distinct": out.total_distinct,
               "windows": [[m, (o.distinct_count if o is not None else None),
                            kept] for m, o, kept in out.windows],
               "kept_sizes": [list(w.distinct_sizes) for w in out.kept],
               "diagnostics": out.diagnostics}
        Path(ns.dump).write_text(_dumps(doc) + "\n")
    return 0


def cmd_sweep(ns) -> int:
    ov = _split_overrides(ns.set, {"construct": _CP_KEYS, "exposure": _EP_KEYS})
    cfg = {"mode": ns.mode, "n_values": ns.n_list, "p": ns.p,
           "overrides": {k: v for grp in ov.values() for k, v in grp.items()},
           "workers": ns.workers}
    rows = []
    failures = 0
    for n in ns.n_list:
        g = gc.generate("gnp", n=n, p=ns.p, seed=derive_seed(ns.seed, "graph", n))
        seed_n = derive_seed(ns.seed, "sweep", n)
        cp = ConstructionParams(seed=seed_n, **ov["construct"])
        ep = ExposureParams(seed=derive_seed(seed_n, "exposure"),
                            **ov["exposure"])
        try:
            if ns.mode == "per-m":
                count = per_m_run(g, _default_m(cp, n), cp, ep).distinct_count
            else:
                count = theorem_run(g, cp, ep).total_distinct
        except ConstructionFailure:
            failures += 1
            count = 0
        rows.append((n, count))
    lines = ["n,count"]
    lines.extend(f"{n},{c}" for n, c in rows)
    # zero-count rows carry no log-scale information; fit on the rest
    fittable = [(n, c) for n, c in rows if c > 0]
    try:
        slope, half = fit_slope(fittable)
        lines.append(f"slope={slope:.6f} ci95={half:.6f}")
    except ParameterError:
        lines.append("slope=nan ci95=nan")
    _emit(ns, _text_header(ns, cfg), "\n".join(lines) + "\n")
    return 0 if failures < len(ns.n_list) else 3


# ── parser assembly / dispatch ───────────────────────────────────────────


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints: {text!r}")


def _build_parser() -> _Parser:
    top = _Parser(prog="ramspect",
                  description="Induced-subgraph size spectra: oracles, audits, "
                              "and the randomized double-exposure pipeline.")
    sub = top.add_subparsers(dest="cmd", parser_class=_Parser)

    def common(p, *, seed=True, out=True):
        if seed:
            p.add_argument("--seed", type=int, default=0, help="master seed")
        if out:
            p.add_argument("--out", metavar="FILE", help="output file (default stdout)")

    p = sub.add_parser("generate", help="write a graph file")
    p.add_argument("--gen", required=True, choices=("gnp", "paley", "complete", "empty"))
    p.add_argument("--n", type=int, required=True, help="vertex count (prime q for paley)")
    p.add_argument("--p", type=float, default=0.5)
    common(p)
    p.set_defaults(func=cmd_generate)

    for name, fn, cap in (("phi", cmd_phi, so.PHI_EXACT_CAP),
                          ("psi", cmd_psi, so.PHI_EXACT_CAP)):
        p = sub.add_parser(name, help=f"exact {name} spectrum of a small graph")
        _add_graph_args(p)
        p.add_argument("--cap", type=int, default=cap,
                       help="refuse graphs larger than this")
        p.add_argument("--workers", type=int, default=1)
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("audit", help="density/diversity/richness report (JSON)")
    _add_graph_args(p)
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="audit parameter override (repeatable)")
    p.add_argument("--exhaustive", action="store_true",
                   help="decide richness exhaustively (small n only)")
    common(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("lo", help="anticoncentration max point mass (CSV)")
    p.add_argument("--model", default="ones", choices=ac.COEFF_MODELS)
    p.add_argument("--n-list", type=_int_list, required=True,
                   help="comma-separated n values (>=4, spanning 2 octaves)")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=200_000)
    common(p)
    p.set_defaults(func=cmd_lo)

    def pipeline(p, *, with_m):
        _add_graph_args(p)
        if with_m:
            p.add_argument("--m", type=int, default=None,
                           help="target edge count (default: window midpoint)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="construction/exposure parameter override")
        p.add_argument("--diagnostics", metavar="FILE",
                       help="where to write failure diagnostics (exit 3)")
        p.add_argument("--workers", type=int, default=1)
        common(p)

    p = sub.add_parser("construct", help="run the scaffold construction (JSON)")
    pipeline(p, with_m=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("per-m", help="one exposure window (CSV)")
    pipeline(p, with_m=True)
    p.add_argument("--dump", metavar="FILE", help="full outcome as JSON")
    p.set_defaults(func=cmd_per_m)

    p = sub.add_parser("theorem", help="sweep m and union disjoint windows (CSV)")
    pipeline(p, with_m=False)
    p.add_argument("--sigma", type=float, default=None,
                   help="window stride scale override")
    p.add_argument("--dump", metavar="FILE", help="full outcome as JSON")
    p.set_defaults(func=cmd_theorem)

    p = sub.add_parser("sweep", help="per-m or theorem across n; CSV + slope")
    p.add_argument("--mode", default="per-m", choices=("per-m", "theorem"))
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--diagnostics", metavar="FILE")
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_sweep)

    return top


def _diag_path(ns) -> str:
    if getattr(ns, "diagnostics", None):
        return ns.diagnostics
    if getattr(ns, "out", None):
        return ns.out + ".diag.json"
    return f"{ns.cmd.replace('-', '_')}.diag.json"


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if getattr(ns, "cmd", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return ns.func(ns)
    except ConstructionFailure as exc:
        path = _diag_path(ns)
        doc = {"schema": SCHEMA, "stage": exc.stage, "message": str(exc),
               "diagnostics": exc.diagnostics}
        Path(path).write_text(_dumps(doc) + "\n")
        print(f"pipeline failure at stage {exc.stage!r}; diagnostics in {path}",
              file=sys.stderr)
        return 3
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return 2
    except RamspectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
