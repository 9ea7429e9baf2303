"""Command-line harness.

Subcommands:
  table <1-6>        recompute a reference table and compare cell by cell
  moments            moment summaries for one model over a p_R list
  counter            dead-time counter pmf (optionally with MC columns)
  simulate fpt       Euler-Maruyama first-passage sampling
  simulate fet       elastic-threshold lattice-walk sampling
  simulate counter   dead-time counter sampling
  compare <ref.csv>  compare a computed table against a user-supplied CSV

Exit codes: 0 success, 1 comparison failure, 2 computation/validation error.
Model parameters come from repeated `--param key=value` flags and/or a
`--config` file of key=value lines (CLI flags win).
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import deadtime, moments, montecarlo, tables
from .diffusion import ElasticThreshold
from .models import (
    FellerParams,
    OUParams,
    WienerParams,
    feller_spec,
    ou_spec,
    wiener_spec,
)

EXIT_OK = 0
EXIT_COMPARISON_FAILED = 1
EXIT_ERROR = 2

_MODEL_KEYS = {
    "wiener": ("mu", "sigma2", "nu"),
    "ou": ("theta", "rho", "sigma2", "nu"),
    "feller": ("theta", "rho", "xi", "nu"),
}


def _parse_kv(pairs, source: str) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ValueError(f"{source}: expected key=value, got {item!r}")
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def _read_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _build_spec(model: str, params: dict):
    if model == "custom":
        raise ValueError(
            "custom models need drift/variance callables and are library-only; "
            "use elasticfpt.diffusion.DiffusionSpec directly"
        )
    keys = _MODEL_KEYS.get(model)
    if keys is None:
        raise ValueError(f"unknown model {model!r} (choose wiener, ou or feller)")
    missing = [k for k in keys if k not in params]
    if missing:
        raise ValueError(f"model {model} needs parameters: {', '.join(missing)}")
    extra = [k for k in params if k not in keys]
    if extra:
        raise ValueError(f"model {model} does not take: {', '.join(extra)}")
    vals = {}
    for k in keys:
        try:
            vals[k] = float(params[k])
        except ValueError as exc:
            raise ValueError(f"parameter {k}={params[k]!r} is not a number") from exc
    if model == "wiener":
        return wiener_spec(WienerParams(**vals))
    if model == "ou":
        return ou_spec(OUParams(**vals))
    return feller_spec(FellerParams(**vals))


def _gather_params(args) -> dict:
    params = _read_config(args.config) if getattr(args, "config", None) else {}
    params.update(_parse_kv(getattr(args, "param", []) or [], "--param"))
    return params


def _parse_pr_list(text: str) -> list:
    out = []
    for part in text.split(","):
        p = float(part)
        if not 0.0 <= p < 1.0:
            raise ValueError(f"p_R must lie in [0, 1), got {p}")
        out.append(p)
    return out


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_table(args) -> int:
    report = tables.compare_table(args.table_id, threshold=args.tol)
    text = report.to_csv() if args.format == "csv" else report.to_text()
    _emit(text, args.out)
    return EXIT_OK if report.passed else EXIT_COMPARISON_FAILED


def _cmd_moments(args) -> int:
    spec = _build_spec(args.model, _gather_params(args))
    prs = _parse_pr_list(args.p_r)
    fmt = tables.format_paper
    header = ("model,p_R,t1,V,fet_t1,fet_V,Etr,Vtr,"
              "res_mean,res_variance,t1_paper,Etr_paper\n")
    lines = [header]
    for p in prs:
        th = ElasticThreshold.from_reflection_probability(args.S, p)
        s = moments.summary(spec, th, args.x, tol=args.tol)
        lines.append(
            f"{args.model},{p!r},{s.t1!r},{s.fpt_variance!r},{s.fet_t1!r},"
            f"{s.fet_variance!r},{s.refractory_mean!r},{s.refractory_variance!r},"
            f"{s.identity_residuals['mean_decomposition']:.3E},"
            f"{s.identity_residuals['variance_decomposition']:.3E},"
            f"{fmt(s.t1)},{fmt(s.refractory_mean)}\n"
        )
    _emit("".join(lines), args.out)
    return EXIT_OK


def _counter_table(lam, T, tau, sim_n=None, seed=0):
    dist = deadtime.output_distribution(deadtime.CounterParams(lam, T, tau))
    cum = dist.cumulative()
    lines = ["n,pmf,cumulative"]
    hist = None
    if sim_n:
        raw = montecarlo.simulate_counter(lam, T, tau, sim_n, seed)
        hist = np.zeros(len(dist.counts), dtype=float)
        hist[: min(len(raw), len(hist))] = raw[: len(hist)]
        lines[0] += ",empirical,se,z"
    for i, n in enumerate(dist.counts):
        pmf_i, cum_i = float(dist.pmf[i]), float(cum[i])
        row = f"{n},{pmf_i!r},{cum_i!r}"
        if hist is not None:
            emp = float(hist[i]) / sim_n
            se = math.sqrt(max(pmf_i * (1.0 - pmf_i), 0.0) / sim_n)
            z = (emp - pmf_i) / se if se > 0.0 else 0.0
            row += f",{emp!r},{se:.3E},{z:.3f}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def _cmd_counter(args) -> int:
    text = _counter_table(args.lam, args.T, args.tau,
                          sim_n=args.simulate, seed=args.seed)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    if args.what == "counter":
        _emit(_counter_table(args.lam, args.T, args.tau,
                             sim_n=args.n, seed=args.seed), args.out)
        return EXIT_OK
    spec = _build_spec(args.model, _gather_params(args))
    if args.what == "fpt":
        st = montecarlo.simulate_fpt(spec, args.S, args.x, args.n, args.dt, args.seed)
        text = ("quantity,n,mean,se,variance\n"
                f"fpt,{st.n},{st.mean!r},{st.se!r},{st.variance!r}\n")
    else:  # fet
        th = ElasticThreshold.from_reflection_probability(args.S, args.p_r_single)
        res = montecarlo.simulate_fet_elastic(spec, th, args.x, args.n, args.dx, args.seed)
        text = "quantity,n,mean,se,variance\n"
        for name, st in (("fet", res.fet), ("first_hit", res.first_hit),
                         ("refractory", res.refractory)):
            text += f"{name},{st.n},{st.mean!r},{st.se!r},{st.variance!r}\n"
    _emit(text, args.out)
    return EXIT_OK


def _cmd_compare(args) -> int:
    with open(args.reference) as fh:
        lines = fh.read().strip().splitlines()
    spec = tables.TABLE_SPECS[args.table_id]
    header = tuple(lines[0].split(","))
    expected = (spec.param_name,) + spec.columns
    if header != expected:
        raise ValueError(f"reference header {header} does not match table "
                         f"{args.table_id} layout {expected}")
    threshold = args.tol if args.tol is not None else spec.default_tol
    rows = []
    for line in lines[1:]:
        param, *ref_vals = (float(v) for v in line.split(","))
        computed = tables.compute_row(spec, param)
        note = tables.KNOWN_REFERENCE_DEVIATIONS.get((args.table_id, param), "")
        for col, c, r in zip(spec.columns, computed, ref_vals):
            rel = abs(c - r) / abs(r)
            rows.append(tables.ReportRow(
                cell_id=f"{spec.param_name}={param:g}:{col}", computed=c,
                reference=r, relative_error=rel, passed=rel <= threshold, note=note,
            ))
    report = tables.ComparisonReport(table_id=args.table_id, threshold=threshold, rows=rows)
    _emit(report.to_csv() if args.format == "csv" else report.to_text(), args.out)
    return EXIT_OK if report.passed else EXIT_COMPARISON_FAILED


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True,
                   choices=["wiener", "ou", "feller", "custom"])
    p.add_argument("--param", action="append", default=[],
                   metavar="KEY=VALUE", help="model parameter (repeatable)")
    p.add_argument("--config", help="key=value file; flags override it")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "text"], default="text")
    p.add_argument("--out", help="write output to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="elasticfpt", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="recompute and compare a reference table")
    t.add_argument("table_id", type=int, choices=range(1, 7))
    t.add_argument("--tol", type=float, default=None,
                   help="comparison threshold (default: per-table)")
    _add_common(t)
    t.set_defaults(func=_cmd_table)

    m = sub.add_parser("moments", help="moment summary rows for one model")
    _add_model_args(m)
    m.add_argument("-S", type=float, required=True, help="threshold")
    m.add_argument("-x", type=float, required=True, help="starting state")
    m.add_argument("--p-r", default="0.1,0.5,0.9,0.99",
                   help="comma-separated reflection probabilities")
    m.add_argument("--tol", type=float, default=1e-9)
    _add_common(m)
    m.set_defaults(func=_cmd_moments)

    c = sub.add_parser("counter", help="dead-time counter pmf")
    c.add_argument("--lam", type=float, required=True)
    c.add_argument("--T", type=float, required=True)
    c.add_argument("--tau", type=float, required=True)
    c.add_argument("--simulate", type=int, default=None, metavar="N",
                   help="add Monte Carlo columns from N windows")
    c.add_argument("--seed", type=int, default=0)
    _add_common(c)
    c.set_defaults(func=_cmd_counter)

    s = sub.add_parser("simulate", help="Monte Carlo sampling")
    ssub = s.add_subparsers(dest="what", required=True)

    sf = ssub.add_parser("fpt", help="first-passage times by Euler-Maruyama")
    _add_model_args(sf)
    sf.add_argument("-S", type=float, required=True)
    sf.add_argument("-x", type=float, required=True)
    sf.add_argument("-n", type=int, required=True)
    sf.add_argument("--dt", type=float, required=True)
    sf.add_argument("--seed", type=int, default=0)
    _add_common(sf)
    sf.set_defaults(func=_cmd_simulate)

    se = ssub.add_parser("fet", help="elastic first-exit times by lattice walk")
    _add_model_args(se)
    se.add_argument("-S", type=float, required=True)
    se.add_argument("-x", type=float, required=True)
    se.add_argument("-n", type=int, required=True)
    se.add_argument("--dx", type=float, required=True)
    se.add_argument("--p-r-single", type=float, required=True, metavar="P_R",
                    help="reflection probability of the elastic threshold")
    se.add_argument("--seed", type=int, default=0)
    _add_common(se)
    se.set_defaults(func=_cmd_simulate)

    sc = ssub.add_parser("counter", help="dead-time counter windows")
    sc.add_argument("--lam", type=float, required=True)
    sc.add_argument("--T", type=float, required=True)
    sc.add_argument("--tau", type=float, required=True)
    sc.add_argument("-n", type=int, required=True)
    sc.add_argument("--seed", type=int, default=0)
    _add_common(sc)
    sc.set_defaults(func=_cmd_simulate)

    cp = sub.add_parser("compare", help="compare a table against a reference CSV")
    cp.add_argument("reference", help="CSV in the shipped-table layout")
    cp.add_argument("--table-id", type=int, choices=range(1, 7), required=True)
    cp.add_argument("--tol", type=float, default=None)
    _add_common(cp)
    cp.set_defaults(func=_cmd_compare)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_OK
    except Exception as exc:  # argparse handles its own errors; this is ours
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
