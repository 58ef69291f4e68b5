"""``rds-lab`` command line: run, netgen, sample, estimate, sweep."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path


from . import estimators as est
from .errors import RdsLabError
from .experiment import ExperimentConfig, emit_results, run_experiment
from .graph import graph_metrics, read_graph_files, write_graph_files
from .inference import BootstrapConfig, bootstrap_ci, ingest_sample, sensitivity_sweep
from .netgen import GenTarget, generate
from .sampling import SamplerConfig, run_rds, write_sample_csv
from .successive import ss_estimator

ESTIMATE_CHOICES = ("naive", "vh_out", "vh_in", "vh_m", "sh_out", "sh_in", "sh_m", "ss_out", "ss_in")


def _format_for(path: str | None, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "json" if path and path.endswith(".json") else "csv"


def cmd_run(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
    out = args.output or cfg.output_path
    table = run_experiment(cfg)
    fmt = _format_for(out, args.format)
    if out:
        emit_results(table, out, fmt)
    else:
        emit_results(table, sys.stdout, fmt)
    return 0


def cmd_netgen(args: argparse.Namespace) -> int:
    target = GenTarget(
        family=args.family,
        node_count=args.nodes,
        mean_degree=args.mean_degree,
        directedness_target=args.directedness,
        attractivity_target=args.attractivity,
        proportion_a=args.proportion_a,
        homophily_target=args.homophily,
        assortativity_target=args.assortativity,
        rng_seed=args.seed,
        max_restarts=args.max_restarts,
    )
    g = generate(target)
    prefix = Path(args.out_prefix)
    edges, traits, meta = (prefix.with_name(prefix.name + ext) for ext in (".edges", ".traits", ".json"))
    write_graph_files(g, edges, traits)
    doc = {"target": target.to_dict(), "metrics": graph_metrics(g).to_dict(),
           "files": {"edges": str(edges), "traits": str(traits)}}
    meta.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(doc["metrics"], indent=2))
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    g = read_graph_files(args.edges, args.traits)
    cfg = SamplerConfig(
        seed_count=args.seeds,
        coupons_per_respondent=args.coupons,
        target_sample_size=args.size,
        with_replacement=args.with_replacement,
        rng_seed=args.seed,
    )
    s = run_rds(g, cfg)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_sample_csv(s, fh)
    else:
        write_sample_csv(s, sys.stdout)
    return 0


def _point_estimate(args: argparse.Namespace, s):
    name = args.estimator
    if name in ("vh_m", "sh_m") and args.m is None:
        raise SystemExit(f"--m is required for {name}")
    if name in ("ss_out", "ss_in"):
        if args.N is None:
            raise SystemExit(f"--N is required for {name}")
        return ss_estimator(s, args.N, name[3:], M=args.M, r=args.r, rng=args.seed)
    if name == "vh_m":
        return est.vh_m(s, args.m)
    if name == "sh_m":
        return est.sh_m(s, args.m)
    return getattr(est, name)(s)


def cmd_estimate(args: argparse.Namespace) -> int:
    with open(args.sample, encoding="utf-8", newline="") as fh:
        s = ingest_sample(fh)
    res = _point_estimate(args, s)
    doc = res.to_dict()
    if args.bootstrap:
        if args.estimator not in ("vh_m", "vh_out", "naive"):
            raise SystemExit("bootstrap intervals are available for vh_m, vh_out and naive")
        cfg = BootstrapConfig(
            replicates=args.bootstrap,
            levels=tuple(args.level or [0.90]),
            estimator=args.estimator,
            m=args.m,
            rng_seed=args.seed,
        )
        boot = bootstrap_ci(s, cfg)
        doc["intervals"] = {f"{lv:g}": list(ci) for lv, ci in boot.intervals.items()}
        doc["bootstrap_replicates"] = args.bootstrap
        doc["bootstrap_skipped"] = boot.skipped
    print(json.dumps(doc, indent=2))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    with open(args.sample, encoding="utf-8", newline="") as fh:
        s = ingest_sample(fh)
    boot = None
    if args.bootstrap:
        boot = BootstrapConfig(args.bootstrap, (args.level,), "vh_m", m=1.0, rng_seed=args.seed)
    curve = sensitivity_sweep(s, args.m_min, args.m_max, args.steps, boot)
    fmt = _format_for(args.output, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            curve.to_csv(fh) if fmt == "csv" else fh.write(curve.to_json() + "\n")
    elif fmt == "csv":
        curve.to_csv(sys.stdout)
    else:
        print(curve.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rds-lab", description="RDS simulation and estimation toolkit")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment described by a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--output", help="overrides output_path from the config")
    r.add_argument("--format", choices=("csv", "json"))
    r.set_defaults(func=cmd_run)

    n = sub.add_parser("netgen", help="generate a Net1/Net2/Net3 network")
    n.add_argument("--family", required=True, choices=("Net1", "Net2", "Net3"))
    n.add_argument("--nodes", type=int, default=10000)
    n.add_argument("--mean-degree", type=float, default=10.0)
    n.add_argument("--directedness", type=float, required=True)
    n.add_argument("--attractivity", type=float, default=1.0)
    n.add_argument("--proportion-a", type=float, default=0.7)
    n.add_argument("--homophily", type=float)
    n.add_argument("--assortativity", type=float)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--max-restarts", type=int, default=20)
    n.add_argument("--out-prefix", required=True, help="writes PREFIX.edges, PREFIX.traits, PREFIX.json")
    n.set_defaults(func=cmd_netgen)

    sm = sub.add_parser("sample", help="draw one RDS sample from a graph")
    sm.add_argument("--edges", required=True)
    sm.add_argument("--traits", required=True)
    sm.add_argument("--seeds", type=int, default=10)
    sm.add_argument("--coupons", type=int, default=3)
    sm.add_argument("--size", type=int, default=500)
    sm.add_argument("--with-replacement", action="store_true")
    sm.add_argument("--seed", type=int, default=0)
    sm.add_argument("--output")
    sm.set_defaults(func=cmd_sample)

    e = sub.add_parser("estimate", help="estimate the group A share from a sample CSV")
    e.add_argument("--sample", required=True)
    e.add_argument("--estimator", required=True, choices=ESTIMATE_CHOICES)
    e.add_argument("--m", type=float)
    e.add_argument("--N", type=int, help="population size for ss_out/ss_in")
    e.add_argument("--M", type=int, default=500)
    e.add_argument("--r", type=int, default=3)
    e.add_argument("--bootstrap", type=int, default=0, help="number of bootstrap replicates")
    e.add_argument("--level", type=float, action="append")
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_estimate)

    w = sub.add_parser("sweep", help="VH_m over a range of m")
    w.add_argument("--sample", required=True)
    w.add_argument("--m-min", type=float, required=True)
    w.add_argument("--m-max", type=float, required=True)
    w.add_argument("--steps", type=int, default=15)
    w.add_argument("--bootstrap", type=int, default=0)
    w.add_argument("--level", type=float, default=0.90)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--output")
    w.add_argument("--format", choices=("csv", "json"))
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (RdsLabError, ValueError, OSError) as exc:
        print(f"rds-lab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
