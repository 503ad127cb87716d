"""Command-line entry point: ``hbcache {gen-topology,run,sweep,report}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import SimConfig, parse_config, parse_sweep
from .engine import load_topology, run, write_outcome_log
from .errors import HBCacheError
from .report import report
from .sweep import format_results, parse_results, run_sweep
from .topology import dump_edge_list

log = logging.getLogger("hbcache")


def _overrides(args) -> dict:
    out = {}
    if args.seed is not None:
        out["seed"] = args.seed
    for key in ("degree", "cache_size", "requests"):
        value = getattr(args, key, None)
        if value is not None:
            out["n_requests" if key == "requests" else key] = value
    return out


def _read_config(path) -> SimConfig:
    return parse_config(Path(path).read_text(encoding="utf-8")) if path else SimConfig()


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen_topology(args) -> int:
    config = _read_config(args.config).replace(**_overrides(args))
    t = load_topology(config)
    path = _out_dir(args) / "topology.edges"
    src = config.topology
    header = (f"hbcache topology n_routers={src.n_routers} "
              f"edges_per_new_node={src.edges_per_new_node} seed={config.seed}"
              if src.kind == "generated" else f"hbcache topology from {src.path}")
    path.write_text(dump_edge_list(t, header), encoding="utf-8")
    print(f"{path}: {t.node_count} nodes, {t.edge_count} edges")
    return 0


def cmd_run(args) -> int:
    config = _read_config(args.config).replace(**_overrides(args))
    metrics = run(config)
    text = json.dumps(metrics.to_dict(), indent=2)
    if args.out:
        out = _out_dir(args)
        (out / "metrics.json").write_text(text + "\n", encoding="utf-8")
        if metrics.outcomes is not None:
            with (out / "outcomes.csv").open("w", newline="", encoding="utf-8") as fh:
                write_outcome_log(metrics.outcomes, fh)
    print(text)
    return 0


def cmd_sweep(args) -> int:
    if not args.config:
        raise HBCacheError("sweep needs --config pointing at a sweep document")
    spec = parse_sweep(Path(args.config).read_text(encoding="utf-8"))
    overrides = _overrides(args)
    overrides.pop(spec.axis, None)  # the axis values win
    if overrides:
        spec = type(spec)(spec.base.replace(**overrides), spec.axis, spec.values, spec.repetitions)
    table = run_sweep(spec, args.workers)
    text = format_results(table)
    if args.out:
        path = _out_dir(args) / "results.csv"
        path.write_text(text, encoding="utf-8")
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)
    return 0


def cmd_report(args) -> int:
    table = parse_results(Path(args.results).read_text(encoding="utf-8"))
    sys.stdout.write(report(table, args.out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hbcache", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--seed", type=int, help="root seed (unsigned 64-bit)")
        p.add_argument("--out", required=out_required, help="output directory")

    def axes(p):
        p.add_argument("--degree", type=int)
        p.add_argument("--cache-size", dest="cache_size", type=int)
        p.add_argument("--requests", type=int)

    p = sub.add_parser("gen-topology", help="write the configured topology as an edge list")
    common(p, out_required=True)
    p.set_defaults(func=cmd_gen_topology)

    p = sub.add_parser("run", help="one simulation run, metrics as JSON")
    common(p)
    axes(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep degree or cache size, results as CSV")
    common(p)
    axes(p)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="figure-data CSVs and summary from a results CSV")
    p.add_argument("results", help="results CSV written by 'sweep'")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (HBCacheError, OSError) as exc:
        print(f"hbcache: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
