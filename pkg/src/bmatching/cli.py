"""Command-line entry point: ``bmatching {simulate,compare,adversary,verify,gen}``.

Exit codes: 0 success, 1 runtime failure or bound violation, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from .engine import ALGORITHMS, ALIASES, ConfigError, SimConfig, compare, run
from .estimators import ObliviousRouting, OnlineBMA
from .exceptions import IncompatibleConfigs, StateSpaceTooLarge
from .oracle import verify_bound
from .topology import build, gen_complete, gen_leaf_spine, gen_random_connected, gen_star
from .workloads import (
    AdversaryConfig,
    TrafficMatrix,
    gen_iid,
    gen_uniform,
    gen_zipf,
    make_rng,
    run_adversary,
    write_trace,
)

log = logging.getLogger("bmatching")


class UsageError(Exception):
    pass


def _parse_kv(text: str) -> dict:
    out = {}
    for item in filter(None, text.split(",")):
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_topology_spec(text: str) -> dict:
    """``complete:N[:LEN]``, ``star:LEAVES``, ``leaf-spine:LEAVES[:SPINES]``, ``file:PATH``."""
    kind, _, rest = text.partition(":")
    args = rest.split(":") if rest else []
    try:
        if kind == "complete" and 1 <= len(args) <= 2:
            spec = {"kind": kind, "n": int(args[0])}
            if len(args) == 2:
                spec["length"] = float(args[1])
            return spec
        if kind == "star" and len(args) == 1:
            return {"kind": kind, "leaves": int(args[0])}
        if kind == "leaf-spine" and 1 <= len(args) <= 2:
            spec = {"kind": kind, "leaves": int(args[0])}
            if len(args) == 2:
                spec["spines"] = int(args[1])
            return spec
        if kind == "file" and rest:
            if not os.path.exists(rest):
                raise UsageError(f"topology file not found: {rest}")
            return {"kind": kind, "path": rest}
    except ValueError:
        pass
    raise UsageError(f"bad topology spec {text!r}")


def parse_workload_spec(text: str) -> dict:
    """``zipf:n=..,s=..,count=..``, ``uniform:count=..``, ``iid:matrix=PATH,count=..``."""
    kind, _, rest = text.partition(":")
    kv = _parse_kv(rest)
    try:
        if kind == "zipf":
            return {"kind": kind, "n": int(kv["n"]), "s": float(kv["s"]), "count": int(kv["count"])}
        if kind == "uniform":
            return {"kind": kind, "count": int(kv["count"])}
        if kind == "iid":
            return {"kind": kind, "matrix": kv["matrix"], "count": int(kv["count"])}
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad workload spec {text!r}: {exc}") from None
    raise UsageError(f"unknown workload kind {kind!r}")


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None


def _workload_from_args(args) -> dict | None:
    given = [x for x in (args.trace, args.trace_inline, args.workload) if x is not None]
    if len(given) > 1:
        raise UsageError("give only one of --trace, --trace-inline, --workload")
    if args.trace is not None:
        if not os.path.exists(args.trace):
            raise UsageError(f"trace file not found: {args.trace}")
        spec = {"kind": "file", "path": args.trace}
        if args.offset is not None:
            spec["offset"] = args.offset
        if args.length is not None:
            spec["length"] = args.length
        return spec
    if args.trace_inline is not None:
        return {"kind": "inline", "requests": args.trace_inline}
    if args.workload is not None:
        return parse_workload_spec(args.workload)
    return None


def _base_config(args, file_cfg: dict) -> dict:
    """Merge config-file values with explicitly given flags (flags win)."""
    cfg = {k: v for k, v in file_cfg.items() if k != "scenarios"}
    if args.topology is not None:
        cfg["topology"] = parse_topology_spec(args.topology)
    workload = _workload_from_args(args)
    if workload is not None:
        cfg["workload"] = workload
    for flag, key in (("alpha", "alpha"), ("seed", "seed"), ("reps", "repetitions"),
                      ("window", "window"), ("warmup", "warmup"), ("series_stride", "series_stride")):
        val = getattr(args, flag, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "check", False):
        cfg["check"] = True
    if getattr(args, "include_setup", False):
        cfg["include_setup"] = True
    for key in ("topology", "workload"):
        if key not in cfg:
            raise UsageError(f"missing --{key} (or config file entry)")
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    cfg = _base_config(args, _load_config_file(args.config))
    if args.alg is not None:
        cfg["algorithm"] = args.alg
    if args.b is not None:
        cfg["b"] = args.b
    if "algorithm" not in cfg:
        raise UsageError("missing --alg")
    if args.series and not cfg.get("series_stride"):
        cfg["series_stride"] = 1
    config = SimConfig.from_dict(cfg).validate()
    report = run(config, jobs=args.jobs, series_path=args.series)
    if args.dump_matching:
        with open(args.dump_matching, "w") as fh:
            fh.write("".join(f"{u},{v}\n" for u, v in report.matching))
    if args.human:
        t = report.totals
        text = (
            f"{config.algorithm} b={config.b} alpha={config.alpha} reps={config.repetitions}\n"
            f"  total {t['total_cost']:.2f}  routing {t['routing_cost']:.2f}  "
            f"reconfig {t['reconfig_cost']:.2f}  hit ratio {t['hit_ratio']:.4f}\n"
        )
    else:
        text = report.to_json(indent=2) + "\n"
    _emit(text, args.out)
    return 0


def cmd_compare(args) -> int:
    file_cfg = _load_config_file(args.config)
    scenarios = file_cfg.get("scenarios")
    if scenarios:
        base = {k: v for k, v in file_cfg.items() if k != "scenarios"}
        configs = []
        for sc in scenarios:
            merged = dict(base)
            merged.update(sc)
            configs.append(SimConfig.from_dict(merged))
    else:
        cfg = _base_config(args, file_cfg)
        algs = [a.strip() for a in (args.algs or "oblivious,static,bma,bma-lru").split(",") if a.strip()]
        grid = [int(x) for x in args.b_grid.split(",")] if args.b_grid else [args.b]
        configs = []
        for b in grid:
            for alg in algs:
                if ALIASES.get(alg, alg) not in ALGORITHMS:
                    raise UsageError(f"unknown algorithm {alg!r}")
                if b is None and ALIASES.get(alg, alg) != "oblivious":
                    raise UsageError(f"--b or --b-grid needed for {alg}")
                configs.append(SimConfig.from_dict({**cfg, "algorithm": alg, "b": b}))
    rows = compare(configs, jobs=args.jobs)
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        fields = ["algorithm", "b", "alpha", "rep", "total_cost", "routing_cost",
                  "reconfig_cost", "reconfig_count", "hit_ratio", "warm_hit_ratio"]
        present = [f for f in fields if any(f in r for r in rows)]
        w = csv.DictWriter(buf, fieldnames=present, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    _emit(text, args.out)
    return 0


def cmd_adversary(args) -> int:
    try:
        cfg = AdversaryConfig(b=args.b, alpha=args.alpha, k=args.k, leaves=args.leaves)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    alg = ALIASES.get(args.alg, args.alg)
    if alg == "bma":
        est = OnlineBMA(check=args.check)
    elif alg == "bma-lru":
        est = OnlineBMA(eviction="lru", check=args.check)
    elif alg == "oblivious":
        est = ObliviousRouting()
    else:
        raise UsageError(f"adversary supports bma, bma-lru, oblivious; got {args.alg!r}")
    result = run_adversary(cfg, est)
    _emit(json.dumps(result.to_dict(), indent=2) + "\n", args.out)
    return 0


def _random_instance(rng, max_nodes: int, max_requests: int, b: int, alphas: list[float]) -> dict:
    n = int(rng.integers(2, max_nodes + 1))
    topo = gen_random_connected(n, rng, extra_edge_prob=0.3, max_length=1)
    alpha = alphas[int(rng.integers(0, len(alphas)))]
    m = int(rng.integers(0, max_requests + 1))
    u = rng.integers(0, n, size=m)
    v = (u + rng.integers(1, n, size=m)) % n
    trace = [sorted((int(a), int(c))) for a, c in zip(u, v)]
    return {
        "n": n,
        "edges": [[p[0], p[1], length] for p, length in topo.edges],
        "b": b,
        "alpha": alpha,
        "trace": trace,
    }


def check_instance(inst: dict, check: bool = True) -> dict:
    """Run BMA and the exact optimum on a serialized instance."""
    topo = build(inst["n"], [((u, v), length) for u, v, length in inst["edges"]])
    est = OnlineBMA(topo, b=inst["b"], alpha=inst["alpha"], check=check)
    est.fit(inst["trace"] if inst["trace"] else [])
    comp = verify_bound(topo, inst["b"], inst["alpha"], [tuple(p) for p in inst["trace"]], est.ledger_.total_cost)
    return comp.to_dict()


def cmd_verify(args) -> int:
    if args.instance_file:
        try:
            with open(args.instance_file) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read instance file: {exc}") from None
        instances = data if isinstance(data, list) else [data]
    else:
        if args.instances < 0:
            raise UsageError("--instances must be >= 0")
        alphas = [float(a) for a in args.alphas.split(",")]
        rng = make_rng(args.seed)
        instances = [
            _random_instance(rng, args.max_nodes, args.max_requests, args.b, alphas)
            for _ in range(args.instances)
        ]
    results = []
    violations = 0
    for i, inst in enumerate(instances):
        try:
            comp = check_instance(inst, check=not args.no_check)
        except StateSpaceTooLarge as exc:
            log.warning("instance %d skipped: %s", i, exc)
            results.append({"index": i, "skipped": True, "reason": str(exc)})
            continue
        entry = {"index": i, **comp}
        if not comp["bound_satisfied"]:
            violations += 1
            entry["instance"] = inst
            sys.stderr.write("bound violated; replay with --instance-file:\n" + json.dumps(inst) + "\n")
        results.append(entry)
    _emit(json.dumps(results, indent=2) + "\n", args.out)
    return 1 if violations else 0


def cmd_gen(args) -> int:
    if args.what == "trace":
        if args.generator == "zipf":
            if args.n is None or args.s is None:
                raise UsageError("zipf needs --n and --s")
            trace = gen_zipf(args.n, args.s, args.count, args.seed)
        elif args.generator == "uniform":
            if args.n is None:
                raise UsageError("uniform needs --n")
            trace = gen_uniform(args.n, args.count, args.seed)
        elif args.generator == "iid":
            if not args.matrix:
                raise UsageError("iid needs --matrix")
            trace = gen_iid(TrafficMatrix.read(args.matrix), args.count, args.seed)
        else:
            raise UsageError(f"unknown trace generator {args.generator!r}")
        if args.out:
            write_trace(trace, args.out)
        else:
            sys.stdout.write("".join(f"{u} {v}\n" for u, v in trace.tolist()))
        sys.stderr.write(f"wrote {len(trace)} requests ({args.generator}, seed {args.seed})\n")
        return 0

    if args.generator == "leaf-spine":
        if args.leaves is None:
            raise UsageError("leaf-spine needs --leaves")
        topo = gen_leaf_spine(args.leaves, args.spines)
    elif args.generator == "star":
        if args.leaves is None:
            raise UsageError("star needs --leaves")
        topo = gen_star(args.leaves)
    elif args.generator == "complete":
        if args.n is None:
            raise UsageError("complete needs --n")
        topo = gen_complete(args.n, args.length)
    else:
        raise UsageError(f"unknown topology generator {args.generator!r}")
    _emit(topo.to_text(), args.out)
    sys.stderr.write(f"wrote topology: {topo.n} nodes, {len(topo.edges)} edges\n")
    return 0


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with SimConfig fields; flags override it")
    p.add_argument("--topology", help="complete:N[:LEN] | star:LEAVES | leaf-spine:LEAVES[:SPINES] | file:PATH")
    p.add_argument("--trace", help="trace file (u v per line)")
    p.add_argument("--trace-inline", help="requests separated by ';', e.g. '0 1;1 2'")
    p.add_argument("--workload", help="zipf:n=..,s=..,count=.. | uniform:count=.. | iid:matrix=PATH,count=..")
    p.add_argument("--offset", type=int, help="skip this many requests of --trace")
    p.add_argument("--length", type=int, help="requests per repetition from --trace")
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--window", type=int, help="hit-ratio window (default 1000)")
    p.add_argument("--warmup", type=int, help="requests excluded from warm hit ratio")
    p.add_argument("--check", action="store_true", help="assert invariants after every request")
    p.add_argument("--include-setup", action="store_true", help="charge static matching installation")
    p.add_argument("--jobs", type=int, default=None, help="parallel repetitions (default: all cores)")
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bmatching", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and print a JSON report")
    _add_scenario_flags(p)
    p.add_argument("--alg", help=", ".join(ALGORITHMS))
    p.add_argument("--b", type=int)
    p.add_argument("--series", help="write per-step CSV series here")
    p.add_argument("--series-stride", type=int)
    p.add_argument("--dump-matching", help="write final matching as u,v lines")
    p.add_argument("--human", action="store_true", help="plain-text summary instead of JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run several scenarios on a shared trace")
    _add_scenario_flags(p)
    p.add_argument("--algs", help="comma list (default oblivious,static,bma,bma-lru)")
    p.add_argument("--b", type=int)
    p.add_argument("--b-grid", help="comma list of b values")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("adversary", help="lower-bound adversary on a star")
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--leaves", type=int)
    p.add_argument("--alg", default="bma")
    p.add_argument("--check", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("verify", help="check the competitive bound against exact OPT")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-nodes", type=int, default=5)
    p.add_argument("--max-requests", type=int, default=15)
    p.add_argument("--b", type=int, default=1)
    p.add_argument("--alphas", default="1,2,4")
    p.add_argument("--instance-file", help="JSON instance (or list) to replay")
    p.add_argument("--no-check", action="store_true", help="skip per-step invariant checks")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write a synthetic trace or topology file")
    p.add_argument("what", choices=("trace", "topology"))
    p.add_argument("generator", help="trace: zipf|uniform|iid; topology: leaf-spine|star|complete")
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--matrix")
    p.add_argument("--leaves", type=int)
    p.add_argument("--spines", type=int)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, IncompatibleConfigs, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
