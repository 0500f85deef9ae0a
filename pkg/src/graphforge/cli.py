"""Command-line entry point: ``graphforge <subcommand> ...``.

Every JSON result embeds a ``manifest`` (subcommand, inputs, seed, trials)
so a run can be replayed; keys are sorted and no timestamps are written,
which makes equal manifests produce byte-identical output.

Exit codes: 0 success, 1 internal error, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from . import __version__
from . import growth, mbqc, oracle, protocols, stabilizer, stats
from .graph import Graph, GraphError, OrbitBudgetExceeded, lc_orbit, measure_graph, reduce_clifford_part
from .optics import OpticsError
from .pauli import PauliError


class InputError(ValueError):
    """Bad user input; maps to exit code 2."""


BAD_INPUT = (
    InputError,
    GraphError,
    OpticsError,
    PauliError,
    mbqc.PatternError,
    stabilizer.TableauError,
    oracle.OracleError,
    json.JSONDecodeError,
    OrbitBudgetExceeded,
)


# -- helpers ----------------------------------------------------------------


def _load_json(path: str) -> object:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _require(cfg: dict, key: str, kind=float):
    if key not in cfg:
        raise InputError(f"config field {key!r} is missing")
    try:
        return kind(cfg[key])
    except (TypeError, ValueError) as exc:
        raise InputError(f"config field {key!r}: {exc}") from exc


def _seed(args) -> int:
    env = os.environ.get(stats.SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env) % 2**64
        except ValueError as exc:
            raise InputError(f"{stats.SEED_ENV} must be an integer") from exc
    if args.seed is not None:
        return args.seed % 2**64
    return int(np.random.SeedSequence().generate_state(1, np.uint64)[0])


def _trials(args, default: int) -> int:
    t = default if args.trials is None else args.trials
    if t <= 0:
        raise InputError("trials must be a positive integer")
    return t


def _manifest(args, **extra) -> dict:
    m = {
        "subcommand": args.command,
        "format": args.format,
        "version": __version__,
    }
    m.update({k: v for k, v in extra.items() if v is not None})
    return m


def _emit(args, payload, csv_rows: list[dict] | None = None) -> None:
    if args.format == "csv":
        if csv_rows is None:
            raise InputError("this subcommand has no CSV output; use --format json")
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(csv_rows[0]) if csv_rows else [], lineterminator="\n")
        w.writeheader()
        w.writerows(csv_rows)
        text = buf.getvalue()
    else:
        text = json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (frozenset, set)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _parse_graph(args) -> Graph:
    if args.file:
        d = _load_json(args.file)
        if not isinstance(d, dict):
            raise InputError("graph JSON must be an object")
        return Graph.from_dict(d)
    if args.kind:
        if args.n is None or args.n < 1:
            raise InputError("--kind needs --n >= 1")
        return {"chain": Graph.chain, "complete": Graph.complete, "star": lambda n: Graph.star(n - 1)}[args.kind](
            args.n
        )
    if args.edges is not None:
        edges = []
        for tok in filter(None, args.edges.split(",")):
            try:
                a, b = (int(x) for x in tok.split("-"))
            except ValueError as exc:
                raise InputError(f"bad edge {tok!r}; expected 'u-v'") from exc
            edges.append((a, b))
        verts = {v for e in edges for v in e}
        n = args.n if args.n is not None else (max(verts) + 1 if verts else 0)
        return Graph.from_edges(n, edges)
    raise InputError("give a graph with --file, --kind or --edges")


def _parse_meas(text: str) -> list[tuple]:
    out = []
    for tok in filter(None, text.split(",")):
        try:
            basis, v = tok.split("@")
            out.append((int(v), basis.strip().upper()))
        except ValueError as exc:
            raise InputError(f"bad measurement {tok!r}; expected 'B@vertex'") from exc
    return out


# -- subcommands -----------------------------------------------------------------


def cmd_graph(args) -> int:
    g = _parse_graph(args)
    man = _manifest(args, action=args.action, input=g.to_dict())
    if args.action == "build":
        _emit(args, {"manifest": man, "graph": g.to_dict()})
    elif args.action == "measure":
        if args.vertex is None or args.basis is None:
            raise InputError("measure needs --vertex and --basis")
        seed = _seed(args) if args.outcome is None else None
        rng = None if seed is None else np.random.default_rng(seed)
        res = measure_graph(g, args.vertex, args.basis.upper(), args.outcome, b=args.b, rng=rng)
        man.update(vertex=args.vertex, basis=args.basis.upper(), outcome=args.outcome, seed=seed)
        man = {k: v for k, v in man.items() if v is not None}
        _emit(args, {"manifest": man, "graph": res.to_dict()})
    elif args.action == "lc-orbit":
        orbit = lc_orbit(g, args.budget)
        members = [
            {"edges": orbit.graph(k).edge_list(), "witness": orbit.witness(k)} for k in orbit.keys
        ]
        _emit(args, {"manifest": man, "class_size": len(members), "members": members})
    else:  # minimal
        if not args.measure:
            raise InputError("minimal needs --measure, e.g. 'Y@2,Y@3'")
        res = reduce_clifford_part(g, _parse_meas(args.measure))
        man["measure"] = args.measure
        _emit(args, {"manifest": man, "graph": res.to_dict(), "n": res.n})
    return 0


def cmd_protocol(args) -> int:
    cfg = _load_json(args.config)
    if not isinstance(cfg, dict):
        raise InputError("protocol config must be a JSON object")
    if args.trials is None and "trials" in cfg:
        args.trials = _require(cfg, "trials", int)
    trials = _trials(args, 10_000)
    if args.seed is None and "seed" in cfg:
        args.seed = _require(cfg, "seed", int)
    seed = _seed(args)
    if cfg.get("protocol") not in ("cabrillo", "double_herald", "duan_kimble"):
        raise InputError(f"unknown protocol {cfg.get('protocol')!r}")
    try:
        res = protocols.simulate(cfg, trials=trials, seed=seed, threads=args.threads)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    res["manifest"] = _manifest(args, config=cfg, seed=seed, trials=trials)
    _emit(args, res)
    return 0


def _grow_trials(fn, trials: int, seed: int, threads: int) -> list[growth.GrowthTrialStats]:
    def chunk(n, rng):
        return [fn(rng) for _ in range(n)]

    parts = stats.run_chunked(chunk, trials, seed, threads, chunk=256)
    return [s for part in parts for s in part]


def _aggregate(runs: list[growth.GrowthTrialStats]) -> dict:
    keys = ("attempts", "successes", "qubits_consumed", "final_size", "elapsed_steps")
    out = {}
    for k in keys:
        v = np.array([getattr(r, k) for r in runs], float)
        out[f"mean_{k}"] = float(v.mean())
        out[f"stderr_{k}"] = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    status: dict[str, int] = {}
    for r in runs:
        status[r.status] = status.get(r.status, 0) + 1
    out["status_counts"] = dict(sorted(status.items()))
    return out


def cmd_grow(args) -> int:
    cfg = _load_json(args.config)
    if not isinstance(cfg, dict):
        raise InputError("growth config must be a JSON object")
    strategy = cfg.get("strategy")
    if args.trials is None and "trials" in cfg:
        args.trials = _require(cfg, "trials", int)
    if args.seed is None and "seed" in cfg:
        args.seed = _require(cfg, "seed", int)
    seed = _seed(args)
    trials = _trials(args, 1000)
    rows = None
    try:
        if strategy == "chain":
            p, target = _require(cfg, "p"), _require(cfg, "target", int)
            policy = cfg.get("policy", "longest")
            bank = cfg.get("bank")
            runs = _grow_trials(
                lambda r: growth.run_chain_strategy(p, target, r, policy, bank, int(cfg.get("max_rounds", 10_000))),
                trials, seed, args.threads,
            )
            res = _aggregate(runs)
        elif strategy == "cross":
            p, k, n = _require(cfg, "p"), cfg.get("buffer"), _require(cfg, "n", int)
            k = growth.buffer_for(p, float(cfg.get("eps", 1e-3))) if k is None else int(k)
            runs = _grow_trials(lambda r: growth.run_cross_strategy(p, k, n, r), trials, seed, args.threads)
            res = _aggregate(runs)
            res["buffer"] = k
        elif strategy == "microcluster":
            p, s, n = _require(cfg, "p"), _require(cfg, "star_size", int), _require(cfg, "n", int)
            runs = _grow_trials(lambda r: growth.run_microcluster_strategy(p, s, n, r), trials, seed, args.threads)
            res = _aggregate(runs)
        elif strategy == "percolation":
            L = _require(cfg, "L", int)
            if "p" in cfg:
                pc = growth.PercolationConfig(
                    L, _require(cfg, "p"), cfg.get("block"), int(cfg.get("overlap", 1))
                )
                runs = _grow_trials(lambda r: growth.run_percolation(pc, r)[2], trials, seed, args.threads)
                res = _aggregate(runs)
            else:
                lo, hi, step = _require(cfg, "p_min"), _require(cfg, "p_max"), _require(cfg, "p_step")
                if step <= 0 or hi < lo:
                    raise InputError("need p_min <= p_max and p_step > 0")
                ps = [round(lo + i * step, 12) for i in range(int(round((hi - lo) / step)) + 1)]
                pstar = growth.critical_samples(L, trials, seed, args.threads)
                curve = growth.spanning_curve(pstar, ps)
                rows = [
                    {"p": p, "spanning_probability": float(s), "stderr": math.sqrt(s * (1 - s) / trials)}
                    for p, s in zip(ps, curve)
                ]
                res = {"rows": rows}
        elif strategy == "threshold":
            sizes = cfg.get("sizes", [16, 32, 64])
            res = growth.estimate_threshold(sizes, trials, seed, threads=args.threads).to_dict()
        else:
            raise InputError(f"unknown strategy {strategy!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(str(exc)) from exc
    res["manifest"] = _manifest(args, config=cfg, seed=seed, trials=trials)
    _emit(args, res, rows)
    return 0


def _input_state(kind: str, n: int, rng: np.random.Generator) -> oracle.StateVector:
    if kind == "plus":
        return oracle.plus_state(n)
    if kind == "zero":
        return oracle.basis_state([0] * n)
    if kind == "random":
        return mbqc.random_input(n, rng)
    raise InputError("input must be plus, zero or random")


def cmd_mbqc(args) -> int:
    cfg = _load_json(args.circuit)
    if not isinstance(cfg, dict):
        raise InputError("circuit file must be a JSON object")
    seed = _seed(args)
    trajectories = _trials(args, 100)
    rng = np.random.default_rng(seed)
    if "pattern" in cfg:
        if cfg["pattern"] != "entangling":
            raise InputError("only the 'entangling' named pattern is available")
        mode = cfg.get("mode", "direct")
        if mode not in mbqc.ENTANGLING_MODES:
            raise InputError(f"mode must be one of {mbqc.ENTANGLING_MODES}")
        pat = mbqc.entangling_pattern(mode)
        target = mbqc.entangling_target(mode)
        n = 2
    else:
        n = _require(cfg, "wires", int)
        gates = cfg.get("gates")
        if not isinstance(gates, list):
            raise InputError("circuit field 'gates' must be a list")
        pat = mbqc.compile_circuit(gates, n, cfg.get("cz_mode", "edge"), bool(cfg.get("padded", False)))
        target = mbqc.circuit_unitary(gates, n)
    if pat.graph.n > mbqc.MAX_PATTERN_QUBITS:
        raise InputError(f"pattern needs {pat.graph.n} qubits; the oracle limit is {mbqc.MAX_PATTERN_QUBITS}")
    psi = _input_state(args.input, n, rng)
    ideal = oracle.StateVector(psi.dims, target @ psi.normalized().amps)
    fids, outs = [], []
    for _ in range(trajectories):
        res = mbqc.run_pattern(pat, psi, rng)
        out = res.corrected(pat)
        fids.append(oracle.fidelity(out, ideal))
        outs.append(out)
    pair = min(oracle.fidelity(outs[0], o) for o in outs)
    report = {
        "manifest": _manifest(args, circuit=cfg, input=args.input, seed=seed, trials=trajectories),
        "qubits": pat.graph.n,
        "fidelities": [round(f, 12) for f in fids],
        "min_fidelity": round(min(fids), 12),
        "min_pairwise_fidelity": round(pair, 12),
        "deterministic": bool(min(fids) >= 1 - oracle.TOL_EQUIV and pair >= 1 - oracle.TOL_EQUIV),
    }
    _emit(args, report)
    return 0 if report["deterministic"] else 1


def cmd_stab(args) -> int:
    seed = _seed(args)
    rng = np.random.default_rng(seed)
    if args.circuit:
        cfg = _load_json(args.circuit)
        if not isinstance(cfg, dict):
            raise InputError("circuit file must be a JSON object")
        n = _require(cfg, "n", int)
        if n < 1:
            raise InputError("n must be positive")
        circ = cfg.get("gates", [])
        outcomes, t = stabilizer.run_clifford_circuit(stabilizer.StabilizerTableau.zero_state(n), circ, rng)
        rep = {"outcomes": outcomes, "generators": t.to_strings(), "n": n}
        man = _manifest(args, circuit=cfg, seed=seed)
    else:
        n, g, m = args.random
        if n < 1 or g < 0 or m < 0:
            raise InputError("--random needs n >= 1 and non-negative counts")
        circ = stabilizer.random_clifford_circuit(n, g, m, rng)
        t0 = time.perf_counter()
        outcomes, t = stabilizer.run_clifford_circuit(stabilizer.StabilizerTableau.zero_state(n), circ, rng)
        elapsed = time.perf_counter() - t0
        try:
            t.check_invariants()
            ok = True
        except stabilizer.TableauError:
            ok = False
        rep = {"n": n, "gates": g, "measurements": m, "outcomes_sum": int(sum(outcomes)), "invariants_hold": bool(ok)}
        if args.timing:
            rep["seconds"] = elapsed
        man = _manifest(args, random=list(args.random), seed=seed)
    rep["manifest"] = man
    _emit(args, rep)
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="root seed (GRAPHFORGE_SEED overrides)")
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="write here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    ap = argparse.ArgumentParser(prog="graphforge", description="Graph-state, MBQC and heralded-entanglement simulator")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("graph", parents=[common], help="build, measure and analyse graph states")
    g.add_argument("action", choices=("build", "measure", "lc-orbit", "minimal"))
    g.add_argument("--file", help="graph JSON ('-' for stdin)")
    g.add_argument("--kind", choices=("chain", "complete", "star"))
    g.add_argument("--n", type=int)
    g.add_argument("--edges", help="comma list such as 0-1,1-2")
    g.add_argument("--vertex", type=int)
    g.add_argument("--basis", choices=("X", "Y", "Z", "x", "y", "z"))
    g.add_argument("--outcome", type=int, choices=(1, -1))
    g.add_argument("--b", type=int, help="special neighbour for X measurements")
    g.add_argument("--budget", type=int, default=10**6)
    g.add_argument("--measure", help="Pauli measurements such as Y@2,Y@3")
    g.set_defaults(func=cmd_graph)

    p = sub.add_parser("protocol", parents=[common], help="Monte Carlo of a heralded entanglement protocol")
    p.add_argument("config", help="protocol config JSON")
    p.set_defaults(func=cmd_protocol)

    gr = sub.add_parser("grow", parents=[common], help="graph-growth strategy statistics")
    gr.add_argument("config", help="strategy config JSON")
    gr.set_defaults(func=cmd_grow)

    m = sub.add_parser("mbqc", parents=[common], help="run a measurement pattern against the oracle")
    m.add_argument("circuit", help="circuit JSON")
    m.add_argument("--input", default="plus", choices=("plus", "zero", "random"))
    m.set_defaults(func=cmd_mbqc)

    s = sub.add_parser("stab", parents=[common], help="stabilizer circuit simulation")
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--circuit", help="circuit JSON {n, gates}")
    grp.add_argument("--random", type=int, nargs=3, metavar=("N", "GATES", "MEAS"))
    s.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identical output)")
    s.set_defaults(func=cmd_stab)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except BAD_INPUT as exc:
        print(f"graphforge: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"graphforge: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
