"""Command-line driver.

Subcommands: ``synth``, ``match``, ``score``, ``check-consistency`` and ``sweep``.
Every subcommand accepts ``--config FILE`` with ``key=value`` lines using the long
flag names (``rank=50``, ``vertex-kernel=gaussian``); flags given on the command
line take precedence.

Exit codes: 0 success, 1 validation error (or inconsistent input for
``check-consistency``), 2 runtime or numerical error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .affinity import build_phi, build_vertex_affinity
from .consistency import BulkPermutation, is_cycle_consistent
from .graphs import SPEC_VERSION, DatasetError, GraphCollection, collection_from_dict, load_collection, save_collection
from .kernels import KernelSpec
from .metrics import score, strip_dummy_matches
from .projectors import PROJECTORS, ProjectorSpec
from .solver import SolverConfig, solve
from .synth import SynthSpec, generate, noise_sweep, removal_sweep, summarize, write_sweep_csv

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list:
    return [float(t) for t in str(text).split(",") if t.strip()]


def _int_list(text: str) -> list:
    return [int(t) for t in str(text).split(",") if t.strip()]


def _add_synth_flags(p):
    p.add_argument("--m", type=int, default=50, help="vertices per graph")
    p.add_argument("--p", type=float, default=0.05, help="edge probability")
    p.add_argument("--d", type=int, default=10, help="attribute dimension")
    p.add_argument("--copies", type=int, default=10, help="graphs in the collection")
    p.add_argument("--max-removed", type=int, default=0, help="maximal removed vertices per graph")
    p.add_argument("--dummy-scale", type=float, default=10.0, help="dummy attribute = scale * max |attribute|")
    p.add_argument("--seed", type=int, default=0)


def _add_solver_flags(p, rank_default=None):
    p.add_argument("--rank", type=int, default=rank_default, help="universe rank (default: m)")
    p.add_argument("--projector", choices=PROJECTORS, default="matcheig")
    p.add_argument("--tol", type=float, default=1e-2, help="power method tolerance")
    p.add_argument("--max-iter", type=int, default=100, help="power method iterations")
    p.add_argument("--proj-tol", type=float, default=1e-3, help="gpow tolerance")
    p.add_argument("--proj-max-iter", type=int, default=100, help="gpow iterations")
    p.add_argument("--vertex-kernel", choices=("linear", "gaussian"), default="linear")
    p.add_argument("--vertex-gamma", type=float, default=1.0)
    p.add_argument("--edge-kernel", choices=("linear", "gaussian"), default="linear")
    p.add_argument("--edge-gamma", type=float, default=1.0)
    p.add_argument("--rff-dim", type=int, default=100)


def _common(p):
    p.add_argument("--config", help="key=value file; command-line flags win")
    p.add_argument("--threads", type=int, default=None, help="cap on internal threads (default: all cores)")


def build_parser():
    parser = _Parser(prog="kermgm", description="Kernelized multigraph matching.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    _add_synth_flags(p)
    p.add_argument("--sigma", type=float, default=0.0, help="attribute noise standard deviation")
    p.add_argument("-o", "--output", required=True)
    subs["synth"] = p

    p = sub.add_parser("match", help="match the graphs of a dataset")
    p.add_argument("dataset")
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0, help="random feature seed")
    p.add_argument("-o", "--output", required=True, help="result file")
    subs["match"] = p

    p = sub.add_parser("score", help="precision/recall/F1 of an estimate against a reference")
    p.add_argument("estimate", help="result or dataset file")
    p.add_argument("reference", help="result or dataset file (dataset: its ground truth)")
    p.add_argument("--dataset", help="dataset whose dummy vertices are dropped before scoring")
    subs["score"] = p

    p = sub.add_parser("check-consistency", help="exit 0 iff a bulk permutation is cycle-consistent")
    p.add_argument("file", help="result or dataset file")
    p.add_argument("--sample", type=int, default=None, help="check this many random triples only")
    subs["check-consistency"] = p

    p = sub.add_parser("sweep", help="noise / vertex-removal robustness sweep (CSV)")
    _add_synth_flags(p)
    _add_solver_flags(p)
    p.add_argument("--sigmas", type=_float_list, default="0,0.05,0.1,0.15,0.2,0.3")
    p.add_argument("--max-removed-list", type=_int_list, default=None, help="comma list; overrides --max-removed")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--workers", type=int, default=1, help="parallel trial processes")
    p.add_argument("-o", "--output", default="-", help="CSV path or - for stdout")
    subs["sweep"] = p

    for p in subs.values():
        _common(p)
    return parser, subs


def read_config(path) -> dict:
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DatasetError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.lstrip("-").replace("-", "_")] = value
    return cfg


def parse_args(argv=None):
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = subs[args.command]
        cfg = read_config(args.config)
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise DatasetError(f"{args.config}: unknown keys {unknown}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


# -- file helpers -----------------------------------------------------------------


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_bulk(path) -> tuple[BulkPermutation, GraphCollection | None]:
    """Bulk permutation stored in a result file, or the ground truth of a dataset file."""
    doc = _read_json(path)
    if "bulk_permutation" in doc:
        n, m = int(doc["n"]), int(doc["m"])
        try:
            mat = np.asarray(doc["bulk_permutation"])
            return BulkPermutation.from_matrix(mat, n, m, validate=False), None
        except ValueError as exc:
            raise DatasetError(f"{path}: bulk_permutation: {exc}") from None
    c = collection_from_dict(doc)
    if c.ground_truth is None:
        raise DatasetError(f"{path}: dataset has no ground_truth")
    return c.ground_truth, c


def _dump(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc) + "\n")


# -- commands ---------------------------------------------------------------------


def cmd_synth(args) -> int:
    spec = SynthSpec(
        m=args.m, edge_prob=args.p, attr_dim=args.d, n_copies=args.copies,
        noise_sigma=args.sigma, max_removed=args.max_removed, seed=args.seed, dummy_scale=args.dummy_scale,
    )
    c = generate(spec)
    save_collection(c, args.output)
    print(f"wrote {args.output}: n={c.n} m={c.m} d_v={c.d_v} d_e={c.d_e}")
    return EXIT_OK


def _kernels(args):
    vk = KernelSpec(args.vertex_kernel, gamma=args.vertex_gamma, rff_dim=args.rff_dim, seed=args.seed)
    ek = KernelSpec(args.edge_kernel, gamma=args.edge_gamma, rff_dim=args.rff_dim, seed=args.seed)
    return vk, ek


def _solver_config(args, m: int) -> SolverConfig:
    rank = m if args.rank is None else args.rank
    proj = ProjectorSpec(kind=args.projector, rank=max(rank, 1), tol=args.proj_tol, max_iter=args.proj_max_iter)
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    return SolverConfig(rank=rank, projector=proj, tol=args.tol, max_iter=args.max_iter)


def cmd_match(args) -> int:
    c = load_collection(args.dataset)
    cfg = _solver_config(args, c.m)
    vk, ek = _kernels(args)
    t0 = time.perf_counter()
    kv = build_vertex_affinity(c, vk)
    phi = build_phi(c, ek)
    est, trace = solve(c, kv, phi, cfg)
    summary = {
        "spec_version": SPEC_VERSION,
        "iterations": trace.iterations_run,
        "converged": trace.converged,
        "objective_trace": trace.objective_values,
        "wall_time_ms": 1000.0 * (time.perf_counter() - t0),
        "projector": cfg.projector.kind,
        "rank": cfg.rank,
    }
    if c.ground_truth is not None:
        s = score(strip_dummy_matches(est, c), c.ground_truth)
        summary.update(precision=s.precision, recall=s.recall, f1=s.f1)
    _dump(
        {"spec_version": SPEC_VERSION, "n": c.n, "m": c.m,
         "bulk_permutation": est.mat.astype(int).tolist(), "summary": summary},
        args.output,
    )
    line = f"iterations={trace.iterations_run} converged={str(trace.converged).lower()}"
    if "f1" in summary:
        line += f" f1={summary['f1']:.4f}"
    print(line)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_score(args) -> int:
    est, est_c = load_bulk(args.estimate)
    ref, ref_c = load_bulk(args.reference)
    if (est.n, est.m) != (ref.n, ref.m):
        raise DatasetError(f"estimate is n={est.n}, m={est.m} but reference is n={ref.n}, m={ref.m}")
    ds = load_collection(args.dataset) if args.dataset else (ref_c or est_c)
    if ds is not None:
        est = strip_dummy_matches(est, ds)
    s = score(est, ref)
    print("precision,recall,f1")
    print(f"{s.precision:.6f},{s.recall:.6f},{s.f1:.6f}")
    return EXIT_OK


def cmd_check_consistency(args) -> int:
    bp, _ = load_bulk(args.file)
    check = is_cycle_consistent(bp, sample=args.sample)
    if check:
        print("consistent")
        return EXIT_OK
    i, j, l = check.triple
    print(f"inconsistent: {check.rule} violated at triple ({i}, {j}, {l})")
    return EXIT_VALIDATION


def cmd_sweep(args) -> int:
    spec = SynthSpec(
        m=args.m, edge_prob=args.p, attr_dim=args.d, n_copies=args.copies,
        max_removed=args.max_removed, seed=args.seed, dummy_scale=args.dummy_scale,
    )
    cfg = _solver_config(args, spec.m)
    vk, ek = _kernels(args)
    if vk != ek:
        raise ValueError("sweeps use one kernel for vertices and edges; pass matching kernel flags")
    if args.repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {args.repeats}")
    if args.max_removed_list:
        records = removal_sweep(spec, args.max_removed_list, args.sigmas, args.repeats, cfg, vk, args.workers)
    else:
        records = noise_sweep(spec, args.sigmas, args.repeats, cfg, vk, args.workers)
    text = write_sweep_csv(summarize(records))
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "match": cmd_match,
    "score": cmd_score,
    "check-consistency": cmd_check_consistency,
    "sweep": cmd_sweep,
}


def _limit_threads(threads):
    if threads is None:
        return None
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=threads)


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        with _limit_threads(args.threads) or _nullcontext():
            return COMMANDS[args.command](args)
    except (DatasetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, FloatingPointError, np.linalg.LinAlgError, MemoryError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


class _nullcontext:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


if __name__ == "__main__":
    sys.exit(main())
