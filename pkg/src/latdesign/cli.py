"""Command-line front end: construction, search, metrics, and benchmark runs.

Every run writes its CSV artifacts plus a JSON manifest recording the
command, parameters, version, and output files.  All subcommands are
deterministic given their flags; seeds are always explicit flags.

Exit codes: 0 success, 2 usage error, 3 infeasible guard or invalid
parameters, 4 I/O failure, 1 unexpected error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone

from . import __version__
from .baselines import halton, sobol, uniform_random
from .gpr import BenchmarkConfig, run_benchmark, write_benchmark_csv
from .korobov import SearchResult, default_workers, search_korobov
from .kronecker import algebraic_vector, explicit_sequence, write_records_csv
from .lattice import LatticeError, RankOneLattice, generate_points, korobov_vector
from .lll import OracleInfeasibleError
from .metrics import (
    lattice_metrics,
    lattice_separation_radius,
    pointset_metrics,
    separation_radius,
    write_metrics_csv,
)

TABLE3_PRIMES = (3, 7, 13, 31, 61, 127, 251, 509, 1021, 2039, 4093, 8191,
                 16381, 32749, 65521, 131071, 262139, 524287)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4
EXIT_UNEXPECTED = 1


def parse_ladder(text: str, n_min: int | None, n_max: int | None) -> list[int]:
    """Comma list of sizes, or presets ``table3-primes`` / ``pow2``."""
    if text == "table3-primes":
        values = list(TABLE3_PRIMES)
    elif text == "pow2":
        values = [2 ** k for k in range(1, 21)]
    else:
        values = [int(tok) for tok in text.split(",") if tok]
    if n_min is not None:
        values = [v for v in values if v >= n_min]
    if n_max is not None:
        values = [v for v in values if v <= n_max]
    if not values:
        raise ValueError("ladder is empty after filtering")
    return values


def _write_manifest(out_path: str, command: str, params: dict, outputs: list[str],
                    started: float, finished: float) -> str:
    manifest = {
        "command": command,
        "parameters": params,
        "version": __version__,
        "master_seed": params.get("seed"),
        "started": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "finished": datetime.fromtimestamp(finished, timezone.utc).isoformat(),
        "outputs": outputs,
    }
    path = out_path + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="latdesign",
        description="Quasi-uniform rank-1 lattice designs and diagnostics",
    )
    ap.add_argument("--threads", type=int, default=None,
                    help="worker processes (default: LATDESIGN_THREADS or cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct-explicit",
                       help="best Diophantine approximation sequence")
    p.add_argument("--p", type=int, required=True, help="prime root parameter")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--frac-bits", type=int, default=192)
    p.add_argument("--out", required=True)

    p = sub.add_parser("search-korobov", help="LLL-scored parameter search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.99)
    p.add_argument("--keep-scores", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("gen-points", help="materialize a design as CSV")
    p.add_argument("--design", required=True,
                   choices=("korobov", "explicit", "halton", "sobol", "random"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--a", type=int, help="Korobov parameter (searched if omitted)")
    p.add_argument("--p", type=int, default=2, help="explicit-construction prime")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shift", type=str, default=None,
                   help="comma-separated shift vector in [0,1)^d")
    p.add_argument("--out", required=True)

    p = sub.add_parser("metrics", help="space-filling diagnostics for a lattice")
    p.add_argument("--design", required=True, choices=("korobov", "explicit"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--a", type=int)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--covering-probes", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("separation-scan",
                       help="separation radius across an N ladder")
    p.add_argument("--designs", required=True,
                   help="comma list of korobov,explicit,halton,sobol,random")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--ladder", required=True,
                   help="comma list or preset: table3-primes, pow2")
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--seeds", type=int, default=1,
                   help="seed count for the random design")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--out", required=True)

    p = sub.add_parser("benchmark-gpr", help="GPR L2-error comparison")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--designs")
    p.add_argument("--d", type=int)
    p.add_argument("--function")
    p.add_argument("--ladder")
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--out", required=True)
    return ap


_BENCH_DEFAULTS = {"trials": 100, "noise": 0.05, "seed": 0, "p": 2,
                   "n_min": None, "n_max": None}
_BENCH_TYPES = {"d": int, "trials": int, "seed": int, "p": int,
                "n_min": int, "n_max": int, "noise": float}


def read_benchmark_config(path: str) -> dict:
    """Plain ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {raw.strip()!r}")
            key, value = (tok.strip() for tok in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in ("designs", "d", "function", "ladder", "n_min",
                           "n_max", "trials", "noise", "seed", "p"):
                raise ValueError(f"unknown config key {key!r}")
            out[key] = _BENCH_TYPES.get(key, str)(value)
    return out


def _cmd_construct_explicit(args) -> list[str]:
    alpha = algebraic_vector(args.p, args.d, args.frac_bits)
    records = explicit_sequence(alpha, args.n_max)
    write_records_csv(records, args.out)
    return [args.out]


def _search_csv(res: SearchResult, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("N,d,a_star,score,lambda1_primal,lambda1_dual,elapsed_ms\n")
        fh.write(f"{res.N},{res.d},{res.a_star},{res.score:.17g},"
                 f"{res.lambda1_primal:.17g},{res.lambda1_dual:.17g},"
                 f"{res.elapsed_ms:.3f}\n")


def _cmd_search_korobov(args, workers: int) -> list[str]:
    res = search_korobov(args.n, args.d, delta=args.delta, workers=workers,
                         keep_scores=args.keep_scores)
    if not res.modulus_is_prime:
        print(f"note: N={args.n} is not prime; search ran anyway", file=sys.stderr)
    _search_csv(res, args.out)
    outputs = [args.out]
    if args.keep_scores and res.per_a_scores is not None:
        table = args.out + ".scores.csv"
        with open(table, "w", encoding="utf-8") as fh:
            fh.write("a,score\n")
            for a, s in enumerate(res.per_a_scores, start=1):
                fh.write(f"{a},{s:.17g}\n")
        outputs.append(table)
    return outputs


def _lattice_for(args, workers: int) -> RankOneLattice:
    if args.design == "korobov":
        a = args.a
        if a is None:
            a = search_korobov(args.n, args.d, workers=workers).a_star
        return RankOneLattice(args.n, korobov_vector(a, args.n, args.d))
    alpha = algebraic_vector(args.p, args.d)
    records = explicit_sequence(alpha, args.n)
    if not records or records[-1].N != args.n:
        have = ", ".join(str(r.N) for r in records[-4:])
        raise ValueError(
            f"N={args.n} is not an explicit-construction modulus (last: {have})"
        )
    return records[-1].to_lattice()


def _cmd_gen_points(args, workers: int) -> list[str]:
    if args.design in ("korobov", "explicit"):
        lat = _lattice_for(args, workers)
        shift = None
        if args.shift:
            shift = [float(tok) for tok in args.shift.split(",")]
        ps = generate_points(lat, shift)
    elif args.design == "halton":
        ps = halton(args.n, args.d)
    elif args.design == "sobol":
        ps = sobol(args.n, args.d)
    else:
        ps = uniform_random(args.n, args.d, args.seed)
    ps.save_csv(args.out)
    return [args.out]


def _cmd_metrics(args, workers: int) -> list[str]:
    lat = _lattice_for(args, workers)
    row = lattice_metrics(lat, covering_probes=args.covering_probes, seed=args.seed)
    write_metrics_csv([row], args.out)
    return [args.out]


def _cmd_separation_scan(args, workers: int) -> list[str]:
    designs = [tok for tok in args.designs.split(",") if tok]
    ladder = parse_ladder(args.ladder, args.n_min, args.n_max)
    rows = []
    for design in designs:
        for n in ladder:
            if design in ("korobov", "explicit"):
                ns = argparse.Namespace(design=design, n=n, d=args.d,
                                        a=None, p=args.p)
                lat = _lattice_for(ns, workers)
                q = lattice_separation_radius(lat)
                rows.append((design, lat.N, args.d, "", q))
            elif design in ("halton", "sobol"):
                ps = halton(n, args.d) if design == "halton" else sobol(n, args.d)
                q = separation_radius(ps)
                rows.append((design, n, args.d, "", q))
            elif design == "random":
                for s in range(args.seeds):
                    ps = uniform_random(n, args.d, args.seed + s)
                    q = separation_radius(ps)
                    rows.append((design, n, args.d, args.seed + s, q))
            else:
                raise ValueError(f"unknown design {design!r}")
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("design,N,d,seed,q,q_times_N_pow\n")
        for design, n, d, seed, q in rows:
            fh.write(f"{design},{n},{d},{seed},{q:.17g},"
                     f"{q * n ** (1.0 / d):.17g}\n")
    return [args.out]


def _cmd_benchmark_gpr(args, workers: int) -> list[str]:
    merged = dict(_BENCH_DEFAULTS)
    if args.config:
        merged.update(read_benchmark_config(args.config))
    for key in ("designs", "d", "function", "ladder", "n_min", "n_max",
                "trials", "noise", "seed", "p"):
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    missing = [k for k in ("designs", "d", "function", "ladder")
               if merged.get(k) is None]
    if missing:
        raise ValueError(f"missing benchmark parameters: {', '.join(missing)}")
    designs = tuple(tok for tok in merged["designs"].split(",") if tok)
    ladder = tuple(parse_ladder(merged["ladder"], merged["n_min"], merged["n_max"]))
    cfg = BenchmarkConfig(
        designs=designs,
        dimension=merged["d"],
        n_values=ladder,
        function=merged["function"],
        trials=merged["trials"],
        noise_sd=merged["noise"],
        master_seed=merged["seed"],
        explicit_p=merged["p"],
    )
    rows = run_benchmark(cfg)
    write_benchmark_csv(rows, args.out)
    return [args.out]


_HANDLERS = {
    "construct-explicit": lambda a, w: _cmd_construct_explicit(a),
    "search-korobov": _cmd_search_korobov,
    "gen-points": _cmd_gen_points,
    "metrics": _cmd_metrics,
    "separation-scan": _cmd_separation_scan,
    "benchmark-gpr": _cmd_benchmark_gpr,
}


def run_cli(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    workers = args.threads if args.threads is not None else default_workers()
    started = time.time()
    try:
        outputs = _HANDLERS[args.command](args, workers)
    except (OracleInfeasibleError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, LatticeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # pragma: no cover - last-resort diagnostics
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED
    finished = time.time()
    params = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        manifest = _write_manifest(outputs[0], args.command, params, outputs,
                                   started, finished)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {', '.join(outputs)} (manifest: {manifest})")
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
