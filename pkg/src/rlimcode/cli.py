"""Command-line entry point: ``rlimcode <verb> ...``."""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench, channel, experiment
from .codec import BitWord, RlimCodec, correct, rank_word
from .enumeration import CodeParams, build_tables


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _error_line("usage", message)
        sys.exit(2)


def _error_line(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def _code_args(p):
    p.add_argument("--i", type=int, required=True, help="RLIM order")
    p.add_argument("--k", type=int, required=True, help="information bits per block")
    p.add_argument("--mode", choices=["E", "N"], default="E")


def _word_arg(p):
    p.add_argument("--word", required=True, help="MSB-first bit string of length n")


def _params(args) -> CodeParams:
    if args.i < 1 or args.k < 1:
        raise UsageError("--i and --k must be >= 1")
    return CodeParams.resolve(args.i, args.k, args.mode)


def _word(args, params: CodeParams) -> BitWord:
    try:
        word = BitWord.from_str(args.word)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if len(word) != params.length_n:
        raise UsageError(f"--word has length {len(word)}, expected n = {params.length_n}")
    return word


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


@contextlib.contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fp:
            yield fp


def cmd_tables(args):
    params = _params(args)
    tables = build_tables(params.order_i, params.internal_T)
    print(f"n={params.length_n}")
    print(f"T={params.internal_T}")
    print(f"w_max={tables.w_max}")
    print("layer_sizes=" + ",".join(map(str, tables.layer_sizes[: tables.w_max + 1])))
    print("layer_offsets=" + ",".join(map(str, tables.layer_offsets[: tables.w_max + 2])))
    print(f"table_entries={tables.entry_count}")
    print(f"table_bits={tables.stored_bits}")
    print(f"full_codebook_bits={params.length_n * params.codebook_size}")
    if args.save:
        Path(args.save).write_bytes(tables.to_bytes())


def cmd_encode(args):
    params = _params(args)
    if not 0 <= args.m < params.codebook_size:
        raise UsageError(f"--m must lie in [0, 2^{params.info_bits_k})")
    codec = RlimCodec(params)
    print(codec.encode(args.m))


def cmd_decode(args):
    params = _params(args)
    word = _word(args, params)
    codec = RlimCodec(params)
    z = correct(params, word)
    trace = []
    m = codec.decode(word, trace)
    print(f"corrected={z}")
    print(f"rank={rank_word(params, codec.tables, z)}")
    for step, (w, r) in enumerate(trace):
        print(f"project[{step}]={w} rank={'-' if r is None else r}")
    print(f"message={m}")


def cmd_rank(args):
    params = _params(args)
    word = _word(args, params)
    print(rank_word(params, build_tables(params.order_i, params.internal_T), word))


def cmd_correct(args):
    params = _params(args)
    print(correct(params, _word(args, params)))


def cmd_simulate(args):
    params, cfg_seed = _load(channel.load_channel_config, _read_text(args.config))
    if cfg_seed is not None and cfg_seed != args.seed:
        raise UsageError(f"--seed {args.seed} conflicts with seed {cfg_seed} in {args.config}")
    rng = np.random.default_rng(args.seed)
    if args.bits is not None:
        bits = [int(b) for b in BitWord.from_str(args.bits)] if args.bits else []
    else:
        # payload and channel draw from independent child streams
        bits_ss, chan_ss = np.random.SeedSequence(args.seed).spawn(2)
        bits = np.random.default_rng(bits_ss).integers(0, 2, size=args.random)
        rng = np.random.default_rng(chan_ss)
    counts = channel.simulate_reception(params, bits, rng)
    with _output(args.out) as fp:
        channel.write_counts_csv(counts, fp)


def cmd_sweep(args):
    plan = _load(experiment.load_plan, _read_text(args.config), seed=args.seed)
    if args.workers is not None:
        plan = replace(plan, workers=args.workers)
    results = experiment.sweep(plan)
    with _output(args.out) as fp:
        experiment.write_results_csv(results, fp)
    failed = [r for r in results if r.error]
    if failed:
        _error_line("point-failed", f"{len(failed)} of {len(results)} points failed")


def _ints(text: str) -> list[int]:
    out = []
    for part in experiment._split(text):
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


_BENCH_KEYS = {"i", "k", "mode", "blocks", "repeats", "full_max_k", "seed"}


def cmd_bench(args):
    values = {}
    if args.config:
        if args.i or args.k:
            raise UsageError("give --config or --i/--k, not both")
        values = _load(channel.read_config, _read_text(args.config))
        unknown = set(values) - _BENCH_KEYS
        if unknown:
            raise UsageError(f"unknown bench config keys: {sorted(unknown)}")
        if "seed" in values and int(values["seed"]) != args.seed:
            raise UsageError("--seed conflicts with seed in the bench config")
    try:
        i_values = _ints(args.i or values.get("i", "3"))
        k_values = _ints(args.k or values.get("k", "8-24"))
        mode = values.get("mode", args.mode)
        blocks = int(values.get("blocks", args.blocks))
        repeats = int(values.get("repeats", args.repeats))
        full_max_k = int(values.get("full_max_k", args.full_max_k))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if blocks < 1 or repeats < 1 or not i_values or not k_values or min(i_values + k_values) < 1:
        raise UsageError("bench grid and counts must be positive")
    reports = bench.storage_runtime_report(i_values, k_values, mode, blocks, repeats,
                                           full_max_k, args.seed, timed=not args.no_timing)
    with _output(args.out) as fp:
        if args.format == "json":
            fp.write(bench.report_json(reports) + "\n")
        else:
            bench.write_report_csv(reports, fp)


def _load(fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rlimcode", description="Enumerative RLIM codes and MC channel bench.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("tables", help="build counting tables and report their size")
    _code_args(p)
    p.add_argument("--save", metavar="PATH", help="write the binary table container")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("encode", help="message index -> codeword")
    _code_args(p)
    p.add_argument("--m", type=int, required=True, help="message index")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="detected word -> correction, rank, message")
    _code_args(p)
    _word_arg(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("rank", help="rank of an admissible codeword")
    _code_args(p)
    _word_arg(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("correct", help="post-detection correction only")
    _code_args(p)
    _word_arg(p)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("simulate", help="received counts for a bit stream")
    p.add_argument("--config", required=True, help="channel config (D, rR, r0, ts, M, sigma2, I, seed)")
    p.add_argument("--seed", type=int, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--bits", help="transmitted bits as a 0/1 string")
    src.add_argument("--random", type=int, metavar="N", help="N random equiprobable bits")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a BER sweep plan")
    p.add_argument("--config", required=True, help="run plan")
    p.add_argument("--seed", type=int, required=True, help="base seed; replicates use seed, seed+1, ...")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="storage and runtime comparison")
    p.add_argument("--config", help="bench config (i, k, mode, blocks, repeats, full_max_k)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--i", help="orders, e.g. 1-5 or 3")
    p.add_argument("--k", help="info dimensions, e.g. 8-40")
    p.add_argument("--mode", choices=["E", "N"], default="E")
    p.add_argument("--blocks", type=int, default=1000)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--full-max-k", type=int, default=bench.DEFAULT_FULL_MAX_K)
    p.add_argument("--no-timing", action="store_true", help="storage metrics only")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        _error_line("usage", str(exc))
        return 2
    except Exception as exc:
        _error_line(type(exc).__name__, str(exc))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
