"""Storage and runtime comparison: full codebook vs counting tables."""

from __future__ import annotations

import csv
import json
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence, TextIO

import numpy as np

from .codec import (
    DEFAULT_MAX_MATERIALIZED_K,
    FullCodebookCodec,
    RlimCodec,
    correct_bits,
)
from .enumeration import CodeParams, Mode, build_tables

DEFAULT_FULL_MAX_K = 20


@dataclass(frozen=True)
class Timing:
    mean: float
    median: float


@dataclass(frozen=True)
class StorageReport:
    i: int
    k: int
    mode: str
    n: int
    T: int
    full_codebook_bits: int
    table_bits: int
    table_entries: int
    timings: dict = field(default_factory=dict)  # "<realization>_<stage>" -> Timing
    full_measured: bool = False

    @property
    def ratio(self) -> float:
        return self.full_codebook_bits / self.table_bits


def _time_runs(fn: Callable[[], object], repeats: int, per_call: int = 1) -> Timing:
    """Mean and median over ``repeats`` timed runs, after one untimed warm-up."""
    fn()
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - start) / per_call)
    return Timing(statistics.fmean(samples), statistics.median(samples))


def _projection_inputs(codec, messages, rng):
    """Codewords with one random bit flipped, the usual input to projection."""
    words = []
    n = codec.n
    for m in messages:
        bits = list(codec.encode(int(m)).bits)
        bits[rng.integers(n)] ^= 1
        words.append(correct_bits(bits, codec.params.order_i))
    return words


def measure_point(i: int, k: int, mode: "Mode | str" = Mode.ENHANCED, blocks: int = 1000,
                  repeats: int = 5, full_max_k: int = DEFAULT_FULL_MAX_K,
                  seed: int = 0, timed: bool = True) -> StorageReport:
    mode = Mode.parse(mode)
    params = CodeParams.resolve(i, k, mode)
    T = params.internal_T
    tables = build_tables(i, T)
    timings = {}
    full_measured = False
    if timed:
        rng = np.random.default_rng(seed)
        messages = rng.integers(0, params.codebook_size, size=blocks).tolist()
        enum_codec = RlimCodec(params, tables)
        codewords = [enum_codec.encode(m) for m in messages]
        projected = _projection_inputs(enum_codec, messages, rng)

        timings["enum_preprocess"] = _time_runs(lambda: build_tables(i, T), repeats)
        timings["enum_encode"] = _time_runs(
            lambda: [enum_codec.encode(m) for m in messages], repeats, blocks)
        timings["enum_rank"] = _time_runs(
            lambda: [enum_codec.rank(x) for x in codewords], repeats, blocks)
        timings["enum_project"] = _time_runs(
            lambda: [enum_codec.decode(z) for z in projected], repeats, blocks)

        if k <= min(full_max_k, DEFAULT_MAX_MATERIALIZED_K):
            full_measured = True
            full = FullCodebookCodec(params)
            # building a multi-million-entry codebook five times is pointless
            timings["full_preprocess"] = _time_runs(
                lambda: FullCodebookCodec(params), 1 if k > 16 else repeats)
            timings["full_encode"] = _time_runs(
                lambda: [full.encode(m) for m in messages], repeats, blocks)
            timings["full_rank"] = _time_runs(
                lambda: [full.lookup(x) for x in codewords], repeats, blocks)
            timings["full_project"] = _time_runs(
                lambda: [full.decode(z) for z in projected], repeats, blocks)

    return StorageReport(i, k, mode.value, params.length_n, T,
                         params.length_n * params.codebook_size, tables.stored_bits,
                         tables.entry_count, timings, full_measured)


def storage_runtime_report(i_values: Sequence[int], k_values: Sequence[int],
                           mode: "Mode | str" = Mode.ENHANCED, blocks: int = 1000,
                           repeats: int = 5, full_max_k: int = DEFAULT_FULL_MAX_K,
                           seed: int = 0, timed: bool = True) -> list[StorageReport]:
    if blocks < 1 or repeats < 1:
        raise ValueError("blocks and repeats must be positive")
    return [measure_point(i, k, mode, blocks, repeats, full_max_k, seed, timed)
            for i in i_values for k in k_values]


TIMING_KEYS = [f"{who}_{stage}" for who in ("enum", "full")
               for stage in ("preprocess", "encode", "rank", "project")]


def write_report_csv(reports: Sequence[StorageReport], fp: TextIO) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    header = ["i", "k", "mode", "n", "T", "full_codebook_bits", "table_bits", "table_entries",
              "ratio", "full_measured"]
    for key in TIMING_KEYS:
        header += [f"{key}_mean_s", f"{key}_median_s"]
    writer.writerow(header)
    for r in reports:
        row = [r.i, r.k, r.mode, r.n, r.T, r.full_codebook_bits, r.table_bits, r.table_entries,
               f"{r.ratio:.6g}", int(r.full_measured)]
        for key in TIMING_KEYS:
            t = r.timings.get(key)
            row += ["", ""] if t is None else [f"{t.mean:.6e}", f"{t.median:.6e}"]
        writer.writerow(row)


def report_json(reports: Sequence[StorageReport]) -> str:
    out = []
    for r in reports:
        d = asdict(r)
        d["ratio"] = r.ratio
        out.append(d)
    return json.dumps(out, indent=2)
