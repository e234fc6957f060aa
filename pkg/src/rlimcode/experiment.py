"""Threshold training, BER evaluation and parameter sweeps.

Every operating point transmits a training block and then a test block
over one continuing channel stream, so ISI from the end of training
reaches the start of the test.  The static threshold is chosen on the
training block by running the complete receiver for every candidate.
"""

from __future__ import annotations

import csv
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence, TextIO

import numpy as np

from .channel import ChannelParams, ChannelStream, channel_from_mapping, read_config
from .enumeration import Mode
from .schemes import ROUNDING, Receiver, SchemeSpec, make_scheme, normalize

log = logging.getLogger(__name__)

DEFAULT_TRAIN_BITS = 10_000
DEFAULT_TEST_BITS = 100_000


@dataclass(frozen=True)
class TrainedDetector:
    scheme: SchemeSpec
    threshold: int
    training_errors: int


@dataclass(frozen=True)
class BerResult:
    scheme: str
    i: int | None
    k: int
    mode: str
    param: str
    value: str
    seed: int
    errors: int | None
    info_bits: int
    tau: int | None
    n: int | None = None
    t_s: Fraction | None = None
    M: int | None = None
    error: str | None = None

    @property
    def ber(self) -> Fraction | None:
        if self.errors is None:
            return None
        return Fraction(self.errors, self.info_bits)


def select_threshold(errors: Sequence[int]) -> int:
    """Pick tau from per-candidate training errors (index = tau).

    Among the minimizers, take the smallest one within 1 of the midpoint
    of the smallest and largest minimizer, else the smallest minimizer.
    """
    best = min(errors)
    minimizers = [tau for tau, e in enumerate(errors) if e == best]
    mid = (minimizers[0] + minimizers[-1]) // 2
    for tau in minimizers:
        if abs(tau - mid) <= 1:
            return tau
    return minimizers[0]


def _count_errors(receiver: Receiver, counts: np.ndarray, info_bits: np.ndarray, tau: int) -> int:
    decoded = receiver.decode((counts >= tau).astype(np.int8))
    return int(np.count_nonzero(decoded[: len(info_bits)] != info_bits))


def train_threshold(scheme: SchemeSpec, receiver: Receiver, train_bits: np.ndarray,
                    stream: ChannelStream, coarse_step: int | None = None) -> TrainedDetector:
    """Transmit the training bits and choose the static threshold.

    With ``coarse_step`` set, candidates are first scanned on that stride
    and then exhaustively around the coarse minimizers; the default scans
    every candidate.
    """
    train_bits = np.asarray(train_bits, dtype=np.int8)
    if not len(train_bits):
        raise ValueError("training sequence is empty")
    counts = stream.transmit(receiver.encode(train_bits))
    top = max(0, int(counts.max(initial=0)))
    if coarse_step and coarse_step > 1:
        errors = [None] * (top + 1)
        for tau in range(0, top + 1, coarse_step):
            errors[tau] = _count_errors(receiver, counts, train_bits, tau)
        coarse_best = min(e for e in errors if e is not None)
        for tau in [t for t, e in enumerate(errors) if e == coarse_best]:
            for t in range(max(0, tau - coarse_step + 1), min(top, tau + coarse_step - 1) + 1):
                if errors[t] is None:
                    errors[t] = _count_errors(receiver, counts, train_bits, t)
        # unscanned candidates never win
        worst = len(train_bits) + 1
        errors = [worst if e is None else e for e in errors]
    else:
        errors = [_count_errors(receiver, counts, train_bits, tau) for tau in range(top + 1)]
    tau = select_threshold(errors)
    return TrainedDetector(scheme, tau, errors[tau])


def evaluate_ber(detector: TrainedDetector, receiver: Receiver, test_bits: np.ndarray,
                 stream: ChannelStream) -> tuple[int, int]:
    """Errors and tested bits on the test block, continuing ``stream``."""
    test_bits = np.asarray(test_bits, dtype=np.int8)
    counts = stream.transmit(receiver.encode(test_bits))
    return _count_errors(receiver, counts, test_bits, detector.threshold), len(test_bits)


def _seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=key)


def info_bits(seed: int, n_bits: int, stream_id: int) -> np.ndarray:
    rng = np.random.default_rng(_seed_sequence(seed, 0, stream_id))
    return rng.integers(0, 2, size=n_bits, dtype=np.int8)


def scheme_rng(seed: int, scheme_name: str) -> np.random.Generator:
    return np.random.default_rng(_seed_sequence(seed, 1, zlib.crc32(scheme_name.encode())))


def run_point(scheme_name: str, k: int, mode: "Mode | str", channel: ChannelParams, seed: int,
              train_bits: int = DEFAULT_TRAIN_BITS, test_bits: int = DEFAULT_TEST_BITS,
              coarse_step: int | None = None, rounding: str = "half_even",
              param: str = "", value: str = "") -> BerResult:
    """Train and test one scheme at one operating point.

    ``channel.t_s`` and ``channel.M`` are the uncoded reference values;
    the scheme runs at its normalized interval and molecule count.
    """
    mode = Mode.parse(mode)
    spec = normalize(make_scheme(scheme_name, k, mode), channel.t_s, channel.M, rounding)
    receiver = Receiver(spec)
    # whole blocks only; information bits are common to all schemes at a seed
    n_train = receiver.blocks(train_bits) * spec.K
    n_test = receiver.blocks(test_bits) * spec.K
    b_train = info_bits(seed, n_train, 0)
    b_test = info_bits(seed, n_test, 1)
    stream = ChannelStream(replace(channel, t_s=float(spec.t_s), M=spec.M), scheme_rng(seed, spec.name))
    detector = train_threshold(spec, receiver, b_train, stream, coarse_step)
    errors, tested = evaluate_ber(detector, receiver, b_test, stream)
    return BerResult(spec.name, spec.order_i, k, mode.value, param, value, seed, errors, tested,
                     detector.threshold, spec.n, spec.t_s, spec.M)


SWEEPABLE = {
    "M0": ("M", int), "ts0": ("t_s", float), "r0": ("r_0", float), "rR": ("r_R", float),
    "sigma2": ("sigma2", float), "D": ("D", float), "I": ("memory_I", int), "k": (None, int),
}


@dataclass(frozen=True)
class RunPlan:
    schemes: tuple
    param: str
    grid: tuple
    seeds: tuple
    k: int = 16
    mode: Mode = Mode.ENHANCED
    channel: ChannelParams = field(default_factory=ChannelParams)
    train_bits: int = DEFAULT_TRAIN_BITS
    test_bits: int = DEFAULT_TEST_BITS
    coarse_step: int | None = None
    rounding: str = "half_even"
    workers: int = 1

    def __post_init__(self):
        if self.param not in SWEEPABLE:
            raise ValueError(f"cannot sweep {self.param!r}; choose from {sorted(SWEEPABLE)}")
        if not self.schemes:
            raise ValueError("plan lists no schemes")
        if not self.seeds:
            raise ValueError("plan lists no seeds")
        if self.rounding not in ROUNDING:
            raise ValueError(f"rounding must be one of {sorted(ROUNDING)}")
        if self.train_bits < 1 or self.test_bits < 1:
            raise ValueError("sequence lengths must be positive")
        object.__setattr__(self, "mode", Mode.parse(self.mode))

    def points(self):
        name, typ = SWEEPABLE[self.param]
        for raw in self.grid:
            value = typ(raw)
            k, channel = self.k, self.channel
            if name is None:
                k = value
            else:
                channel = replace(channel, **{name: value})
            for seed in self.seeds:
                for scheme in self.schemes:
                    yield dict(scheme_name=scheme, k=k, mode=self.mode, channel=channel, seed=seed,
                               train_bits=self.train_bits, test_bits=self.test_bits,
                               coarse_step=self.coarse_step, rounding=self.rounding,
                               param=self.param, value=str(raw))


def _split(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.replace(";", ",").split(",")) if t]


_PLAN_KEYS = {"schemes", "param", "grid", "seeds", "replicates", "k", "mode", "train_bits",
              "test_bits", "coarse_step", "rounding", "workers",
              "D", "rR", "r0", "ts", "M", "sigma2", "I", "seed"}


def load_plan(text: str, seed: int | None = None) -> RunPlan:
    """Run plan from ``key = value`` text.

    Seeds come either from an explicit ``seeds`` list or from ``seed``
    (argument or key) plus ``replicates`` consecutive values.
    """
    values = read_config(text)
    unknown = set(values) - _PLAN_KEYS
    if unknown:
        raise ValueError(f"unknown plan keys: {sorted(unknown)}")
    if "seeds" in values:
        if seed is not None or "seed" in values:
            raise ValueError("give either an explicit seeds list or a base seed, not both")
        seeds = tuple(int(s) for s in _split(values["seeds"]))
    else:
        base = seed if seed is not None else values.get("seed")
        if base is None:
            raise ValueError("plan needs a seed")
        if seed is not None and "seed" in values and int(values["seed"]) != seed:
            raise ValueError("seed in plan conflicts with the given seed")
        seeds = tuple(int(base) + j for j in range(int(values.get("replicates", 1))))
    coarse = values.get("coarse_step")
    return RunPlan(
        schemes=tuple(_split(values.get("schemes", ""))),
        param=values.get("param", "M0"),
        grid=tuple(_split(values.get("grid", ""))),
        seeds=seeds,
        k=int(values.get("k", 16)),
        mode=Mode.parse(values.get("mode", "E")),
        channel=channel_from_mapping(values),
        train_bits=int(values.get("train_bits", DEFAULT_TRAIN_BITS)),
        test_bits=int(values.get("test_bits", DEFAULT_TEST_BITS)),
        coarse_step=int(coarse) if coarse else None,
        rounding=values.get("rounding", "half_even"),
        workers=int(values.get("workers", 1)),
    )


def _run_job(job: dict) -> BerResult:
    try:
        return run_point(**job)
    except Exception as exc:  # a bad point must not sink the sweep
        log.warning("point %s=%s %s seed %s failed: %s", job["param"], job["value"],
                    job["scheme_name"], job["seed"], exc)
        return BerResult(job["scheme_name"], None, job["k"], Mode.parse(job["mode"]).value,
                         job["param"], job["value"], job["seed"], None, 0, None,
                         error=f"{type(exc).__name__}: {exc}")


def sweep(plan: RunPlan) -> list[BerResult]:
    jobs = list(plan.points())
    if plan.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(job) for job in jobs]


CSV_FIELDS = ["scheme", "i", "k", "mode", "param", "value", "seed", "ber", "errors", "tau",
              "info_bits", "n", "ts", "M", "error"]


def _fmt(x) -> str:
    return "" if x is None else str(x)


def write_results_csv(results: Sequence[BerResult], fp: TextIO) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in results:
        writer.writerow([
            r.scheme, _fmt(r.i), r.k, r.mode, r.param, r.value, r.seed,
            "" if r.ber is None else f"{float(r.ber):.10g}", _fmt(r.errors), _fmt(r.tau),
            r.info_bits, _fmt(r.n), "" if r.t_s is None else f"{float(r.t_s):.10g}",
            _fmt(r.M), _fmt(r.error),
        ])


def mean_ber(results: Sequence[BerResult], scheme: str) -> float:
    bers = [float(r.ber) for r in results if r.scheme == scheme and r.ber is not None]
    if not bers:
        raise ValueError(f"no results for {scheme}")
    return sum(bers) / len(bers)
