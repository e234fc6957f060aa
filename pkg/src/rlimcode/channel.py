"""Diffusion channel with a fully absorbing spherical receiver.

A molecule released at the start of an interval is absorbed during the
l-th interval with probability ``p_l = F(l ts) - F((l-1) ts)``.  Each
emission of ``M`` molecules is a multinomial draw over the first ``I``
taps plus a tail bin; the receiver counts what lands in each interval and
adds rounded Gaussian counting noise.
"""

from __future__ import annotations

import configparser
import csv
import functools
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np
from scipy.special import erfc


@dataclass(frozen=True)
class ChannelParams:
    D: float = 79.4         # um^2/s
    r_R: float = 5.0        # um
    r_0: float = 10.0       # um
    t_s: float = 0.2        # s
    M: int = 100
    sigma2: float = 5.0
    memory_I: int = 100

    def __post_init__(self):
        if not self.r_0 > self.r_R > 0:
            raise ValueError("need r_0 > r_R > 0")
        if self.D <= 0 or self.t_s <= 0:
            raise ValueError("D and t_s must be positive")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        if self.memory_I < 1:
            raise ValueError("memory I must be >= 1")
        if self.M < 0 or int(self.M) != self.M:
            raise ValueError("M must be a non-negative integer")


def absorption_cdf(params: ChannelParams, t: float) -> float:
    """Probability a molecule has been absorbed by time ``t``."""
    if t < 0:
        raise ValueError("time must be non-negative")
    if t == 0:
        return 0.0
    return params.r_R / params.r_0 * float(erfc((params.r_0 - params.r_R) / math.sqrt(4 * params.D * t)))


@dataclass(frozen=True, eq=False)
class TapProfile:
    taps: np.ndarray
    tail: float

    @property
    def pvals(self) -> np.ndarray:
        return np.append(self.taps, self.tail)


@functools.lru_cache(maxsize=256)
def tap_profile(params: ChannelParams) -> TapProfile:
    times = params.t_s * np.arange(params.memory_I + 1)
    cdf = np.array([absorption_cdf(params, t) for t in times])
    taps = np.diff(cdf)
    taps.setflags(write=False)
    return TapProfile(taps, max(0.0, 1.0 - float(taps.sum())))


def emit(profile: TapProfile, M: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Absorption counts ``X_1..X_I, X_{I+1}`` for one (or ``size``) emissions of M molecules."""
    return rng.multinomial(int(M), profile.pvals, size=size)


def rounded_noise(sigma2: float, size: int, rng: np.random.Generator) -> np.ndarray:
    if sigma2 == 0:
        return np.zeros(size, dtype=np.int64)
    g = rng.normal(0.0, math.sqrt(sigma2), size)
    # round half away from zero
    return (np.sign(g) * np.floor(np.abs(g) + 0.5)).astype(np.int64)


class ChannelStream:
    """A transmission that can be continued: ISI from earlier calls carries over.

    ``transmit`` may be called repeatedly (training then test); molecules
    still in flight from the previous call land in the next one.
    """

    def __init__(self, params: ChannelParams, rng: np.random.Generator):
        self.params = params
        self.profile = tap_profile(params)
        self.rng = rng
        self.pending = np.zeros(params.memory_I - 1, dtype=np.int64)

    def transmit(self, bits: Sequence[int]) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int8)
        I = self.params.memory_I
        L = len(bits)
        buf = np.zeros(L + I - 1, dtype=np.int64)
        buf[: I - 1] += self.pending
        emitters = np.flatnonzero(bits)
        if len(emitters):
            X = emit(self.profile, self.params.M, self.rng, size=len(emitters))
            for lag in range(I):
                buf[emitters + lag] += X[:, lag]
        self.pending = buf[L:].copy()
        counts = buf[:L] + rounded_noise(self.params.sigma2, L, self.rng)
        return np.maximum(counts, 0)


def simulate_reception(params: ChannelParams, bits: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    return ChannelStream(params, rng).transmit(bits)


# config keys -> (field, type)
_CONFIG_KEYS = {
    "D": ("D", float), "rR": ("r_R", float), "r0": ("r_0", float),
    "ts": ("t_s", float), "M": ("M", int), "sigma2": ("sigma2", float),
    "I": ("memory_I", int),
}


def read_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` config; ``#`` comments and an optional section header allowed."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    if not text.lstrip().startswith("["):
        text = "[config]\n" + text
    parser.read_string(text)
    out = {}
    for section in parser.sections():
        out.update(parser[section])
    return out


def channel_from_mapping(values: dict[str, str], base: ChannelParams | None = None) -> ChannelParams:
    kwargs = {}
    for key, (name, typ) in _CONFIG_KEYS.items():
        if key in values:
            try:
                kwargs[name] = typ(values[key])
            except ValueError:
                raise ValueError(f"bad value for {key}: {values[key]!r}") from None
    base = base or ChannelParams()
    return ChannelParams(**{**base.__dict__, **kwargs})


def load_channel_config(text: str) -> tuple[ChannelParams, int | None]:
    """Channel parameters and seed (None if absent) from config text."""
    values = read_config(text)
    unknown = set(values) - set(_CONFIG_KEYS) - {"seed"}
    if unknown:
        raise ValueError(f"unknown channel config keys: {sorted(unknown)}")
    seed = int(values["seed"]) if "seed" in values else None
    return channel_from_mapping(values), seed


def write_counts_csv(counts: Sequence[int], fp: TextIO) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["interval", "count"])
    for t, c in enumerate(counts, start=1):
        writer.writerow([t, int(c)])
