"""Coding schemes under the time / molecule-budget normalization."""

from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .codec import FullCodebookCodec, LexRllCodec, RlimCodec
from .enumeration import CodeParams, Mode, build_tables


class SchemeKind(str, enum.Enum):
    UNCODED = "uncoded"
    RLIM = "rlim"
    RLL = "rll"
    RLIM_FULL = "rlimfull"


_NAME_RE = re.compile(r"^(uncoded|rlimfull|rlim|rll)(\d*)$")


@dataclass(frozen=True)
class SchemeSpec:
    name: str
    kind: SchemeKind
    code_params: CodeParams | None
    K: int
    n: int
    W: int
    W0: int
    t_s: Fraction | None = None
    M: int | None = None

    @property
    def order_i(self) -> int | None:
        return self.code_params.order_i if self.code_params else None

    @property
    def mode(self) -> Mode | None:
        return self.code_params.mode if self.code_params else None

    @property
    def normalized(self) -> bool:
        return self.t_s is not None


def parse_scheme_name(name: str) -> tuple[SchemeKind, int | None]:
    m = _NAME_RE.match(name.strip().lower())
    if not m:
        raise ValueError(f"unknown scheme {name!r}; expected uncoded, rlim<i>, rll<i> or rlimfull<i>")
    kind = SchemeKind(m.group(1))
    if kind is SchemeKind.UNCODED:
        if m.group(2):
            raise ValueError("uncoded takes no order")
        return kind, None
    if not m.group(2) or int(m.group(2)) < 1:
        raise ValueError(f"scheme {name!r} needs an order >= 1, e.g. {kind.value}3")
    return kind, int(m.group(2))


def uncoded_weight(K: int) -> int:
    """Ones across all 2^K uncoded words."""
    return K << (K - 1)


@functools.lru_cache(maxsize=64)
def _tables(i: int, T: int):
    return build_tables(i, T)


@functools.lru_cache(maxsize=64)
def build_codec(kind: SchemeKind, i: int, k: int, mode: Mode):
    params = CodeParams.resolve(i, k, mode)
    if kind is SchemeKind.RLIM:
        return RlimCodec(params, _tables(i, params.internal_T))
    if kind is SchemeKind.RLL:
        return LexRllCodec(params)
    if kind is SchemeKind.RLIM_FULL:
        return FullCodebookCodec(params)
    raise ValueError(f"no codec for {kind}")


def make_scheme(name: str, k: int, mode: "Mode | str" = Mode.ENHANCED) -> SchemeSpec:
    kind, i = parse_scheme_name(name)
    W0 = uncoded_weight(k)
    if kind is SchemeKind.UNCODED:
        return SchemeSpec(name, kind, None, k, k, W0, W0)
    mode = Mode.parse(mode)
    params = CodeParams.resolve(i, k, mode)
    if kind is SchemeKind.RLL:
        W = LexRllCodec(params).codebook_weight()
    else:
        # the full-codebook realization holds the same words as the enumerative one
        W = RlimCodec(params, _tables(i, params.internal_T)).codebook_weight()
    return SchemeSpec(name, kind, params, k, params.length_n, W, W0)


def round_half_even(x: Fraction) -> int:
    return round(x)


def round_half_up(x: Fraction) -> int:
    return int((x + Fraction(1, 2)) // 1)


ROUNDING = {"half_even": round_half_even, "half_up": round_half_up}


def normalize(spec: SchemeSpec, t_s0, M0: int, rounding: str = "half_even") -> SchemeSpec:
    """Resolve the scheme's interval length and molecules per pulse.

    ``t_s0`` is taken through its decimal string so ``0.2`` means 1/5.
    """
    if spec.W <= 0:
        raise ValueError(f"scheme {spec.name} has a zero-weight codebook")
    ts0 = Fraction(str(t_s0)) if not isinstance(t_s0, Fraction) else t_s0
    t_s = ts0 * spec.K / spec.n
    M = ROUNDING[rounding](Fraction(M0) * spec.W0 / spec.W)
    return replace(spec, t_s=t_s, M=M)


class Receiver:
    """Block mapping between information bits and channel symbols.

    ``decode`` runs threshold-detected symbols through the scheme's full
    receiver (correction and projection for coded schemes).  Decoded
    words are memoized; threshold training revisits the same words often.
    """

    def __init__(self, spec: SchemeSpec):
        self.spec = spec
        self.K, self.n = spec.K, spec.n
        if spec.kind is SchemeKind.UNCODED:
            self.codec = None
        else:
            p = spec.code_params
            self.codec = build_codec(spec.kind, p.order_i, p.info_bits_k, p.mode)
        self._weights = 1 << np.arange(self.K - 1, -1, -1, dtype=np.int64)
        self._cache: dict[bytes, int] = {}

    def blocks(self, n_info_bits: int) -> int:
        return -(-n_info_bits // self.K)

    def encode(self, info_bits: np.ndarray) -> np.ndarray:
        info_bits = np.asarray(info_bits, dtype=np.int8)
        if self.codec is None:
            return info_bits.copy()
        messages = info_bits.reshape(-1, self.K).astype(np.int64) @ self._weights
        out = np.empty((len(messages), self.n), dtype=np.int8)
        for row, m in enumerate(messages.tolist()):
            out[row] = self.codec.encode(m).bits
        return out.reshape(-1)

    def decode(self, detected: np.ndarray) -> np.ndarray:
        detected = np.asarray(detected, dtype=np.int8)
        if self.codec is None:
            return detected.copy()
        words = detected.reshape(-1, self.n)
        packed = np.packbits(words, axis=1)
        cache = self._cache
        messages = np.empty(len(words), dtype=np.int64)
        for row in range(len(words)):
            key = packed[row].tobytes()
            m = cache.get(key)
            if m is None:
                m = cache[key] = self.codec.decode(words[row].tolist())
            messages[row] = m
        return ((messages[:, None] & self._weights) != 0).astype(np.int8).reshape(-1)
