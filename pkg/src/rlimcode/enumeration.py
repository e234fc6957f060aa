"""Counting tables for (i, inf)-RLL words and their weight layers.

The central object is ``F[l][s][r]``: the number of length-``l`` words of
weight ``s`` with at least ``i`` zeros between successive ones, whose first
``min(r, l)`` bits are forced to zero.  From it we read off the size of each
weight layer ``N(w) = F[T][w][0]`` and the cumulative offsets ``Gamma(w)``
that place a within-layer rank into the global weight-then-lex order.

All counts are plain Python ints, so nothing overflows at large ``T``.
"""

from __future__ import annotations

import enum
import io
import struct
from dataclasses import dataclass, field
from typing import BinaryIO


class Mode(str, enum.Enum):
    """Enhanced mode keeps the all-zero word, non-enhanced drops it."""

    ENHANCED = "E"
    NON_ENHANCED = "N"

    @property
    def shift(self) -> int:
        return 0 if self is Mode.ENHANCED else 1

    @classmethod
    def parse(cls, value: "str | Mode") -> "Mode":
        if isinstance(value, Mode):
            return value
        key = str(value).strip().upper()
        aliases = {"E": cls.ENHANCED, "ENHANCED": cls.ENHANCED,
                   "N": cls.NON_ENHANCED, "NONENHANCED": cls.NON_ENHANCED,
                   "NON_ENHANCED": cls.NON_ENHANCED, "NON-ENHANCED": cls.NON_ENHANCED}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown mode {value!r}, expected E or N") from None


class RankOutOfRangeError(ValueError):
    pass


def family_size(i: int, t: int) -> int:
    """Number of length-``t`` words with at least ``i`` zeros between ones."""
    if i < 1:
        raise ValueError("order i must be >= 1")
    if t < 0:
        raise ValueError("length t must be >= 0")
    return family_sizes(i, t)[t]


def family_sizes(i: int, t_max: int) -> list[int]:
    """``[|C_i(0)|, ..., |C_i(t_max)|]``."""
    c = [1]
    for t in range(1, t_max + 1):
        if t <= i + 1:
            c.append(t + 1)
        else:
            c.append(c[t - 1] + c[t - i - 1])
    return c


def shortest_length(i: int, k: int, mode: "Mode | str" = Mode.ENHANCED) -> int:
    """Smallest codeword length ``n >= i + 1`` holding ``2**k`` codewords.

    In non-enhanced mode the all-zero word is unusable, so one extra word is
    required.  The count recurrence is carried forward with a window of the
    last ``i + 1`` values instead of building any table.
    """
    if i < 1 or k < 1:
        raise ValueError("need i >= 1 and k >= 1")
    need = (1 << k) + Mode.parse(mode).shift
    window = [1]  # |C_i(t)| for t = 0 .. current, trimmed to i + 1 entries
    t = 0
    while True:
        t += 1
        nxt = t + 1 if t <= i + 1 else window[-1] + window[-(i + 1)]
        window.append(nxt)
        if len(window) > i + 1:
            del window[0]
        if nxt >= need:
            return t + i


@dataclass(frozen=True)
class CodeParams:
    order_i: int
    info_bits_k: int
    mode: Mode
    length_n: int

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.order_i < 1 or self.info_bits_k < 1:
            raise ValueError("need i >= 1 and k >= 1")
        if self.length_n < self.order_i + 1:
            raise ValueError(f"length n={self.length_n} must be >= i + 1 = {self.order_i + 1}")
        if family_size(self.order_i, self.internal_T) < (1 << self.info_bits_k) + self.shift_delta:
            raise ValueError(
                f"n={self.length_n} too short for k={self.info_bits_k} at i={self.order_i} "
                f"in mode {self.mode.value}")

    @classmethod
    def resolve(cls, i: int, k: int, mode: "Mode | str" = Mode.ENHANCED) -> "CodeParams":
        """Parameters at the shortest admissible length for the mode."""
        mode = Mode.parse(mode)
        return cls(i, k, mode, shortest_length(i, k, mode))

    @property
    def internal_T(self) -> int:
        return self.length_n - self.order_i

    @property
    def shift_delta(self) -> int:
        return self.mode.shift

    @property
    def codebook_size(self) -> int:
        return 1 << self.info_bits_k


@dataclass(frozen=True)
class CountingTables:
    """Immutable counting tables for one ``(i, T)``.

    ``F`` is dense, ``(T+1) x (T+1) x (i+1)``.  ``layer_sizes`` holds N(w)
    for every w in ``0..T`` and ``layer_offsets`` holds Gamma(w) for
    ``0..T+1``; entries past ``w_max`` are zero / saturated.
    """

    order_i: int
    internal_T: int
    F: tuple
    layer_sizes: tuple
    layer_offsets: tuple
    w_max: int = field(init=False)

    def __post_init__(self):
        w_max = max(w for w, size in enumerate(self.layer_sizes) if size)
        object.__setattr__(self, "w_max", w_max)

    @property
    def total(self) -> int:
        return self.layer_offsets[-1]

    def count(self, length: int, weight: int, forced: int) -> int:
        """``F(length, weight, forced)`` with zeros outside the table."""
        if length < 0 or weight < 0 or weight > self.internal_T:
            return 0
        return self.F[length][weight][forced]

    def stored_integers(self):
        """Every stored count, row-major F first, then N, then Gamma."""
        for plane in self.F:
            for row in plane:
                yield from row
        yield from self.layer_sizes
        yield from self.layer_offsets

    @property
    def entry_count(self) -> int:
        T, i = self.internal_T, self.order_i
        return (T + 1) * (T + 1) * (i + 1) + (T + 1) + (T + 2)

    @property
    def stored_bits(self) -> int:
        """Sum of minimal bit lengths of the stored counts (a zero takes one bit)."""
        return sum(max(1, v.bit_length()) for v in self.stored_integers())

    # -- binary container ---------------------------------------------

    MAGIC = b"RLMT"
    VERSION = 1

    def dump(self, fp: BinaryIO) -> None:
        fp.write(self.MAGIC)
        fp.write(struct.pack(">HII", self.VERSION, self.order_i, self.internal_T))
        for value in self.stored_integers():
            raw = value.to_bytes((value.bit_length() + 7) // 8, "big")
            fp.write(struct.pack(">I", len(raw)))
            fp.write(raw)

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        self.dump(buf)
        return buf.getvalue()

    @classmethod
    def load(cls, fp: BinaryIO) -> "CountingTables":
        if fp.read(4) != cls.MAGIC:
            raise ValueError("not a counting-table container")
        version, i, T = struct.unpack(">HII", _read_exact(fp, 10))
        if version != cls.VERSION:
            raise ValueError(f"unsupported container version {version}")

        def read_int():
            (size,) = struct.unpack(">I", _read_exact(fp, 4))
            return int.from_bytes(_read_exact(fp, size), "big")

        F = tuple(
            tuple(tuple(read_int() for _ in range(i + 1)) for _ in range(T + 1))
            for _ in range(T + 1))
        sizes = tuple(read_int() for _ in range(T + 1))
        offsets = tuple(read_int() for _ in range(T + 2))
        tables = cls(i, T, F, sizes, offsets)
        if tables != build_tables(i, T):
            raise ValueError("container contents do not satisfy the table recurrences")
        return tables

    @classmethod
    def from_bytes(cls, data: bytes) -> "CountingTables":
        return cls.load(io.BytesIO(data))


def _read_exact(fp: BinaryIO, size: int) -> bytes:
    data = fp.read(size)
    if len(data) != size:
        raise ValueError("truncated counting-table container")
    return data


def build_tables(i: int, T: int) -> CountingTables:
    if i < 1 or T < 1:
        raise ValueError("need i >= 1 and T >= 1")
    zero_row = [0] * (i + 1)
    planes = [[[1] * (i + 1)] + [zero_row[:] for _ in range(T)]]
    for length in range(1, T + 1):
        prev = planes[length - 1]
        plane = []
        for s in range(T + 1):
            row = [0] * (i + 1)
            # Beyond ceil(length / (i + 1)) every entry is zero.
            if s <= (length + i) // (i + 1):
                row[0] = prev[s][0] + (prev[s - 1][i] if s else 0)
                for r in range(1, i + 1):
                    row[r] = prev[s][r - 1]
            plane.append(row)
        planes.append(plane)

    sizes = [planes[T][w][0] for w in range(T + 1)]
    offsets = [0]
    for size in sizes:
        offsets.append(offsets[-1] + size)
    F = tuple(tuple(tuple(row) for row in plane) for plane in planes)
    return CountingTables(i, T, F, tuple(sizes), tuple(offsets))


@dataclass
class PrefixState:
    """Where a left-to-right scan of an internal word stands.

    ``forced_zeros`` is how many of the upcoming bits must be zero because
    of the last 1-bit read.
    """

    remaining_len: int
    remaining_weight: int
    forced_zeros: int = 0
    consumed_weight: int = 0
    trailing_zeros_since_last_one: int = 0

    @classmethod
    def initial(cls, T: int, w: int) -> "PrefixState":
        return cls(T, w)

    def push(self, bit: int, i: int) -> "PrefixState":
        if bit:
            return PrefixState(self.remaining_len - 1, self.remaining_weight - 1, i,
                               self.consumed_weight + 1, 0)
        forced = max(self.forced_zeros - 1, 0)
        return PrefixState(self.remaining_len - 1, self.remaining_weight, forced,
                           self.consumed_weight, self.trailing_zeros_since_last_one + 1)


def count_with_zero(tables: CountingTables, state: PrefixState) -> int:
    """Completions of the current prefix in its weight layer whose next bit is 0."""
    if state.remaining_len == 0:
        return 0
    return tables.count(state.remaining_len - 1, state.remaining_weight,
                        max(state.forced_zeros - 1, 0))


def locate_layer(tables: CountingTables, rank: int) -> tuple[int, int]:
    """Weight layer holding ``rank`` and the rank inside that layer."""
    offsets = tables.layer_offsets
    if not 0 <= rank < offsets[-1]:
        raise RankOutOfRangeError(f"rank {rank} outside [0, {offsets[-1]})")
    w = 0
    while offsets[w + 1] <= rank:
        w += 1
    return w, rank - offsets[w]
