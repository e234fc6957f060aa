"""RLIM encoding and decoding by ranking/unranking over the counting tables.

A codeword of length ``n`` is ``0^i`` followed by an internal word ``u`` of
length ``T = n - i`` from the (i, inf)-RLL family.  Words are ordered by
Hamming weight first and lexicographically (0 < 1, leftmost bit most
significant) within a weight.  Message ``m`` maps to rank ``m + delta``
where ``delta`` is 1 in non-enhanced mode.

Besides the enumerative codec this module carries the two reference
realizations used in testing and benchmarks: the lexicographic RLL
baseline (same family, plain lexicographic order) and the materialized
full codebook.
"""

from __future__ import annotations

import bisect
import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .enumeration import (
    CodeParams,
    CountingTables,
    Mode,
    RankOutOfRangeError,
    build_tables,
    family_sizes,
    locate_layer,
)

DEFAULT_MAX_MATERIALIZED_K = 24


class InadmissibleWordError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(message)
        self.position = position


class MessageOutOfRangeError(ValueError):
    pass


class CodebookTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class BitWord:
    """Fixed-length binary word, MSB (leftmost) first."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(map(int, self.bits))
        if not {0, 1}.issuperset(bits):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def of(cls, value: "BitWord | str | Iterable[int]") -> "BitWord":
        if isinstance(value, BitWord):
            return value
        if isinstance(value, str):
            return cls.from_str(value)
        return cls(tuple(value))

    @classmethod
    def from_str(cls, text: str) -> "BitWord":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(tuple(1 if ch == "1" else 0 for ch in text))

    @classmethod
    def zeros(cls, n: int) -> "BitWord":
        return cls((0,) * n)

    @classmethod
    def from_int(cls, value: int, n: int) -> "BitWord":
        return cls(tuple((value >> (n - 1 - j)) & 1 for j in range(n)))

    def to_int(self) -> int:
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, idx):
        return self.bits[idx]

    @property
    def length(self) -> int:
        return len(self.bits)

    @property
    def weight(self) -> int:
        return sum(self.bits)

    def runs(self) -> list[tuple[int, int]]:
        """Run-length encoding as ``(bit, run length)`` pairs."""
        return [(bit, len(list(group))) for bit, group in itertools.groupby(self.bits)]

    def min_zero_gap(self) -> int | None:
        """Fewest zeros between two successive ones, None if weight < 2."""
        ones = [j for j, b in enumerate(self.bits) if b]
        if len(ones) < 2:
            return None
        return min(b - a - 1 for a, b in zip(ones, ones[1:]))

    def is_admissible(self, i: int, leading: int | None = None) -> bool:
        return first_violation(self.bits, i, i if leading is None else leading) is None

    def pack(self) -> bytes:
        """Packed bytes, first bit in the MSB of the first byte, tail zero-padded."""
        out = bytearray((len(self.bits) + 7) // 8)
        for j, b in enumerate(self.bits):
            if b:
                out[j >> 3] |= 0x80 >> (j & 7)
        return bytes(out)

    @classmethod
    def unpack(cls, data: bytes, n: int) -> "BitWord":
        if len(data) * 8 < n:
            raise ValueError("not enough bytes for the requested length")
        return cls(tuple((data[j >> 3] >> (7 - (j & 7))) & 1 for j in range(n)))


def first_violation(bits: Sequence[int], i: int, leading: int = 0) -> int | None:
    """Index of the first bit breaking the constraint, or None.

    ``leading`` bits at the start must be zero, and any two ones need at
    least ``i`` zeros between them.
    """
    last_one = None
    for j, b in enumerate(bits):
        if not b:
            continue
        if j < leading:
            return j
        if last_one is not None and j - last_one <= i:
            return j
        last_one = j
    return None


def _check_word(params: CodeParams, x) -> tuple:
    bits = BitWord.of(x).bits
    if len(bits) != params.length_n:
        raise InadmissibleWordError(
            f"word length {len(bits)} != n = {params.length_n}", min(len(bits), params.length_n))
    pos = first_violation(bits, params.order_i, params.order_i)
    if pos is not None:
        raise InadmissibleWordError(f"bit {pos} violates the run-length constraint", pos)
    return bits


def _check_tables(params: CodeParams, tables: CountingTables) -> None:
    if tables.order_i != params.order_i or tables.internal_T != params.internal_T:
        raise ValueError(
            f"tables built for (i={tables.order_i}, T={tables.internal_T}), "
            f"params need (i={params.order_i}, T={params.internal_T})")


# -- weight-then-lex order (RLIM) ---------------------------------------

def internal_rank(tables: CountingTables, u: Sequence[int]) -> int:
    """Enhanced-family rank of an admissible internal word ``u``."""
    i, T = tables.order_i, tables.internal_T
    w = sum(u)
    rank = tables.layer_offsets[w]
    # state (remaining length, remaining weight, forced zeros) kept inline
    length, weight, forced = T, w, 0
    F = tables.F
    for b in u:
        if b:
            rank += F[length - 1][weight][forced - 1 if forced else 0]
            weight -= 1
            forced = i
        elif forced:
            forced -= 1
        length -= 1
    return rank


def rank_word(params: CodeParams, tables: CountingTables, x) -> int:
    """Rank of codeword ``x`` in the weight-then-lex enhanced family."""
    _check_tables(params, tables)
    bits = _check_word(params, x)
    return internal_rank(tables, bits[params.order_i:])


def internal_unrank(tables: CountingTables, rank: int) -> list[int]:
    i, T = tables.order_i, tables.internal_T
    w, rho = locate_layer(tables, rank)
    F = tables.F
    out = []
    length, weight, forced = T, w, 0
    while weight:
        c0 = F[length - 1][weight][forced - 1 if forced else 0]
        if rho < c0:
            out.append(0)
            if forced:
                forced -= 1
        else:
            out.append(1)
            rho -= c0
            weight -= 1
            forced = i
        length -= 1
    out.extend([0] * length)
    return out


def encode(params: CodeParams, tables: CountingTables, m: int) -> BitWord:
    """Codeword for message ``m``: the word of rank ``m + delta``."""
    _check_tables(params, tables)
    if not 0 <= m < params.codebook_size:
        raise MessageOutOfRangeError(f"message {m} outside [0, 2^{params.info_bits_k})")
    u = internal_unrank(tables, m + params.shift_delta)
    return BitWord((0,) * params.order_i + tuple(u))


def correct(params: CodeParams, y) -> BitWord:
    """Map a detected word onto the constrained family, keeping the earliest feasible ones."""
    bits = BitWord.of(y).bits
    if len(bits) != params.length_n:
        raise ValueError(f"word length {len(bits)} != n = {params.length_n}")
    return BitWord(correct_bits(bits, params.order_i))


def correct_bits(bits: Sequence[int], i: int) -> tuple:
    z = [0] * len(bits)
    skip = i
    for j, b in enumerate(bits):
        if skip > 0:
            skip -= 1
        elif b:
            z[j] = 1
            skip = i
    return tuple(z)


def _project(bits: Sequence[int], rank_fn, lo: int, hi: int, trace: list | None):
    """Erase rightmost ones until the rank lands in ``[lo, hi)``.

    Returns the rank found, or None once the word is all zero.
    """
    z = list(bits)
    while True:
        if not any(z):
            if trace is not None:
                trace.append(("".join(map(str, z)), None))
            return None
        r = rank_fn(z)
        if trace is not None:
            trace.append(("".join(map(str, z)), r))
        if lo <= r < hi:
            return r
        z[max(j for j, b in enumerate(z) if b)] = 0


def project_decode(params: CodeParams, tables: CountingTables, z, trace: list | None = None) -> int:
    """Message index of a corrected word, projecting outside words inward.

    ``trace``, if given, collects ``(word, rank)`` for every word tested;
    the all-zero word is recorded with rank None.
    """
    _check_tables(params, tables)
    bits = _check_word(params, z)
    i, delta = params.order_i, params.shift_delta
    r = _project(bits, lambda w: internal_rank(tables, w[i:]),
                 delta, params.codebook_size + delta, trace)
    return 0 if r is None else r - delta


def selected_codebook_weight(params: CodeParams, tables: CountingTables) -> int:
    """Total number of ones over the selected codebook, from the layer sizes."""
    _check_tables(params, tables)
    # ranks [delta, 2^k + delta); rank 0 has weight 0 so [0, 2^k + delta) sums the same
    end = params.codebook_size + params.shift_delta
    total = 0
    for w, size in enumerate(tables.layer_sizes):
        start = tables.layer_offsets[w]
        if start >= end:
            break
        total += w * min(size, end - start)
    return total


# -- lexicographic RLL baseline ------------------------------------------

class Ordering(str, enum.Enum):
    WEIGHT_THEN_LEX = "weight-then-lex"
    LEX_GENERATION = "lex-generation"


def lex_rank(sizes: Sequence[int], u: Sequence[int]) -> int:
    """Lexicographic rank of an admissible internal word.

    Every 1 at position j (1-based) skips the ``|C_i(T - j)|`` words that
    put a 0 there instead; those share the prefix and are unconstrained
    after it because a 1 can only follow at least i zeros.
    """
    T = len(u)
    return sum(sizes[T - 1 - j] for j, b in enumerate(u) if b)


def lex_unrank(sizes: Sequence[int], i: int, T: int, rank: int) -> list[int]:
    if not 0 <= rank < sizes[T]:
        raise RankOutOfRangeError(f"rank {rank} outside [0, {sizes[T]})")
    out = []
    forced = 0
    for j in range(T):
        if forced:
            out.append(0)
            forced -= 1
            continue
        c0 = sizes[T - 1 - j]
        if rank < c0:
            out.append(0)
        else:
            out.append(1)
            rank -= c0
            forced = i
    return out


def lex_prefix_weight(i: int, T: int, end: int) -> int:
    """Total weight of the first ``end`` words of ``C_i(T)`` in lex order.

    Runs a paired (count, weight-sum) recurrence and walks the unranking
    path of ``end``, adding each skipped 0-subtree whole.
    """
    sizes = family_sizes(i, T)
    if not 0 <= end <= sizes[T]:
        raise ValueError(f"end {end} outside [0, {sizes[T]}]")
    wsum = [0] * (T + 1)
    for t in range(1, T + 1):
        if t <= i + 1:
            wsum[t] = t
        else:
            wsum[t] = wsum[t - 1] + sizes[t - i - 1] + wsum[t - i - 1]
    if end == sizes[T]:
        return wsum[T]
    total, ones, forced, rank = 0, 0, 0, end
    for j in range(T):
        if forced:
            forced -= 1
            continue
        c0 = sizes[T - 1 - j]
        if rank >= c0:
            total += ones * c0 + wsum[T - 1 - j]
            rank -= c0
            ones += 1
            forced = i
    return total


# -- realizations used by the harness ------------------------------------

class RlimCodec:
    """Enumerative RLIM encoder/decoder bound to one set of tables."""

    ordering = Ordering.WEIGHT_THEN_LEX

    def __init__(self, params: CodeParams, tables: CountingTables | None = None):
        self.params = params
        self.tables = tables if tables is not None else build_tables(params.order_i, params.internal_T)
        _check_tables(params, self.tables)

    @property
    def n(self) -> int:
        return self.params.length_n

    def rank(self, x) -> int:
        return rank_word(self.params, self.tables, x)

    def encode(self, m: int) -> BitWord:
        return encode(self.params, self.tables, m)

    def _internal_rank(self, word) -> int:
        return internal_rank(self.tables, word[self.params.order_i:])

    def decode(self, y, trace: list | None = None) -> int:
        """Correction followed by projection decoding."""
        bits = BitWord.of(y).bits
        if len(bits) != self.n:
            raise ValueError(f"word length {len(bits)} != n = {self.n}")
        z = correct_bits(bits, self.params.order_i)
        delta = self.params.shift_delta
        r = _project(z, self._internal_rank, delta, self.params.codebook_size + delta, trace)
        return 0 if r is None else r - delta

    def codebook_weight(self) -> int:
        return selected_codebook_weight(self.params, self.tables)


class LexRllCodec(RlimCodec):
    """First ``2^k + delta`` words of the family in plain lexicographic order.

    Same length, leading zeros and receiver pipeline as the RLIM codec;
    only the order that picks the codebook differs.
    """

    ordering = Ordering.LEX_GENERATION

    def __init__(self, params: CodeParams):
        self.params = params
        self.sizes = family_sizes(params.order_i, params.internal_T)

    def rank(self, x) -> int:
        bits = _check_word(self.params, x)
        return lex_rank(self.sizes, bits[self.params.order_i:])

    def _internal_rank(self, word) -> int:
        return lex_rank(self.sizes, word[self.params.order_i:])

    def encode(self, m: int) -> BitWord:
        p = self.params
        if not 0 <= m < p.codebook_size:
            raise MessageOutOfRangeError(f"message {m} outside [0, 2^{p.info_bits_k})")
        u = lex_unrank(self.sizes, p.order_i, p.internal_T, m + p.shift_delta)
        return BitWord((0,) * p.order_i + tuple(u))

    def codebook_weight(self) -> int:
        p = self.params
        return lex_prefix_weight(p.order_i, p.internal_T, p.codebook_size + p.shift_delta)


def generate_family(i: int, t: int) -> Iterator[tuple]:
    """Words of ``C_i(t)`` in recursive generation order (0-branch first)."""
    if t == 0:
        yield ()
        return
    if t <= i + 1:
        yield (0,) * t
        for r in range(1, t + 1):
            yield (0,) * (t - r) + (1,) + (0,) * (r - 1)
        return
    for u in generate_family(i, t - 1):
        yield (0,) + u
    head = (1,) + (0,) * i
    for u in generate_family(i, t - i - 1):
        yield head + u


@dataclass(frozen=True)
class Codebook:
    params: CodeParams
    words: tuple
    ordering_tag: Ordering

    def __len__(self) -> int:
        return len(self.words)

    def __getitem__(self, m: int) -> BitWord:
        return self.words[m]


def oracle_codebook(params: CodeParams, ordering: "Ordering | str" = Ordering.WEIGHT_THEN_LEX,
                    max_k: int = DEFAULT_MAX_MATERIALIZED_K) -> Codebook:
    """Materialize the selected codebook by generating the whole family."""
    ordering = Ordering(ordering)
    if params.info_bits_k > max_k:
        raise CodebookTooLargeError(
            f"k={params.info_bits_k} exceeds the materialization limit {max_k}")
    i, T = params.order_i, params.internal_T
    delta, size = params.shift_delta, params.codebook_size
    family = generate_family(i, T)
    if ordering is Ordering.WEIGHT_THEN_LEX:
        ranked = sorted(family, key=lambda u: (sum(u), u))
        chosen = ranked[delta:delta + size]
    else:
        chosen = list(itertools.islice(family, delta, delta + size))
    prefix = (0,) * i
    return Codebook(params, tuple(BitWord(prefix + u) for u in chosen), ordering)


class FullCodebookCodec:
    """Lookup-table realization: the whole selected codebook held in memory.

    Codewords are stored as integers in weight-then-lex order, so rank
    decoding is a binary search on ``(weight, value)``.
    """

    ordering = Ordering.WEIGHT_THEN_LEX

    def __init__(self, params: CodeParams, max_k: int = DEFAULT_MAX_MATERIALIZED_K):
        if params.info_bits_k > max_k:
            raise CodebookTooLargeError(
                f"k={params.info_bits_k} exceeds the materialization limit {max_k}")
        self.params = params
        i, T = params.order_i, params.internal_T
        family = sorted((sum(u), _bits_to_int(u)) for u in generate_family(i, T))
        delta = params.shift_delta
        self.keys = family[delta:delta + params.codebook_size]

    @property
    def n(self) -> int:
        return self.params.length_n

    @property
    def stored_bits(self) -> int:
        return self.params.length_n * self.params.codebook_size

    def encode(self, m: int) -> BitWord:
        if not 0 <= m < self.params.codebook_size:
            raise MessageOutOfRangeError(f"message {m} outside [0, 2^{self.params.info_bits_k})")
        return BitWord.from_int(self.keys[m][1], self.n)

    def lookup(self, x) -> int | None:
        """Message index of ``x`` if it is in the codebook."""
        bits = BitWord.of(x).bits
        key = (sum(bits), _bits_to_int(bits))
        m = bisect.bisect_left(self.keys, key)
        if m < len(self.keys) and self.keys[m] == key:
            return m
        return None

    def decode(self, y, trace: list | None = None) -> int:
        bits = BitWord.of(y).bits
        if len(bits) != self.n:
            raise ValueError(f"word length {len(bits)} != n = {self.n}")
        z = list(correct_bits(bits, self.params.order_i))
        while any(z):
            m = self.lookup(z)
            if trace is not None:
                trace.append(("".join(map(str, z)), m))
            if m is not None:
                return m
            z[max(j for j, b in enumerate(z) if b)] = 0
        return 0

    def codebook_weight(self) -> int:
        return sum(w for w, _ in self.keys)


def _bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | b
    return value
