"""Brute-force oracles shared by the tests.

These enumerate words directly and share no code with the library.
"""

import itertools

import pytest


def gaps_ok(word, i):
    ones = [j for j, b in enumerate(word) if b]
    return all(b - a > i for a, b in zip(ones, ones[1:]))


def brute_family(i, T):
    """All length-T words with >= i zeros between ones, lexicographic."""
    return [w for w in itertools.product((0, 1), repeat=T) if gaps_ok(w, i)]


def brute_family_dfs(i, T):
    """Same family without touching all 2^T words (for larger T)."""
    out = []

    def grow(prefix, since_one):
        if len(prefix) == T:
            out.append(tuple(prefix))
            return
        prefix.append(0)
        grow(prefix, since_one + 1)
        prefix.pop()
        if since_one >= i:
            prefix.append(1)
            grow(prefix, 0)
            prefix.pop()

    grow([], i)
    return out


def brute_ordered(i, T):
    """Family sorted by weight then lexicographically."""
    return sorted(brute_family(i, T), key=lambda w: (sum(w), w))


def bits(s):
    return tuple(int(c) for c in s)


@pytest.fixture
def oracle():
    class Oracle:
        family = staticmethod(brute_family)
        family_dfs = staticmethod(brute_family_dfs)
        ordered = staticmethod(brute_ordered)
        gaps_ok = staticmethod(gaps_ok)
    return Oracle
