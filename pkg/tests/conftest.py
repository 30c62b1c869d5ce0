import random
from fractions import Fraction
from functools import lru_cache

import pytest

from binshare.sss import derive_params


@lru_cache(maxsize=None)
def all_subspaces(n: int, k: int) -> tuple[frozenset[int], ...]:
    """Every k-dimensional subspace of GF(2)^n as a frozenset of its elements.

    Built by extending each (k-1)-dimensional space by every outside vector and
    deduplicating (or via orthogonal complements above half dimension),
    independent of the library's echelon-form enumeration.
    """
    if k == 0:
        return (frozenset({0}),)
    if 2 * k > n:
        return tuple(
            frozenset(x for x in range(1 << n) if all(brute_parity(x & v) == 0 for v in dual))
            for dual in all_subspaces(n, n - k)
        )
    seen = set()
    for space in all_subspaces(n, k - 1):
        for v in range(1, 1 << n):
            if v not in space:
                seen.add(space | frozenset(s ^ v for s in space))
    return tuple(sorted(seen, key=sorted))


def all_cosets(n: int, space: frozenset[int]) -> list[frozenset[int]]:
    out = set()
    for a in range(1 << n):
        out.add(frozenset(a ^ v for v in space))
    return list(out)


def brute_parity(x: int) -> int:
    return bin(x).count("1") % 2


@pytest.fixture(scope="session")
def tiny_nonadaptive():
    """n + d = 12, t = 2, ell = 1."""
    return derive_params(16, Fraction(1, 8), 1, "nonadaptive", xi=Fraction(1, 4), trials=4000)


@pytest.fixture(scope="session")
def tiny_adaptive():
    """Lifted input of 10 bits, t = 2, ell = 1."""
    return derive_params(12, Fraction(1, 6), 1, "adaptive", xi=Fraction(1, 6), trials=4000)


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if report.when == "call":
                lines += [value for key, value in report.user_properties if key == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
