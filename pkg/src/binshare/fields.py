"""Finite-field arithmetic: binary extension fields GF(2^e) and small fields GF(q).

Binary field elements are ints whose bit ``i`` is the coefficient of ``x^i``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ParameterError


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[x] polynomials."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    out = 0
    while b:
        low = b & -b
        out ^= a << (low.bit_length() - 1)
        b ^= low
    return out


def poly_mod(a: int, f: int) -> int:
    deg = f.bit_length() - 1
    while a.bit_length() - 1 >= deg:
        a ^= f << (a.bit_length() - 1 - deg)
    return a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def poly_mulmod(a: int, b: int, f: int) -> int:
    return poly_mod(clmul(a, b), f)


def is_irreducible(f: int) -> bool:
    """Ben-Or test: ``f`` of degree ``e`` is irreducible iff
    ``gcd(x^(2^i) - x, f) = 1`` for ``1 <= i <= e/2``."""
    e = f.bit_length() - 1
    if e < 1:
        return False
    if e == 1:
        return True
    if not f & 1:
        return False
    power = 0b10  # x
    for _ in range(e // 2):
        power = poly_mulmod(power, power, f)
        if poly_gcd(f, power ^ 0b10) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def irreducible_poly(e: int) -> int:
    """Lowest-weight irreducible polynomial of degree ``e``: trinomials, then pentanomials."""
    if e < 1:
        raise ParameterError("field degree must be at least 1")
    if e == 1:
        return 0b11
    top = (1 << e) | 1
    for k in range(1, e):
        f = top | (1 << k)
        if is_irreducible(f):
            return f
    for a in range(1, e):
        for b in range(a + 1, e):
            for c in range(b + 1, e):
                f = top | (1 << a) | (1 << b) | (1 << c)
                if is_irreducible(f):
                    return f
    raise ParameterError(f"no irreducible trinomial or pentanomial of degree {e}")


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


class GF2Field:
    """GF(2^e) with modulus ``irreducible_poly(e)``; log tables when ``e <= 16``."""

    TABLE_LIMIT = 16

    def __init__(self, e: int):
        self.e = e
        self.order = 1 << e
        self.modulus = irreducible_poly(e)
        self._exp = None
        self._log = None
        if e <= self.TABLE_LIMIT:
            self._build_tables()

    def _build_tables(self):
        q1 = self.order - 1
        factors = _prime_factors(q1) if q1 > 1 else []
        gen = None
        for g in range(2, self.order) if self.order > 2 else [1]:
            if all(self._pow_slow(g, q1 // p) != 1 for p in factors):
                gen = g
                break
        exp = np.zeros(2 * q1 + 2, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        v = 1
        for i in range(q1):
            exp[i] = v
            log[v] = i
            v = poly_mulmod(v, gen, self.modulus)
        exp[q1:2 * q1] = exp[:q1]
        self._exp = exp
        self._log = log

    def _pow_slow(self, a: int, k: int) -> int:
        out = 1
        while k:
            if k & 1:
                out = poly_mulmod(out, a, self.modulus)
            a = poly_mulmod(a, a, self.modulus)
            k >>= 1
        return out

    def mul(self, a: int, b: int) -> int:
        if self._exp is not None:
            if a == 0 or b == 0:
                return 0
            return int(self._exp[self._log[a] + self._log[b]])
        return poly_mulmod(a, b, self.modulus)

    def pow(self, a: int, k: int) -> int:
        if a == 0:
            return 0 if k else 1
        if self._exp is not None:
            return int(self._exp[(int(self._log[a]) * k) % (self.order - 1)])
        return self._pow_slow(a, k)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self.pow(a, self.order - 2)

    def mul_array(self, a: np.ndarray, b) -> np.ndarray:
        """Elementwise product; requires log tables."""
        if self._exp is None:
            raise ParameterError("vectorised multiply needs e <= 16")
        a = np.asarray(a, dtype=np.int64)
        b = np.broadcast_to(np.asarray(b, dtype=np.int64), a.shape)
        out = self._exp[self._log[a] + self._log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def poly_eval_array(self, coeffs: list[int], points: np.ndarray) -> np.ndarray:
        """Horner evaluation of ``sum coeffs[i] x^i`` at every point."""
        acc = np.zeros(points.shape, dtype=np.int64)
        for c in reversed(coeffs):
            acc = self.mul_array(acc, points) ^ c
        return acc

    def poly_eval(self, coeffs: list[int], x: int) -> int:
        acc = 0
        for c in reversed(coeffs):
            acc = self.mul(acc, x) ^ c
        return acc


@lru_cache(maxsize=None)
def gf2_field(e: int) -> GF2Field:
    return GF2Field(e)


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % p for p in range(2, int(q ** 0.5) + 1))


def is_supported_order(q: int) -> bool:
    """Orders usable for polynomial designs: primes and powers of two."""
    return _is_prime(q) or (q >= 2 and q & (q - 1) == 0)


class SmallField:
    """GF(q) for ``q`` prime or a power of two, elements ``0..q-1``."""

    def __init__(self, q: int):
        if not is_supported_order(q):
            raise ParameterError(f"field order {q} is neither prime nor a power of two")
        self.q = q
        self._binary = gf2_field(q.bit_length() - 1) if q & (q - 1) == 0 and q > 2 else None

    def add(self, a: int, b: int) -> int:
        if self._binary is not None:
            return a ^ b
        return (a + b) % self.q

    def mul(self, a: int, b: int) -> int:
        if self._binary is not None:
            return self._binary.mul(a, b)
        return (a * b) % self.q

    def poly_eval(self, coeffs: list[int], x: int) -> int:
        acc = 0
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, x), c)
        return acc
