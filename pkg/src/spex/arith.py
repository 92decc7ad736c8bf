"""Exact integer and modular arithmetic.

Python integers are arbitrary precision, so modular products never overflow;
the vectorised helpers at the bottom work on int64 arrays and are only valid
while ``modulus**2`` fits in 63 bits (``INT64_SAFE_MODULUS``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from .errors import SpexError

MAX_INT = 2**63 - 1
TRIAL_LIMIT = 10**6
INT64_SAFE_MODULUS = math.isqrt(MAX_INT)

# Deterministic for every n < 3.3 * 10**24, in particular all of [0, 2**64).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def primes_up_to(n: int) -> list[int]:
    """Primes <= n by a bytearray sieve."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytes(len(range(p * p, n + 1, p)))
    return [i for i, flag in enumerate(sieve) if flag]


@lru_cache(maxsize=1)
def _trial_primes() -> tuple[int, ...]:
    return tuple(primes_up_to(TRIAL_LIMIT))


def pow_mod(base: int, exp: int, modulus: int) -> int:
    if modulus < 2:
        raise SpexError(f"modulus must be >= 2, got {modulus}")
    if exp < 0 or exp > MAX_INT:
        raise SpexError(f"exponent must lie in [0, 2^63-1], got {exp}")
    return pow(base % modulus, exp, modulus)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 2**64."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int) -> int:
    """A non-trivial factor of the odd composite n (Pollard rho, Brent cycles).

    Starting constants are walked deterministically so the result is
    reproducible.
    """
    for c in range(1, 1000):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise RuntimeError(f"Pollard rho failed to split {n}")  # pragma: no cover


def _split_large(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    g = _brent(n)
    _split_large(g, out)
    _split_large(n // g, out)


@dataclass(frozen=True)
class Factorization:
    """Prime-power decomposition ``n = prod p**m`` with increasing primes."""

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, m in self.factors:
            if p <= last or m < 1:
                raise SpexError(f"malformed factorization {self.factors}")
            if not is_prime(p):
                raise SpexError(f"{p} in {self.factors} is not prime")
            last = p
            prod *= p**m
        if prod != self.n:
            raise SpexError(f"factors {self.factors} do not multiply to {self.n}")

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def prime_powers(self) -> list[int]:
        return [p**m for p, m in self.factors]

    def multiplicity(self, p: int) -> int:
        for prime, m in self.factors:
            if prime == p:
                return m
        return 0

    def is_prime(self) -> bool:
        return len(self.factors) == 1 and self.factors[0][1] == 1

    @classmethod
    def of(cls, n: int | Factorization) -> Factorization:
        return n if isinstance(n, Factorization) else factorize(n)


@lru_cache(maxsize=65536)
def factorize(n: int) -> Factorization:
    """Trial division by primes below 10**6, then Brent-Pollard rho."""
    if n < 2:
        raise SpexError(f"factorize needs n >= 2, got {n}")
    if n > MAX_INT:
        raise SpexError(f"factorize supports n <= 2^63-1, got {n}")
    out: dict[int, int] = {}
    rest = n
    for p in _trial_primes():
        if p * p > rest:
            break
        if rest % p == 0:
            m = 0
            while rest % p == 0:
                rest //= p
                m += 1
            out[p] = m
    if rest > 1:
        if rest < TRIAL_LIMIT * TRIAL_LIMIT:
            out[rest] = out.get(rest, 0) + 1
        else:
            _split_large(rest, out)
    return Factorization(n, tuple(sorted(out.items())))


def euler_phi(fact: Factorization | int) -> int:
    fact = Factorization.of(fact)
    phi = 1
    for p, m in fact:
        phi *= p ** (m - 1) * (p - 1)
    return phi


def carmichael(fact: Factorization | int) -> int:
    """Exponent of the unit group, lambda(n)."""
    fact = Factorization.of(fact)
    lam = 1
    for p, m in fact:
        if p == 2 and m >= 3:
            part = 2 ** (m - 2)
        else:
            part = p ** (m - 1) * (p - 1)
        lam = lam * part // math.gcd(lam, part)
    return lam


def divisors(fact: Factorization | int) -> list[int]:
    fact = Factorization.of(fact)
    divs = [1]
    for p, m in fact:
        divs = [d * p**k for d in divs for k in range(m + 1)]
    return sorted(divs)


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a non-zero integer."""
    if n == 0:
        raise SpexError("valuation of 0 is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def inverse_mod(a: int, m: int) -> int:
    try:
        return pow(a, -1, m)
    except ValueError:
        raise SpexError(f"{a} is not invertible modulo {m}") from None


def multiplicative_order(a: int, n: int) -> int:
    """Least t >= 1 with a**t = 1 (mod n), by descent through the divisors of phi(n)."""
    if n < 2:
        raise SpexError(f"modulus must be >= 2, got {n}")
    a %= n
    if math.gcd(a, n) != 1:
        raise SpexError(f"gcd({a}, {n}) != 1, order undefined")
    t = carmichael(n)
    if t == 1:
        return 1
    for ell, _ in factorize(t):
        while t % ell == 0 and pow(a, t // ell, n) == 1:
            t //= ell
    return t


def crt_combine(pairs: Iterable[tuple[int, int]]) -> tuple[int, int]:
    """Combine ``(residue, modulus)`` pairs; returns ``(x, M)`` with M the product."""
    x, modulus = 0, 1
    for r, m in pairs:
        if m < 1:
            raise SpexError(f"modulus must be positive, got {m}")
        if math.gcd(modulus, m) != 1:
            raise SpexError(f"moduli not pairwise coprime: {m} shares a factor with {modulus}")
        # x + M*k = r (mod m)
        k = (r - x) * inverse_mod(modulus, m) % m if m > 1 else 0
        x += modulus * k
        modulus *= m
        x %= modulus
    return x, modulus


def powmod_array(base: np.ndarray, exp, modulus: int) -> np.ndarray:
    """Elementwise ``base**exp % modulus`` for int64 arrays.

    ``exp`` is a non-negative int or an int64 array broadcastable to ``base``.
    """
    if modulus > INT64_SAFE_MODULUS:
        raise SpexError(f"modulus {modulus} too large for the int64 kernel")
    base = np.asarray(base, dtype=np.int64) % modulus
    if np.isscalar(exp) or np.ndim(exp) == 0:
        e = int(exp)
        result = np.ones_like(base)
        b = base.copy()
        while e:
            if e & 1:
                result = result * b % modulus
            e >>= 1
            if e:
                b = b * b % modulus
        return result
    e = np.array(exp, dtype=np.int64, copy=True)
    base, e = np.broadcast_arrays(base, e)
    e = e.copy()
    result = np.ones(base.shape, dtype=np.int64)
    b = base.copy()
    while e.any():
        odd = (e & 1).astype(bool)
        result[odd] = result[odd] * b[odd] % modulus
        e >>= 1
        b = b * b % modulus
    return result


def unit_orders(n: int) -> np.ndarray:
    """Array ``o`` of length n with ``o[a]`` the order of a mod n, 0 for non-units.

    ``o[0]`` for n == 1 is 1 by convention (the trivial group).
    """
    if n == 1:
        return np.ones(1, dtype=np.int64)
    residues = np.arange(n, dtype=np.int64)
    units = residues[np.gcd(residues, n) == 1]
    lam = carmichael(n)
    t = np.full(units.shape, lam, dtype=np.int64)
    if lam > 1:
        for ell, mult in factorize(lam):
            for _ in range(mult):
                cand = t // ell
                divisible = t % ell == 0
                ok = divisible & (powmod_array(units, cand, n) == 1)
                t = np.where(ok, cand, t)
    out = np.zeros(n, dtype=np.int64)
    out[units] = t
    return out
