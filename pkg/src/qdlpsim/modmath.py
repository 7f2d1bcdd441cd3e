"""Number-theoretic substrate.

Modular arithmetic, deterministic primality, subgroup parameter generation and
a baby-step giant-step discrete logarithm. Everything here is a pure function
of its arguments; randomness is always passed in as an explicit ``random.Random``.

Sizes are desk scale: moduli are expected to fit a 64-bit word.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .errors import ExhaustedSearch, InvalidParams, NoSolution, NotInvertible

DEFAULT_MODULUS_BOUND = 2**31
DEFAULT_ATTEMPTS = 1000
DEFAULT_GENERATOR_RETRIES = 64

# Deterministic for every n < 3.3e24, which covers all 64-bit inputs.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def gcd(a: int, b: int) -> int:
    if a < 0 or b < 0:
        raise ValueError("gcd arguments must be nonnegative")
    if a == 0 and b == 0:
        raise ValueError("gcd(0, 0) is undefined")
    return math.gcd(a, b)


def mod_exp(base: int, exp: int, m: int) -> int:
    """Return ``base**exp mod m``.

    Backed by the builtin three-argument ``pow``, which performs windowed
    square-and-multiply in O(log exp) multiplications.
    """
    if m < 2:
        raise ValueError(f"modulus must be >= 2, got {m}")
    if exp < 0:
        raise ValueError("exponent must be nonnegative; use mod_inverse")
    return pow(base, exp, m)


def mod_inverse(a: int, m: int) -> int:
    """Inverse of ``a`` modulo ``m`` via the extended Euclidean algorithm.

    Raises :class:`NotInvertible` when ``gcd(a, m) != 1``.
    """
    if m < 1:
        raise ValueError(f"modulus must be positive, got {m}")
    if m == 1:
        raise NotInvertible("no units modulo 1")
    old_r, r = a % m, m
    old_s, s = 1, 0
    while r:
        quot = old_r // r
        old_r, r = r, old_r - quot * r
        old_s, s = s, old_s - quot * s
    if old_r != 1:
        raise NotInvertible(f"{a} is not invertible modulo {m}")
    return old_s % m


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all 64-bit ``n``."""
    if n < 2:
        return False
    for w in _MR_WITNESSES:
        if n % w == 0:
            return n == w
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Trial-division factorization as ``((prime, multiplicity), ...)``."""
    if n < 1:
        raise ValueError("can only factor positive integers")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            k = 0
            while n % d == 0:
                n //= d
                k += 1
            out.append((d, k))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def element_order(g: int, p: int) -> int:
    """Multiplicative order of ``g`` modulo the prime ``p``."""
    g %= p
    if g == 0:
        raise ValueError("0 has no multiplicative order")
    r = p - 1
    for s, k in factorize(p - 1):
        for _ in range(k):
            if pow(g, r // s, p) == 1:
                r //= s
            else:
                break
    return r


def lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


@dataclass(frozen=True)
class Params:
    """Public parameters: prime ``p``, prime ``q | p-1`` and ``g`` of order ``q``."""

    p: int
    q: int
    g: int

    def __post_init__(self) -> None:
        p, q, g = self.p, self.q, self.g
        if not is_prime(p):
            raise InvalidParams(f"p={p} is not prime")
        if not is_prime(q):
            raise InvalidParams(f"q={q} is not prime")
        if (p - 1) % q:
            raise InvalidParams(f"q={q} does not divide p-1={p - 1}")
        if not 1 < g < p:
            raise InvalidParams(f"g={g} must satisfy 1 < g < p")
        if pow(g, q, p) != 1:
            raise InvalidParams(f"g={g} does not have order {q} modulo {p}")

    def subgroup(self) -> list[int]:
        """Elements ``g^k mod p`` for ``k = 0..q-1``, in exponent order."""
        return [pow(self.g, k, self.p) for k in range(self.q)]


@dataclass(frozen=True)
class GeneralParams:
    """Parameters for the hidden-index variant.

    ``g`` has exact order ``r`` modulo ``p`` (``r`` need not be prime) and the
    index set is a list of distinct units modulo ``r``.
    """

    p: int
    g: int
    r: int
    index_set: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "index_set", tuple(self.index_set))
        p, g, r = self.p, self.g, self.r
        if not is_prime(p):
            raise InvalidParams(f"p={p} is not prime")
        if not 1 <= g < p:
            raise InvalidParams(f"g={g} is not a residue in [1, p)")
        if element_order(g, p) != r:
            raise InvalidParams(f"g={g} does not have exact order {r} modulo {p}")
        if not self.index_set:
            raise InvalidParams("index set must be non-empty")
        if len(set(self.index_set)) != len(self.index_set):
            raise InvalidParams("index set entries must be distinct")
        for a in self.index_set:
            if not 1 <= a <= r - 1 or math.gcd(a, r) != 1:
                raise InvalidParams(f"index {a} is not a unit in [1, {r - 1}]")

    @classmethod
    def full(cls, params: Params) -> "GeneralParams":
        """Embed base-case parameters with the full index set ``1..q-1``."""
        return cls(params.p, params.g, params.q, tuple(range(1, params.q)))


def find_order_q_generator(
    p: int, q: int, rng: random.Random, retries: int = DEFAULT_GENERATOR_RETRIES
) -> int:
    """Random element of order exactly ``q`` by cofactor exponentiation."""
    if not is_prime(q) or (p - 1) % q:
        raise InvalidParams(f"q={q} must be a prime dividing p-1={p - 1}")
    cofactor = (p - 1) // q
    for _ in range(retries):
        g = pow(rng.randrange(1, p), cofactor, p)
        if g != 1:
            return g
    raise ExhaustedSearch(f"no order-{q} element found modulo {p} in {retries} tries")


def smallest_prime_modulus(q: int, bound: int) -> int | None:
    """Smallest prime ``p = h*q + 1 <= bound``, or None."""
    h = 1
    while h * q + 1 <= bound:
        if is_prime(h * q + 1):
            return h * q + 1
        h += 1
    return None


def generate_params(
    q_range: tuple[int, int],
    rng: random.Random,
    modulus_bound: int = DEFAULT_MODULUS_BOUND,
    attempts: int = DEFAULT_ATTEMPTS,
) -> Params:
    """Draw a prime ``q`` from the inclusive range, then the smallest prime
    ``p = hq + 1`` within ``modulus_bound`` and a random order-``q`` generator."""
    lo, hi = q_range
    if lo > hi:
        raise ValueError(f"empty q range {lo}:{hi}")
    lo = max(lo, 2)
    for _ in range(attempts):
        if lo > hi:
            break
        q = rng.randint(lo, hi)
        if not is_prime(q):
            continue
        p = smallest_prime_modulus(q, modulus_bound)
        if p is None:
            continue
        return Params(p, q, find_order_q_generator(p, q, rng))
    raise ExhaustedSearch(
        f"no valid (p, q, g) with q in [{q_range[0]}, {q_range[1]}] and p <= {modulus_bound}"
    )


def primes_up_to(n: int) -> list[int]:
    return [k for k in range(2, n + 1) if is_prime(k)]


def subgroup_generators(p: int, q: int) -> list[int]:
    """All elements of order exactly ``q`` modulo ``p``, ascending."""
    return [a for a in range(2, p) if pow(a, q, p) == 1 and a != 1]


def iter_params(p_max: int) -> Iterator[Params]:
    """Every valid ``(p, q, g)`` with ``p <= p_max``."""
    for p in primes_up_to(p_max):
        for q, _ in factorize(p - 1) if p > 2 else ():
            for g in subgroup_generators(p, q):
                yield Params(p, q, g)


def discrete_log(target: int, g: int, p: int, order: int) -> int:
    """Baby-step giant-step: the unique ``e in [0, order)`` with ``g^e = target``.

    ``g`` must have exactly ``order`` modulo ``p``. Raises :class:`NoSolution`
    when the target lies outside ``<g>``.
    """
    if order < 1:
        raise ValueError("order must be positive")
    target %= p
    if target == 0:
        raise NoSolution("0 is not a unit")
    m = math.isqrt(order - 1) + 1
    baby: dict[int, int] = {}
    cur = 1
    for j in range(m):
        baby.setdefault(cur, j)
        cur = cur * g % p
    giant = pow(mod_inverse(g, p), m, p)
    gamma = target
    for i in range(m):
        j = baby.get(gamma)
        if j is not None:
            e = i * m + j
            if e < order:
                return e
        gamma = gamma * giant % p
    raise NoSolution(f"{target} is not in the subgroup generated by {g} modulo {p}")
