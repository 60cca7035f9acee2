"""Big-integer helpers: modular exponentiation/inversion and prime generation.

gmpy2 is used when importable (an order of magnitude faster at 2048-bit
sizes); the pure-Python fallback is exact and adequate for test-sized keys.
"""

from __future__ import annotations

import math
import random

try:
    from gmpy2 import invert as _gmpy_invert, powmod as _gmpy_powmod

    HAVE_GMPY2 = True

    def powmod(base: int, exponent: int, modulus: int) -> int:
        return int(_gmpy_powmod(base, exponent, modulus))

    def invert(a: int, modulus: int) -> int:
        try:
            return int(_gmpy_invert(a, modulus))
        except ZeroDivisionError:
            raise ValueError("not invertible") from None

except ImportError:  # pragma: no cover - exercised only without gmpy2
    HAVE_GMPY2 = False

    def powmod(base: int, exponent: int, modulus: int) -> int:
        return pow(base, exponent, modulus)

    def invert(a: int, modulus: int) -> int:
        g, x, _ = _extended_gcd(a % modulus, modulus)
        if g != 1:
            raise ValueError("not invertible")
        return x % modulus


def _extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def lcm(a: int, b: int) -> int:
    return math.lcm(a, b)


# Deterministic witnesses tried first; random witnesses fill up the round
# budget for larger candidates.
_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113]


def is_probable_prime(n: int, rng: random.Random, rounds: int = 64) -> bool:
    """Miller-Rabin with fixed small bases plus rng-drawn witnesses."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False

    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1

    def witness_passes(a: int) -> bool:
        x = powmod(a, d, n)
        if x in (1, n - 1):
            return True
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                return True
        return False

    for a in _SMALL_PRIMES[: min(rounds, len(_SMALL_PRIMES))]:
        if not witness_passes(a):
            return False
    for _ in range(max(0, rounds - len(_SMALL_PRIMES))):
        a = rng.randrange(2, n - 1)
        if not witness_passes(a):
            return False
    return True


def generate_prime(bits: int, rng: random.Random, rounds: int = 64,
                   max_attempts: int = 100_000) -> int:
    """Random probable prime with exactly `bits` bits and the top two bits set.

    Setting the two most significant bits guarantees a product of two such
    primes has the full 2*bits bit length, so no retry loop on the modulus
    size is needed.
    """
    if bits < 8:
        raise ValueError("prime size below 8 bits is not supported")
    for _ in range(max_attempts):
        candidate = rng.getrandbits(bits)
        candidate |= (1 << (bits - 1)) | (1 << (bits - 2)) | 1
        if is_probable_prime(candidate, rng, rounds):
            return candidate
    raise RuntimeError(f"no {bits}-bit prime found in {max_attempts} attempts")
