"""Signed floats as nonnegative integers in the Paillier plaintext domain.

A value is stored as mantissa * 16^exponent with the mantissa reduced into
one of three bands of [0, n):

* [0, floor(n/3))          positive values, mantissa is the value itself
* [n - floor(n/3), n)      negative values, mantissa is value + n
* the middle band          never produced by encoding; decoding a mantissa
                           there signals that a homomorphic result overflowed

The exponent stays plaintext next to the ciphertext; homomorphic addition
first scales the higher-exponent operand's mantissa by a power of 16 so both
addends share an exponent.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import paillier
from .counters import OpCounter
from .exceptions import (
    EncodingDomainError,
    KeyMismatchError,
    MagnitudeError,
    OverflowBandError,
    PrecisionOverflowError,
)
from .paillier import Ciphertext, PaillierPublicKey, PaillierSecretKey

BASE = 16
LOG2_BASE = 4
# Exponent floor: 16^-14 granularity keeps 53-bit double significands exact
# for |x| < 16^2 and bounds mantissa growth in long accumulations.
DEFAULT_MIN_EXPONENT = -14
# Largest base-16 alignment shift before raising instead of silently
# blowing up the mantissa; generous for feature dimensions up to 1024.
MAX_ALIGNMENT_SHIFT = 64

_FLOAT_MANTISSA_BITS = 53


@dataclass(frozen=True)
class EncodedNumber:
    """Integer mantissa in the sign bands plus a plaintext base-16 exponent."""

    mantissa: int
    exponent: int
    key_ref: str


@dataclass(frozen=True)
class EncryptedNumber:
    """Ciphertext of a mantissa with its auxiliary plaintext exponent."""

    ciphertext: Ciphertext
    exponent: int

    @property
    def key_ref(self) -> str:
        return self.ciphertext.key_id


def _round_half_even(numerator: int, shift_bits: int) -> int:
    """Round numerator / 2^shift_bits to the nearest integer, ties to even."""
    if shift_bits <= 0:
        return numerator << -shift_bits
    q, r = divmod(numerator, 1 << shift_bits)
    half = 1 << (shift_bits - 1)
    if r > half or (r == half and q & 1):
        q += 1
    return q


def encode(x: float | int, pk: PaillierPublicKey,
           min_exponent: int = DEFAULT_MIN_EXPONENT) -> EncodedNumber:
    """Encode a real value exactly when its significand fits the band.

    The exponent is the largest power of 16 that keeps the mantissa
    integral, floored at `min_exponent`; below the floor the mantissa is
    rounded half-to-even.
    """
    if isinstance(x, int):
        sig, t = abs(x), 0
        negative = x < 0
    else:
        if not math.isfinite(x):
            raise EncodingDomainError(f"cannot encode non-finite value {x!r}")
        negative = x < 0
        frac, exp2 = math.frexp(abs(x))
        sig = int(frac * (1 << _FLOAT_MANTISSA_BITS))
        t = exp2 - _FLOAT_MANTISSA_BITS
    if sig == 0:
        return EncodedNumber(0, 0, pk.fingerprint)

    trailing = (sig & -sig).bit_length() - 1
    sig >>= trailing
    t += trailing

    exponent = t >> 2  # floor(t / 4), also for negative t
    if exponent < min_exponent:
        exponent = min_exponent
    mantissa = _round_half_even(sig, 4 * exponent - t)

    if mantissa >= pk.max_positive:
        raise MagnitudeError(
            f"|mantissa| {mantissa} >= n/3; value {x!r} exceeds the sign band")
    if mantissa and negative:
        mantissa = pk.n - mantissa
    return EncodedNumber(mantissa, exponent, pk.fingerprint)


def signed_mantissa(e: EncodedNumber, pk: PaillierPublicKey) -> int:
    """Map the banded mantissa back to a signed integer; middle band raises."""
    m = e.mantissa
    if m < pk.max_positive:
        return m
    if m >= pk.n - pk.max_positive:
        return m - pk.n
    raise OverflowBandError(
        f"mantissa {m} lies in the overflow band of modulus {pk.n}")


def decode(e: EncodedNumber, pk: PaillierPublicKey) -> float:
    """Real value of an encoded number; overflow band raises."""
    if e.key_ref != pk.fingerprint:
        raise KeyMismatchError("encoded number belongs to a different key")
    signed = signed_mantissa(e, pk)
    try:
        return math.ldexp(signed, LOG2_BASE * e.exponent)
    except OverflowError as exc:
        raise MagnitudeError("decoded value exceeds the float range") from exc


def _require_same_key(pk: PaillierPublicKey, *nums: EncryptedNumber) -> None:
    for a in nums:
        if a.key_ref != pk.fingerprint:
            raise KeyMismatchError(
                f"encrypted number under key {a.key_ref} used with {pk.fingerprint}")


def encrypt_value(pk: PaillierPublicKey, x: float | int,
                  rng: random.Random | None = None,
                  counter: OpCounter | None = None,
                  min_exponent: int = DEFAULT_MIN_EXPONENT) -> EncryptedNumber:
    """Encode then encrypt; one counted encryption."""
    enc = encode(x, pk, min_exponent)
    if counter is not None:
        counter.encryptions += 1
    return EncryptedNumber(paillier.encrypt(pk, enc.mantissa, rng=rng),
                           enc.exponent)


def decrypt_value(sk: PaillierSecretKey, pk: PaillierPublicKey,
                  a: EncryptedNumber,
                  counter: OpCounter | None = None) -> float:
    """Decrypt and decode; raises OverflowBandError on out-of-band results."""
    _require_same_key(pk, a)
    if counter is not None:
        counter.decryptions += 1
    mantissa = paillier.decrypt(sk, pk, a.ciphertext)
    return decode(EncodedNumber(mantissa, a.exponent, pk.fingerprint), pk)


def _scale_down_to(a: EncryptedNumber, target_exponent: int,
                   pk: PaillierPublicKey,
                   counter: OpCounter | None) -> EncryptedNumber:
    delta = a.exponent - target_exponent
    if delta == 0:
        return a
    if delta > MAX_ALIGNMENT_SHIFT:
        raise PrecisionOverflowError(
            f"alignment shift {delta} exceeds cap {MAX_ALIGNMENT_SHIFT}")
    if counter is not None:
        counter.alignments += 1
    scaled = paillier.mul_const(pk, a.ciphertext, BASE ** delta)
    return EncryptedNumber(scaled, target_exponent)


def align_exponents(a: EncryptedNumber, b: EncryptedNumber,
                    pk: PaillierPublicKey,
                    counter: OpCounter | None = None
                    ) -> tuple[EncryptedNumber, EncryptedNumber]:
    """Bring both operands to the smaller exponent without changing values."""
    _require_same_key(pk, a, b)
    target = min(a.exponent, b.exponent)
    return (_scale_down_to(a, target, pk, counter),
            _scale_down_to(b, target, pk, counter))


def add_encrypted(a: EncryptedNumber, b: EncryptedNumber,
                  pk: PaillierPublicKey,
                  counter: OpCounter | None = None) -> EncryptedNumber:
    """Homomorphic sum; one counted ciphertext product (plus alignment)."""
    a, b = align_exponents(a, b, pk, counter)
    if counter is not None:
        counter.ciphertext_products += 1
    return EncryptedNumber(paillier.add_cipher(pk, a.ciphertext, b.ciphertext),
                           a.exponent)


def mul_plain(a: EncryptedNumber, k: float | int, pk: PaillierPublicKey,
              counter: OpCounter | None = None,
              min_exponent: int = DEFAULT_MIN_EXPONENT) -> EncryptedNumber:
    """Homomorphic product with a plaintext factor; one counted exponentiation.

    The factor is encoded first and the ciphertext is exponentiated by the
    small signed mantissa (negative factors go through the modular-inverse
    path), keeping the modular exponent far below n.
    """
    _require_same_key(pk, a)
    enc_k = encode(k, pk, min_exponent)
    factor = signed_mantissa(enc_k, pk)
    if counter is not None:
        counter.exponentiations += 1
    scaled = paillier.mul_const(pk, a.ciphertext, factor)
    return EncryptedNumber(scaled, a.exponent + enc_k.exponent)


# serialized form: (hex ciphertext, decimal exponent, key fingerprint)

def encrypted_number_to_dict(a: EncryptedNumber) -> dict:
    return {"c": f"{a.ciphertext.value:x}", "e": a.exponent, "k": a.key_ref}


def encrypted_number_from_dict(doc: dict) -> EncryptedNumber:
    return EncryptedNumber(
        Ciphertext(value=int(doc["c"], 16), key_id=doc["k"]), int(doc["e"]))
