"""Signed floats in the integer plaintext domain.

The codec stores value = mantissa * 16^exponent with three bands in [0, n):
positives below n/3, negatives above 2n/3, and a middle band that only a
homomorphic overflow can reach -- decoding it raises instead of returning
a silently wrong number."""

import random

from hevoice import encoding, paillier
from hevoice.encoding import EncodedNumber
from hevoice.exceptions import OverflowBandError

rng = random.Random(3)
pk, sk = paillier.keygen(256, seed=3)

for x in (2.5, -1.0, 0.1, 1024.0):
    enc = encoding.encode(x, pk)
    band = "positive" if enc.mantissa < pk.n // 3 else "negative"
    print(f"encode({x:>8}) -> mantissa {str(enc.mantissa)[:24]:<24}"
          f" exponent {enc.exponent:>3}  [{band} band]"
          f"  decode -> {encoding.decode(enc, pk)}")

# homomorphic arithmetic on encoded values is exact integer arithmetic on
# mantissae; exponents align automatically
a = encoding.encrypt_value(pk, 1.0, rng=rng)    # mantissa 1,  exponent  0
b = encoding.encrypt_value(pk, 0.5, rng=rng)    # mantissa 8,  exponent -1
total = encoding.add_encrypted(a, b, pk)
print(f"\nenc(1.0) + enc(0.5) decrypts to {encoding.decrypt_value(sk, pk, total)}")

scaled = encoding.mul_plain(encoding.encrypt_value(pk, 2.5, rng=rng), -2, pk)
print(f"enc(2.5) * -2       decrypts to {encoding.decrypt_value(sk, pk, scaled)}")

# the middle band flags overflows from previous homomorphic operations
try:
    encoding.decode(EncodedNumber(pk.n // 2, 0, pk.fingerprint), pk)
except OverflowBandError as exc:
    print(f"\nmiddle-band mantissa raises: {type(exc).__name__}")
