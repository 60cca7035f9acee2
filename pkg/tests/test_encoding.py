"""Float-codec tests: band semantics, exact roundtrips, homomorphic arithmetic.

Dyadic fixtures (significands of a few bits) are exact in both the encoded
domain and float64, so homomorphic results must match plaintext *exactly*.
"""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hevoice import encoding, paillier
from hevoice.counters import OpCounter
from hevoice.encoding import EncodedNumber
from hevoice.exceptions import (
    EncodingDomainError,
    MagnitudeError,
    OverflowBandError,
    PrecisionOverflowError,
)


@pytest.fixture(scope="module")
def toy():
    return paillier.keypair_from_primes(5, 7)  # n = 35: bands [0,11) / [24,35)


def dyadic_floats(min_exp=-56, max_exp=40):
    """Floats sig * 2^e that the codec must encode exactly."""
    return st.builds(
        lambda sig, e, neg: -math.ldexp(sig, e) if neg else math.ldexp(sig, e),
        st.integers(1, 2 ** 53 - 1), st.integers(min_exp, max_exp), st.booleans())


class TestEncode:
    def test_zero_convention(self, small_keypair):
        pk, _ = small_keypair
        enc = encoding.encode(0.0, pk)
        assert (enc.mantissa, enc.exponent) == (0, 0)

    def test_two_and_a_half(self, small_keypair):
        pk, _ = small_keypair
        enc = encoding.encode(2.5, pk)
        assert (enc.mantissa, enc.exponent) == (40, -1)
        assert 40 * 16.0 ** -1 == 2.5

    def test_minus_one_lands_in_negative_band(self, small_keypair):
        pk, _ = small_keypair
        enc = encoding.encode(-1.0, pk)
        assert (enc.mantissa, enc.exponent) == (pk.n - 1, 0)
        assert enc.mantissa >= pk.n - pk.n // 3

    def test_exponent_is_largest_integral_power(self, small_keypair):
        pk, _ = small_keypair
        assert encoding.encode(16.0, pk).exponent == 1
        assert encoding.encode(0.5, pk).mantissa == 8
        assert encoding.encode(0.5, pk).exponent == -1

    def test_non_finite_rejected(self, small_keypair):
        pk, _ = small_keypair
        for bad in (float("nan"), float("inf"), float("-inf")):
            with pytest.raises(EncodingDomainError):
                encoding.encode(bad, pk)

    def test_magnitude_error_when_band_exceeded(self, toy, small_keypair):
        toy_pk, _ = toy
        with pytest.raises(MagnitudeError):
            encoding.encode(12, toy_pk)  # floor(35/3) = 11
        pk, _ = small_keypair
        with pytest.raises(MagnitudeError):
            encoding.encode((1 << 300) + 1, pk)

    def test_precision_floor_rounds_tiny_values(self, small_keypair):
        pk, _ = small_keypair
        enc = encoding.encode(1e-30, pk)
        assert enc.exponent == encoding.DEFAULT_MIN_EXPONENT
        assert enc.mantissa == 0  # below 16^-14 granularity


class TestDecode:
    def test_roundtrip_exact_values(self, small_keypair):
        pk, _ = small_keypair
        for x in (0.0, 1.0, -1.0, 2.5, -3.25):
            assert encoding.decode(encoding.encode(x, pk), pk) == x

    def test_negative_band_oracle(self, small_keypair):
        pk, _ = small_keypair
        enc = EncodedNumber(pk.n - 16, 0, pk.fingerprint)
        assert encoding.decode(enc, pk) == -16.0

    def test_middle_band_raises(self, small_keypair):
        pk, _ = small_keypair
        for exponent in (-3, 0, 5):
            with pytest.raises(OverflowBandError):
                encoding.decode(EncodedNumber(pk.n // 2, exponent, pk.fingerprint), pk)

    def test_band_edges(self, toy):
        pk, _ = toy  # n = 35
        assert encoding.decode(EncodedNumber(10, 0, pk.fingerprint), pk) == 10.0
        with pytest.raises(OverflowBandError):
            encoding.decode(EncodedNumber(11, 0, pk.fingerprint), pk)
        with pytest.raises(OverflowBandError):
            encoding.decode(EncodedNumber(23, 0, pk.fingerprint), pk)
        assert encoding.decode(EncodedNumber(24, 0, pk.fingerprint), pk) == -11.0


class TestAlign:
    def test_equal_exponents_unchanged(self, small_keypair, rng):
        pk, _ = small_keypair
        a = encoding.encrypt_value(pk, 3.0, rng=rng)
        b = encoding.encrypt_value(pk, 5.0, rng=rng)
        a2, b2 = encoding.align_exponents(a, b, pk)
        assert a2.ciphertext.value == a.ciphertext.value
        assert b2.ciphertext.value == b.ciphertext.value

    def test_alignment_scales_mantissa_exactly(self, small_keypair, rng):
        pk, sk = small_keypair
        one = encoding.encrypt_value(pk, 1.0, rng=rng)     # mantissa 1, exp 0
        half = encoding.encrypt_value(pk, 0.5, rng=rng)    # mantissa 8, exp -1
        a2, b2 = encoding.align_exponents(one, half, pk)
        assert a2.exponent == b2.exponent == -1
        assert paillier.decrypt(sk, pk, a2.ciphertext) == 16
        total = encoding.add_encrypted(one, half, pk)
        assert encoding.decrypt_value(sk, pk, total) == 1.5

    def test_alignment_preserves_value(self, small_keypair, rng):
        pk, sk = small_keypair
        for _ in range(25):
            x = rng.choice([0.75, -12.5, 1024.0, -3e-4, 0.1])
            expected = encoding.decode(encoding.encode(x, pk), pk)
            a = encoding.encrypt_value(pk, x, rng=rng)
            b = encoding.encrypt_value(pk, 2.0 ** rng.randrange(-20, 20), rng=rng)
            a2, _ = encoding.align_exponents(a, b, pk)
            assert encoding.decrypt_value(sk, pk, a2) == expected

    def test_cap_exceeded_raises(self, small_keypair, rng):
        pk, _ = small_keypair
        wide = encoding.EncryptedNumber(
            encoding.encrypt_value(pk, 1.0, rng=rng).ciphertext,
            encoding.MAX_ALIGNMENT_SHIFT + 1)
        narrow = encoding.encrypt_value(pk, 1.0, rng=rng)
        with pytest.raises(PrecisionOverflowError):
            encoding.align_exponents(wide, narrow, pk)


class TestAddEncrypted:
    def test_additive_inverse(self, small_keypair, rng):
        pk, sk = small_keypair
        total = encoding.add_encrypted(encoding.encrypt_value(pk, 2.5, rng=rng),
                                       encoding.encrypt_value(pk, -2.5, rng=rng), pk)
        assert encoding.decrypt_value(sk, pk, total) == 0.0

    def test_hundred_random_dyadic_sums_exact(self, small_keypair, rng):
        pk, sk = small_keypair
        # same binary scale, bounded significands: float64 sums stay exact
        values = [rng.randrange(-2 ** 40, 2 ** 40) / 2 ** 10 for _ in range(100)]
        acc = encoding.encrypt_value(pk, values[0], rng=rng)
        for v in values[1:]:
            acc = encoding.add_encrypted(acc, encoding.encrypt_value(pk, v, rng=rng), pk)
        assert encoding.decrypt_value(sk, pk, acc) == sum(values)

    def test_overflow_band_detected_downstream(self, toy, rng):
        pk, sk = toy  # positive band [0, 11)
        a = encoding.encrypt_value(pk, 6, rng=rng)
        b = encoding.encrypt_value(pk, 7, rng=rng)
        with pytest.raises(OverflowBandError):
            encoding.decrypt_value(sk, pk, encoding.add_encrypted(a, b, pk))


class TestMulPlain:
    def test_identity_factor(self, small_keypair, rng):
        pk, sk = small_keypair
        a = encoding.encrypt_value(pk, -7.25, rng=rng)
        assert encoding.decrypt_value(sk, pk, encoding.mul_plain(a, 1, pk)) == -7.25

    def test_negative_factor(self, small_keypair, rng):
        pk, sk = small_keypair
        a = encoding.encrypt_value(pk, 2.5, rng=rng)
        assert encoding.decrypt_value(sk, pk, encoding.mul_plain(a, -2, pk)) == -5.0

    def test_zero_plaintext_absorbs(self, small_keypair, rng):
        pk, sk = small_keypair
        a = encoding.encrypt_value(pk, 0.0, rng=rng)
        for k in (3, -11.5, 0.25):
            assert encoding.decrypt_value(sk, pk, encoding.mul_plain(a, k, pk)) == 0.0

    def test_counter_tallies(self, small_keypair, rng):
        pk, sk = small_keypair
        counter = OpCounter()
        a = encoding.encrypt_value(pk, 1.5, rng=rng, counter=counter)
        b = encoding.encrypt_value(pk, 2.0, rng=rng, counter=counter)
        c = encoding.add_encrypted(a, b, pk, counter=counter)
        c = encoding.mul_plain(c, 3.0, pk, counter=counter)
        encoding.decrypt_value(sk, pk, c, counter=counter)
        assert counter.encryptions == 2
        assert counter.ciphertext_products == 1
        assert counter.exponentiations == 1
        assert counter.decryptions == 1
        assert counter.alignments == 1  # 1.5 (exp -1) vs 2.0 (exp 0)


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(x=dyadic_floats())
    def test_roundtrip_exactness(self, small_keypair, x):
        pk, _ = small_keypair
        assert encoding.decode(encoding.encode(x, pk), pk) == x

    @settings(max_examples=40, deadline=None)
    @given(ia=st.integers(-2 ** 50, 2 ** 50), ib=st.integers(-2 ** 50, 2 ** 50),
           e=st.integers(-12, 12), k=st.integers(-2 ** 24, 2 ** 24),
           seed=st.integers(0, 2 ** 32))
    def test_homomorphic_sum_and_product_exact(self, small_keypair,
                                               ia, ib, e, k, seed):
        pk, sk = small_keypair
        rng = random.Random(seed)
        # same binary scale: the float64 sum is exact, so equality is exact
        a, b = math.ldexp(ia, e), math.ldexp(ib, e)
        enc_a = encoding.encrypt_value(pk, a, rng=rng)
        enc_b = encoding.encrypt_value(pk, b, rng=rng)
        assert encoding.decrypt_value(
            sk, pk, encoding.add_encrypted(enc_a, enc_b, pk)) == a + b
        # 25-bit significand times 24-bit factor: product exact in float64
        a_small = math.ldexp(ia >> 25, e)
        enc_small = encoding.encrypt_value(pk, a_small, rng=rng)
        assert encoding.decrypt_value(
            sk, pk, encoding.mul_plain(enc_small, k, pk)) == a_small * k

    @settings(max_examples=150, deadline=None)
    @given(x=dyadic_floats())
    def test_sign_band_partition(self, small_keypair, x):
        pk, _ = small_keypair
        enc = encoding.encode(x, pk)
        assert enc.mantissa < pk.n // 3 or enc.mantissa >= pk.n - pk.n // 3


class TestSerialization:
    def test_roundtrip(self, small_keypair, rng):
        pk, sk = small_keypair
        a = encoding.encrypt_value(pk, -42.75, rng=rng)
        doc = encoding.encrypted_number_to_dict(a)
        assert set(doc) == {"c", "e", "k"}
        b = encoding.encrypted_number_from_dict(doc)
        assert encoding.decrypt_value(sk, pk, b) == -42.75
