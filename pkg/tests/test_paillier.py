"""Cryptosystem unit tests: hand-checkable fixtures plus property checks.

The p=5, q=7 fixtures are verified against direct modular arithmetic
computed inline (the oracle), never against remembered constants.
"""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hevoice import paillier
from hevoice.exceptions import (
    CiphertextArithmeticError,
    FileFormatError,
    KeyMismatchError,
    ParameterError,
    PlaintextRangeError,
)


@pytest.fixture(scope="module")
def toy():
    """p=5, q=7, g=36 keypair: every value recomputable by hand."""
    return paillier.keypair_from_primes(5, 7, g=36)


class TestKeygen:
    def test_toy_modulus_and_lambda(self, toy):
        pk, sk = toy
        assert pk.n == 35
        assert sk.lam == math.lcm(4, 6) == 12

    def test_toy_mu_against_modular_oracle(self, toy):
        pk, sk = toy
        # oracle: mu = (L(g^lam mod n^2))^-1 mod n via pow(-1)
        rho = (pow(36, sk.lam, 35 * 35) - 1) // 35
        assert rho == 12
        assert sk.mu == pow(rho, -1, 35) == 3
        assert sk.mu * rho % pk.n == 1

    def test_requested_bit_length_is_exact(self):
        for bits in (64, 65, 128, 255):
            pk, _ = paillier.keygen(bits, seed=bits)
            assert pk.bit_length == bits == pk.n.bit_length()

    @pytest.mark.slow
    def test_2048_bit_modulus(self):
        pk, _ = paillier.keygen(2048, seed=7)
        assert pk.n.bit_length() == 2048

    def test_structure_invariants(self):
        pk, sk = paillier.keygen(128, seed=3)
        assert math.gcd(sk.p * sk.q, (sk.p - 1) * (sk.q - 1)) == 1
        assert sk.lam == math.lcm(sk.p - 1, sk.q - 1)
        rho = (pow(pk.g, sk.lam, pk.n_squared) - 1) // pk.n
        assert sk.mu * rho % pk.n == 1

    def test_default_generator_is_n_plus_one(self):
        pk, _ = paillier.keygen(64, seed=11)
        assert pk.g == pk.n + 1

    def test_too_small_bit_length_rejected(self):
        with pytest.raises(ParameterError):
            paillier.keygen(8)

    def test_seed_makes_keygen_deterministic(self):
        pk_a, sk_a = paillier.keygen(128, seed=99)
        pk_b, sk_b = paillier.keygen(128, seed=99)
        assert (pk_a.n, sk_a.p, sk_a.q) == (pk_b.n, sk_b.p, sk_b.q)


class TestEncryptDecrypt:
    def test_zero_with_unit_obfuscator(self, toy):
        pk, _ = toy
        assert paillier.encrypt(pk, 0, s=1).value == 1

    def test_known_ciphertext_against_oracle(self, toy):
        pk, sk = toy
        c = paillier.encrypt(pk, 3, s=2)
        assert c.value == pow(36, 3, 1225) * pow(2, 35, 1225) % 1225
        assert paillier.decrypt(sk, pk, c) == 3

    def test_distinct_obfuscators_distinct_ciphertexts(self, toy):
        pk, _ = toy
        assert paillier.encrypt(pk, 9, s=2).value != paillier.encrypt(pk, 9, s=3).value

    def test_roundtrip_many_random_plaintexts(self, tiny_keypair, rng):
        pk, sk = tiny_keypair
        for _ in range(1000):
            m = rng.randrange(pk.n)
            assert paillier.decrypt(sk, pk, paillier.encrypt(pk, m, rng=rng)) == m

    def test_zero_roundtrip(self, tiny_keypair, rng):
        pk, sk = tiny_keypair
        assert paillier.decrypt(sk, pk, paillier.encrypt(pk, 0, rng=rng)) == 0

    def test_out_of_range_plaintext(self, tiny_keypair):
        pk, _ = tiny_keypair
        with pytest.raises(PlaintextRangeError):
            paillier.encrypt(pk, pk.n)
        with pytest.raises(PlaintextRangeError):
            paillier.encrypt(pk, -1)

    def test_bad_obfuscator(self, toy):
        pk, _ = toy
        with pytest.raises(ParameterError):
            paillier.encrypt(pk, 1, s=5)  # gcd(5, 35) != 1

    def test_key_mismatch_rejected(self, tiny_keypair, small_keypair, rng):
        pk_a, _ = tiny_keypair
        pk_b, sk_b = small_keypair
        c = paillier.encrypt(pk_a, 5, rng=rng)
        with pytest.raises(KeyMismatchError):
            paillier.decrypt(sk_b, pk_b, c)


class TestHomomorphisms:
    def test_small_sum(self, tiny_keypair, rng):
        pk, sk = tiny_keypair
        c = paillier.add_cipher(pk, paillier.encrypt(pk, 2, rng=rng),
                                paillier.encrypt(pk, 3, rng=rng))
        assert paillier.decrypt(sk, pk, c) == 5

    def test_additive_identity(self, tiny_keypair, rng):
        pk, sk = tiny_keypair
        m = rng.randrange(pk.n)
        c = paillier.add_cipher(pk, paillier.encrypt(pk, m, rng=rng),
                                paillier.encrypt(pk, 0, rng=rng))
        assert paillier.decrypt(sk, pk, c) == m

    def test_wraparound_matches_mod_n(self, tiny_keypair, rng):
        pk, sk = tiny_keypair
        c = paillier.add_cipher(pk, paillier.encrypt(pk, pk.n - 1, rng=rng),
                                paillier.encrypt(pk, 1, rng=rng))
        assert paillier.decrypt(sk, pk, c) == (pk.n - 1 + 1) % pk.n == 0

    def test_small_scalar_product(self, tiny_keypair, rng):
        pk, sk = tiny_keypair
        c = paillier.mul_const(pk, paillier.encrypt(pk, 4, rng=rng), 3)
        assert paillier.decrypt(sk, pk, c) == 12

    def test_unit_exponent(self, tiny_keypair, rng):
        pk, sk = tiny_keypair
        m = rng.randrange(pk.n)
        c = paillier.mul_const(pk, paillier.encrypt(pk, m, rng=rng), 1)
        assert paillier.decrypt(sk, pk, c) == m

    def test_negative_constant_congruence(self, tiny_keypair, rng):
        pk, sk = tiny_keypair
        c = paillier.mul_const(pk, paillier.encrypt(pk, 2, rng=rng), -3)
        assert paillier.decrypt(sk, pk, c) == -6 % pk.n == pk.n - 6

    def test_non_invertible_ciphertext_rejected(self, tiny_keypair):
        pk, _ = tiny_keypair
        from tests.conftest import P64
        bogus = paillier.Ciphertext(value=P64, key_id=pk.fingerprint)
        with pytest.raises(CiphertextArithmeticError):
            paillier.mul_const(pk, bogus, -2)

    def test_mixed_keys_rejected(self, tiny_keypair, small_keypair, rng):
        pk_a, _ = tiny_keypair
        pk_b, _ = small_keypair
        c_a = paillier.encrypt(pk_a, 1, rng=rng)
        c_b = paillier.encrypt(pk_b, 1, rng=rng)
        with pytest.raises(KeyMismatchError):
            paillier.add_cipher(pk_a, c_a, c_b)


class TestRerandomize:
    def test_plaintext_preserved(self, tiny_keypair, rng):
        pk, sk = tiny_keypair
        c = paillier.encrypt(pk, 7, rng=rng)
        assert paillier.decrypt(sk, pk, paillier.rerandomize(pk, c, rng=rng)) == 7

    def test_value_changes(self, tiny_keypair, rng):
        pk, _ = tiny_keypair
        c = paillier.encrypt(pk, 7, rng=rng)
        fresh = {paillier.rerandomize(pk, c, rng=rng).value for _ in range(100)}
        assert c.value not in fresh
        assert len(fresh) == 100

    def test_restores_obfuscation_after_zero_exponent(self, tiny_keypair, rng):
        pk, sk = tiny_keypair
        flat = paillier.mul_const(pk, paillier.encrypt(pk, 9, rng=rng), 0)
        assert flat.value == 1 and not flat.obfuscated
        fresh = paillier.rerandomize(pk, flat, rng=rng)
        assert fresh.obfuscated
        assert paillier.decrypt(sk, pk, fresh) == 0


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(m1=st.integers(min_value=0), m2=st.integers(min_value=0),
           data=st.data())
    def test_homomorphic_identities(self, tiny_keypair, m1, m2, data):
        pk, sk = tiny_keypair
        m1, m2 = m1 % pk.n, m2 % pk.n
        l = data.draw(st.integers(min_value=-(2 ** 64), max_value=2 ** 64))
        rng = random.Random(data.draw(st.integers(0, 2 ** 32)))
        c1 = paillier.encrypt(pk, m1, rng=rng)
        c2 = paillier.encrypt(pk, m2, rng=rng)
        assert paillier.decrypt(sk, pk, paillier.add_cipher(pk, c1, c2)) \
            == (m1 + m2) % pk.n
        assert paillier.decrypt(sk, pk, paillier.mul_const(pk, c1, l)) \
            == m1 * l % pk.n

    def test_probabilistic_encryption_no_collisions(self, tiny_keypair, rng):
        pk, _ = tiny_keypair
        values = {paillier.encrypt(pk, 42, rng=rng).value for _ in range(100)}
        assert len(values) == 100


class TestPurePythonFallback:
    """The gmpy2-free code path must agree with the accelerated one."""

    @pytest.fixture()
    def pure_mathutil(self, monkeypatch):
        from hevoice import _mathutil

        def pure_powmod(base, exponent, modulus):
            return pow(base, exponent, modulus)

        def pure_invert(a, modulus):
            g, x, _ = _mathutil._extended_gcd(a % modulus, modulus)
            if g != 1:
                raise ValueError("not invertible")
            return x % modulus

        monkeypatch.setattr(_mathutil, "powmod", pure_powmod)
        monkeypatch.setattr(_mathutil, "invert", pure_invert)

    def test_roundtrip_and_negative_scalar(self, pure_mathutil, rng):
        pk, sk = paillier.keygen(128, seed=55)
        for _ in range(20):
            m = rng.randrange(pk.n)
            c = paillier.encrypt(pk, m, rng=rng)
            assert paillier.decrypt(sk, pk, c) == m
            neg = paillier.mul_const(pk, c, -3)  # exercises the invert path
            assert paillier.decrypt(sk, pk, neg) == m * -3 % pk.n

    def test_same_keys_as_default_path(self, monkeypatch):
        from hevoice import _mathutil

        pk_fast, sk_fast = paillier.keygen(96, seed=77)
        monkeypatch.setattr(_mathutil, "powmod",
                            lambda b, e, m: pow(b, e, m))
        pk_pure, sk_pure = paillier.keygen(96, seed=77)
        assert (pk_pure.n, sk_pure.lam, sk_pure.mu) \
            == (pk_fast.n, sk_fast.lam, sk_fast.mu)


class TestKeyFiles:
    def test_roundtrip(self, tmp_path, tiny_keypair):
        pk, sk = tiny_keypair
        paillier.save_keypair(pk, sk, tmp_path / "pub.json", tmp_path / "sec.json")
        pk2 = paillier.load_public_key(tmp_path / "pub.json")
        pk3, sk3 = paillier.load_secret_key(tmp_path / "sec.json")
        assert (pk2.n, pk2.g) == (pk.n, pk.g)
        assert (pk3.fingerprint, sk3.lam, sk3.mu, sk3.p, sk3.q) \
            == (pk.fingerprint, sk.lam, sk.mu, sk.p, sk.q)

    def test_insecure_flag_for_small_keys(self, tiny_keypair):
        pk, sk = tiny_keypair
        assert paillier.public_key_to_dict(pk)["insecure"] is True
        assert paillier.secret_key_to_dict(sk, pk)["insecure"] is True

    def test_hex_fields_are_lowercase(self, tiny_keypair):
        pk, _ = tiny_keypair
        doc = paillier.public_key_to_dict(pk)
        assert doc["n"] == f"{pk.n:x}"

    def test_unknown_version_rejected(self, tiny_keypair):
        pk, _ = tiny_keypair
        doc = paillier.public_key_to_dict(pk)
        doc["version"] = 99
        with pytest.raises(FileFormatError):
            paillier.public_key_from_dict(doc)

    def test_kind_mixup_rejected(self, tiny_keypair):
        pk, sk = tiny_keypair
        with pytest.raises(FileFormatError):
            paillier.secret_key_from_dict(paillier.public_key_to_dict(pk))
