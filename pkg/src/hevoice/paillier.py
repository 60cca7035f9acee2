"""Additively homomorphic public-key cryptosystem over Z_n.

Implements probabilistic encryption c = g^m * s^n mod n^2 with the standard
generator choice g = n + 1 (so g^m mod n^2 = 1 + m*n, one multiplication
instead of an exponentiation), decryption via L(c^lambda mod n^2) * mu mod n
with L(x) = (x - 1) / n, and the two homomorphic maps used throughout:

* ciphertext product  -> plaintext sum      (mod n)
* ciphertext exponent -> plaintext scaling  (mod n)

This is a research artifact: operations are not constant time and no
side-channel hardening is attempted. Keys below 512 bits are allowed for
fast tests and are tagged "insecure" when serialized.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

from . import _mathutil
from .exceptions import (
    CiphertextArithmeticError,
    FileFormatError,
    KeyGenerationError,
    KeyMismatchError,
    ParameterError,
    PlaintextRangeError,
)

MIN_BIT_LENGTH = 16
SECURE_BIT_LENGTH = 512
KEY_FILE_FORMAT = "hevoice-paillier-key"
KEY_FILE_VERSION = 1

_SYSTEM_RNG = random.SystemRandom()


def _fingerprint(n: int, g: int) -> str:
    digest = hashlib.sha256(f"paillier:n={n:x}:g={g:x}".encode()).hexdigest()
    return digest[:16]


@dataclass(frozen=True)
class PaillierPublicKey:
    """Public half of a keypair: modulus n = p*q and generator g."""

    n: int
    g: int
    n_squared: int
    bit_length: int
    fingerprint: str

    @classmethod
    def create(cls, n: int, g: int) -> "PaillierPublicKey":
        n_squared = n * n
        if math.gcd(g % n_squared, n_squared) != 1:
            raise ParameterError("generator is not invertible modulo n^2")
        return cls(n=n, g=g, n_squared=n_squared, bit_length=n.bit_length(),
                   fingerprint=_fingerprint(n, g))

    @property
    def max_positive(self) -> int:
        """Top of the positive plaintext band, floor(n/3)."""
        return self.n // 3

    def __repr__(self) -> str:
        return f"<PaillierPublicKey {self.fingerprint} bits={self.bit_length}>"


@dataclass(frozen=True)
class PaillierSecretKey:
    """Secret half: lam = lcm(p-1, q-1) and mu = L(g^lam mod n^2)^-1 mod n.

    The prime factors are retained for test introspection and key-file
    round trips.
    """

    lam: int
    mu: int
    p: int
    q: int
    fingerprint: str

    def __repr__(self) -> str:
        return f"<PaillierSecretKey {self.fingerprint}>"


@dataclass(frozen=True)
class Ciphertext:
    """An integer in [0, n^2) plus the fingerprint of the encrypting key.

    `obfuscated` records whether a random obfuscator contributes to the
    value; deterministic results (e.g. exponentiation by zero) are flagged
    so callers can re-randomize before disclosure.
    """

    value: int
    key_id: str
    obfuscated: bool = True


def _require_same_key(pk: PaillierPublicKey, *ciphertexts: Ciphertext) -> None:
    for c in ciphertexts:
        if c.key_id != pk.fingerprint:
            raise KeyMismatchError(
                f"ciphertext under key {c.key_id} used with key {pk.fingerprint}")


def keygen(bit_length: int, seed: int | None = None,
            rng: random.Random | None = None,
            mr_rounds: int = 64) -> tuple[PaillierPublicKey, PaillierSecretKey]:
    """Generate a keypair with an exactly `bit_length`-bit modulus.

    A `seed` (or explicit `rng`) makes generation deterministic for
    reproducible experiments; without either, the system CSPRNG is used.
    """
    if bit_length < MIN_BIT_LENGTH:
        raise ParameterError(f"bit_length must be >= {MIN_BIT_LENGTH}")
    if rng is None:
        rng = random.Random(seed) if seed is not None else _SYSTEM_RNG

    half = bit_length // 2
    for _ in range(1000):
        try:
            p = _mathutil.generate_prime(bit_length - half, rng, mr_rounds)
            q = _mathutil.generate_prime(half, rng, mr_rounds)
        except RuntimeError as exc:
            raise KeyGenerationError(str(exc)) from exc
        if p == q:
            continue
        n = p * q
        if n.bit_length() != bit_length:
            continue
        if math.gcd(n, (p - 1) * (q - 1)) != 1:
            continue
        return keypair_from_primes(p, q)
    raise KeyGenerationError("exceeded keygen retry budget")


def keypair_from_primes(p: int, q: int, g: int | None = None
                        ) -> tuple[PaillierPublicKey, PaillierSecretKey]:
    """Build a keypair from known primes (test hook; also used by keygen).

    `g` defaults to n + 1; any invertible element of Z*_{n^2} is accepted.
    """
    if p == q:
        raise ParameterError("prime factors must differ")
    n = p * q
    if math.gcd(n, (p - 1) * (q - 1)) != 1:
        raise ParameterError("gcd(pq, (p-1)(q-1)) != 1")
    if g is None:
        g = n + 1
    pk = PaillierPublicKey.create(n, g)
    lam = _mathutil.lcm(p - 1, q - 1)
    rho = _L(_mathutil.powmod(g, lam, pk.n_squared), n)
    try:
        mu = _mathutil.invert(rho, n)
    except ValueError as exc:
        raise ParameterError("g does not yield an invertible L(g^lam)") from exc
    sk = PaillierSecretKey(lam=lam, mu=mu, p=p, q=q, fingerprint=pk.fingerprint)
    return pk, sk


def _L(x: int, n: int) -> int:
    return (x - 1) // n


def _draw_obfuscator(pk: PaillierPublicKey, rng: random.Random) -> int:
    # gcd(s, n) != 1 is vanishingly rare for real keys but possible for the
    # tiny test moduli; reject and resample.
    while True:
        s = rng.randrange(1, pk.n)
        if math.gcd(s, pk.n) == 1:
            return s


def encrypt(pk: PaillierPublicKey, m: int, s: int | None = None,
            rng: random.Random | None = None) -> Ciphertext:
    """Encrypt integer plaintext m in [0, n); draws s from Z*_n if omitted."""
    if not 0 <= m < pk.n:
        raise PlaintextRangeError(f"plaintext {m} outside [0, {pk.n})")
    if s is None:
        s = _draw_obfuscator(pk, rng if rng is not None else _SYSTEM_RNG)
        explicit_identity = False
    else:
        if not 0 < s < pk.n or math.gcd(s, pk.n) != 1:
            raise ParameterError("obfuscator s must lie in Z*_n")
        explicit_identity = s == 1
    n2 = pk.n_squared
    if pk.g == pk.n + 1:
        g_m = (1 + pk.n * m) % n2
    else:
        g_m = _mathutil.powmod(pk.g, m, n2)
    value = g_m * _mathutil.powmod(s, pk.n, n2) % n2
    return Ciphertext(value=value, key_id=pk.fingerprint,
                      obfuscated=not explicit_identity)


def decrypt(sk: PaillierSecretKey, pk: PaillierPublicKey, c: Ciphertext) -> int:
    """Recover the integer plaintext of c."""
    if sk.fingerprint != pk.fingerprint:
        raise KeyMismatchError("secret key does not match public key")
    _require_same_key(pk, c)
    u = _mathutil.powmod(c.value, sk.lam, pk.n_squared)
    return _L(u, pk.n) * sk.mu % pk.n


def add_cipher(pk: PaillierPublicKey, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    """Ciphertext product: decrypts to m1 + m2 mod n."""
    _require_same_key(pk, c1, c2)
    return Ciphertext(value=c1.value * c2.value % pk.n_squared,
                      key_id=pk.fingerprint,
                      obfuscated=c1.obfuscated or c2.obfuscated)


def mul_const(pk: PaillierPublicKey, c: Ciphertext, l: int) -> Ciphertext:
    """Ciphertext exponentiation by a signed constant: decrypts to m*l mod n.

    Negative constants invert the ciphertext modulo n^2 first; a
    non-invertible value means the ciphertext was malformed.
    """
    _require_same_key(pk, c)
    n2 = pk.n_squared
    if l < 0:
        try:
            base = _mathutil.invert(c.value, n2)
        except ValueError as exc:
            raise CiphertextArithmeticError(
                "ciphertext not invertible modulo n^2") from exc
        l = -l
    else:
        base = c.value
    return Ciphertext(value=_mathutil.powmod(base, l, n2),
                      key_id=pk.fingerprint,
                      obfuscated=c.obfuscated and l != 0)


def rerandomize(pk: PaillierPublicKey, c: Ciphertext,
                rng: random.Random | None = None) -> Ciphertext:
    """Multiply by a fresh encryption of zero: same plaintext, fresh value."""
    _require_same_key(pk, c)
    s = _draw_obfuscator(pk, rng if rng is not None else _SYSTEM_RNG)
    zero = _mathutil.powmod(s, pk.n, pk.n_squared)
    return Ciphertext(value=c.value * zero % pk.n_squared,
                      key_id=pk.fingerprint, obfuscated=True)


# ---------------------------------------------------------------------------
# key files: versioned JSON, lowercase-hex big-endian integers, public and
# secret halves in separate files, "insecure" tag for sub-512-bit keys.

def public_key_to_dict(pk: PaillierPublicKey) -> dict:
    return {
        "format": KEY_FILE_FORMAT,
        "version": KEY_FILE_VERSION,
        "kind": "public",
        "insecure": pk.bit_length < SECURE_BIT_LENGTH,
        "bits": pk.bit_length,
        "n": f"{pk.n:x}",
        "g": f"{pk.g:x}",
    }


def secret_key_to_dict(sk: PaillierSecretKey, pk: PaillierPublicKey) -> dict:
    return {
        "format": KEY_FILE_FORMAT,
        "version": KEY_FILE_VERSION,
        "kind": "secret",
        "insecure": pk.bit_length < SECURE_BIT_LENGTH,
        "bits": pk.bit_length,
        "n": f"{pk.n:x}",
        "g": f"{pk.g:x}",
        "lambda": f"{sk.lam:x}",
        "mu": f"{sk.mu:x}",
        "p": f"{sk.p:x}",
        "q": f"{sk.q:x}",
    }


def _check_header(doc: dict, kind: str) -> None:
    if doc.get("format") != KEY_FILE_FORMAT:
        raise FileFormatError(f"not a {KEY_FILE_FORMAT} document")
    if doc.get("version") != KEY_FILE_VERSION:
        raise FileFormatError(f"unsupported key-file version {doc.get('version')}")
    if doc.get("kind") != kind:
        raise FileFormatError(f"expected a {kind} key file, got {doc.get('kind')}")


def public_key_from_dict(doc: dict) -> PaillierPublicKey:
    _check_header(doc, "public")
    return PaillierPublicKey.create(int(doc["n"], 16), int(doc["g"], 16))


def secret_key_from_dict(doc: dict) -> tuple[PaillierPublicKey, PaillierSecretKey]:
    _check_header(doc, "secret")
    pk = PaillierPublicKey.create(int(doc["n"], 16), int(doc["g"], 16))
    sk = PaillierSecretKey(lam=int(doc["lambda"], 16), mu=int(doc["mu"], 16),
                           p=int(doc["p"], 16), q=int(doc["q"], 16),
                           fingerprint=pk.fingerprint)
    return pk, sk


def save_keypair(pk: PaillierPublicKey, sk: PaillierSecretKey,
                 public_path: str | Path, secret_path: str | Path) -> None:
    Path(public_path).write_text(
        json.dumps(public_key_to_dict(pk), sort_keys=True, indent=2) + "\n")
    Path(secret_path).write_text(
        json.dumps(secret_key_to_dict(sk, pk), sort_keys=True, indent=2) + "\n")


def load_public_key(path: str | Path) -> PaillierPublicKey:
    return public_key_from_dict(json.loads(Path(path).read_text()))


def load_secret_key(path: str | Path) -> tuple[PaillierPublicKey, PaillierSecretKey]:
    return secret_key_from_dict(json.loads(Path(path).read_text()))
