"""Vectors and matrices of encrypted numbers and their homomorphic products.

All accumulations fold pairwise left-to-right (column-major for matrices) so
transcripts are reproducible. Because ciphertext products realize plaintext
*addition*, the Hadamard product of two encrypted grids decodes to the
elementwise sum of the underlying matrices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from . import encoding
from .counters import OpCounter
from .encoding import EncryptedNumber
from .exceptions import KeyMismatchError, ShapeError
from .paillier import PaillierPublicKey, PaillierSecretKey


@dataclass(frozen=True)
class EncryptedVector:
    """Elementwise encryption of a length-F real vector (single key)."""

    elements: tuple[EncryptedNumber, ...]

    def __post_init__(self):
        if not self.elements:
            raise ShapeError("encrypted vector must have at least one element")
        keys = {e.key_ref for e in self.elements}
        if len(keys) != 1:
            raise KeyMismatchError("mixed keys inside one encrypted vector")

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i: int) -> EncryptedNumber:
        return self.elements[i]

    @property
    def key_ref(self) -> str:
        return self.elements[0].key_ref


@dataclass(frozen=True)
class EncryptedMatrix:
    """Row-major F x F grid of encrypted numbers (single key)."""

    rows: tuple[tuple[EncryptedNumber, ...], ...]

    def __post_init__(self):
        size = len(self.rows)
        if size == 0 or any(len(r) != size for r in self.rows):
            raise ShapeError("encrypted matrix must be square and non-empty")
        keys = {e.key_ref for r in self.rows for e in r}
        if len(keys) != 1:
            raise KeyMismatchError("mixed keys inside one encrypted matrix")

    @property
    def size(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> EncryptedNumber:
        i, j = ij
        return self.rows[i][j]

    @property
    def key_ref(self) -> str:
        return self.rows[0][0].key_ref

    def vec(self) -> list[EncryptedNumber]:
        """Column-stacked elements: entry (i, j) lands at position j*F + i."""
        size = self.size
        return [self.rows[i][j] for j in range(size) for i in range(size)]


def _as_vector(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ShapeError(f"expected a 1-d vector, got shape {arr.shape}")
    return arr


def _as_square(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def encrypt_vector(pk: PaillierPublicKey, v, rng: random.Random | None = None,
                   counter: OpCounter | None = None) -> EncryptedVector:
    """Elementwise encode+encrypt; F counted encryptions."""
    arr = _as_vector(v)
    return EncryptedVector(tuple(
        encoding.encrypt_value(pk, float(x), rng=rng, counter=counter)
        for x in arr))


def encrypt_matrix(pk: PaillierPublicKey, a, rng: random.Random | None = None,
                   counter: OpCounter | None = None) -> EncryptedMatrix:
    """Elementwise encode+encrypt of a square matrix; F^2 encryptions."""
    arr = _as_square(a)
    return EncryptedMatrix(tuple(
        tuple(encoding.encrypt_value(pk, float(x), rng=rng, counter=counter)
              for x in row)
        for row in arr))


def decrypt_vector(sk: PaillierSecretKey, pk: PaillierPublicKey,
                   ev: EncryptedVector,
                   counter: OpCounter | None = None) -> np.ndarray:
    return np.array([encoding.decrypt_value(sk, pk, e, counter=counter)
                     for e in ev.elements])


def decrypt_matrix(sk: PaillierSecretKey, pk: PaillierPublicKey,
                   em: EncryptedMatrix,
                   counter: OpCounter | None = None) -> np.ndarray:
    return np.array([[encoding.decrypt_value(sk, pk, e, counter=counter)
                      for e in row] for row in em.rows])


def _fold_sum(terms: list[EncryptedNumber], pk: PaillierPublicKey,
              counter: OpCounter | None) -> EncryptedNumber:
    acc = terms[0]
    for t in terms[1:]:
        acc = encoding.add_encrypted(acc, t, pk, counter)
    return acc


def dot_exponentiate(enc_y: EncryptedVector, x, pk: PaillierPublicKey,
                     counter: OpCounter | None = None) -> EncryptedNumber:
    """prod_f enc(y_f)^(x_f): decrypts to the dot product x . y.

    F exponentiations and F-1 ciphertext products.
    """
    arr = _as_vector(x)
    if len(arr) != len(enc_y):
        raise ShapeError(f"length mismatch: {len(arr)} vs {len(enc_y)}")
    terms = [encoding.mul_plain(enc_y[f], float(arr[f]), pk, counter)
             for f in range(len(arr))]
    return _fold_sum(terms, pk, counter)


def outer_exponentiate(enc_y: EncryptedVector, x, pk: PaillierPublicKey,
                       counter: OpCounter | None = None,
                       transposed: bool = False) -> EncryptedMatrix:
    """Exponentiation in an outer-product fashion; F^2 exponentiations.

    Entry (i, j) is enc(y_i)^(x_j), i.e. the grid decrypts to y x'. With
    `transposed` the roles swap per entry, producing x y' from the same
    ciphertext vector (fresh exponentiations, no shared results).
    """
    arr = _as_vector(x)
    size = len(enc_y)
    if len(arr) != size:
        raise ShapeError(f"length mismatch: {len(arr)} vs {size}")
    if transposed:
        entry = lambda i, j: encoding.mul_plain(enc_y[j], float(arr[i]), pk, counter)
    else:
        entry = lambda i, j: encoding.mul_plain(enc_y[i], float(arr[j]), pk, counter)
    return EncryptedMatrix(tuple(
        tuple(entry(i, j) for j in range(size)) for i in range(size)))


def hadamard(enc_a: EncryptedMatrix, enc_b: EncryptedMatrix,
             pk: PaillierPublicKey,
             counter: OpCounter | None = None) -> EncryptedMatrix:
    """Entrywise ciphertext product; decrypts to the elementwise sum A + B."""
    if enc_a.size != enc_b.size:
        raise ShapeError(f"size mismatch: {enc_a.size} vs {enc_b.size}")
    if enc_a.key_ref != enc_b.key_ref:
        raise KeyMismatchError("hadamard operands under different keys")
    size = enc_a.size
    return EncryptedMatrix(tuple(
        tuple(encoding.add_encrypted(enc_a[i, j], enc_b[i, j], pk, counter)
              for j in range(size))
        for i in range(size)))


def frobenius_exponentiate(enc_a: EncryptedMatrix, b, pk: PaillierPublicKey,
                           counter: OpCounter | None = None) -> EncryptedNumber:
    """Dot product of column-stacked grids: decrypts to sum_ij A_ij * B_ij.

    F^2 exponentiations and F^2 - 1 ciphertext products.
    """
    arr = _as_square(b)
    if arr.shape[0] != enc_a.size:
        raise ShapeError(f"size mismatch: {arr.shape[0]} vs {enc_a.size}")
    flat_b = arr.flatten(order="F")
    terms = [encoding.mul_plain(e, float(v), pk, counter)
             for e, v in zip(enc_a.vec(), flat_b)]
    return _fold_sum(terms, pk, counter)
