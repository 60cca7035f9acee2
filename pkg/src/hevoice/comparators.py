"""Protected references and encrypted score computation.

Four comparators are supported:

* squared Euclidean distance   enc(sum x^2) * enc(sum y^2) * prod enc(y_f)^(-2 x_f)
* cosine similarity            prod enc(y_f)^(x_f) over length-normalized vectors
* two-covariance, subject-protecting: the client holds the plaintext model
  weights, the reference carries enc(Y) and enc(Y' G Y)
* two-covariance, subject+vendor-protecting: two key pairs; the reference
  carries enc_k1(Y) and enc_k1(Y Y'), the model weights travel under k2 and
  the score is assembled from Frobenius inner products.

Every scoring function validates key fingerprints, so probes against
references enrolled under a revoked key raise KeyMismatchError instead of
producing a silent wrong score.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import encoding, linalg
from .counters import OpCounter
from .encoding import EncryptedNumber
from .exceptions import FileFormatError, KeyMismatchError, NormalizationError, ShapeError
from .linalg import EncryptedMatrix, EncryptedVector
from .paillier import PaillierPublicKey, PaillierSecretKey
from .twocov import TwoCovModel

logger = logging.getLogger(__name__)

TEMPLATE_FILE_FORMAT = "hevoice-template"
TEMPLATE_FILE_VERSION = 1

UNIT_NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ProtectedReferenceEuclidean:
    """enc(sum y_f^2) plus the elementwise encryption of Y; F+1 ciphertexts."""

    sum_sq: EncryptedNumber
    elements: EncryptedVector

    @property
    def ciphertext_count(self) -> int:
        return len(self.elements) + 1

    @property
    def key_ref(self) -> str:
        return self.elements.key_ref


@dataclass(frozen=True)
class ProtectedReferenceCosine:
    """Elementwise encryption of a unit-norm Y; F ciphertexts."""

    elements: EncryptedVector

    @property
    def ciphertext_count(self) -> int:
        return len(self.elements)

    @property
    def key_ref(self) -> str:
        return self.elements.key_ref


@dataclass(frozen=True)
class ProtectedReference2CovSubject:
    """enc(Y) plus the quadratic self term enc(Y' G Y); F+1 ciphertexts."""

    elements: EncryptedVector
    quad_term: EncryptedNumber

    @property
    def ciphertext_count(self) -> int:
        return len(self.elements) + 1

    @property
    def key_ref(self) -> str:
        return self.elements.key_ref


@dataclass(frozen=True)
class ProtectedReference2CovVendor:
    """enc(Y) plus the encrypted Gram matrix enc(Y Y'); F^2 + F ciphertexts."""

    elements: EncryptedVector
    gram: EncryptedMatrix

    @property
    def ciphertext_count(self) -> int:
        return len(self.elements) + self.gram.size ** 2

    @property
    def key_ref(self) -> str:
        return self.elements.key_ref


@dataclass(frozen=True)
class EncryptedModel:
    """Model weights encrypted under the vendor key pair; 2 F^2 ciphertexts."""

    cross_weight_enc: EncryptedMatrix
    self_weight_enc: EncryptedMatrix

    @property
    def ciphertext_count(self) -> int:
        return 2 * self.cross_weight_enc.size ** 2

    @property
    def key_ref(self) -> str:
        return self.cross_weight_enc.key_ref


def enroll_euclidean(pk: PaillierPublicKey, y,
                     rng: random.Random | None = None,
                     counter: OpCounter | None = None) -> ProtectedReferenceEuclidean:
    arr = np.asarray(y, dtype=float)
    sum_sq = encoding.encrypt_value(pk, float(arr @ arr), rng=rng, counter=counter)
    return ProtectedReferenceEuclidean(
        sum_sq=sum_sq, elements=linalg.encrypt_vector(pk, arr, rng, counter))


def enroll_cosine(pk: PaillierPublicKey, y,
                  rng: random.Random | None = None,
                  counter: OpCounter | None = None) -> ProtectedReferenceCosine:
    arr = np.asarray(y, dtype=float)
    if abs(np.linalg.norm(arr) - 1.0) > UNIT_NORM_TOLERANCE:
        raise NormalizationError(
            "cosine references must be length-normalized before enrolment")
    return ProtectedReferenceCosine(elements=linalg.encrypt_vector(pk, arr, rng, counter))


def enroll_2cov_subject(pk: PaillierPublicKey, self_weight, y,
                        rng: random.Random | None = None,
                        counter: OpCounter | None = None
                        ) -> ProtectedReference2CovSubject:
    """Subject-protecting enrolment; needs the plaintext quadratic weight."""
    arr = np.asarray(y, dtype=float)
    g = np.asarray(self_weight, dtype=float)
    if g.shape != (arr.shape[0], arr.shape[0]):
        raise ShapeError("quadratic weight shape does not match the reference")
    quad = encoding.encrypt_value(pk, float(arr @ g @ arr), rng=rng, counter=counter)
    return ProtectedReference2CovSubject(
        elements=linalg.encrypt_vector(pk, arr, rng, counter), quad_term=quad)


def enroll_2cov_vendor(pk1: PaillierPublicKey, y,
                       rng: random.Random | None = None,
                       counter: OpCounter | None = None
                       ) -> ProtectedReference2CovVendor:
    arr = np.asarray(y, dtype=float)
    return ProtectedReference2CovVendor(
        elements=linalg.encrypt_vector(pk1, arr, rng, counter),
        gram=linalg.encrypt_matrix(pk1, np.outer(arr, arr), rng, counter))


def encrypt_model(pk2: PaillierPublicKey, model: TwoCovModel,
                  rng: random.Random | None = None,
                  counter: OpCounter | None = None) -> EncryptedModel:
    """Encrypt the comparator weights under the vendor key."""
    return EncryptedModel(
        cross_weight_enc=linalg.encrypt_matrix(pk2, model.cross_weight, rng, counter),
        self_weight_enc=linalg.encrypt_matrix(pk2, model.self_weight, rng, counter))


def _require_ref_key(pk: PaillierPublicKey, ref) -> None:
    if ref.key_ref != pk.fingerprint:
        raise KeyMismatchError(
            f"reference enrolled under key {ref.key_ref}, probe uses {pk.fingerprint}")


def score_euclidean_encrypted(pk: PaillierPublicKey,
                              ref: ProtectedReferenceEuclidean, x,
                              rng: random.Random | None = None,
                              counter: OpCounter | None = None) -> EncryptedNumber:
    """Encrypted squared Euclidean distance between probe and reference."""
    _require_ref_key(pk, ref)
    arr = np.asarray(x, dtype=float)
    if arr.shape[0] != len(ref.elements):
        raise ShapeError(f"probe dimension {arr.shape[0]} != {len(ref.elements)}")
    if counter is not None:
        counter.plain_products += arr.shape[0]
        counter.plain_additions += arr.shape[0] - 1
    probe_sq = encoding.encrypt_value(pk, float(arr @ arr), rng=rng, counter=counter)
    acc = encoding.add_encrypted(probe_sq, ref.sum_sq, pk, counter)
    cross = linalg.dot_exponentiate(ref.elements, -2.0 * arr, pk, counter)
    return encoding.add_encrypted(acc, cross, pk, counter)


def score_cosine_encrypted(pk: PaillierPublicKey,
                           ref: ProtectedReferenceCosine, x,
                           counter: OpCounter | None = None) -> EncryptedNumber:
    """Encrypted cosine similarity; zero probe-side encryptions."""
    _require_ref_key(pk, ref)
    arr = np.asarray(x, dtype=float)
    if arr.shape[0] != len(ref.elements):
        raise ShapeError(f"probe dimension {arr.shape[0]} != {len(ref.elements)}")
    norm = np.linalg.norm(arr)
    if norm == 0.0:
        raise NormalizationError("cannot score a zero-norm probe")
    if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
        logger.info("length-normalizing probe internally (norm was %.6g)", norm)
        arr = arr / norm
    return linalg.dot_exponentiate(ref.elements, arr, pk, counter)


def score_2cov_subject_encrypted(pk: PaillierPublicKey,
                                 ref: ProtectedReference2CovSubject, x,
                                 cross_weight, self_weight,
                                 rng: random.Random | None = None,
                                 counter: OpCounter | None = None) -> EncryptedNumber:
    """Client-side encrypted discriminative score, subject-protecting scheme.

    The client computes the plaintext auxiliary vectors (x'A) and (A x) and
    the quadratic form x'Gx; exactly one fresh encryption (of x'Gx) occurs.
    """
    _require_ref_key(pk, ref)
    arr = np.asarray(x, dtype=float)
    dim = len(ref.elements)
    if arr.shape[0] != dim:
        raise ShapeError(f"probe dimension {arr.shape[0]} != {dim}")
    cross = np.asarray(cross_weight, dtype=float)
    self_w = np.asarray(self_weight, dtype=float)
    if cross.shape != (dim, dim) or self_w.shape != (dim, dim):
        raise ShapeError("model weight shapes do not match the reference")

    left_aux = arr @ cross          # x'A
    right_aux = cross @ arr         # A x
    probe_quad = float(arr @ self_w @ arr)
    if counter is not None:
        # two matrix-vector products, one quadratic form
        counter.plain_products += 3 * dim * dim + dim
        counter.plain_additions += 3 * dim * (dim - 1) + (dim - 1)

    enc_quad = encoding.encrypt_value(pk, probe_quad, rng=rng, counter=counter)
    acc = encoding.add_encrypted(enc_quad, ref.quad_term, pk, counter)
    acc = encoding.add_encrypted(
        acc, linalg.dot_exponentiate(ref.elements, right_aux, pk, counter), pk, counter)
    return encoding.add_encrypted(
        acc, linalg.dot_exponentiate(ref.elements, left_aux, pk, counter), pk, counter)


def client_compute_vendor(pk1: PaillierPublicKey,
                          ref: ProtectedReference2CovVendor, x,
                          rng: random.Random | None = None,
                          counter: OpCounter | None = None
                          ) -> tuple[EncryptedMatrix, EncryptedMatrix]:
    """Client side of the vendor-protecting scheme.

    Returns enc_k1(x y' + y x') and enc_k1(x x' + y y'): two outer-product
    exponentiation passes over enc(Y), one Hadamard with the freshly
    encrypted probe Gram matrix (the scheme's F^2 encryptions).
    """
    _require_ref_key(pk1, ref)
    arr = np.asarray(x, dtype=float)
    dim = len(ref.elements)
    if arr.shape[0] != dim:
        raise ShapeError(f"probe dimension {arr.shape[0]} != {dim}")

    y_xt = linalg.outer_exponentiate(ref.elements, arr, pk1, counter)
    x_yt = linalg.outer_exponentiate(ref.elements, arr, pk1, counter, transposed=True)
    sym_cross = linalg.hadamard(y_xt, x_yt, pk1, counter)

    if counter is not None:
        counter.plain_products += dim * dim  # forming x x'
    probe_gram = linalg.encrypt_matrix(pk1, np.outer(arr, arr), rng, counter)
    gram_sum = linalg.hadamard(probe_gram, ref.gram, pk1, counter)
    return sym_cross, gram_sum


def operator_combine_vendor(sk1: PaillierSecretKey, pk1: PaillierPublicKey,
                            pk2: PaillierPublicKey, enc_model: EncryptedModel,
                            sym_cross: EncryptedMatrix, gram_sum: EncryptedMatrix,
                            counter: OpCounter | None = None) -> EncryptedNumber:
    """Operator side: decrypt the auxiliary grids under key 1, fold them into
    the encrypted model weights under key 2 via Frobenius inner products."""
    if enc_model.key_ref != pk2.fingerprint:
        raise KeyMismatchError("encrypted model is not under the vendor key")
    plain_cross = linalg.decrypt_matrix(sk1, pk1, sym_cross, counter)
    plain_gram = linalg.decrypt_matrix(sk1, pk1, gram_sum, counter)
    part_cross = linalg.frobenius_exponentiate(
        enc_model.cross_weight_enc, plain_cross, pk2, counter)
    part_self = linalg.frobenius_exponentiate(
        enc_model.self_weight_enc, plain_gram, pk2, counter)
    return encoding.add_encrypted(part_cross, part_self, pk2, counter)


def add_calibration_offset(score: float, model: TwoCovModel,
                           x=None, y=None) -> float:
    """Re-apply the constant (and, when the probe/reference sums are
    available in plaintext, the linear) calibration term after decryption."""
    result = score + model.offset
    if x is not None and y is not None:
        xa = np.asarray(x, dtype=float)
        ya = np.asarray(y, dtype=float)
        result += float(model.linear_weight @ (xa + ya))
    return result


# ---------------------------------------------------------------------------
# template files: canonical JSON (sorted keys, no whitespace) so that
# re-serialization is byte identical and transcript hashes stay stable.

_REFERENCE_KINDS = {
    "euclidean": ProtectedReferenceEuclidean,
    "cosine": ProtectedReferenceCosine,
    "2cov-subject": ProtectedReference2CovSubject,
    "2cov-vendor": ProtectedReference2CovVendor,
}


def _vector_to_list(ev: EncryptedVector) -> list:
    return [encoding.encrypted_number_to_dict(e) for e in ev.elements]


def _vector_from_list(items: list) -> EncryptedVector:
    return EncryptedVector(tuple(
        encoding.encrypted_number_from_dict(d) for d in items))


def _matrix_to_list(em: EncryptedMatrix) -> list:
    return [[encoding.encrypted_number_to_dict(e) for e in row] for row in em.rows]


def _matrix_from_list(rows: list) -> EncryptedMatrix:
    return EncryptedMatrix(tuple(
        tuple(encoding.encrypted_number_from_dict(d) for d in row) for row in rows))


def template_to_dict(ref) -> dict:
    doc = {
        "format": TEMPLATE_FILE_FORMAT,
        "version": TEMPLATE_FILE_VERSION,
        "key_fingerprint": ref.key_ref,
    }
    if isinstance(ref, ProtectedReferenceEuclidean):
        doc.update(kind="euclidean", dim=len(ref.elements),
                   sum_sq=encoding.encrypted_number_to_dict(ref.sum_sq),
                   elements=_vector_to_list(ref.elements))
    elif isinstance(ref, ProtectedReferenceCosine):
        doc.update(kind="cosine", dim=len(ref.elements),
                   elements=_vector_to_list(ref.elements))
    elif isinstance(ref, ProtectedReference2CovSubject):
        doc.update(kind="2cov-subject", dim=len(ref.elements),
                   quad_term=encoding.encrypted_number_to_dict(ref.quad_term),
                   elements=_vector_to_list(ref.elements))
    elif isinstance(ref, ProtectedReference2CovVendor):
        doc.update(kind="2cov-vendor", dim=len(ref.elements),
                   gram=_matrix_to_list(ref.gram),
                   elements=_vector_to_list(ref.elements))
    else:
        raise TypeError(f"not a protected reference: {type(ref).__name__}")
    return doc


def template_from_dict(doc: dict):
    if doc.get("format") != TEMPLATE_FILE_FORMAT:
        raise FileFormatError(f"not a {TEMPLATE_FILE_FORMAT} document")
    if doc.get("version") != TEMPLATE_FILE_VERSION:
        raise FileFormatError(f"unsupported template version {doc.get('version')}")
    kind = doc.get("kind")
    if kind == "euclidean":
        return ProtectedReferenceEuclidean(
            sum_sq=encoding.encrypted_number_from_dict(doc["sum_sq"]),
            elements=_vector_from_list(doc["elements"]))
    if kind == "cosine":
        return ProtectedReferenceCosine(elements=_vector_from_list(doc["elements"]))
    if kind == "2cov-subject":
        return ProtectedReference2CovSubject(
            elements=_vector_from_list(doc["elements"]),
            quad_term=encoding.encrypted_number_from_dict(doc["quad_term"]))
    if kind == "2cov-vendor":
        return ProtectedReference2CovVendor(
            elements=_vector_from_list(doc["elements"]),
            gram=_matrix_from_list(doc["gram"]))
    raise FileFormatError(f"unknown comparator kind {kind!r}")


def serialize_template(ref) -> str:
    """Canonical single-line JSON; byte-identical across round trips."""
    return json.dumps(template_to_dict(ref), sort_keys=True,
                      separators=(",", ":"))


def save_template(ref, path: str | Path) -> None:
    Path(path).write_text(serialize_template(ref) + "\n")


def load_template(path: str | Path):
    return template_from_dict(json.loads(Path(path).read_text()))
