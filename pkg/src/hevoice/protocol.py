"""Deterministic in-process simulation of the verification architectures.

Three architectures are modeled as message-passing entities with byte-exact
channel ledgers:

* cosine:        client <- controller DB, client -> operator AS (one key pair)
* 2cov-subject:  as above plus the encrypted reference quadratic term; the
                 client holds the plaintext comparator weights
* 2cov-vendor:   two key pairs; the operator AS decrypts the client's
                 auxiliary grids under key 1 and folds them into the
                 vendor-encrypted weights under key 2; the vendor AS decides

Messages carry real ciphertext objects; the ledger prices each ciphertext at
nu = 2n bits. Plaintext exponent metadata is tallied separately so protected
byte totals stay exact multiples of nu. Enrolment/provisioning traffic is
outside the per-run ledgers, which cover verification only.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from . import comparators, encoding
from .comparators import (
    EncryptedModel,
    ProtectedReference2CovSubject,
    ProtectedReference2CovVendor,
    ProtectedReferenceCosine,
)
from .counters import OpCounter
from .encoding import EncryptedNumber
from .exceptions import (
    ConfigurationError,
    KeyMismatchError,
    LookupError_,
    ParameterError,
)
from .linalg import EncryptedMatrix, EncryptedVector
from .paillier import PaillierPublicKey, PaillierSecretKey
from .twocov import TwoCovModel

EXPONENT_METADATA_BYTES = 8


class Role(str, Enum):
    CLIENT = "client"
    DB_CONTROLLER = "db_controller"
    AS_OPERATOR = "as_operator"
    DB_VENDOR = "db_vendor"
    AS_VENDOR = "as_vendor"


_SECRET_PLACEMENT = {
    "single": {"sk": Role.AS_OPERATOR},
    "vendor": {"sk1": Role.AS_OPERATOR, "sk2": Role.AS_VENDOR},
}

_REQUIRED_KEYS = {
    "single": {Role.AS_OPERATOR: {"pk", "sk"}},
    "vendor": {Role.AS_OPERATOR: {"pk1", "sk1", "pk2"},
               Role.AS_VENDOR: {"pk2", "sk2"}},
}


def validate_key_placement(role: Role, held_keys: Mapping[str, object],
                           architecture: str) -> None:
    """Enforce the figures' key placement; the client never holds a secret."""
    if architecture not in _SECRET_PLACEMENT:
        raise ParameterError(f"unknown architecture {architecture!r}")
    for name, value in held_keys.items():
        if isinstance(value, PaillierSecretKey) or name.startswith("sk"):
            owner = _SECRET_PLACEMENT[architecture].get(name)
            if owner is None:
                raise ConfigurationError(
                    f"secret key {name!r} has no place in the {architecture} architecture")
            if role is not owner:
                raise ConfigurationError(
                    f"secret key {name!r} must stay at {owner.value}, found at {role.value}")
    required = _REQUIRED_KEYS[architecture].get(role, set())
    missing = required - set(held_keys)
    if missing:
        raise ConfigurationError(
            f"{role.value} is missing required keys {sorted(missing)}")


@dataclass
class Entity:
    role: Role
    held_keys: dict = field(default_factory=dict)
    local_store: dict = field(default_factory=dict)
    received: list = field(default_factory=list)


@dataclass(frozen=True)
class Decision:
    score: float
    threshold: float
    accepted: bool

    @classmethod
    def make(cls, score: float, threshold: float) -> "Decision":
        return cls(score=score, threshold=threshold, accepted=threshold <= score)


def _payload_numbers(payload) -> list[EncryptedNumber]:
    if isinstance(payload, EncryptedNumber):
        return [payload]
    if isinstance(payload, EncryptedVector):
        return list(payload.elements)
    if isinstance(payload, EncryptedMatrix):
        return [e for row in payload.rows for e in row]
    raise ParameterError(f"unsupported payload type {type(payload).__name__}")


def _payload_hash(numbers: list[EncryptedNumber]) -> str:
    doc = [[f"{e.ciphertext.value:x}", e.exponent] for e in numbers]
    return hashlib.sha256(json.dumps(doc, separators=(",", ":")).encode()).hexdigest()


@dataclass
class Message:
    step_label: str
    sender: Role
    receiver: Role
    payload_kind: str
    payload: object
    ciphertext_count: int
    protected_bytes: int
    metadata_bytes: int
    payload_sha256: str

    def transcript_line(self) -> str:
        return json.dumps({
            "step": self.step_label,
            "from": self.sender.value,
            "to": self.receiver.value,
            "kind": self.payload_kind,
            "ciphertexts": self.ciphertext_count,
            "protected_bytes": self.protected_bytes,
            "metadata_bytes": self.metadata_bytes,
            "payload_sha256": self.payload_sha256,
        }, sort_keys=True, separators=(",", ":"))


@dataclass
class ChannelTotals:
    ciphertexts: int = 0
    protected_bytes: int = 0
    metadata_bytes: int = 0


class ChannelLedger:
    """Per-(sender, receiver) ciphertext and byte totals."""

    def __init__(self):
        self.channels: dict[tuple[Role, Role], ChannelTotals] = {}

    def record(self, message: Message) -> None:
        totals = self.channels.setdefault(
            (message.sender, message.receiver), ChannelTotals())
        totals.ciphertexts += message.ciphertext_count
        totals.protected_bytes += message.protected_bytes
        totals.metadata_bytes += message.metadata_bytes

    @property
    def total_ciphertexts(self) -> int:
        return sum(t.ciphertexts for t in self.channels.values())

    @property
    def total_protected_bytes(self) -> int:
        return sum(t.protected_bytes for t in self.channels.values())

    def as_dict(self) -> dict:
        return {
            f"{s.value}->{r.value}": {
                "ciphertexts": t.ciphertexts,
                "protected_bytes": t.protected_bytes,
                "metadata_bytes": t.metadata_bytes,
            }
            for (s, r), t in sorted(self.channels.items(),
                                    key=lambda kv: (kv[0][0].value, kv[0][1].value))
        }


def ciphertext_bytes(pk: PaillierPublicKey) -> int:
    """Channel cost of one ciphertext: nu = 2n bits."""
    return 2 * pk.bit_length // 8


@dataclass
class RunResult:
    architecture: str
    decision: Decision
    ledger: ChannelLedger
    counters: OpCounter
    transcript: list[Message]
    score: float

    def transcript_lines(self) -> list[str]:
        return [m.transcript_line() for m in self.transcript]

    def transcript_text(self) -> str:
        return "\n".join(self.transcript_lines()) + "\n"

    def transcript_sha256(self) -> str:
        return hashlib.sha256(self.transcript_text().encode()).hexdigest()

    def summary(self) -> dict:
        return {
            "architecture": self.architecture,
            "decision": {
                "score": self.decision.score,
                "threshold": self.decision.threshold,
                "accepted": self.decision.accepted,
            },
            "channels": self.ledger.as_dict(),
            "total_ciphertexts": self.ledger.total_ciphertexts,
            "total_protected_bytes": self.ledger.total_protected_bytes,
            "operations": self.counters.as_dict(),
            "transcript_sha256": self.transcript_sha256(),
        }


class _Simulation:
    def __init__(self, architecture: str):
        self.architecture = architecture
        self.entities: dict[Role, Entity] = {}
        self.ledger = ChannelLedger()
        self.transcript: list[Message] = []
        self.nu_by_key: dict[str, int] = {}

    def add_entity(self, role: Role, held_keys: dict, **store) -> Entity:
        validate_key_placement(role, held_keys, self.architecture)
        entity = Entity(role=role, held_keys=dict(held_keys), local_store=dict(store))
        self.entities[role] = entity
        for key in held_keys.values():
            if isinstance(key, PaillierPublicKey):
                self.nu_by_key[key.fingerprint] = ciphertext_bytes(key)
        return entity

    def send(self, step: str, sender: Role, receiver: Role,
             kind: str, payload):
        numbers = _payload_numbers(payload)
        nu = self.nu_by_key.get(numbers[0].key_ref)
        if nu is None:
            raise KeyMismatchError(
                f"step {step}: payload under key {numbers[0].key_ref}, which no "
                f"entity of this run holds (revoked or foreign key)")
        message = Message(
            step_label=step, sender=sender, receiver=receiver,
            payload_kind=kind, payload=payload,
            ciphertext_count=len(numbers),
            protected_bytes=len(numbers) * nu,
            metadata_bytes=len(numbers) * EXPONENT_METADATA_BYTES,
            payload_sha256=_payload_hash(numbers))
        self.ledger.record(message)
        self.transcript.append(message)
        self.entities[receiver].received.append(message)
        return payload


def _lookup(refs: Mapping, claim) -> object:
    try:
        return refs[claim]
    except KeyError:
        raise LookupError_(f"no enrolled reference for {claim!r}") from None


def run_cosine(pk: PaillierPublicKey, sk: PaillierSecretKey,
               refs: Mapping[str, ProtectedReferenceCosine], claim,
               probe, eta: float, seed: int | None = None) -> RunResult:
    """Cosine-similarity verification: steps 1-6 of the single-key figure.

    `seed` is accepted for interface uniformity; this route performs no
    probe-side encryption, so the transcript is deterministic regardless.
    """
    ref = _lookup(refs, claim)
    counter = OpCounter()
    sim = _Simulation("single")
    sim.add_entity(Role.CLIENT, {"pk": pk}, probe=np.asarray(probe, dtype=float))
    sim.add_entity(Role.DB_CONTROLLER, {"pk": pk}, references=refs)
    operator = sim.add_entity(Role.AS_OPERATOR, {"pk": pk, "sk": sk}, threshold=eta)

    # 1. probe extraction is client-local
    enc_ref = sim.send("2", Role.DB_CONTROLLER, Role.CLIENT,
                       "encrypted_reference", ref.elements)
    # 3. client folds the probe into the encrypted reference
    enc_score = comparators.score_cosine_encrypted(
        pk, ProtectedReferenceCosine(elements=enc_ref),
        sim.entities[Role.CLIENT].local_store["probe"], counter=counter)
    sim.send("4", Role.CLIENT, Role.AS_OPERATOR, "encrypted_score", enc_score)
    # 5./6. operator decrypts and decides
    score = encoding.decrypt_value(operator.held_keys["sk"], pk,
                                   enc_score, counter=counter)
    decision = Decision.make(score, eta)
    return RunResult("cosine", decision, sim.ledger, counter,
                     sim.transcript, score)


def run_euclidean(pk: PaillierPublicKey, sk: PaillierSecretKey,
                  refs: Mapping[str, "comparators.ProtectedReferenceEuclidean"],
                  claim, probe, eta: float, seed: int | None = None) -> RunResult:
    """Squared-Euclidean verification over the single-key architecture.

    Same message pattern as the cosine figure, except the reference carries
    the extra squared-sum ciphertext (F+1 in, 1 out). The decision keeps the
    uniform eta <= score rule; callers wanting a distance threshold should
    negate the score.
    """
    ref = _lookup(refs, claim)
    rng = random.Random(seed)
    counter = OpCounter()
    sim = _Simulation("single")
    sim.add_entity(Role.CLIENT, {"pk": pk}, probe=np.asarray(probe, dtype=float))
    sim.add_entity(Role.DB_CONTROLLER, {"pk": pk}, references=refs)
    operator = sim.add_entity(Role.AS_OPERATOR, {"pk": pk, "sk": sk}, threshold=eta)

    elements = sim.send("2a", Role.DB_CONTROLLER, Role.CLIENT,
                        "encrypted_reference", ref.elements)
    sum_sq = sim.send("2b", Role.DB_CONTROLLER, Role.CLIENT,
                      "encrypted_reference_sumsq", ref.sum_sq)
    enc_score = comparators.score_euclidean_encrypted(
        pk, comparators.ProtectedReferenceEuclidean(sum_sq=sum_sq, elements=elements),
        sim.entities[Role.CLIENT].local_store["probe"], rng=rng, counter=counter)
    sim.send("4", Role.CLIENT, Role.AS_OPERATOR, "encrypted_score", enc_score)
    score = encoding.decrypt_value(operator.held_keys["sk"], pk,
                                   enc_score, counter=counter)
    decision = Decision.make(score, eta)
    return RunResult("euclidean", decision, sim.ledger, counter,
                     sim.transcript, score)


def run_2cov_subject(pk: PaillierPublicKey, sk: PaillierSecretKey,
                     model: TwoCovModel,
                     refs: Mapping[str, ProtectedReference2CovSubject], claim,
                     probe, eta: float, seed: int | None = None) -> RunResult:
    """Subject-protecting verification: steps 1a-8.

    The client is provisioned with the plaintext comparator weights; exactly
    one encryption (the probe's quadratic form) and one decryption (the
    score) happen during the run.
    """
    ref = _lookup(refs, claim)
    rng = random.Random(seed)
    counter = OpCounter()
    sim = _Simulation("single")
    sim.add_entity(Role.CLIENT, {"pk": pk},
                   probe=np.asarray(probe, dtype=float),
                   cross_weight=model.cross_weight,
                   self_weight=model.self_weight)
    sim.add_entity(Role.DB_CONTROLLER, {"pk": pk}, references=refs,
                   self_weight=model.self_weight)
    operator = sim.add_entity(Role.AS_OPERATOR, {"pk": pk, "sk": sk}, threshold=eta)

    elements = sim.send("2a", Role.DB_CONTROLLER, Role.CLIENT,
                        "encrypted_reference", ref.elements)
    quad = sim.send("2b", Role.DB_CONTROLLER, Role.CLIENT,
                    "encrypted_reference_quad", ref.quad_term)
    client = sim.entities[Role.CLIENT]
    # 1b + 3 + 4 + 5: encrypt the probe quadratic form and fold the four terms
    enc_score = comparators.score_2cov_subject_encrypted(
        pk, ProtectedReference2CovSubject(elements=elements, quad_term=quad),
        client.local_store["probe"],
        client.local_store["cross_weight"], client.local_store["self_weight"],
        rng=rng, counter=counter)
    sim.send("6", Role.CLIENT, Role.AS_OPERATOR, "encrypted_score", enc_score)
    score = encoding.decrypt_value(operator.held_keys["sk"], pk,
                                   enc_score, counter=counter)
    decision = Decision.make(score, eta)
    return RunResult("2cov-subject", decision, sim.ledger, counter,
                     sim.transcript, score)


@dataclass(frozen=True)
class VendorKeySet:
    pk1: PaillierPublicKey
    sk1: PaillierSecretKey
    pk2: PaillierPublicKey
    sk2: PaillierSecretKey


def run_2cov_vendor(keys: VendorKeySet, enc_model: EncryptedModel,
                    refs: Mapping[str, ProtectedReference2CovVendor], claim,
                    probe, eta: float, seed: int | None = None) -> RunResult:
    """Subject+vendor-protecting verification: steps 1a-12 of the two-key figure."""
    ref = _lookup(refs, claim)
    rng = random.Random(seed)
    counter = OpCounter()
    sim = _Simulation("vendor")
    sim.add_entity(Role.CLIENT, {"pk1": keys.pk1},
                   probe=np.asarray(probe, dtype=float))
    sim.add_entity(Role.DB_CONTROLLER, {"pk1": keys.pk1}, references=refs)
    operator = sim.add_entity(
        Role.AS_OPERATOR,
        {"pk1": keys.pk1, "sk1": keys.sk1, "pk2": keys.pk2})
    sim.add_entity(Role.DB_VENDOR, {"pk2": keys.pk2}, model=enc_model)
    vendor_as = sim.add_entity(Role.AS_VENDOR,
                               {"pk2": keys.pk2, "sk2": keys.sk2}, threshold=eta)

    elements = sim.send("2a", Role.DB_CONTROLLER, Role.CLIENT,
                        "encrypted_reference", ref.elements)
    gram = sim.send("2b", Role.DB_CONTROLLER, Role.CLIENT,
                    "encrypted_reference_gram", ref.gram)
    # 1b + 3 + 4: the client's grids
    sym_cross, gram_sum = comparators.client_compute_vendor(
        keys.pk1, ProtectedReference2CovVendor(elements=elements, gram=gram),
        sim.entities[Role.CLIENT].local_store["probe"], rng=rng, counter=counter)
    sim.send("5a", Role.CLIENT, Role.AS_OPERATOR, "encrypted_cross_grid", sym_cross)
    sim.send("5b", Role.CLIENT, Role.AS_OPERATOR, "encrypted_gram_grid", gram_sum)
    model_cross = sim.send("6a", Role.DB_VENDOR, Role.AS_OPERATOR,
                           "encrypted_model_cross", enc_model.cross_weight_enc)
    model_self = sim.send("6b", Role.DB_VENDOR, Role.AS_OPERATOR,
                          "encrypted_model_self", enc_model.self_weight_enc)
    # 7 + 8 + 9: operator decrypts the grids under key 1 and folds under key 2
    enc_score = comparators.operator_combine_vendor(
        operator.held_keys["sk1"], keys.pk1, keys.pk2,
        EncryptedModel(cross_weight_enc=model_cross, self_weight_enc=model_self),
        sym_cross, gram_sum, counter=counter)
    sim.send("10", Role.AS_OPERATOR, Role.AS_VENDOR, "encrypted_score", enc_score)
    score = encoding.decrypt_value(vendor_as.held_keys["sk2"], keys.pk2,
                                   enc_score, counter=counter)
    decision = Decision.make(score, eta)
    return RunResult("2cov-vendor", decision, sim.ledger, counter,
                     sim.transcript, score)


def audit_key_hygiene(result: RunResult) -> None:
    """Assert no message payload discloses a secret key or plain feature vector.

    All verification traffic in the three architectures is ciphertext-only;
    anything else in a payload is a protocol violation.
    """
    for message in result.transcript:
        leaves = _payload_numbers(message.payload)
        for leaf in leaves:
            if not isinstance(leaf, EncryptedNumber):
                raise ConfigurationError(
                    f"step {message.step_label}: non-ciphertext payload leaf "
                    f"{type(leaf).__name__}")
        if isinstance(message.payload, (PaillierSecretKey, np.ndarray, list, float)):
            raise ConfigurationError(
                f"step {message.step_label}: plaintext payload disclosed")


# ---------------------------------------------------------------------------
# closed-form complexity: the verification-time tables plus preload variants.

COMPARATOR_KINDS = ("euclidean", "cosine", "2cov-subject", "2cov-vendor")


def _operation_formulas(kind: str, F: int) -> dict:
    if kind == "euclidean":
        return {"encryptions": F, "decryptions": 1, "additions": F - 1,
                "products": 2 * F + 4, "exponentiations": 2 * F}
    if kind == "cosine":
        return {"encryptions": 0, "decryptions": 1, "additions": 0,
                "products": F - 1, "exponentiations": F}
    if kind == "2cov-subject":
        return {"encryptions": 1, "decryptions": 1,
                "additions": 4 * F * (F - 1),
                "products": 4 * F * F + 2 * F + 1,
                "exponentiations": 2 * F}
    if kind == "2cov-vendor":
        return {"encryptions": F * F, "decryptions": 2 * F * F + 1,
                "additions": 0, "products": 5 * F * F - 1,
                "exponentiations": 4 * F * F}
    raise ParameterError(f"unknown comparator kind {kind!r}")


def _size_formulas(kind: str, F: int, nu_bytes: float, p_bits: int) -> dict:
    plain_template = p_bits * F / 8
    plain_model = 2 * p_bits * F * F / 8
    if kind == "euclidean":
        sizes = {"protected_template_bytes": nu_bytes * (F + 1),
                 "channel_bytes": nu_bytes * (F + 2)}
    elif kind == "cosine":
        sizes = {"protected_template_bytes": nu_bytes * F,
                 "channel_bytes": nu_bytes * (F + 1)}
    elif kind == "2cov-subject":
        sizes = {"protected_template_bytes": nu_bytes * (F + 1),
                 "protected_model_bytes": 0.0,
                 "plain_model_bytes": plain_model,
                 "channel_bytes": nu_bytes * (F + 2)}
    elif kind == "2cov-vendor":
        sizes = {"protected_template_bytes": nu_bytes * (F * F + F),
                 "protected_model_bytes": 2 * nu_bytes * F * F,
                 "plain_model_bytes": plain_model,
                 "channel_bytes": nu_bytes * (5 * F * F + F + 1)}
    else:
        raise ParameterError(f"unknown comparator kind {kind!r}")
    sizes["plain_template_bytes"] = plain_template
    return sizes


def complexity_report(kind: str, F: int, nu_bytes: float = 512.0,
                      p_bits: int = 64) -> dict:
    """Evaluate every closed-form count/size of the verification tables.

    `nu_bytes` is the per-ciphertext channel cost (2n bits; 512 bytes =
    0.5 KiB for 2048-bit keys). Sizes are reported in bytes plus KiB/MiB.
    """
    if F < 1:
        raise ParameterError("F must be >= 1")
    if nu_bytes <= 0:
        raise ParameterError("nu must be positive")
    report = {"comparator": kind, "F": F, "nu_bytes": nu_bytes, "p_bits": p_bits}
    report.update(_operation_formulas(kind, F))
    if kind == "euclidean":
        # the table prices the probe at F encryptions; the implementation
        # encrypts the probe's squared sum once, so runs instrument 1
        report["encryptions_instrumented"] = 1
    sizes = _size_formulas(kind, F, nu_bytes, p_bits)
    report.update(sizes)
    for name, value in sizes.items():
        base = name[: -len("_bytes")]
        report[base + "_kib"] = value / 1024.0
        report[base + "_mib"] = value / (1024.0 * 1024.0)
    return report


def channel_ciphertext_formulas(kind: str, F: int) -> dict[tuple[Role, Role], int]:
    """Closed-form per-channel ciphertext counts for a single verification."""
    if kind == "cosine":
        return {(Role.DB_CONTROLLER, Role.CLIENT): F,
                (Role.CLIENT, Role.AS_OPERATOR): 1}
    if kind in ("euclidean", "2cov-subject"):
        return {(Role.DB_CONTROLLER, Role.CLIENT): F + 1,
                (Role.CLIENT, Role.AS_OPERATOR): 1}
    if kind == "2cov-vendor":
        return {(Role.DB_CONTROLLER, Role.CLIENT): F * F + F,
                (Role.CLIENT, Role.AS_OPERATOR): 2 * F * F,
                (Role.DB_VENDOR, Role.AS_OPERATOR): 2 * F * F,
                (Role.AS_OPERATOR, Role.AS_VENDOR): 1}
    raise ParameterError(f"unknown comparator kind {kind!r}")


def preload_analysis(F: int, nu_bytes: float = 512.0) -> dict:
    """Channel totals for the vendor scheme when heavy payloads are preloaded."""
    if F < 0:
        raise ParameterError("F must be >= 0")
    if nu_bytes <= 0:
        raise ParameterError("nu must be positive")
    model_preloaded = nu_bytes * (3 * F * F + F + 1)
    all_preloaded = nu_bytes * (2 * F * F + 1)
    return {
        "F": F,
        "nu_bytes": nu_bytes,
        "model_preloaded_bytes": model_preloaded,
        "model_preloaded_mib": model_preloaded / (1024.0 * 1024.0),
        "model_and_templates_preloaded_bytes": all_preloaded,
        "model_and_templates_preloaded_mib": all_preloaded / (1024.0 * 1024.0),
    }
