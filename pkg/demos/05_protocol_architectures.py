"""Run the three verification architectures as in-process simulations and
inspect transcripts, channel ledgers, and operation counters.

Single-key: the client folds its probe into the encrypted reference and the
operator's authentication server decrypts one score. Two-key: the operator
decrypts only auxiliary grids under key 1 and assembles the score under the
vendor's key 2, so neither templates nor model weights are ever in the clear
outside their owners."""

import random

import numpy as np

from hevoice import comparators, protocol
from hevoice.protocol import VendorKeySet
from hevoice.twocov import derive_hyperparameters, length_normalize
from hevoice import paillier

rng = random.Random(5)
pk, sk = paillier.keygen(512, seed=5)
pk2, sk2 = paillier.keygen(512, seed=6)

dim = 4
gen = np.random.default_rng(5)
model = derive_hyperparameters(np.eye(dim) * 2.0, np.eye(dim), np.zeros(dim))
y = gen.normal(size=dim)
x = y + gen.normal(size=dim) * 0.1  # genuine-ish probe


def show(result):
    print(f"\n=== {result.architecture} ===")
    for line in result.transcript_lines():
        print(" ", line)
    print("  channels:", result.ledger.as_dict())
    print("  ops:     ", {k: v for k, v in result.counters.as_dict().items() if v})
    print(f"  score={result.score:+.6f} eta={result.decision.threshold}"
          f" accepted={result.decision.accepted}")


refs = {"alice": comparators.enroll_cosine(pk, length_normalize(y), rng=rng)}
show(protocol.run_cosine(pk, sk, refs, "alice", length_normalize(x),
                         eta=0.5, seed=1))

refs = {"alice": comparators.enroll_2cov_subject(pk, model.self_weight, y, rng=rng)}
show(protocol.run_2cov_subject(pk, sk, model, refs, "alice", x, eta=0.0, seed=2))

keys = VendorKeySet(pk1=pk, sk1=sk, pk2=pk2, sk2=sk2)
enc_model = comparators.encrypt_model(pk2, model, rng=rng)
refs = {"alice": comparators.enroll_2cov_vendor(pk, y, rng=rng)}
result = protocol.run_2cov_vendor(keys, enc_model, refs, "alice", x,
                                  eta=0.0, seed=3)
show(result)
protocol.audit_key_hygiene(result)
print("\nkey-hygiene audit passed: every payload is ciphertext only")
