"""Distance and similarity scores computed without ever decrypting the
reference: squared Euclidean, cosine over unit vectors, and the
two-covariance log-likelihood ratio (subject-protecting route)."""

import random

import numpy as np

from hevoice import comparators, encoding, paillier
from hevoice.twocov import derive_hyperparameters, length_normalize, score_discriminative

rng = random.Random(11)
pk, sk = paillier.keygen(512, seed=11)

x = np.array([1.0, 2.0])
y = np.array([3.0, 4.0])

ref = comparators.enroll_euclidean(pk, y, rng=rng)
enc_distance = comparators.score_euclidean_encrypted(pk, ref, x, rng=rng)
print(f"squared Euclidean  encrypted={encoding.decrypt_value(sk, pk, enc_distance)}"
      f"  plaintext={float(np.sum((x - y) ** 2))}")

xu, yu = length_normalize(x), length_normalize(y)
ref = comparators.enroll_cosine(pk, yu, rng=rng)
enc_cos = comparators.score_cosine_encrypted(pk, ref, xu)
print(f"cosine similarity  encrypted={encoding.decrypt_value(sk, pk, enc_cos):.12f}"
      f"  plaintext={float(xu @ yu):.12f}")

# two-covariance: the client holds the plaintext weights, the reference
# stores enc(Y) plus the quadratic self term enc(Y' G Y)
model = derive_hyperparameters(np.eye(2), np.eye(2), np.zeros(2))
e1 = np.array([1.0, 0.0])
ref = comparators.enroll_2cov_subject(pk, model.self_weight, e1, rng=rng)
enc_llr = comparators.score_2cov_subject_encrypted(
    pk, ref, e1, model.cross_weight, model.self_weight, rng=rng)
print(f"two-covariance     encrypted={encoding.decrypt_value(sk, pk, enc_llr):.12f}"
      f"  plaintext={score_discriminative(model, e1, e1):.12f}  (= 1/6)")

# calibrated score: re-apply the constant offset after decryption
decrypted = encoding.decrypt_value(sk, pk, enc_llr)
print(f"with offset        {comparators.add_calibration_offset(decrypted, model):.12f}")
