"""Walk through the integer cryptosystem: keys, probabilistic encryption,
and the two homomorphic maps (ciphertext product = plaintext sum,
ciphertext exponentiation = plaintext scaling)."""

import random

from hevoice import paillier

rng = random.Random(7)

pk, sk = paillier.keygen(512, seed=7)
print(f"modulus bits : {pk.bit_length}")
print(f"fingerprint  : {pk.fingerprint}")
print(f"generator    : n + 1 (fast path)")

# the same plaintext encrypts to different ciphertexts every time
m = 1234567
c_a = paillier.encrypt(pk, m, rng=rng)
c_b = paillier.encrypt(pk, m, rng=rng)
print(f"\nencrypt({m}) twice -> distinct ciphertexts: {c_a.value != c_b.value}")
print(f"both decrypt to {paillier.decrypt(sk, pk, c_a)}")

# ciphertext product decrypts to the plaintext sum
c_sum = paillier.add_cipher(pk, paillier.encrypt(pk, 41, rng=rng),
                            paillier.encrypt(pk, 1, rng=rng))
print(f"\ndec(enc(41) * enc(1))  = {paillier.decrypt(sk, pk, c_sum)}")

# ciphertext exponentiation decrypts to the scaled plaintext
c_scaled = paillier.mul_const(pk, paillier.encrypt(pk, 6, rng=rng), 7)
print(f"dec(enc(6) ^ 7)        = {paillier.decrypt(sk, pk, c_scaled)}")

# negative constants run through the modular inverse of the ciphertext
c_neg = paillier.mul_const(pk, paillier.encrypt(pk, 6, rng=rng), -7)
print(f"dec(enc(6) ^ -7)       = {paillier.decrypt(sk, pk, c_neg)}  (= -42 mod n)")

# re-randomization: same plaintext, fresh ciphertext value
fresh = paillier.rerandomize(pk, c_scaled, rng=rng)
print(f"\nrerandomize keeps the plaintext: {paillier.decrypt(sk, pk, fresh)}"
      f", changes the value: {fresh.value != c_scaled.value}")
