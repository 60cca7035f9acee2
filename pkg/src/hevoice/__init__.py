"""Privacy-preserving speaker verification with additively homomorphic encryption.

Layers, bottom up:

* :mod:`hevoice.paillier`     integer cryptosystem (keygen/encrypt/decrypt,
                              ciphertext product and exponentiation)
* :mod:`hevoice.encoding`     signed floats as banded mantissa/exponent pairs
* :mod:`hevoice.linalg`       encrypted vectors/matrices: dot, outer,
                              Hadamard, Frobenius folds
* :mod:`hevoice.twocov`       two-covariance comparator (training, scoring)
* :mod:`hevoice.comparators`  protected references and encrypted scores
* :mod:`hevoice.protocol`     multi-party simulation, ledgers, complexity tables
* :mod:`hevoice.metrics`      ROCCH-EER, minDCF, Cllr/min-Cllr, calibration
* :mod:`hevoice.synthdata`    seeded synthetic corpora and trial sets
"""

from .counters import OpCounter
from .encoding import EncodedNumber, EncryptedNumber, decode, encode
from .exceptions import HevoiceError
from .linalg import EncryptedMatrix, EncryptedVector
from .paillier import Ciphertext, PaillierPublicKey, PaillierSecretKey, keygen
from .twocov import LabeledCorpus, TwoCovModel, derive_hyperparameters

__version__ = "0.1.0"

__all__ = [
    "Ciphertext",
    "EncodedNumber",
    "EncryptedMatrix",
    "EncryptedNumber",
    "EncryptedVector",
    "HevoiceError",
    "LabeledCorpus",
    "OpCounter",
    "PaillierPublicKey",
    "PaillierSecretKey",
    "TwoCovModel",
    "decode",
    "derive_hyperparameters",
    "encode",
    "keygen",
    "__version__",
]
