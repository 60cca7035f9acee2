"""Operation tallies mirroring the complexity analysis of the two schemes.

Counts are scheme-level: one `exponentiation` per plaintext scaling of a
ciphertext, one `ciphertext_product` per homomorphic addition, plus
encrypt/decrypt calls and the plaintext-side multiply/add work. The extra
ciphertext scalings spent on exponent alignment inside the float codec sit
below that abstraction and are tallied separately in `alignments`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass
class OpCounter:
    encryptions: int = 0
    decryptions: int = 0
    ciphertext_products: int = 0
    exponentiations: int = 0
    plain_additions: int = 0
    plain_products: int = 0
    alignments: int = 0

    def as_dict(self) -> dict[str, int]:
        return asdict(self)

    def snapshot(self) -> "OpCounter":
        return OpCounter(**self.as_dict())

    def delta(self, earlier: "OpCounter") -> "OpCounter":
        """Per-field difference since an earlier snapshot."""
        return OpCounter(**{
            f.name: getattr(self, f.name) - getattr(earlier, f.name)
            for f in fields(self)
        })

    def merge(self, other: "OpCounter") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
