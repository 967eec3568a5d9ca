"""Prime-field scalar arithmetic.

Scalars are plain ints kept in canonical form (reduced into [0, p)).  All
protocol exponents live in the scalar field of the group order, so every
module routes its arithmetic through a :class:`PrimeField` instance.
"""

from __future__ import annotations

import gmpy2

from .errors import ZeroInversionError


class PrimeField:
    """Arithmetic modulo a prime ``p`` with canonical residues."""

    def __init__(self, p: int):
        if p < 2 or not gmpy2.is_prime(p):
            raise ValueError(f"field modulus must be prime, got {p}")
        self.p = int(p)

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and self.p == other.p

    def reduce(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroInversionError("inverse of 0 is undefined")
        return int(gmpy2.invert(a, self.p))

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def rand(self, rng) -> int:
        """Uniform element of Z_p (rng only needs ``randrange``)."""
        return rng.randrange(self.p)

    def rand_nonzero(self, rng) -> int:
        """Uniform element of Z_p*."""
        return rng.randrange(1, self.p)

    # -- helpers shared by signing and verification ------------------------

    def prod(self, values) -> int:
        out = 1
        for v in values:
            out = out * v % self.p
        return out

    def poly_eval(self, coeffs, x: int) -> int:
        """Evaluate sum(coeffs[i] * x^i) by Horner's rule."""
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * x + c) % self.p
        return acc

    def expand_roots(self, roots) -> list[int]:
        """Coefficients of prod_i (y + root_i), ascending degree, monic.

        The empty product is the constant polynomial 1.
        """
        coeffs = [1]
        for root in roots:
            root %= self.p
            coeffs.append(1)
            for j in range(len(coeffs) - 2, 0, -1):
                coeffs[j] = (coeffs[j - 1] + coeffs[j] * root) % self.p
            coeffs[0] = coeffs[0] * root % self.p
        return coeffs

    # -- encoding ----------------------------------------------------------

    @property
    def byte_length(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def to_bytes(self, a: int) -> bytes:
        return (a % self.p).to_bytes(self.byte_length, "big")

    def from_bytes(self, data: bytes) -> int:
        if len(data) != self.byte_length:
            raise ValueError(f"expected {self.byte_length} bytes, got {len(data)}")
        v = int.from_bytes(data, "big")
        if v >= self.p:
            raise ValueError("encoded scalar out of range")
        return v

    def to_hex(self, a: int) -> str:
        return self.to_bytes(a).hex()

    def from_hex(self, text: str) -> int:
        return self.from_bytes(bytes.fromhex(text))
