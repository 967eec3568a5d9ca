"""Bilinear-group backends and the hash suite.

Two interchangeable backends expose the same surface:

* :class:`TypeABackend` - the production group: a symmetric pairing on a
  supersingular curve (see :mod:`asyncpay.typea`).  Group elements are opaque
  affine points, target elements live in F_{q^2}.
* :class:`ToyBackend` - a deterministic exponent-tracking group of prime
  order ``p``: every element is stored as its discrete log relative to the
  generator (target elements relative to ``e(g, g)``), and the pairing of
  stored exponents ``a`` and ``b`` is exactly ``a*b mod p``.  Equality of
  group expressions is decidable, which makes the toy backend the brute-force
  oracle for every pairing equation in the test suite.

The hash suite provides ``hash_to_scalar`` (bytes to Z_p),
``hash_to_group`` (bytes to G, never the identity) and ``gt_to_bytes``
(G_T to a fixed 32-byte block used as a XOR pad).  All three are domain
separated and deterministic across processes.
"""

from __future__ import annotations

import functools
import hashlib

from . import typea
from .errors import EncodingError
from .fields import PrimeField

PAD_BYTES = 32  # output width of gt_to_bytes (the "n" of the XOR pad)

_DOMAIN_H = b"asyncpay/H0|"
_DOMAIN_H1 = b"asyncpay/H1|"
_DOMAIN_H2 = b"asyncpay/H2|"

# Default toy group order: a Mersenne prime large enough that random digests
# essentially never collide in lifecycle tests, small enough to stay readable.
TOY_DEFAULT_ORDER = 2**61 - 1

TOY_TAG = 0x01
TYPEA_TAG = 0x02


def _hash_mod(data: bytes, modulus: int) -> int:
    return int.from_bytes(hashlib.sha256(_DOMAIN_H + data).digest(), "big") % modulus


# Curve hashing costs a square root plus a cofactor ladder; time labels and
# digest encodings repeat heavily, so memoize (the map is pure).
@functools.lru_cache(maxsize=512)
def _typea_hash_to_group(data: bytes):
    return typea.hash_to_subgroup(_DOMAIN_H1 + data)


class ToyBackend:
    """Exponent-tracking group: decidable equality, instant arithmetic."""

    name = "toy"
    tag = TOY_TAG

    def __init__(self, order: int = TOY_DEFAULT_ORDER):
        self.field = PrimeField(order)
        self.order = self.field.p
        self.generator = 1
        self.identity = 0
        self.gt_generator = 1
        self.gt_identity = 0

    def describe(self) -> dict:
        return {
            "backend": self.name,
            "group_order": str(self.order),
            "group_order_bits": self.order.bit_length(),
            "pairing": "exponent-tracking toy",
        }

    # group ops (elements are exponents mod order)
    def mul(self, a, b):
        return (a + b) % self.order

    def exp(self, a, k: int):
        return a * (k % self.order) % self.order

    def inv(self, a):
        return (-a) % self.order

    def is_identity(self, a) -> bool:
        return a == 0

    def multiexp(self, pairs, tables=None):
        acc = 0
        for base, k in pairs:
            acc = (acc + base * k) % self.order
        return acc

    def multiexp_tables(self, bases):
        return None

    # pairing
    def pair(self, a, b):
        return a * b % self.order

    def pair_product(self, pairs):
        acc = 0
        for a, b in pairs:
            acc = (acc + a * b) % self.order
        return acc

    # target group
    def gt_mul(self, x, y):
        return (x + y) % self.order

    def gt_exp(self, x, k: int):
        return x * (k % self.order) % self.order

    def gt_is_identity(self, x) -> bool:
        return x == 0

    # hash suite
    def hash_to_scalar(self, data: bytes) -> int:
        return _hash_mod(data, self.order)

    def hash_to_group(self, data: bytes):
        e = _hash_mod(_DOMAIN_H1 + data, self.order)
        return e if e != 0 else 1  # H1 never hits the identity

    def gt_to_bytes(self, x) -> bytes:
        canon = x.to_bytes((self.order.bit_length() + 7) // 8, "big")
        return hashlib.sha256(_DOMAIN_H2 + canon).digest()[:PAD_BYTES]

    # encoding
    def element_to_bytes(self, a) -> bytes:
        return bytes([self.tag]) + self.field.to_bytes(a)

    def element_from_bytes(self, data: bytes):
        if not data or data[0] != self.tag:
            raise EncodingError("not a toy-backend element")
        try:
            return self.field.from_bytes(data[1:])
        except ValueError as exc:
            raise EncodingError(str(exc)) from exc


class TypeABackend:
    """Symmetric pairing on the stock 512/160-bit type A curve."""

    name = "type-a"
    tag = TYPEA_TAG

    def __init__(self):
        self.field = PrimeField(int(typea.R))
        self.order = self.field.p
        self.generator = typea.GENERATOR
        self.identity = None
        self.gt_identity = typea.GT_ONE
        self.gt_generator = typea.pairing(self.generator, self.generator)

    def describe(self) -> dict:
        return {
            "backend": self.name,
            "group_order": str(self.order),
            "group_order_bits": self.order.bit_length(),
            "base_field_bits": int(typea.Q).bit_length(),
            "pairing": "modified Tate, supersingular y^2 = x^3 + x, k = 2",
        }

    def mul(self, a, b):
        return typea.affine_add(a, b)

    def exp(self, a, k: int):
        return typea.scalar_mul(a, k % self.order)

    def inv(self, a):
        return typea.affine_neg(a)

    def is_identity(self, a) -> bool:
        return a is None

    def multiexp(self, pairs, tables=None):
        return typea.multi_scalar_mul(pairs, tables=tables)

    def multiexp_tables(self, bases):
        return typea.precompute_tables(bases)

    def pair(self, a, b):
        return typea.pairing(a, b)

    def pair_product(self, pairs):
        return typea.pairing_product(pairs)

    def gt_mul(self, x, y):
        return typea.fq2_mul(x, y)

    def gt_exp(self, x, k: int):
        return typea.fq2_pow(x, k % self.order)

    def gt_is_identity(self, x) -> bool:
        return x == typea.GT_ONE

    def hash_to_scalar(self, data: bytes) -> int:
        return _hash_mod(data, self.order)

    def hash_to_group(self, data: bytes):
        return _typea_hash_to_group(bytes(data))

    def gt_to_bytes(self, x) -> bytes:
        a, b = x
        canon = int(a).to_bytes(64, "big") + int(b).to_bytes(64, "big")
        return hashlib.sha256(_DOMAIN_H2 + canon).digest()[:PAD_BYTES]

    def element_to_bytes(self, a) -> bytes:
        if a is None:
            return bytes([self.tag, 0x00]) + b"\x00" * 64
        x, y = a
        flag = 0x02 | (int(y) & 1)
        return bytes([self.tag, flag]) + int(x).to_bytes(64, "big")

    def element_from_bytes(self, data: bytes):
        if len(data) != 66 or data[0] != self.tag:
            raise EncodingError("not a type-a element encoding")
        flag = data[1]
        if flag == 0x00:
            if any(data[2:]):
                raise EncodingError("nonzero identity encoding")
            return None
        if flag not in (0x02, 0x03):
            raise EncodingError(f"bad compression flag {flag:#x}")
        x = int.from_bytes(data[2:], "big")
        if x >= typea.Q:
            raise EncodingError("x coordinate out of range")
        point = typea.point_from_x(typea.mpz(x), flag & 1)
        if point is None:
            raise EncodingError("x is not on the curve")
        if not typea.in_subgroup(point):
            raise EncodingError("point outside the prime-order subgroup")
        return point


def element_to_hex(backend, a) -> str:
    return backend.element_to_bytes(a).hex()


def element_from_hex(backend, text: str):
    return backend.element_from_bytes(bytes.fromhex(text))


def scalar_to_hex(backend, s: int) -> str:
    return backend.field.to_hex(s)


def scalar_from_hex(backend, text: str) -> int:
    return backend.field.from_hex(text)


def make_backend(name: str, *, toy_order: int = TOY_DEFAULT_ORDER):
    """Factory for CLI/scenario use: ``toy`` or ``production``/``type-a``."""
    if name == "toy":
        return ToyBackend(toy_order)
    if name in ("production", "type-a", "typea"):
        return TypeABackend()
    raise ValueError(f"unknown backend {name!r}")
