"""Discrete-log trapdoor chameleon hash.

The digest of a message ``m`` under randomness ``r`` is ``h = g^H(m) *
pk^r`` with ``pk = g^x``.  Whoever holds the trapdoor ``x`` can open the
same digest to any other message: solving ``H(m) + x*r = H(m') + x*r'``
for ``r'`` gives the closed form

    r' = (H(m) + x*r - H(m')) / x  (mod p).

Collision resistance for everyone else reduces to the discrete log of
``pk``; the digest itself never changes, which is what keeps hash pointers
valid after a rewrite.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import StaleDigestError, TrapdoorZeroError


@dataclass(frozen=True)
class TrapdoorKeyPair:
    sk: int  # trapdoor x
    pk: object  # g^x


def ch_keygen(backend, rng) -> TrapdoorKeyPair:
    x = backend.field.rand_nonzero(rng)
    return TrapdoorKeyPair(sk=x, pk=backend.exp(backend.generator, x))


def ch_hash(backend, pk, message: bytes, r: int):
    """h = g^H(m) * pk^r."""
    return backend.mul(
        backend.exp(backend.generator, backend.hash_to_scalar(message)),
        backend.exp(pk, r),
    )


def ch_verify(backend, pk, message: bytes, h, r: int) -> bool:
    return ch_hash(backend, pk, message, r) == h


def ch_adapt(backend, sk: int, message: bytes, h, r: int, new_message: bytes) -> int:
    """Randomness r' opening the digest h to ``new_message``.

    Refuses to run when (message, r) do not actually open h: adapting a
    stale digest would silently produce garbage.
    """
    f = backend.field
    if sk % f.p == 0:
        raise TrapdoorZeroError("trapdoor must be nonzero")
    pk = backend.exp(backend.generator, sk)
    if not ch_verify(backend, pk, message, h, r):
        raise StaleDigestError("digest does not open to the supplied message")
    old = f.add(backend.hash_to_scalar(message), f.mul(sk, r))
    return f.div(f.sub(old, backend.hash_to_scalar(new_message)), sk)
