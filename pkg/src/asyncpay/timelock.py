"""Timed-release encryption gated by a time server.

The server holds ``alpha'`` and publishes ``Z = g^alpha'``.  At each time
instant ``T`` it releases the time instant key ``k_t = H1(T)^alpha'``,
which anyone can authenticate by checking ``e(Z, H1(T)) = e(g, k_t)``.

A sender who agreed on a designation secret ``s`` (public part ``(g^s,
Z^s)``) locks an n-byte payload to time ``T``:

    r0 random,  U = g^r0,  K = e((Z^s)^r0, H1(T)),  rho = payload xor H2(K)

and the designated receiver recovers ``K = e(U, k_t)^s`` once ``k_t`` is
out.  Nobody lacking either ``k_t`` (before time T) or ``s`` (not
designated) reaches the pad.

Time labels are opaque bytes here; the simulator uses the decimal tick
count in ASCII so that every platform hashes identical label bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .backends import PAD_BYTES
from .errors import (
    DesignationCheckError,
    EncodingError,
    LabelMismatchError,
    PayloadLengthError,
)


@dataclass(frozen=True)
class ServerKeyPair:
    sk: int  # alpha'
    pk: object  # Z = g^alpha'


@dataclass(frozen=True)
class DesignationKey:
    """Per-agreement secret ``s`` with its public pair (g^s, Z^s)."""

    s: int
    g_s: object
    z_s: object


@dataclass(frozen=True)
class TimeInstantKey:
    t_label: bytes
    k_t: object  # H1(T)^alpha'


@dataclass(frozen=True)
class TimeLockedCiphertext:
    t_label: bytes
    u: object  # g^r0
    rho: bytes  # payload xor H2(K), exactly PAD_BYTES long


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def server_keygen(backend, rng) -> ServerKeyPair:
    sk = backend.field.rand_nonzero(rng)
    return ServerKeyPair(sk=sk, pk=backend.exp(backend.generator, sk))


def make_designation(backend, server_pk, rng) -> DesignationKey:
    s = backend.field.rand_nonzero(rng)
    return DesignationKey(
        s=s,
        g_s=backend.exp(backend.generator, s),
        z_s=backend.exp(server_pk, s),
    )


def designation_ok(backend, server_pk, designation: DesignationKey) -> bool:
    """e(g^s, Z) == e(g, Z^s): the public pair really shares one ``s``."""
    return backend.pair(designation.g_s, server_pk) == backend.pair(
        backend.generator, designation.z_s
    )


def extract_tik(backend, server_sk: int, t_label: bytes) -> TimeInstantKey:
    base = backend.hash_to_group(t_label)
    return TimeInstantKey(t_label=bytes(t_label), k_t=backend.exp(base, server_sk))


def verify_tik(backend, server_pk, tik: TimeInstantKey) -> bool:
    return backend.pair(server_pk, backend.hash_to_group(tik.t_label)) == backend.pair(
        backend.generator, tik.k_t
    )


def tre_encrypt(
    backend, server_pk, designation: DesignationKey, payload: bytes, t_label: bytes, rng
) -> TimeLockedCiphertext:
    if len(payload) != PAD_BYTES:
        raise PayloadLengthError(f"payload must be {PAD_BYTES} bytes, got {len(payload)}")
    if not designation_ok(backend, server_pk, designation):
        raise DesignationCheckError("designation key fails its pairing guard")
    r0 = backend.field.rand_nonzero(rng)
    u = backend.exp(backend.generator, r0)
    k = backend.pair(backend.exp(designation.z_s, r0), backend.hash_to_group(t_label))
    return TimeLockedCiphertext(
        t_label=bytes(t_label), u=u, rho=_xor(payload, backend.gt_to_bytes(k))
    )


def tre_decrypt(backend, cipher: TimeLockedCiphertext, tik: TimeInstantKey, s: int) -> bytes:
    """rho xor H2(e(U, k_t)^s); correct exactly when tik and s are the right ones."""
    if tik.t_label != cipher.t_label:
        raise LabelMismatchError(
            f"ciphertext is locked to {cipher.t_label!r}, key is for {tik.t_label!r}"
        )
    k = backend.gt_exp(backend.pair(cipher.u, tik.k_t), s)
    return _xor(cipher.rho, backend.gt_to_bytes(k))


# wire format: 1-byte label length, label, U (canonical element), rho raw


def ciphertext_to_bytes(backend, cipher: TimeLockedCiphertext) -> bytes:
    if len(cipher.t_label) > 255:
        raise EncodingError("time label longer than 255 bytes")
    return (
        bytes([len(cipher.t_label)])
        + cipher.t_label
        + backend.element_to_bytes(cipher.u)
        + cipher.rho
    )


def ciphertext_from_bytes(backend, data: bytes) -> TimeLockedCiphertext:
    if not data:
        raise EncodingError("empty ciphertext")
    n = data[0]
    label = data[1 : 1 + n]
    if len(label) != n:
        raise EncodingError("truncated time label")
    rest = data[1 + n :]
    if len(rest) < PAD_BYTES:
        raise EncodingError("truncated ciphertext body")
    u = backend.element_from_bytes(rest[:-PAD_BYTES])
    return TimeLockedCiphertext(t_label=label, u=u, rho=rest[-PAD_BYTES:])
