"""The composed deferred-payment scheme.

Roles and their keys:

* the administrator runs :func:`setup` (master exponent ``alpha``, public
  power chain, hash descriptor),
* users sign with ``beta`` (aggregatable), own a chameleon trapdoor
  ``sk_h`` for their redactable transactions, and hold a timed-release
  designation secret ``s``,
* providers sign rewrites with ``mu``,
* the time server holds ``alpha'`` and publishes time instant keys.

A deferred transaction binds the pair (ID, payload) through a chameleon
digest ``h``; the digest scalar is signed, the per-user signatures are
aggregated, and the chameleon trapdoor travels inside a ciphertext locked
to the payment's due time.  Once the server releases that time's key, the
designated provider recovers the trapdoor, rewrites the payload in place
(same ``h``, fresh randomness ``r'``) and re-signs with its own key, so a
rewritten transaction is attributed to the provider.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

from . import chameleon, lvs, timelock
from .backends import PAD_BYTES, element_from_hex, element_to_hex
from .errors import BoundExceededError, EncodingError

logger = logging.getLogger(__name__)

HASH_DESCRIPTOR = "sha256/asyncpay-domains-v1"

_TRAPDOOR_TAG = 0x54


# --------------------------------------------------------------------------
# canonical transaction encoding
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TxPayload:
    payee: str
    amount: int  # integer currency units
    due_tick: int
    memo: bytes = b""

    def __post_init__(self):
        if not 0 <= self.amount < 2**64:
            raise ValueError("amount out of range")
        if not 0 <= self.due_tick < 2**64:
            raise ValueError("due_tick out of range")
        if len(self.memo) > 65535:
            raise ValueError("memo too long")


def encode_payload(payload: TxPayload) -> bytes:
    """Fixed field order, length-prefixed: payee, amount, due_tick, memo."""
    payee = payload.payee.encode("utf-8")
    if len(payee) > 65535:
        raise ValueError("payee too long")
    return (
        b"TXP1"
        + len(payee).to_bytes(2, "big")
        + payee
        + payload.amount.to_bytes(8, "big")
        + payload.due_tick.to_bytes(8, "big")
        + len(payload.memo).to_bytes(2, "big")
        + payload.memo
    )


def encode_message(tx_id: bytes, payload: TxPayload) -> bytes:
    """Canonical bytes of the (ID, payload) pair that digests commit to."""
    if len(tx_id) > 65535:
        raise ValueError("transaction id too long")
    return b"TXM1" + len(tx_id).to_bytes(2, "big") + bytes(tx_id) + encode_payload(payload)


def payload_digest(tx_id: bytes, payload: TxPayload) -> bytes:
    """Plain content digest used for redaction logs and immutable entries."""
    return hashlib.sha256(encode_message(tx_id, payload)).digest()


def tick_label(tick: int) -> bytes:
    """Canonical time label: unsigned decimal tick count as ASCII bytes."""
    if tick < 0:
        raise ValueError("ticks are nonnegative")
    return str(int(tick)).encode("ascii")


def scalarize(backend, h_element) -> int:
    """Scalar digest of a chameleon hash element (what actually gets signed)."""
    return backend.hash_to_scalar(b"digest|" + backend.element_to_bytes(h_element))


# --------------------------------------------------------------------------
# keys
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SystemParams:
    """Public parameters plus the master secret (administrator-held).

    ``msk`` never feeds any protocol operation below; it exists so the
    parameter broadcast has an owner and tests can oracle-check the power
    chain on the toy backend.
    """

    backend: object
    bound: int
    mpk_powers: tuple  # (g^alpha, ..., g^alpha^B)
    msk: int
    hash_descriptor: str = HASH_DESCRIPTOR


@dataclass(frozen=True)
class LocalVerificationKey:
    g_alpha: object
    hash_descriptor: str = HASH_DESCRIPTOR


@dataclass(frozen=True)
class UserPublicKey:
    pk_powers: tuple
    pk_h: object
    g_s: object
    z_s: object
    pk_local: LocalVerificationKey


@dataclass(frozen=True)
class UserKeys:
    signer: lvs.SignerKeyPair
    trapdoor: chameleon.TrapdoorKeyPair
    designation: timelock.DesignationKey
    pk_local: LocalVerificationKey

    def public(self) -> UserPublicKey:
        return UserPublicKey(
            pk_powers=self.signer.pk_powers,
            pk_h=self.trapdoor.pk,
            g_s=self.designation.g_s,
            z_s=self.designation.z_s,
            pk_local=self.pk_local,
        )


@dataclass(frozen=True)
class ProviderPublicKey:
    pk_powers: tuple


@dataclass(frozen=True)
class ProviderKeys:
    signer: lvs.SignerKeyPair

    @property
    def pk_powers(self):
        return self.signer.pk_powers

    def public(self) -> ProviderPublicKey:
        return ProviderPublicKey(pk_powers=self.signer.pk_powers)


def setup(backend, bound: int, rng) -> SystemParams:
    if bound < 1:
        raise ValueError("aggregation bound must be at least 1")
    master = lvs.keygen(backend, bound, rng)
    return SystemParams(
        backend=backend, bound=bound, mpk_powers=master.pk_powers, msk=master.sk
    )


def user_keygen(params: SystemParams, server_pk, rng) -> UserKeys:
    backend = params.backend
    return UserKeys(
        signer=lvs.keygen(backend, params.bound, rng),
        trapdoor=chameleon.ch_keygen(backend, rng),
        designation=timelock.make_designation(backend, server_pk, rng),
        pk_local=LocalVerificationKey(g_alpha=params.mpk_powers[0]),
    )


def provider_keygen(params: SystemParams, rng) -> ProviderKeys:
    return ProviderKeys(signer=lvs.keygen(params.backend, params.bound, rng))


def server_keygen(params: SystemParams, rng) -> timelock.ServerKeyPair:
    return timelock.server_keygen(params.backend, rng)


def designate_provider(user: UserKeys, provider_id, prior=()) -> timelock.DesignationKey:
    """Hand the designation secret to one provider (off-chain channel).

    Re-designation is permitted but loud: every holder of ``s`` can decrypt
    once the time key is public.
    """
    prior = tuple(prior)
    if prior:
        logger.warning(
            "designation secret already delivered to %s; now also to %s",
            ", ".join(map(str, prior)),
            provider_id,
        )
    return user.designation


# --------------------------------------------------------------------------
# transactions
# --------------------------------------------------------------------------


@dataclass
class RedactableTransaction:
    tx_id: bytes
    payload: TxPayload
    h: object  # chameleon digest (never changes)
    r: int
    sigma: lvs.Signature  # user's before redaction, provider's after
    cipher: timelock.TimeLockedCiphertext
    redacted: bool = False
    redaction_log: list = field(default_factory=list)

    @property
    def digest_scalar(self) -> int:
        return self.sigma.bound_hash


@dataclass(frozen=True)
class ImmutableTransaction:
    tx_id: bytes
    payload: TxPayload
    digest: bytes  # plain content hash
    sigma: lvs.Signature


@dataclass
class DeferredBundle:
    user: UserPublicKey
    transactions: list  # of RedactableTransaction
    sigma_hat: lvs.AggregateSignature


def encode_trapdoor(backend, sk_h: int) -> bytes:
    """Trapdoor scalar as the fixed ciphertext block: tag, width, value, pad."""
    width = backend.field.byte_length
    if width + 2 > PAD_BYTES:
        raise EncodingError("scalar field too wide for the payload block")
    body = bytes([_TRAPDOOR_TAG, width]) + backend.field.to_bytes(sk_h)
    return body + bytes(PAD_BYTES - len(body))


def decode_trapdoor(backend, block: bytes):
    """Inverse of :func:`encode_trapdoor`; None when the block is garbage."""
    if len(block) != PAD_BYTES or block[0] != _TRAPDOOR_TAG:
        return None
    width = block[1]
    if width != backend.field.byte_length or 2 + width > PAD_BYTES:
        return None
    if any(block[2 + width :]):
        return None
    value = int.from_bytes(block[2 : 2 + width], "big")
    if value >= backend.field.p:
        return None
    return value


def tr_creat(
    params: SystemParams, user: UserKeys, server_pk, tx_id: bytes, payload: TxPayload,
    t_label: bytes, rng,
) -> RedactableTransaction:
    """Create one redactable transaction: digest, signature, time-locked trapdoor."""
    backend = params.backend
    message = encode_message(tx_id, payload)
    r = backend.field.rand(rng)
    h = chameleon.ch_hash(backend, user.trapdoor.pk, message, r)
    sigma = lvs.sign(backend, user.signer.sk, scalarize(backend, h))
    cipher = timelock.tre_encrypt(
        backend,
        server_pk,
        user.designation,
        encode_trapdoor(backend, user.trapdoor.sk),
        t_label,
        rng,
    )
    return RedactableTransaction(
        tx_id=bytes(tx_id), payload=payload, h=h, r=r, sigma=sigma, cipher=cipher
    )


def make_immutable(params: SystemParams, user: UserKeys, tx_id: bytes, payload: TxPayload) -> ImmutableTransaction:
    """Ordinary transaction: plain content hash plus one signature."""
    backend = params.backend
    message = encode_message(tx_id, payload)
    h = backend.hash_to_scalar(b"immutable|" + message)
    return ImmutableTransaction(
        tx_id=bytes(tx_id),
        payload=payload,
        digest=hashlib.sha256(message).digest(),
        sigma=lvs.sign(backend, user.signer.sk, h),
    )


def verify_immutable(params: SystemParams, user_pk: UserPublicKey, tx: ImmutableTransaction) -> bool:
    backend = params.backend
    message = encode_message(tx.tx_id, tx.payload)
    if hashlib.sha256(message).digest() != tx.digest:
        return False
    h = backend.hash_to_scalar(b"immutable|" + message)
    return lvs.verify_single(backend, user_pk.pk_powers, tx.sigma, h)


def make_bundle(
    params: SystemParams, user: UserKeys, server_pk, items, t_label: bytes, rng
) -> DeferredBundle:
    """Create and aggregate a batch of deferred transactions.

    ``items`` is a list of (tx_id, TxPayload).  Aggregation re-verifies every
    member signature and demands distinct digest scalars, so the bundle that
    comes back is exactly the propagated wire object: transactions plus one
    aggregate signature.
    """
    items = list(items)
    if not items:
        raise ValueError("a bundle needs at least one transaction")
    if len(items) > params.bound:
        raise BoundExceededError(
            f"{len(items)} transactions exceed the aggregation bound {params.bound}"
        )
    txs = [
        tr_creat(params, user, server_pk, tx_id, payload, t_label, rng)
        for tx_id, payload in items
    ]
    agg = lvs.aggregate(
        params.backend,
        user.signer.pk_powers,
        [(tx.digest_scalar, tx.sigma) for tx in txs],
    )
    return DeferredBundle(user=user.public(), transactions=txs, sigma_hat=agg)


def ext(
    params: SystemParams, server: timelock.ServerKeyPair, user_pk: UserPublicKey,
    bundle: DeferredBundle, subset_indices, t_label: bytes,
):
    """Server side: the time instant key plus subset auxiliary elements."""
    tik = timelock.extract_tik(params.backend, server.sk, t_label)
    aux = lvs.derive_aux(
        params.backend, user_pk.pk_powers, bundle.sigma_hat.member_hashes, subset_indices
    )
    return tik, aux


@dataclass(frozen=True)
class DecryptionOutcome:
    """released_dec result: the trapdoor or a diagnosed refusal."""

    trapdoor: int | None
    reason: str | None  # aux-check | subset-check | label-mismatch | trapdoor-mismatch

    @property
    def ok(self) -> bool:
        return self.trapdoor is not None

    @classmethod
    def refused(cls, reason: str) -> "DecryptionOutcome":
        return cls(trapdoor=None, reason=reason)


def released_dec(
    params: SystemParams, user_pk: UserPublicKey, bundle: DeferredBundle,
    aux: lvs.AuxiliaryInfo, cipher: timelock.TimeLockedCiphertext,
    tik: timelock.TimeInstantKey, s: int,
) -> DecryptionOutcome:
    """Provider side: verify the subset, then unlock the trapdoor.

    Refusals carry one of four diagnostic codes; a trapdoor is returned only
    when its public image matches the user's chameleon key.
    """
    backend = params.backend
    member = bundle.sigma_hat.member_hashes
    if any(i < 0 or i >= len(member) for i in aux.index_set):
        return DecryptionOutcome.refused("subset-check")
    subset_hashes = [member[i] for i in aux.index_set]
    if not lvs.aux_chain_ok(backend, user_pk.pk_powers, aux, subset_hashes):
        return DecryptionOutcome.refused("aux-check")
    if not lvs.subset_equation_ok(
        backend, user_pk.pk_powers, bundle.sigma_hat.sigma_hat, aux, subset_hashes
    ):
        return DecryptionOutcome.refused("subset-check")
    if tik.t_label != cipher.t_label:
        return DecryptionOutcome.refused("label-mismatch")
    block = timelock.tre_decrypt(backend, cipher, tik, s)
    trapdoor = decode_trapdoor(backend, block)
    if trapdoor is None or backend.exp(backend.generator, trapdoor) != user_pk.pk_h:
        return DecryptionOutcome.refused("trapdoor-mismatch")
    return DecryptionOutcome(trapdoor=trapdoor, reason=None)


def adapt(
    params: SystemParams, provider: ProviderKeys, sk_h: int, tx_id: bytes,
    old_payload: TxPayload, h, r: int, new_payload: TxPayload,
):
    """Rewrite (ID, payload) to (ID, payload') under the same digest.

    Returns (r', sigma'): fresh randomness opening h to the new message and
    the provider's signature over the unchanged digest scalar.
    """
    backend = params.backend
    r_new = chameleon.ch_adapt(
        backend,
        sk_h,
        encode_message(tx_id, old_payload),
        h,
        r,
        encode_message(tx_id, new_payload),
    )
    sigma_new = lvs.sign(backend, provider.signer.sk, scalarize(backend, h))
    return r_new, sigma_new


def verify(
    params: SystemParams, user_pk: UserPublicKey, provider_pk, tx_id: bytes,
    payload: TxPayload, h, r: int, sigma: lvs.Signature,
    sigma_hat: lvs.AggregateSignature | None = None, redacted: bool = False,
) -> bool:
    """Miner-side check of a redactable transaction.

    Three conditions: the chameleon digest opens to (ID, payload) under r;
    the aggregate signature (when supplied) verifies over its full digest
    list; the individual signature verifies against the user's key before
    redaction and the provider's key after (rewrites are attributed to the
    provider, so the dispatch rides on the transaction's redaction flag).
    """
    backend = params.backend
    if not chameleon.ch_verify(backend, user_pk.pk_h, encode_message(tx_id, payload), h, r):
        return False
    if sigma_hat is not None and not lvs.verify_aggregate_full(
        backend, user_pk.pk_powers, sigma_hat
    ):
        return False
    if redacted:
        if provider_pk is None:
            return False
        powers = provider_pk.pk_powers
    else:
        powers = user_pk.pk_powers
    expected = scalarize(backend, h)
    if sigma.bound_hash != expected:
        return False
    return lvs.verify_single(backend, powers, sigma, expected)


def apply_adaption(
    tx: RedactableTransaction, new_payload: TxPayload, r_new: int,
    sigma_new: lvs.Signature, provider_id, tick: int,
) -> None:
    """Mutate the transaction in place after its rewrite verified."""
    tx.redaction_log.append(
        {
            "old_digest": payload_digest(tx.tx_id, tx.payload).hex(),
            "new_digest": payload_digest(tx.tx_id, new_payload).hex(),
            "provider": str(provider_id),
            "tick": int(tick),
        }
    )
    tx.payload = new_payload
    tx.r = r_new
    tx.sigma = sigma_new
    tx.redacted = True


# --------------------------------------------------------------------------
# JSON import/export (keys, bundles, time keys)
# --------------------------------------------------------------------------


def payload_to_json(payload: TxPayload) -> dict:
    return {
        "payee": payload.payee,
        "amount": payload.amount,
        "due_tick": payload.due_tick,
        "memo": payload.memo.hex(),
    }


def payload_from_json(doc: dict) -> TxPayload:
    return TxPayload(
        payee=doc["payee"],
        amount=int(doc["amount"]),
        due_tick=int(doc["due_tick"]),
        memo=bytes.fromhex(doc.get("memo", "")),
    )


def user_public_to_json(backend, pk: UserPublicKey) -> dict:
    return {
        "pk_powers": [element_to_hex(backend, p) for p in pk.pk_powers],
        "pk_h": element_to_hex(backend, pk.pk_h),
        "pk_tre": [element_to_hex(backend, pk.g_s), element_to_hex(backend, pk.z_s)],
        "pk_local": {
            "g_alpha": element_to_hex(backend, pk.pk_local.g_alpha),
            "hash": pk.pk_local.hash_descriptor,
        },
    }


def user_public_from_json(backend, doc: dict) -> UserPublicKey:
    return UserPublicKey(
        pk_powers=tuple(element_from_hex(backend, p) for p in doc["pk_powers"]),
        pk_h=element_from_hex(backend, doc["pk_h"]),
        g_s=element_from_hex(backend, doc["pk_tre"][0]),
        z_s=element_from_hex(backend, doc["pk_tre"][1]),
        pk_local=LocalVerificationKey(
            g_alpha=element_from_hex(backend, doc["pk_local"]["g_alpha"]),
            hash_descriptor=doc["pk_local"]["hash"],
        ),
    )


def user_keys_to_json(backend, user: UserKeys, include_secrets: bool = False) -> dict:
    doc = {"role": "user", "public": user_public_to_json(backend, user.public())}
    if include_secrets:
        doc["test_mode_secrets"] = True
        doc["secrets"] = {
            "beta": backend.field.to_hex(user.signer.sk),
            "sk_h": backend.field.to_hex(user.trapdoor.sk),
            "s": backend.field.to_hex(user.designation.s),
        }
    return doc


def signature_to_json(backend, sig: lvs.Signature) -> dict:
    return {
        "sigma": element_to_hex(backend, sig.sigma),
        "bound_hash": backend.field.to_hex(sig.bound_hash),
    }


def signature_from_json(backend, doc: dict) -> lvs.Signature:
    return lvs.Signature(
        sigma=element_from_hex(backend, doc["sigma"]),
        bound_hash=backend.field.from_hex(doc["bound_hash"]),
    )


def transaction_to_json(backend, tx: RedactableTransaction) -> dict:
    return {
        "tx_id": tx.tx_id.hex(),
        "payload": payload_to_json(tx.payload),
        "h": element_to_hex(backend, tx.h),
        "r": backend.field.to_hex(tx.r),
        "sigma": signature_to_json(backend, tx.sigma),
        "cipher": timelock.ciphertext_to_bytes(backend, tx.cipher).hex(),
        "redacted": tx.redacted,
        "redaction_log": list(tx.redaction_log),
    }


def transaction_from_json(backend, doc: dict) -> RedactableTransaction:
    return RedactableTransaction(
        tx_id=bytes.fromhex(doc["tx_id"]),
        payload=payload_from_json(doc["payload"]),
        h=element_from_hex(backend, doc["h"]),
        r=backend.field.from_hex(doc["r"]),
        sigma=signature_from_json(backend, doc["sigma"]),
        cipher=timelock.ciphertext_from_bytes(backend, bytes.fromhex(doc["cipher"])),
        redacted=bool(doc.get("redacted", False)),
        redaction_log=list(doc.get("redaction_log", [])),
    )


def bundle_to_json(backend, bundle: DeferredBundle) -> dict:
    return {
        "user": user_public_to_json(backend, bundle.user),
        "transactions": [transaction_to_json(backend, tx) for tx in bundle.transactions],
        "sigma_hat": lvs.serialize_aggregate(backend, bundle.sigma_hat).hex(),
    }


def bundle_from_json(backend, doc: dict) -> DeferredBundle:
    return DeferredBundle(
        user=user_public_from_json(backend, doc["user"]),
        transactions=[transaction_from_json(backend, t) for t in doc["transactions"]],
        sigma_hat=lvs.deserialize_aggregate(backend, bytes.fromhex(doc["sigma_hat"])),
    )


def tik_to_json(backend, tik: timelock.TimeInstantKey) -> dict:
    return {"t_label": tik.t_label.decode("ascii"), "k_t": element_to_hex(backend, tik.k_t)}


def tik_from_json(backend, doc: dict) -> timelock.TimeInstantKey:
    return timelock.TimeInstantKey(
        t_label=doc["t_label"].encode("ascii"),
        k_t=element_from_hex(backend, doc["k_t"]),
    )
