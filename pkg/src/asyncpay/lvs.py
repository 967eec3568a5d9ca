"""Inversion-exponent signatures with aggregation and subset verification.

A signer with secret ``sk`` signs a scalar digest ``h`` as ``sigma =
g^(1/(sk+h))``; the public key is the power chain ``(g^sk, g^sk^2, ...,
g^sk^B)`` where ``B`` bounds how many signatures may ever be aggregated
under the key.

Aggregation compresses signatures on distinct digests ``h_1..h_l`` into a
single element ``sigma_hat = g^(1 / prod_i (sk + h_i))`` using the
partial-fraction identity

    1 / prod_i (sk + h_i)  =  sum_i gamma_i / (sk + h_i),
    gamma_i = 1 / prod_{j != i} (h_j - h_i).

A verifier holding the full digest list checks ``e(sigma_hat,
prod_k (g^sk^k)^{delta_k}) = e(g, g)`` where ``delta`` are the coefficients
of ``prod_i (y + h_i)``.

Subset verification avoids the full list: auxiliary elements ``aux_k =
g^(sk^k * prod_{i not in S} (sk + h_i))`` for ``k = 0..|S|`` are computable
from the public powers alone, satisfy the consistency chain ``e(g^sk, aux_k)
= e(g, aux_{k+1})``, and let anyone check the subset via ``e(sigma_hat,
prod_k aux_k^{delta_k}) = e(g, g)`` with ``delta`` expanded over the subset
digests only.  With a single-index subset this is exactly the classic
two-equation local verification.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    BoundExceededError,
    DegenerateHashError,
    DuplicateHashError,
    EncodingError,
    InvalidMemberSignature,
)


@dataclass(frozen=True)
class SignerKeyPair:
    sk: int
    pk_powers: tuple  # (g^sk, g^sk^2, ..., g^sk^B)

    @property
    def bound(self) -> int:
        return len(self.pk_powers)


@dataclass(frozen=True)
class Signature:
    sigma: object
    bound_hash: int  # the scalar digest this signature is bound to


@dataclass(frozen=True)
class AggregateSignature:
    sigma_hat: object
    member_hashes: tuple  # ordered distinct scalar digests


@dataclass(frozen=True)
class AuxiliaryInfo:
    index_set: tuple  # 0-based positions into the member list
    aux_powers: tuple  # length len(index_set) + 1


def keygen(backend, bound: int, rng) -> SignerKeyPair:
    """Fresh secret and the public power chain of length ``bound``."""
    if bound < 1:
        raise ValueError("aggregation bound must be at least 1")
    sk = backend.field.rand_nonzero(rng)
    powers = []
    acc = backend.generator
    for _ in range(bound):
        acc = backend.exp(acc, sk)
        powers.append(acc)
    return SignerKeyPair(sk=sk, pk_powers=tuple(powers))


def sign(backend, sk: int, h: int) -> Signature:
    f = backend.field
    denom = f.add(sk, h)
    if denom == 0:
        raise DegenerateHashError("digest equals the negated secret key")
    return Signature(sigma=backend.exp(backend.generator, f.inv(denom)), bound_hash=h)


def verify_single(backend, pk_powers, sigma: Signature, h: int) -> bool:
    """e(sigma, g^sk * g^h) == e(g, g); false on any malformed input."""
    if not pk_powers:
        return False
    target = backend.mul(pk_powers[0], backend.exp(backend.generator, h))
    return backend.pair(sigma.sigma, target) == backend.gt_generator


def _gammas(field, hashes):
    out = []
    for i, hi in enumerate(hashes):
        prod = 1
        for j, hj in enumerate(hashes):
            if j != i:
                prod = prod * (hj - hi) % field.p
        out.append(field.inv(prod))
    return out


def aggregate(backend, pk_powers, items) -> AggregateSignature:
    """Combine ``items`` = [(h_i, Signature_i)] into one element.

    Every member is verified first; any invalid one aborts the whole
    aggregation.  Digests must be pairwise distinct (the partial-fraction
    coefficients divide by their differences).
    """
    items = list(items)
    if not items:
        raise ValueError("nothing to aggregate")
    if len(items) > len(pk_powers):
        raise BoundExceededError(
            f"{len(items)} signatures exceed the key bound {len(pk_powers)}"
        )
    hashes = [h % backend.field.p for h, _ in items]
    if len(set(hashes)) != len(hashes):
        raise DuplicateHashError("member digests must be distinct")
    for h, sig in items:
        if not verify_single(backend, pk_powers, sig, h):
            raise InvalidMemberSignature(f"member with digest {h} does not verify")
    gammas = _gammas(backend.field, hashes)
    sigma_hat = backend.multiexp(
        [(sig.sigma, gamma) for (_, sig), gamma in zip(items, gammas)]
    )
    return AggregateSignature(sigma_hat=sigma_hat, member_hashes=tuple(hashes))


def expand_poly(field, roots) -> list[int]:
    """Coefficients of prod_i (y + root_i), ascending degree, monic."""
    return field.expand_roots(roots)


def _power_base(backend, pk_powers, m: int):
    """g^(sk^m): the generator for m = 0, else the published power."""
    if m == 0:
        return backend.generator
    if m > len(pk_powers):
        raise BoundExceededError(f"needs g^(sk^{m}) but bound is {len(pk_powers)}")
    return pk_powers[m - 1]


def verify_aggregate_full(backend, pk_powers, agg: AggregateSignature) -> bool:
    """Full verification against the complete digest list."""
    delta = expand_poly(backend.field, agg.member_hashes)
    bases = [_power_base(backend, pk_powers, i) for i in range(len(delta))]
    combined = backend.multiexp(list(zip(bases, delta)))
    return backend.pair(agg.sigma_hat, combined) == backend.gt_generator


def derive_aux(backend, pk_powers, member_hashes, index_set) -> AuxiliaryInfo:
    """Auxiliary elements for ``index_set`` from public powers only.

    aux_k = prod_i (g^(sk^(i+k)))^{dtilde_i} where dtilde expands the
    complement digests, so aux_k = g^(sk^k * prod_{i not in S}(sk + h_i)).
    """
    index_set = tuple(sorted(index_set))
    if not index_set:
        raise ValueError("index set must be nonempty")
    if len(set(index_set)) != len(index_set):
        raise ValueError("index set has duplicates")
    if index_set[0] < 0 or index_set[-1] >= len(member_hashes):
        raise ValueError("index set out of range")
    if len(member_hashes) > len(pk_powers):
        raise BoundExceededError(
            f"{len(member_hashes)} members exceed the key bound {len(pk_powers)}"
        )
    chosen = set(index_set)
    complement = [h for i, h in enumerate(member_hashes) if i not in chosen]
    dtilde = expand_poly(backend.field, complement)
    aux_powers = []
    for k in range(len(index_set) + 1):
        bases = [_power_base(backend, pk_powers, i + k) for i in range(len(dtilde))]
        aux_powers.append(backend.multiexp(list(zip(bases, dtilde))))
    return AuxiliaryInfo(index_set=index_set, aux_powers=tuple(aux_powers))


_CHAIN_WEIGHT_BITS = 64


def _chain_weights(backend, aux: AuxiliaryInfo, subset_hashes, count: int) -> list[int]:
    """Batch weights (1, w_1, ..), each a nonzero 64-bit hash of the statement."""
    import hashlib

    blob = b"".join(backend.element_to_bytes(a) for a in aux.aux_powers)
    blob += b"".join(backend.field.to_bytes(h % backend.field.p) for h in subset_hashes)
    seed = hashlib.sha256(b"aux-chain-batch|" + blob).digest()
    weights = [1]
    for k in range(1, count):
        w = int.from_bytes(
            hashlib.sha256(seed + k.to_bytes(4, "big")).digest()[: _CHAIN_WEIGHT_BITS // 8],
            "big",
        )
        weights.append(w or 1)
    return weights


def aux_chain_ok(backend, pk_powers, aux: AuxiliaryInfo, subset_hashes, tables=None) -> bool:
    """Consistency chain e(g^sk, aux_k) = e(g, aux_{k+1}) for all adjacent k.

    Verified as one batched equation e(g^sk, sum_k w_k aux_k) = e(g, sum_k
    w_k aux_{k+1}) with independent hash-derived 64-bit weights: a violated
    chain slips through only when the weights hit a root of the mismatch
    combination (small-exponent batch test, failure odds ~ 2^-64).  The
    short weights keep the batching cost far below one pairing per link.
    A single-index subset reduces to the literal adjacent-pair equation.
    """
    m = len(subset_hashes)
    if m == 0 or len(aux.aux_powers) != m + 1 or not pk_powers:
        return False
    aux_p = aux.aux_powers
    if m == 1:
        chain_a, chain_b = aux_p[0], aux_p[1]
    else:
        weights = _chain_weights(backend, aux, subset_hashes, m)
        chain_a = backend.multiexp(
            list(zip(aux_p[:m], weights)),
            tables=None if tables is None else tables[:m],
        )
        chain_b = backend.multiexp(
            list(zip(aux_p[1:], weights)),
            tables=None if tables is None else tables[1:],
        )
    return backend.gt_is_identity(
        backend.pair_product(
            [(pk_powers[0], chain_a), (backend.generator, backend.inv(chain_b))]
        )
    )


def subset_equation_ok(backend, pk_powers, sigma_hat, aux: AuxiliaryInfo, subset_hashes, tables=None) -> bool:
    """e(sigma_hat, prod_k aux_k^{delta_k}) = e(g, g), delta over the subset."""
    m = len(subset_hashes)
    if m == 0 or len(aux.aux_powers) != m + 1:
        return False
    delta = expand_poly(backend.field, subset_hashes)
    combined = backend.multiexp(list(zip(aux.aux_powers, delta)), tables=tables)
    return backend.pair(sigma_hat, combined) == backend.gt_generator


def verify_subset(backend, pk_powers, sigma_hat, aux: AuxiliaryInfo, subset_hashes) -> bool:
    """Check sigma_hat against a digest subset using auxiliary elements.

    Both conditions must hold: the aux consistency chain and the subset
    pairing equation.  With a single-index subset this is the classic
    two-equation local verification; the multiexp tables over the aux
    elements are shared between the two conditions.
    """
    m = len(subset_hashes)
    if m == 0 or len(aux.aux_powers) != m + 1 or not pk_powers:
        return False
    tables = backend.multiexp_tables(aux.aux_powers)
    return aux_chain_ok(
        backend, pk_powers, aux, subset_hashes, tables=tables
    ) and subset_equation_ok(
        backend, pk_powers, sigma_hat, aux, subset_hashes, tables=tables
    )


# --------------------------------------------------------------------------
# wire encodings: length-prefixed canonical element encodings
# --------------------------------------------------------------------------


def _pack_elements(backend, elements) -> bytes:
    out = [len(elements).to_bytes(2, "big")]
    for el in elements:
        enc = backend.element_to_bytes(el)
        out.append(len(enc).to_bytes(2, "big"))
        out.append(enc)
    return b"".join(out)


def _unpack_elements(backend, data: bytes, offset: int):
    if offset + 2 > len(data):
        raise EncodingError("truncated element list")
    count = int.from_bytes(data[offset : offset + 2], "big")
    offset += 2
    out = []
    for _ in range(count):
        if offset + 2 > len(data):
            raise EncodingError("truncated element length")
        n = int.from_bytes(data[offset : offset + 2], "big")
        offset += 2
        if offset + n > len(data):
            raise EncodingError("truncated element body")
        out.append(backend.element_from_bytes(data[offset : offset + n]))
        offset += n
    return out, offset


def serialize_aggregate(backend, agg: AggregateSignature) -> bytes:
    body = _pack_elements(backend, [agg.sigma_hat])
    body += len(agg.member_hashes).to_bytes(2, "big")
    for h in agg.member_hashes:
        body += backend.field.to_bytes(h)
    return body


def deserialize_aggregate(backend, data: bytes) -> AggregateSignature:
    (sigma_hat,), offset = _unpack_elements(backend, data, 0)
    if offset + 2 > len(data):
        raise EncodingError("truncated digest count")
    count = int.from_bytes(data[offset : offset + 2], "big")
    offset += 2
    width = backend.field.byte_length
    hashes = []
    for _ in range(count):
        if offset + width > len(data):
            raise EncodingError("truncated digest")
        hashes.append(backend.field.from_bytes(data[offset : offset + width]))
        offset += width
    if offset != len(data):
        raise EncodingError("trailing bytes in aggregate encoding")
    return AggregateSignature(sigma_hat=sigma_hat, member_hashes=tuple(hashes))


def serialize_aux(backend, aux: AuxiliaryInfo) -> bytes:
    body = len(aux.index_set).to_bytes(2, "big")
    for idx in aux.index_set:
        body += idx.to_bytes(2, "big")
    return body + _pack_elements(backend, list(aux.aux_powers))


def deserialize_aux(backend, data: bytes) -> AuxiliaryInfo:
    if len(data) < 2:
        raise EncodingError("truncated aux encoding")
    count = int.from_bytes(data[:2], "big")
    offset = 2
    indices = []
    for _ in range(count):
        if offset + 2 > len(data):
            raise EncodingError("truncated aux index")
        indices.append(int.from_bytes(data[offset : offset + 2], "big"))
        offset += 2
    powers, offset = _unpack_elements(backend, data, offset)
    if offset != len(data):
        raise EncodingError("trailing bytes in aux encoding")
    return AuxiliaryInfo(index_set=tuple(indices), aux_powers=tuple(powers))
