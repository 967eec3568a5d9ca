import logging
import random

import pytest

from asyncpay import lvs, protocol as ep, timelock as tl
from asyncpay.backends import PAD_BYTES
from asyncpay.errors import BoundExceededError, DegenerateHashError, DesignationCheckError


def find_memo(backend, tx_id, base_payload, target):
    """Memo bytes making the canonical message hash to ``target`` (toy order)."""
    for i in range(200000):
        payload = ep.TxPayload(
            payee=base_payload.payee,
            amount=base_payload.amount,
            due_tick=base_payload.due_tick,
            memo=b"memo-%d" % i,
        )
        if backend.hash_to_scalar(ep.encode_message(tx_id, payload)) == target:
            return payload
    raise AssertionError("no memo found; widen the search")


def find_label(backend, exponent):
    for i in range(200000):
        label = b"lbl-%d" % i
        if backend.hash_to_group(label) == exponent:
            return label
    raise AssertionError("no label found; widen the search")


def make_world(backend, rng, bound=8):
    params = ep.setup(backend, bound, rng)
    server = ep.server_keygen(params, rng)
    user = ep.user_keygen(params, server.pk, rng)
    provider = ep.provider_keygen(params, rng)
    return params, server, user, provider


# -- encoding ------------------------------------------------------------------


def test_payload_encoding_fixed_layout():
    p = ep.TxPayload(payee="carol", amount=100, due_tick=7, memo=b"tv")
    enc = ep.encode_payload(p)
    assert enc.startswith(b"TXP1\x00\x05carol")
    assert ep.encode_payload(p) == enc
    q = ep.TxPayload(payee="carol", amount=101, due_tick=7, memo=b"tv")
    assert ep.encode_payload(q) != enc
    msg = ep.encode_message(b"\x01\x02", p)
    assert msg.startswith(b"TXM1\x00\x02\x01\x02TXP1")


def test_payload_validation():
    with pytest.raises(ValueError):
        ep.TxPayload(payee="x", amount=-1, due_tick=0)
    with pytest.raises(ValueError):
        ep.TxPayload(payee="x", amount=0, due_tick=2**64)


def test_tick_label_ascii_decimal():
    assert ep.tick_label(0) == b"0"
    assert ep.tick_label(1234) == b"1234"
    with pytest.raises(ValueError):
        ep.tick_label(-1)


def test_trapdoor_block_roundtrip(toy101, toy, production):
    for be in (toy101, toy, production):
        sk = be.field.rand_nonzero(random.Random(5))
        block = ep.encode_trapdoor(be, sk)
        assert len(block) == PAD_BYTES
        assert ep.decode_trapdoor(be, block) == sk
    assert ep.decode_trapdoor(toy, b"\x00" * PAD_BYTES) is None
    assert ep.decode_trapdoor(toy, b"garbage") is None
    tampered = bytearray(ep.encode_trapdoor(toy, 5))
    tampered[-1] ^= 1
    assert ep.decode_trapdoor(toy, bytes(tampered)) is None


# -- keygen --------------------------------------------------------------------


def test_setup_golden(toy101, queued_rng):
    params = ep.setup(toy101, 4, queued_rng([3]))
    assert params.mpk_powers == (3, 9, 27, 81 % 101)
    assert params.msk == 3


def test_setup_seeded_determinism(toy):
    assert ep.setup(toy, 4, random.Random(9)) == ep.setup(toy, 4, random.Random(9))


def test_setup_chain_consistency_production(production, rng):
    params = ep.setup(production, 3, rng)
    g = production.generator
    for i in range(1, 3):
        assert production.pair(params.mpk_powers[i], g) == production.pair(
            params.mpk_powers[i - 1], params.mpk_powers[0]
        )


def test_user_keygen_components(toy, rng):
    params, server, user, provider = make_world(toy, rng)
    assert tl.designation_ok(toy, server.pk, user.designation)
    assert user.pk_local.g_alpha == params.mpk_powers[0]
    assert len(user.signer.pk_powers) == params.bound
    assert user.public().pk_h == toy.exp(toy.generator, user.trapdoor.sk)


def test_distinct_seeds_distinct_keys(toy):
    params = ep.setup(toy, 2, random.Random(0))
    server = ep.server_keygen(params, random.Random(1))
    betas = set()
    for seed in range(100):
        betas.add(ep.user_keygen(params, server.pk, random.Random(seed)).signer.sk)
    assert len(betas) == 100


def test_designate_provider_logs_double_designation(toy, rng, caplog):
    _, _, user, _ = make_world(toy, rng)
    with caplog.at_level(logging.WARNING):
        d1 = ep.designate_provider(user, "shop-a")
        assert not caplog.records
        d2 = ep.designate_provider(user, "shop-b", prior=("shop-a",))
    assert d1 == d2 == user.designation
    assert any("already delivered" in r.message for r in caplog.records)


# -- transaction creation ------------------------------------------------------


def test_tr_creat_verifies_end_to_end(toy, rng):
    params, server, user, provider = make_world(toy, rng)
    payload = ep.TxPayload(payee="carol", amount=250, due_tick=10)
    tx = ep.tr_creat(params, user, server.pk, b"tx-1", payload, b"10", rng)
    assert ep.verify(
        params, user.public(), provider, tx.tx_id, tx.payload, tx.h, tx.r, tx.sigma
    )


def test_tr_creat_randomized_digests(toy, rng):
    params, server, user, _ = make_world(toy, rng)
    payload = ep.TxPayload(payee="carol", amount=1, due_tick=3)
    tx1 = ep.tr_creat(params, user, server.pk, b"tx", payload, b"3", rng)
    tx2 = ep.tr_creat(params, user, server.pk, b"tx", payload, b"3", rng)
    assert tx1.h != tx2.h
    for tx in (tx1, tx2):
        assert ep.verify(params, user.public(), None, tx.tx_id, tx.payload, tx.h, tx.r, tx.sigma)


def test_tr_creat_designation_guard(toy, rng):
    params, server, user, _ = make_world(toy, rng)
    broken = ep.UserKeys(
        signer=user.signer,
        trapdoor=user.trapdoor,
        designation=tl.DesignationKey(
            s=user.designation.s,
            g_s=user.designation.g_s,
            z_s=toy.mul(user.designation.z_s, toy.generator),
        ),
        pk_local=user.pk_local,
    )
    with pytest.raises(DesignationCheckError):
        ep.tr_creat(
            params, broken, server.pk, b"tx", ep.TxPayload("c", 1, 2), b"2", rng
        )


def test_tr_creat_degenerate_digest(toy101, queued_rng):
    # hunt (r, memo) on the 101-element group for scalarize(h) == -beta
    params = ep.setup(toy101, 2, queued_rng([3]))
    server = tl.ServerKeyPair(sk=3, pk=toy101.exp(toy101.generator, 3))
    user = ep.UserKeys(
        signer=lvs.SignerKeyPair(sk=3, pk_powers=(3, 9)),
        trapdoor=ep.chameleon.TrapdoorKeyPair(sk=7, pk=toy101.exp(toy101.generator, 7)),
        designation=tl.DesignationKey(
            s=5, g_s=toy101.exp(toy101.generator, 5), z_s=toy101.exp(server.pk, 5)
        ),
        pk_local=ep.LocalVerificationKey(g_alpha=params.mpk_powers[0]),
    )
    target = (101 - 3) % 101
    for i in range(3000):
        payload = ep.TxPayload(payee="c", amount=1, due_tick=2, memo=b"dg-%d" % i)
        msg = ep.encode_message(b"tx", payload)
        base = toy101.hash_to_scalar(msg)
        hit = None
        for r in range(101):
            h = (base + 7 * r) % 101
            if ep.scalarize(toy101, h) == target:
                hit = r
                break
        if hit is not None:
            with pytest.raises(DegenerateHashError):
                ep.tr_creat(
                    params, user, server.pk, b"tx", payload, b"2", queued_rng([hit])
                )
            return
    pytest.skip("no degenerate digest found in probe range")


# -- bundles -------------------------------------------------------------------


def test_make_bundle_invariants(toy, rng):
    params, server, user, _ = make_world(toy, rng)
    items = [
        (b"tx-%d" % i, ep.TxPayload(payee="shop", amount=10 * i + 1, due_tick=20))
        for i in range(5)
    ]
    bundle = ep.make_bundle(params, user, server.pk, items, b"20", rng)
    assert [tx.digest_scalar for tx in bundle.transactions] == list(
        bundle.sigma_hat.member_hashes
    )
    assert lvs.verify_aggregate_full(toy, user.signer.pk_powers, bundle.sigma_hat)
    # toy oracle: aggregate exponent is 1 / prod(beta + h_i)
    denom = 1
    for h in bundle.sigma_hat.member_hashes:
        denom = denom * (user.signer.sk + h) % toy.order
    assert bundle.sigma_hat.sigma_hat == toy.field.inv(denom)


def test_make_bundle_single_and_empty(toy, rng):
    params, server, user, _ = make_world(toy, rng)
    bundle = ep.make_bundle(
        params, user, server.pk,
        [(b"only", ep.TxPayload(payee="shop", amount=5, due_tick=9))], b"9", rng,
    )
    assert bundle.sigma_hat.sigma_hat == bundle.transactions[0].sigma.sigma
    with pytest.raises(ValueError):
        ep.make_bundle(params, user, server.pk, [], b"9", rng)


def test_make_bundle_bound(toy, rng):
    params, server, user, _ = make_world(toy, rng, bound=2)
    items = [
        (b"tx-%d" % i, ep.TxPayload(payee="shop", amount=i + 1, due_tick=4))
        for i in range(3)
    ]
    with pytest.raises(BoundExceededError):
        ep.make_bundle(params, user, server.pk, items, b"4", rng)


# -- extraction and released decryption ----------------------------------------


def bundled_world(backend, rng, k=4):
    params, server, user, provider = make_world(backend, rng)
    items = [
        (b"tx-%d" % i, ep.TxPayload(payee="shop", amount=100 + i, due_tick=30))
        for i in range(k)
    ]
    bundle = ep.make_bundle(params, user, server.pk, items, b"30", rng)
    return params, server, user, provider, bundle


def test_ext_outputs_verify(toy, rng):
    params, server, user, _, bundle = bundled_world(toy, rng)
    tik, aux = ep.ext(params, server, user.public(), bundle, [1, 2], b"30")
    assert tl.verify_tik(toy, server.pk, tik)
    subset = [bundle.sigma_hat.member_hashes[i] for i in (1, 2)]
    assert lvs.verify_subset(
        toy, user.signer.pk_powers, bundle.sigma_hat.sigma_hat, aux, subset
    )


def test_ext_full_set_aux_starts_at_generator(toy, rng):
    params, server, user, _, bundle = bundled_world(toy, rng, k=3)
    _, aux = ep.ext(params, server, user.public(), bundle, range(3), b"30")
    assert aux.aux_powers[0] == toy.generator


def test_released_dec_happy_path(toy, rng):
    params, server, user, provider, bundle = bundled_world(toy, rng)
    tik, aux = ep.ext(params, server, user.public(), bundle, [0, 3], b"30")
    s = ep.designate_provider(user, "shop")
    out = ep.released_dec(
        params, user.public(), bundle, aux, bundle.transactions[0].cipher, tik, s.s
    )
    assert out.ok and out.reason is None
    assert out.trapdoor == user.trapdoor.sk
    assert toy.exp(toy.generator, out.trapdoor) == user.public().pk_h


def test_released_dec_diagnostics(toy, rng):
    params, server, user, provider, bundle = bundled_world(toy, rng)
    tik, aux = ep.ext(params, server, user.public(), bundle, [0, 1], b"30")
    s = user.designation.s
    cipher = bundle.transactions[0].cipher

    tampered = lvs.AuxiliaryInfo(
        index_set=aux.index_set,
        aux_powers=aux.aux_powers[:-1] + (toy.mul(aux.aux_powers[-1], toy.generator),),
    )
    assert ep.released_dec(params, user.public(), bundle, tampered, cipher, tik, s).reason == "aux-check"

    wrong_agg_bundle = ep.DeferredBundle(
        user=bundle.user,
        transactions=bundle.transactions,
        sigma_hat=lvs.AggregateSignature(
            sigma_hat=toy.mul(bundle.sigma_hat.sigma_hat, toy.generator),
            member_hashes=bundle.sigma_hat.member_hashes,
        ),
    )
    assert ep.released_dec(params, user.public(), wrong_agg_bundle, aux, cipher, tik, s).reason == "subset-check"

    early = tl.extract_tik(toy, server.sk, b"29")
    assert ep.released_dec(params, user.public(), bundle, aux, cipher, early, s).reason == "label-mismatch"

    outsider_s = s + 1
    assert ep.released_dec(params, user.public(), bundle, aux, cipher, tik, outsider_s).reason == "trapdoor-mismatch"


def test_non_designated_provider_never_recovers_trapdoor(toy, rng):
    params, server, user, provider, bundle = bundled_world(toy, rng)
    tik, aux = ep.ext(params, server, user.public(), bundle, [0], b"30")
    cipher = bundle.transactions[0].cipher
    pk_h = user.public().pk_h
    for _ in range(100):
        guess = toy.field.rand_nonzero(rng)
        out = ep.released_dec(params, user.public(), bundle, aux, cipher, tik, guess)
        if guess != user.designation.s:
            assert not out.ok and out.reason == "trapdoor-mismatch"
            assert out.trapdoor is None or toy.exp(toy.generator, out.trapdoor) != pk_h


def test_self_designation_roundtrip(toy, rng):
    # user acting as its own provider: nothing in the math forbids it
    params, server, user, _, bundle = bundled_world(toy, rng, k=2)
    tik, aux = ep.ext(params, server, user.public(), bundle, [0], b"30")
    out = ep.released_dec(
        params, user.public(), bundle, aux, bundle.transactions[0].cipher, tik,
        user.designation.s,
    )
    assert out.ok


# -- adapt and verify dispatch --------------------------------------------------


def test_adapt_preserves_digest_and_switches_signer(toy, rng):
    params, server, user, provider, bundle = bundled_world(toy, rng, k=3)
    tx = bundle.transactions[1]
    old_h_bytes = toy.element_to_bytes(tx.h)
    new_payload = ep.TxPayload(payee="shop", amount=77, due_tick=30)
    r_new, sigma_new = ep.adapt(
        params, provider, user.trapdoor.sk, tx.tx_id, tx.payload, tx.h, tx.r, new_payload
    )
    assert ep.verify(
        params, user.public(), provider, tx.tx_id, new_payload, tx.h, r_new,
        sigma_new, redacted=True,
    )
    # checked against the user's key the redacted transaction must fail
    assert not ep.verify(
        params, user.public(), provider, tx.tx_id, new_payload, tx.h, r_new,
        sigma_new, redacted=False,
    )
    assert toy.element_to_bytes(tx.h) == old_h_bytes


def test_adapt_fixed_point(toy, rng):
    params, server, user, provider, bundle = bundled_world(toy, rng, k=2)
    tx = bundle.transactions[0]
    r_new, sigma_new = ep.adapt(
        params, provider, user.trapdoor.sk, tx.tx_id, tx.payload, tx.h, tx.r, tx.payload
    )
    assert r_new == tx.r
    assert lvs.verify_single(toy, provider.pk_powers, sigma_new, tx.digest_scalar)


def test_verify_with_aggregate_and_apply_adaption(toy, rng):
    params, server, user, provider, bundle = bundled_world(toy, rng, k=3)
    tx = bundle.transactions[2]
    assert ep.verify(
        params, user.public(), provider, tx.tx_id, tx.payload, tx.h, tx.r, tx.sigma,
        sigma_hat=bundle.sigma_hat,
    )
    new_payload = ep.TxPayload(payee="shop", amount=1, due_tick=30)
    r_new, sigma_new = ep.adapt(
        params, provider, user.trapdoor.sk, tx.tx_id, tx.payload, tx.h, tx.r, new_payload
    )
    ep.apply_adaption(tx, new_payload, r_new, sigma_new, "shop", tick=31)
    assert tx.redacted and len(tx.redaction_log) == 1
    assert tx.payload == new_payload
    # sigma_hat still verifies: member digests never changed
    assert ep.verify(
        params, user.public(), provider, tx.tx_id, tx.payload, tx.h, tx.r, tx.sigma,
        sigma_hat=bundle.sigma_hat, redacted=True,
    )


# -- immutable path --------------------------------------------------------------


def test_immutable_roundtrip(toy, rng):
    params, server, user, _ = make_world(toy, rng)
    tx = ep.make_immutable(params, user, b"im-1", ep.TxPayload("carol", 9, 0))
    assert ep.verify_immutable(params, user.public(), tx)
    forged = ep.ImmutableTransaction(
        tx_id=tx.tx_id,
        payload=ep.TxPayload("carol", 10, 0),
        digest=tx.digest,
        sigma=tx.sigma,
    )
    assert not ep.verify_immutable(params, user.public(), forged)


# -- golden composition over p = 101 ---------------------------------------------


def test_golden_walkthrough_composes(toy101, queued_rng):
    """The hand-computed module vectors compose through the whole pipeline:
    beta=3, x=7, s=5, alpha'=3, r=10, r0=2, H(m)=4, H1(T)=g^11."""
    params = ep.setup(toy101, 4, queued_rng([2]))
    server = tl.ServerKeyPair(sk=3, pk=toy101.exp(toy101.generator, 3))
    user = ep.user_keygen(params, server.pk, queued_rng([3, 7, 5]))
    assert user.signer.sk == 3 and user.trapdoor.sk == 7 and user.designation.s == 5

    label = find_label(toy101, 11)
    base = ep.TxPayload(payee="shop", amount=100, due_tick=12)
    payload = find_memo(toy101, b"golden-tx", base, 4)

    tx = ep.tr_creat(params, user, server.pk, b"golden-tx", payload, label, queued_rng([10, 2]))
    assert tx.h == 74  # 4 + 7*10 (mod 101)
    assert tx.r == 10
    assert tx.cipher.u == 2
    pad = toy101.gt_to_bytes(toy101.gt_exp(toy101.gt_generator, 27))
    assert tx.cipher.rho == bytes(
        a ^ b for a, b in zip(ep.encode_trapdoor(toy101, 7), pad)
    )

    tik = tl.extract_tik(toy101, server.sk, label)
    assert tik.k_t == 33
    assert tl.verify_tik(toy101, server.pk, tik)

    bundle = ep.DeferredBundle(
        user=user.public(),
        transactions=[tx],
        sigma_hat=lvs.aggregate(
            toy101, user.signer.pk_powers, [(tx.digest_scalar, tx.sigma)]
        ),
    )
    _, aux = ep.ext(params, server, user.public(), bundle, [0], label)
    out = ep.released_dec(params, user.public(), bundle, aux, tx.cipher, tik, 5)
    assert out.ok and out.trapdoor == 7

    new_payload = find_memo(toy101, b"golden-tx", base, 9)
    r_new, sigma_new = ep.adapt(
        params, ep.ProviderKeys(signer=lvs.SignerKeyPair(sk=11, pk_powers=(11,))),
        out.trapdoor, tx.tx_id, tx.payload, tx.h, tx.r, new_payload,
    )
    assert r_new == 67  # (4 + 70 - 9) / 7 (mod 101)
    assert ep.chameleon.ch_verify(
        toy101, user.public().pk_h, ep.encode_message(b"golden-tx", new_payload), tx.h, r_new
    )


# -- JSON round trips -------------------------------------------------------------


def test_json_roundtrips(toy, production, rng):
    for be in (toy, production):
        params, server, user, provider = make_world(be, random.Random(77), bound=3)
        items = [
            (b"tx-%d" % i, ep.TxPayload(payee="shop", amount=5 + i, due_tick=8))
            for i in range(2)
        ]
        bundle = ep.make_bundle(params, user, server.pk, items, b"8", random.Random(78))
        doc = ep.bundle_to_json(be, bundle)
        back = ep.bundle_from_json(be, doc)
        assert back.sigma_hat == bundle.sigma_hat
        assert back.user == bundle.user
        assert [t.payload for t in back.transactions] == [
            t.payload for t in bundle.transactions
        ]
        tik = tl.extract_tik(be, server.sk, b"8")
        assert ep.tik_from_json(be, ep.tik_to_json(be, tik)) == tik
        keys_doc = ep.user_keys_to_json(be, user, include_secrets=True)
        assert keys_doc["test_mode_secrets"] is True
        assert ep.user_public_from_json(be, keys_doc["public"]) == user.public()
        public_doc = ep.user_keys_to_json(be, user)
        assert "secrets" not in public_doc
