#!/usr/bin/env python3
"""The full deferred-payment lifecycle, role by role.

A consumer buys now and pays later: the deferred transactions carry a
chameleon digest, the per-user signatures compress into one aggregate, and
the chameleon trapdoor rides along time-locked to the due date.  When the
date arrives, the designated provider (and only it) can settle the actual
amounts by rewriting the transactions in place.
"""

import random

from asyncpay import lvs, protocol as ep
from asyncpay.backends import TypeABackend

be = TypeABackend()
rng = random.Random(3)

# -- system initialization ---------------------------------------------------
params = ep.setup(be, bound=8, rng=rng)
server = ep.server_keygen(params, rng)
alice = ep.user_keygen(params, server.pk, rng)
shop = ep.provider_keygen(params, rng)
print("keys ready: administrator, time server, user alice, provider shop")

# alice hands her designation secret to the shop (off-chain)
designation = ep.designate_provider(alice, "shop")

# -- transaction making --------------------------------------------------------
due_tick = 30
label = ep.tick_label(due_tick)
items = [
    (b"order-1", ep.TxPayload(payee="shop", amount=120, due_tick=due_tick)),
    (b"order-2", ep.TxPayload(payee="shop", amount=60, due_tick=due_tick)),
    (b"order-3", ep.TxPayload(payee="shop", amount=45, due_tick=due_tick)),
]
bundle = ep.make_bundle(params, alice, server.pk, items, label, rng)
print(f"alice bundles {len(items)} deferred payments; "
      f"one aggregate signature covers them all")

for tx in bundle.transactions:
    assert ep.verify(params, alice.public(), shop, tx.tx_id, tx.payload, tx.h,
                     tx.r, tx.sigma, sigma_hat=bundle.sigma_hat)
print("miner-side verification of every fresh transaction: ok")

# -- due date: extraction and timed-release decryption --------------------------
tik, aux = ep.ext(params, server, alice.public(), bundle, [0, 1], label)
outcome = ep.released_dec(
    params, alice.public(), bundle, aux, bundle.transactions[0].cipher, tik,
    designation.s,
)
print(f"shop recovers the trapdoor at tick {due_tick}: {outcome.ok}")

# -- transaction rewriting: settle order-1 at the real amount --------------------
tx = bundle.transactions[0]
settled = ep.TxPayload(payee="shop", amount=100, due_tick=due_tick)
r_new, sigma_new = ep.adapt(
    params, shop, outcome.trapdoor, tx.tx_id, tx.payload, tx.h, tx.r, settled
)
print(f"digest unchanged after rewrite: "
      f"{be.element_to_bytes(tx.h) == be.element_to_bytes(ep.chameleon.ch_hash(be, alice.public().pk_h, ep.encode_message(tx.tx_id, settled), r_new))}")
print(f"rewritten tx verifies against the provider key: "
      f"{ep.verify(params, alice.public(), shop, tx.tx_id, settled, tx.h, r_new, sigma_new, redacted=True)}")
print(f"...and is no longer attributable to alice: "
      f"{not ep.verify(params, alice.public(), shop, tx.tx_id, settled, tx.h, r_new, sigma_new, redacted=False)}")

# the aggregate still covers the bundle: digests never moved
assert lvs.verify_aggregate_full(be, alice.public().pk_powers, bundle.sigma_hat)
print("aggregate signature still valid over the rewritten bundle")
