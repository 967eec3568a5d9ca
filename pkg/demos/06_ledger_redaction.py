#!/usr/bin/env python3
"""The simulated chain: mining, clock-driven time keys, in-place redaction.

Rewriting a mined transaction changes its body but not one byte of any
block header: the transaction root is built over chameleon digests, which
is the whole point of the construction.
"""

import json

from asyncpay import protocol as ep
from asyncpay.backends import ToyBackend
from asyncpay.ledger import Simulation, run_scenario

sim = Simulation(ToyBackend(), seed=5, bound=8, difficulty=0x0400)
sim.add_user("alice")
sim.add_provider("shop")
sim.designate("alice", "shop")

due = 3
items = [
    (sim.next_tx_id("alice"), ep.TxPayload("shop", amount, due))
    for amount in (120, 60, 45)
]
bundle = sim.submit_bundle("alice", items, due)
block = sim.mine()
print(f"mined block {block.height} holding {len(block.entries)} tx "
      f"(nonce {block.nonce})")

before = sim.chain_dump()

# too early: no time key for tick 3 yet
tx = bundle.transactions[0]
ok, diag = sim.redact("shop", "alice", tx.tx_id, ep.TxPayload("shop", 100, due))
print(f"redaction before the due tick: refused ({diag})")

released = sim.advance_clock(due)
print(f"clock advanced to tick {sim.clock.tick}; {len(released)} time keys out")

ok, diag = sim.redact("shop", "alice", tx.tx_id, ep.TxPayload("shop", 100, due))
print(f"redaction at the due tick: {diag}")

after = sim.chain_dump()
same_header = before["blocks"][0]["header_digest"] == after["blocks"][0]["header_digest"]
same_root = before["blocks"][0]["tx_root"] == after["blocks"][0]["tx_root"]
old_amount = before["blocks"][0]["transactions"][0]["body"]["payload"]["amount"]
new_amount = after["blocks"][0]["transactions"][0]["body"]["payload"]["amount"]
print(f"block header unchanged: {same_header}; tx root unchanged: {same_root}")
print(f"amount rewritten in place: {old_amount} -> {new_amount}")
print(f"chain still validates: {sim.node.validate_block(sim.node.chain[0])}")
print(f"redaction log: {json.dumps(after['blocks'][0]['transactions'][0]['body']['redaction_log'][0], indent=2)}")

# the same flow as a replayable script
print("\nscenario scripts drive the identical flow:")
_, trace = run_scenario(json.load(open("demos/scenarios/early_decrypt.json")))
for line in trace:
    print("  " + line)
