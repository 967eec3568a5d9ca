#!/usr/bin/env python3
"""Chameleon hashing: rewriting content under a fixed digest.

A chameleon digest commits to a message like an ordinary hash, but whoever
holds the trapdoor can open the same digest to a different message by
recomputing the randomness.  Everyone else faces a discrete-log problem.
"""

import random

from asyncpay import chameleon as ch
from asyncpay.backends import TypeABackend

be = TypeABackend()
rng = random.Random(7)

keys = ch.ch_keygen(be, rng)
message = b"pay 300 to webshop in 3 installments"
r = be.field.rand(rng)
digest = ch.ch_hash(be, keys.pk, message, r)
print(f"digest commits to: {message.decode()}")
print(f"opens under r:     {ch.ch_verify(be, keys.pk, message, digest, r)}")

rewritten = b"pay 240 to webshop in 2 installments"
r_new = ch.ch_adapt(be, keys.sk, message, digest, r, rewritten)
print(f"\ntrapdoor holder rewrites to: {rewritten.decode()}")
print(f"same digest, new randomness: {ch.ch_verify(be, keys.pk, rewritten, digest, r_new)}")
print(f"digest bytes unchanged:      "
      f"{be.element_to_bytes(ch.ch_hash(be, keys.pk, rewritten, r_new)) == be.element_to_bytes(digest)}")

# without the trapdoor, guessing randomness gets you nowhere
hits = 0
for i in range(20000):
    guess = be.field.rand(rng)
    if ch.ch_hash(be, keys.pk, b"forged content %d" % i, guess) == digest:
        hits += 1
print(f"\nblind collision search, 20000 attempts without the trapdoor: {hits} hits")
