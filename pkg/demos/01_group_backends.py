#!/usr/bin/env python3
"""Two interchangeable bilinear-group backends.

The production backend is a real symmetric pairing on a supersingular
curve; the toy backend tracks discrete logs so every pairing equation is
decidable by integer arithmetic.  Both satisfy the same equations, which
is what lets the toy group act as a brute-force oracle in the test suite.
"""

import random
import time

from asyncpay.backends import ToyBackend, TypeABackend

rng = random.Random(1)

print("=== toy backend: elements ARE their exponents ===")
toy = ToyBackend(101)
g3 = toy.exp(toy.generator, 3)
g8 = toy.exp(toy.generator, 8)
print(f"g^3 is stored as {g3}, g^8 as {g8}")
print(f"e(g^3, g^8) = e(g,g)^{toy.pair(g3, g8)}   (24 = 3*8 mod 101)")

print("\n=== production backend: a 512-bit supersingular curve ===")
prod = TypeABackend()
print({k: v for k, v in prod.describe().items() if k != "group_order"})

a, b = rng.randrange(prod.order), rng.randrange(prod.order)
pa = prod.exp(prod.generator, a)
pb = prod.exp(prod.generator, b)

t0 = time.perf_counter()
left = prod.pair(pa, pb)
pairing_ms = (time.perf_counter() - t0) * 1000
right = prod.gt_exp(prod.gt_generator, a * b % prod.order)
print(f"bilinearity e(g^a, g^b) == e(g,g)^ab: {left == right}")
print(f"symmetry    e(g^a, g^b) == e(g^b, g^a): {prod.pair(pa, pb) == prod.pair(pb, pa)}")
print(f"one pairing costs about {pairing_ms:.2f} ms here")

print("\n=== both backends agree on pairing-equation booleans ===")
oracle = ToyBackend(prod.order)  # same prime order as the curve subgroup
agree = 0
for _ in range(25):
    a = rng.randrange(oracle.order)
    b = rng.randrange(oracle.order)
    c = a * b % oracle.order if rng.random() < 0.5 else rng.randrange(oracle.order)
    toy_says = oracle.pair(a, b) == oracle.gt_exp(oracle.gt_generator, c)
    prod_says = prod.pair(
        prod.exp(prod.generator, a), prod.exp(prod.generator, b)
    ) == prod.gt_exp(prod.gt_generator, c)
    agree += toy_says == prod_says
print(f"agreement on 25 random instances: {agree}/25")
