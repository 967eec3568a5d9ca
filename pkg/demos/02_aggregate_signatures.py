#!/usr/bin/env python3
"""Aggregate signatures with local subset verification.

One signer signs many digests; the signatures compress into a single group
element.  A verifier interested in only a few of the digests does not need
the full list: short auxiliary elements (computable from public data) let
it check just its subset, much faster than verifying each signature alone.
"""

import random
import time

from asyncpay import lvs
from asyncpay.backends import TypeABackend

be = TypeABackend()
rng = random.Random(42)
k = 24

key = lvs.keygen(be, bound=k, rng=rng)
digests = [be.field.rand(rng) for _ in range(k)]
signatures = [lvs.sign(be, key.sk, h) for h in digests]
print(f"signed {k} digests; every signature is one group element")

agg = lvs.aggregate(be, key.pk_powers, list(zip(digests, signatures)))
print(f"aggregated into a single element; full verification: "
      f"{lvs.verify_aggregate_full(be, key.pk_powers, agg)}")

# a verifier that cares about digests 3 and 7 only
subset = (3, 7)
aux = lvs.derive_aux(be, key.pk_powers, digests, subset)
subset_digests = [digests[i] for i in subset]
print(f"subset {subset} verifies via aux: "
      f"{lvs.verify_subset(be, key.pk_powers, agg.sigma_hat, aux, subset_digests)}")

# tamper with the aggregate: everything must fail
bad = be.mul(agg.sigma_hat, be.generator)
print(f"perturbed aggregate passes subset check: "
      f"{lvs.verify_subset(be, key.pk_powers, bad, aux, subset_digests)}")

# the speed story: all k at once vs one by one
aux_all = lvs.derive_aux(be, key.pk_powers, digests, range(k))
t0 = time.perf_counter()
for h, sig in zip(digests, signatures):
    assert lvs.verify_single(be, key.pk_powers, sig, h)
individual_ms = (time.perf_counter() - t0) * 1000

t0 = time.perf_counter()
assert lvs.verify_subset(be, key.pk_powers, agg.sigma_hat, aux_all, digests)
subset_ms = (time.perf_counter() - t0) * 1000
print(f"\n{k} individual verifications: {individual_ms:.1f} ms")
print(f"one subset verification:      {subset_ms:.1f} ms "
      f"({individual_ms / subset_ms:.1f}x faster)")
