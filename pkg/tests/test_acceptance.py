"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria 1-4 are exact/property checks on the toy oracle backend; criteria
5-8 are desk-scale quantitative reproductions on the production pairing
backend.  Stated runtime budgets are asserted alongside the substance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the report lines.
"""

import random
import time

import pytest

from asyncpay import chameleon, lvs, protocol as ep, timelock as tl
from asyncpay.backends import ToyBackend, TypeABackend
from asyncpay.bench import (
    BenchConfig,
    bundle_wire_bytes,
    fit_line,
    flatness_ratio,
    growth_slope,
    r_squared,
    run_local_comparison,
    run_phase_grid,
    run_redaction_comparison,
)
from asyncpay.ledger import Simulation


def _report(number, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    assert ok, f"criterion {number}: {detail}"


@pytest.fixture(scope="module")
def production():
    return TypeABackend()


# -----------------------------------------------------------------------------
# 1. toy-backend golden vectors: the hand-computed chain reproduces exactly
# -----------------------------------------------------------------------------


def test_criterion_1_golden_vectors():
    t0 = time.perf_counter()
    be = ToyBackend(101)
    f = be.field

    key = lvs.SignerKeyPair(sk=3, pk_powers=(3, 9, 27, 81 % 101))
    sigs = [lvs.sign(be, 3, h) for h in (2, 5)]
    agg = lvs.aggregate(be, key.pk_powers, [(2, sigs[0]), (5, sigs[1])])
    checks = [agg.sigma_hat == 48]
    checks.append(lvs.expand_poly(f, (2, 5)) == [10, 7, 1])
    checks.append(lvs.verify_aggregate_full(be, key.pk_powers, agg))

    aux = lvs.derive_aux(be, key.pk_powers, (2, 5), [0])
    checks.append(aux.aux_powers == (8, 24))
    checks.append(lvs.verify_subset(be, key.pk_powers, agg.sigma_hat, aux, [2]))

    # chameleon: x = 7, H(m) = 4, r = 10 -> digest g^74; rewrite to H(m') = 9
    x = 7
    digest = (4 + x * 10) % 101
    checks.append(digest == 74)
    r_new = f.div(f.sub(f.add(4, f.mul(x, 10)), 9), x)
    checks.append(r_new == 67)
    checks.append((9 + x * r_new) % 101 == 74)  # same digest, new opening

    # timed release: alpha' = 3, s = 5, r0 = 2, H1(T) = g^11
    checks.append((2 * 5 * 3 * 11) % 101 == 27)  # pad key exponent
    checks.append((3 * 11) % 101 == 33)  # TIK exponent
    checks.append(be.gt_exp(be.pair(be.exp(be.generator, 2), 33), 5) == 27)

    elapsed = time.perf_counter() - t0
    _report(
        1, all(checks) and elapsed < 1.0,
        f"golden chain over p=101 reproduced exactly in {elapsed:.3f}s "
        "(sigma_hat=g^48, delta=(10,7,1), aux=(g^8,g^24), r 10->67 with h=g^74, "
        "K=e(g,g)^27, TIK=g^33)",
    )


# -----------------------------------------------------------------------------
# 2. lifecycle suite: 200 randomized scenarios on the toy backend
# -----------------------------------------------------------------------------


def test_criterion_2_lifecycle_suite():
    t0 = time.perf_counter()
    failures = []
    for seed in range(200):
        rnd = random.Random(seed)
        u = rnd.randrange(1, 9)
        k = rnd.randrange(1, 9)
        due = rnd.randrange(2, 7)
        sim = Simulation(ToyBackend(), seed=seed, bound=8)
        sim.add_provider("shop")
        sim.add_provider("outsider")
        bundles = {}
        for i in range(u):
            name = f"user{i}"
            sim.add_user(name)
            sim.designate(name, "shop")
            items = [
                (sim.next_tx_id(name), ep.TxPayload("shop", rnd.randrange(500), due))
                for _ in range(k)
            ]
            bundles[name] = sim.submit_bundle(name, items, due)
        sim.mine()
        dump_before = sim.chain_dump()

        target = bundles[f"user{rnd.randrange(u)}"].transactions[rnd.randrange(k)]
        h_before = sim.backend.element_to_bytes(target.h)

        # early decryption must always refuse (clock below the due tick)
        sim.advance_clock(due - 1)
        owner = target.tx_id.decode().split("/")[0]
        ok, diag = sim.redact("shop", owner, target.tx_id, ep.TxPayload("shop", 1, due))
        if ok or diag != "label-mismatch":
            failures.append((seed, "early", diag))
            continue

        sim.advance_clock(1)
        # a provider without the designation secret must never get the trapdoor
        ok, diag = sim.redact("outsider", owner, target.tx_id, ep.TxPayload("shop", 2, due))
        if ok or diag != "trapdoor-mismatch":
            failures.append((seed, "outsider", diag))
            continue

        ok, diag = sim.redact("shop", owner, target.tx_id, ep.TxPayload("shop", 3, due))
        if not ok:
            failures.append((seed, "redact", diag))
            continue

        if sim.backend.element_to_bytes(target.h) != h_before:
            failures.append((seed, "digest-moved", None))
            continue
        dump_after = sim.chain_dump()
        stable = all(
            b1["header_digest"] == b2["header_digest"] and b1["tx_root"] == b2["tx_root"]
            for b1, b2 in zip(dump_before["blocks"], dump_after["blocks"])
        )
        if not stable:
            failures.append((seed, "chain-moved", None))
            continue
        if not all(sim.node.validate_block(b) for b in sim.node.chain):
            failures.append((seed, "invalid-chain", None))
    elapsed = time.perf_counter() - t0
    _report(
        2, not failures and elapsed < 60.0,
        f"200 randomized lifecycles clean in {elapsed:.1f}s "
        f"(failures: {failures[:3] if failures else 'none'})",
    )


# -----------------------------------------------------------------------------
# 3. backend conformance: 1000 pairing-equation booleans agree
# -----------------------------------------------------------------------------


def test_criterion_3_backend_conformance(production):
    t0 = time.perf_counter()
    # same prime order on both sides, so the boolean outcomes are comparable
    toy = ToyBackend(production.order)
    rnd = random.Random(1234)
    mismatches = 0
    for trial in range(1000):
        a = rnd.randrange(toy.order)
        b = rnd.randrange(toy.order)
        c = a * b % toy.order if trial % 2 == 0 else rnd.randrange(toy.order)
        toy_bool = toy.pair(
            toy.exp(toy.generator, a), toy.exp(toy.generator, b)
        ) == toy.gt_exp(toy.gt_generator, c)
        prod_bool = production.pair(
            production.exp(production.generator, a),
            production.exp(production.generator, b),
        ) == production.gt_exp(production.gt_generator, c)
        if toy_bool != prod_bool or toy_bool != ((a * b - c) % toy.order == 0):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    _report(
        3, mismatches == 0 and elapsed < 60.0,
        f"1000 pairing-equation booleans agree across backends in {elapsed:.1f}s",
    )


# -----------------------------------------------------------------------------
# 4. chain integrity across arbitrary redaction sequences
# -----------------------------------------------------------------------------


def test_criterion_4_chain_integrity():
    t0 = time.perf_counter()
    ok = True
    detail = ""
    for seed in range(10):
        rnd = random.Random(9000 + seed)
        sim = Simulation(ToyBackend(), seed=seed, bound=6)
        sim.add_provider("shop")
        all_txs = []
        for i in range(3):
            name = f"u{i}"
            sim.add_user(name)
            sim.designate(name, "shop")
            for block_round in range(2):
                due = 1
                items = [
                    (sim.next_tx_id(name), ep.TxPayload("shop", rnd.randrange(99), due))
                    for _ in range(rnd.randrange(2, 6))
                ]
                bundle = sim.submit_bundle(name, items, due)
                all_txs.extend((name, tx) for tx in bundle.transactions)
                sim.mine()
        sim.advance_clock(1)
        before = sim.chain_dump()
        rnd.shuffle(all_txs)
        for name, tx in all_txs[: rnd.randrange(3, len(all_txs) + 1)]:
            applied, diag = sim.redact(
                "shop", name, tx.tx_id, ep.TxPayload("shop", rnd.randrange(99), 1)
            )
            if not applied:
                ok, detail = False, f"seed {seed}: redaction refused ({diag})"
                break
        after = sim.chain_dump()
        for b1, b2 in zip(before["blocks"], after["blocks"]):
            for key in ("header_digest", "tx_root", "prev_digest", "nonce"):
                if b1[key] != b2[key]:
                    ok, detail = False, f"seed {seed}: block field {key} changed"
            for t1, t2 in zip(b1["transactions"], b2["transactions"]):
                if t1["kind"] == "redactable" and t1["body"]["h"] != t2["body"]["h"]:
                    ok, detail = False, f"seed {seed}: chameleon digest changed"
        if not all(sim.node.validate_block(b) for b in sim.node.chain):
            ok, detail = False, f"seed {seed}: chain fails validation after redactions"
        if not ok:
            break
    elapsed = time.perf_counter() - t0
    _report(
        4, ok and elapsed < 30.0,
        detail or f"headers and tx roots byte-stable over random redaction "
        f"sequences on 10 chains in {elapsed:.1f}s",
    )


# -----------------------------------------------------------------------------
# 5. local-verification speedup on the production backend
# -----------------------------------------------------------------------------


def test_criterion_5_local_verification_speedup():
    t0 = time.perf_counter()
    config = BenchConfig(
        backend_name="production", reps=5, seed=11,
        local_ks=(4, 8, 12, 16, 20, 24, 28, 32),
    )
    rows, report = run_local_comparison(config)
    elapsed = time.perf_counter() - t0
    speedup = report["speedup_at_max_k"]
    ok = (
        speedup >= 4.0
        and report["individual_monotone"]
        and report["local_slope_ms_per_item"] < report["individual_slope_ms_per_item"]
        and elapsed < 300.0
    )
    _report(
        5, ok,
        f"one subset verification vs 32 individual: {speedup:.2f}x speedup "
        f"(medians of {config.reps}); slopes {report['local_slope_ms_per_item']:.3f} "
        f"vs {report['individual_slope_ms_per_item']:.3f} ms/item; {elapsed:.0f}s",
    )


# -----------------------------------------------------------------------------
# 6. redaction vs re-mining at 2000 transactions per block
# -----------------------------------------------------------------------------


def test_criterion_6_redaction_vs_remine():
    t0 = time.perf_counter()
    config = BenchConfig(
        backend_name="production", reps=3, seed=13, txs_per_block=(500, 1000, 2000)
    )
    rows, report = run_redaction_comparison(config)
    elapsed = time.perf_counter() - t0
    speedup = report["speedup_at_max_n"]
    r2_redact = report["redact_fit"]["r_squared"]
    r2_remine = report["remine_fit"]["r_squared"]
    ok = (
        speedup >= 4.0
        and r2_redact >= 0.9
        and r2_remine >= 0.9
        and elapsed < 600.0
    )
    _report(
        6, ok,
        f"redact-in-place vs create/re-validate/re-mine at 2000 tx: "
        f"{speedup:.2f}x, linear fits R^2 {r2_redact:.3f}/{r2_remine:.3f}; "
        f"{elapsed:.0f}s",
    )


# -----------------------------------------------------------------------------
# 7. communication scaling: wire bytes linear in u*k, KB-level at (32, 24)
# -----------------------------------------------------------------------------


def test_criterion_7_communication_scaling(production):
    t0 = time.perf_counter()
    rng = random.Random(77)
    params = ep.setup(production, 24, rng)
    server = ep.server_keygen(params, rng)
    label = ep.tick_label(50)
    points = []
    at_32_24 = None
    cells = ((8, 8), (8, 16), (8, 24), (16, 16), (24, 16), (32, 24))
    for u, k in cells:
        total = 0
        for ui in range(u):
            user = ep.user_keygen(params, server.pk, rng)
            items = [
                (b"c%d-%d-%d" % (u, ui, i), ep.TxPayload("shop", i + 1, 50))
                for i in range(k)
            ]
            bundle = ep.make_bundle(params, user, server.pk, items, label, rng)
            total += bundle_wire_bytes(production, bundle)
        points.append((u * k, total))
        if (u, k) == (32, 24):
            at_32_24 = total
    r2 = r_squared(points)
    slope = fit_line(points)[1]
    elapsed = time.perf_counter() - t0
    ok = (
        r2 >= 0.99 and slope > 0
        and at_32_24 is not None and at_32_24 < 100_000
        and elapsed < 60.0
    )
    _report(
        7, ok,
        f"ciphertext+signature bytes linear in u*k (R^2 {r2:.4f}, "
        f"{slope:.0f} B per tx), {at_32_24} B at (u=32, k=24); {elapsed:.0f}s",
    )


# -----------------------------------------------------------------------------
# 8. phase-grid trends: flat keygen, growing protocol phases
# -----------------------------------------------------------------------------


def test_criterion_8_phase_trends():
    t0 = time.perf_counter()
    config = BenchConfig(
        backend_name="production", reps=3, seed=17,
        users=(8, 16, 24, 32), deferred=(8, 16, 24),
    )
    rows = run_phase_grid(config)
    flat = {
        phase: flatness_ratio(rows, phase)
        for phase in ("setup", "user_keygen", "provider_keygen", "server_keygen")
    }
    slopes = {
        phase: growth_slope(rows, phase)
        for phase in ("tr_creat", "aggregate", "ext", "released_dec", "adapt", "verify")
    }
    elapsed = time.perf_counter() - t0
    ok = (
        all(v <= 2.0 for v in flat.values())
        and all(v > 0 for v in slopes.values())
        and elapsed < 600.0
    )
    flat_s = ", ".join(f"{k} {v:.2f}" for k, v in flat.items())
    slope_s = ", ".join(f"{k} {v:.2f}" for k, v in slopes.items())
    _report(
        8, ok,
        f"keygen flat across u (max/min: {flat_s}); workload phases grow with "
        f"u*k (ms per tx: {slope_s}); {elapsed:.0f}s",
    )
