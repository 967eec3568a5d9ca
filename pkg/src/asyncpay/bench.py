"""Measurement harness behind the CLI.

Wall-clock timing around each protocol phase, medians over repetitions with
one discarded warm-up pass.  Three studies:

* ``run_phase_grid`` - per-phase times over a (users u, deferred-per-user k)
  grid, plus per-cell communication bytes (serialized ciphertexts and the
  per-bundle aggregate signature - the wire objects a bundle propagates).
* ``run_local_comparison`` - k individual signature verifications versus one
  subset verification with auxiliary elements, swept over k.
* ``run_redaction_comparison`` - in-place redaction of every transaction in
  a mined block versus the no-redaction baseline that must create
  replacement transactions, re-validate them and re-mine at the configured
  difficulty.  The redaction side times the miner's ``apply_redaction``
  (verification plus swap); the provider's adaption inputs are prepared
  outside the timed region, mirroring how the baseline's replacement
  payload decisions are.

Rows come out in a fixed schema (phase, u, k, ms, bytes, backend) and a
deterministic order so reports are diffable; only the measured numbers
vary run to run.
"""

from __future__ import annotations

import contextlib
import gc
import random
import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import lvs, protocol as ep, timelock
from .backends import TOY_DEFAULT_ORDER, make_backend
from .ledger import DEFAULT_DIFFICULTY, ChainEntry, Simulation

PHASES = (
    "setup",
    "user_keygen",
    "provider_keygen",
    "server_keygen",
    "tr_creat",
    "aggregate",
    "ext",
    "released_dec",
    "adapt",
    "verify",
    "local_verify",
    "individual_verify",
    "redact_path",
    "remine_path",
)

CSV_COLUMNS = ("phase", "u", "k", "ms", "bytes", "backend")


@dataclass(frozen=True)
class BenchConfig:
    backend_name: str = "production"
    users: tuple = (8, 16, 24, 32)
    deferred: tuple = (8, 16, 24)
    reps: int = 5
    seed: int = 1
    txs_per_block: tuple = (500, 1000, 2000)
    difficulty: int = DEFAULT_DIFFICULTY
    local_ks: tuple = (4, 8, 12, 16, 20, 24, 28, 32)
    toy_order: int = TOY_DEFAULT_ORDER

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("need at least one repetition")
        if any(u < 1 for u in self.users) or any(k < 1 for k in self.deferred):
            raise ValueError("grid dimensions must be positive")

    def backend(self):
        return make_backend(self.backend_name, toy_order=self.toy_order)


@dataclass(frozen=True)
class MeasurementRow:
    phase: str
    u: int
    k: int
    ms: float
    bytes: int
    backend: str


def _now_ms():
    return time.perf_counter() * 1000.0


def _derive_seed(*parts) -> int:
    """Stable sub-seed from mixed parts (hash() on strings is per-process)."""
    import hashlib

    blob = "|".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:4], "big")


@contextlib.contextmanager
def _gc_paused():
    """Collector off inside timed regions (timeit-style), uniformly for
    every measured path; sweep cost otherwise scales with live-heap size
    and would skew the block-size comparisons."""
    gc.collect()
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


class _Timer:
    def __init__(self):
        self.ms = {}

    def measure(self, phase):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = _now_ms()

            def __exit__(self, *exc):
                timer.ms[phase] = timer.ms.get(phase, 0.0) + (_now_ms() - self.t0)

        return _Ctx()


def bundle_wire_bytes(backend, bundle) -> int:
    """Bytes a bundle puts on the wire: per-tx ciphertexts plus sigma_hat."""
    total = len(lvs.serialize_aggregate(backend, bundle.sigma_hat))
    for tx in bundle.transactions:
        total += len(timelock.ciphertext_to_bytes(backend, tx.cipher))
    return total


def _run_phase_cell(backend, u: int, k: int, seed: int):
    """One timed pass of the full protocol workload for a (u, k) cell.

    Key generation phases are timed per invocation (they do not depend on
    how many peers exist); the transaction phases are timed as totals over
    the whole u-user, k-per-user workload.  The provider redacts the first
    half of every bundle.
    """
    rng = random.Random(seed)
    timer = _Timer()
    subset = tuple(range((k + 1) // 2))
    due = 50

    with timer.measure("setup"):
        params = ep.setup(backend, k, rng)
    with timer.measure("server_keygen"):
        server = ep.server_keygen(params, rng)
    with timer.measure("user_keygen"):
        first_user = ep.user_keygen(params, server.pk, rng)
    with timer.measure("provider_keygen"):
        provider = ep.provider_keygen(params, rng)
    users = [first_user] + [
        ep.user_keygen(params, server.pk, rng) for _ in range(u - 1)
    ]

    label = ep.tick_label(due)
    item_lists = [
        [
            (b"cell-%d-%d" % (ui, i), ep.TxPayload(payee="shop", amount=i + 1, due_tick=due))
            for i in range(k)
        ]
        for ui in range(u)
    ]

    transactions = []
    with timer.measure("tr_creat"):
        for user, items in zip(users, item_lists):
            transactions.append(
                [
                    ep.tr_creat(params, user, server.pk, tx_id, payload, label, rng)
                    for tx_id, payload in items
                ]
            )
    bundles = []
    with timer.measure("aggregate"):
        for user, txs in zip(users, transactions):
            agg = lvs.aggregate(
                backend, user.signer.pk_powers, [(t.digest_scalar, t.sigma) for t in txs]
            )
            bundles.append(ep.DeferredBundle(user=user.public(), transactions=txs, sigma_hat=agg))

    extractions = []
    with timer.measure("ext"):
        for user, bundle in zip(users, bundles):
            extractions.append(ep.ext(params, server, user.public(), bundle, subset, label))

    trapdoors = []
    with timer.measure("released_dec"):
        for user, bundle, (tik, aux) in zip(users, bundles, extractions):
            out = ep.released_dec(
                params, user.public(), bundle, aux,
                bundle.transactions[subset[0]].cipher, tik, user.designation.s,
            )
            assert out.ok, out.reason
            trapdoors.append(out.trapdoor)

    rewrites = []
    with timer.measure("adapt"):
        for user, bundle, sk_h in zip(users, bundles, trapdoors):
            per_user = []
            for i in subset:
                tx = bundle.transactions[i]
                new_payload = ep.TxPayload(payee="shop", amount=0, due_tick=due)
                per_user.append(
                    (tx, new_payload)
                    + ep.adapt(params, provider, sk_h, tx.tx_id, tx.payload, tx.h, tx.r, new_payload)
                )
            rewrites.append(per_user)

    with timer.measure("verify"):
        for user, bundle, per_user in zip(users, bundles, rewrites):
            for tx, new_payload, r_new, sigma_new in per_user:
                ok = ep.verify(
                    params, user.public(), provider, tx.tx_id, new_payload, tx.h,
                    r_new, sigma_new, sigma_hat=bundle.sigma_hat, redacted=True,
                )
                assert ok

    comm = sum(bundle_wire_bytes(backend, b) for b in bundles)
    return timer.ms, comm


def run_phase_grid(config: BenchConfig):
    """MeasurementRows for every (phase, u, k) cell, medians over reps."""
    backend = config.backend()
    rows = []
    for u in config.users:
        for k in config.deferred:
            samples = {}
            comm = 0
            for rep in range(config.reps + 1):  # first pass warms up, discarded
                seed = _derive_seed(config.seed, "grid", u, k, rep)
                with _gc_paused():
                    ms, comm = _run_phase_cell(backend, u, k, seed)
                if rep == 0 and config.reps > 1:
                    continue
                for phase, value in ms.items():
                    samples.setdefault(phase, []).append(value)
            for phase in PHASES:
                if phase in samples:
                    rows.append(
                        MeasurementRow(
                            phase=phase, u=u, k=k,
                            ms=round(statistics.median(samples[phase]), 4),
                            # the transaction-making row doubles as the
                            # communication row: total bundle wire bytes
                            bytes=comm if phase == "tr_creat" else 0,
                            backend=backend.name,
                        )
                    )
    return sort_rows(rows)


# --------------------------------------------------------------------------
# local-verification comparison
# --------------------------------------------------------------------------


def _local_cell(backend, k: int, seed: int):
    rng = random.Random(seed)
    kp = lvs.keygen(backend, k, rng)
    hashes = []
    while len(hashes) < k:
        h = backend.field.rand(rng)
        if h not in hashes and (kp.sk + h) % backend.order != 0:
            hashes.append(h)
    sigs = [lvs.sign(backend, kp.sk, h) for h in hashes]
    agg = lvs.aggregate(backend, kp.pk_powers, list(zip(hashes, sigs)))
    aux = lvs.derive_aux(backend, kp.pk_powers, hashes, range(k))

    with _gc_paused():
        t0 = _now_ms()
        for h, sig in zip(hashes, sigs):
            assert lvs.verify_single(backend, kp.pk_powers, sig, h)
        individual_ms = _now_ms() - t0

        t0 = _now_ms()
        assert lvs.verify_subset(backend, kp.pk_powers, agg.sigma_hat, aux, hashes)
        local_ms = _now_ms() - t0
    return individual_ms, local_ms


def run_local_comparison(config: BenchConfig):
    """k single verifications vs one subset verification, swept over k.

    Returns (rows, report) where the report carries the speedup curve and
    least-squares slopes of both paths.
    """
    backend = config.backend()
    rows = []
    curve = {}
    for k in config.local_ks:
        ind, loc = [], []
        for rep in range(config.reps + 1):
            seed = _derive_seed(config.seed, "local", k, rep)
            i_ms, l_ms = _local_cell(backend, k, seed)
            if rep == 0 and config.reps > 1:
                continue
            ind.append(i_ms)
            loc.append(l_ms)
        med_i = statistics.median(ind)
        med_l = statistics.median(loc)
        rows.append(MeasurementRow("individual_verify", 1, k, round(med_i, 4), 0, backend.name))
        rows.append(MeasurementRow("local_verify", 1, k, round(med_l, 4), 0, backend.name))
        curve[k] = med_i / med_l if med_l > 0 else float("inf")
    ks = sorted(curve)
    ind_by_k = {r.k: r.ms for r in rows if r.phase == "individual_verify"}
    loc_by_k = {r.k: r.ms for r in rows if r.phase == "local_verify"}
    report = {
        "speedup_by_k": curve,
        "speedup_at_max_k": curve[ks[-1]],
        "individual_slope_ms_per_item": fit_line([(k, ind_by_k[k]) for k in ks])[1],
        "local_slope_ms_per_item": fit_line([(k, loc_by_k[k]) for k in ks])[1],
        "individual_monotone": all(
            ind_by_k[a] <= ind_by_k[b] * 1.15 for a, b in zip(ks, ks[1:])
        ),
    }
    return sort_rows(rows), report


# --------------------------------------------------------------------------
# redaction vs remine comparison
# --------------------------------------------------------------------------

_BENCH_BUNDLE = 20  # transactions per bundle in the block-level studies


def _redaction_world(backend, n_txs: int, difficulty: int, seed: int):
    """A chain holding one block of n_txs deferred transactions, due now."""
    sim = Simulation(backend, seed=seed, bound=_BENCH_BUNDLE, difficulty=difficulty)
    sim.add_user("u")
    sim.add_provider("p")
    sim.designate("u", "p")
    due = 1
    remaining = n_txs
    bundles = []
    while remaining > 0:
        size = min(_BENCH_BUNDLE, remaining)
        items = [
            (sim.next_tx_id("u"), ep.TxPayload(payee="p", amount=1, due_tick=due))
            for _ in range(size)
        ]
        bundles.append(sim.submit_bundle("u", items, due))
        remaining -= size
    sim.mine(max_txs=n_txs)
    sim.advance_clock(due)
    return sim, bundles


class _RedactionWorld:
    """A mined block of deferred transactions, redactable over and over.

    The chain is built once; every measured pass rewrites all transactions
    to a fresh amount.  The provider's timed-release decryption runs once
    (it would cache the trapdoor in practice) and the adaption outputs are
    prepared outside the timed region, so a pass times exactly the miner's
    apply_redaction work.
    """

    def __init__(self, backend, n_txs: int, difficulty: int, seed: int):
        self.sim, self.bundles = _redaction_world(backend, n_txs, difficulty, seed)
        self.provider = self.sim.providers["p"]
        user = self.sim.users["u"]
        tik = self.sim.node.known_tiks[ep.tick_label(1)]
        _, aux = ep.ext(
            self.sim.params, self.sim.server, user.public(), self.bundles[0],
            range(len(self.bundles[0].transactions)), tik.t_label,
        )
        out = ep.released_dec(
            self.sim.params, user.public(), self.bundles[0], aux,
            self.bundles[0].transactions[0].cipher, tik, user.designation.s,
        )
        assert out.ok, out.reason
        self.trapdoor = out.trapdoor

    def run_pass(self, amount: int) -> float:
        sim, provider = self.sim, self.provider
        prepared = []
        for bundle in self.bundles:
            for tx in bundle.transactions:
                new_payload = ep.TxPayload(payee="p", amount=amount, due_tick=1)
                r_new, sigma_new = ep.adapt(
                    sim.params, provider, self.trapdoor, tx.tx_id, tx.payload,
                    tx.h, tx.r, new_payload,
                )
                prepared.append((tx.tx_id, new_payload, r_new, sigma_new))
        with _gc_paused():
            t0 = _now_ms()
            for tx_id, new_payload, r_new, sigma_new in prepared:
                ok, diag = sim.node.apply_redaction(
                    tx_id, new_payload, r_new, sigma_new, provider.pk_powers,
                    "p", sim.clock.tick,
                )
                assert ok, diag
            return _now_ms() - t0


def _time_redact_path(backend, n_txs: int, difficulty: int, seed: int) -> float:
    return _RedactionWorld(backend, n_txs, difficulty, seed).run_pass(0)


def _time_remine_path(backend, n_txs: int, difficulty: int, seed: int) -> float:
    """Baseline: replacement transactions re-created, re-validated, re-mined."""
    sim = Simulation(backend, seed=seed, bound=_BENCH_BUNDLE, difficulty=difficulty)
    sim.add_user("u")
    sim.add_provider("p")
    sim.designate("u", "p")
    due = 1
    plans = []
    remaining = n_txs
    while remaining > 0:
        size = min(_BENCH_BUNDLE, remaining)
        plans.append(
            [
                (sim.next_tx_id("u"), ep.TxPayload(payee="p", amount=0, due_tick=due))
                for _ in range(size)
            ]
        )
        remaining -= size

    with _gc_paused():
        t0 = _now_ms()
        for items in plans:
            sim.submit_bundle("u", items, due)  # create + aggregate + accept-verify
        sim.mine(max_txs=n_txs)  # assemble, nonce search, block validation
        return _now_ms() - t0


def run_redaction_comparison(config: BenchConfig):
    """Redact-in-place vs create/re-validate/re-mine over a block-size sweep.

    One warm-up pass at the smallest block size is discarded; block-state
    construction happens outside every timed region.
    """
    backend = config.backend()
    rows = []
    medians = {}
    if config.reps > 1:
        smallest = min(config.txs_per_block)
        warm = _derive_seed(config.seed, "redact-warmup", smallest)
        _time_redact_path(backend, smallest, config.difficulty, warm)
        _time_remine_path(backend, smallest, config.difficulty, warm)
    for n in config.txs_per_block:
        world = _RedactionWorld(
            backend, n, config.difficulty, _derive_seed(config.seed, "redact", n)
        )
        redact, remine = [], []
        for rep in range(config.reps):
            redact.append(world.run_pass(amount=rep))
            remine.append(
                _time_remine_path(
                    backend, n, config.difficulty,
                    _derive_seed(config.seed, "remine", n, rep),
                )
            )
        med_r = statistics.median(redact)
        med_m = statistics.median(remine)
        rows.append(MeasurementRow("redact_path", 1, n, round(med_r, 4), 0, backend.name))
        rows.append(MeasurementRow("remine_path", 1, n, round(med_m, 4), 0, backend.name))
        medians[n] = (med_r, med_m)
    ns = sorted(medians)
    redact_pts = [(n, medians[n][0]) for n in ns]
    remine_pts = [(n, medians[n][1]) for n in ns]
    top = ns[-1]
    report = {
        "speedup_by_n": {n: medians[n][1] / medians[n][0] for n in ns},
        "speedup_at_max_n": medians[top][1] / medians[top][0],
        "redact_fit": fit_report(redact_pts),
        "remine_fit": fit_report(remine_pts),
    }
    return sort_rows(rows), report


# --------------------------------------------------------------------------
# fits, ordering, serialization
# --------------------------------------------------------------------------


def fit_line(points):
    """(intercept, slope) of the least-squares line through (x, y) points."""
    if len(points) < 2:
        return (points[0][1] if points else 0.0), 0.0
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    return float(intercept), float(slope)


def r_squared(points) -> float:
    if len(points) < 3:
        return 1.0
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = intercept + slope * xs
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - ss_res / ss_tot


def fit_report(points) -> dict:
    intercept, slope = fit_line(points)
    return {"intercept_ms": intercept, "slope_ms": slope, "r_squared": r_squared(points)}


def flatness_ratio(rows, phase: str) -> float:
    """Worst max/min spread of a phase across u, taken at each fixed k.

    Key generation costs scale with the per-key bound (which tracks k), so
    flatness is judged along the user axis only; 1.0 means perfectly flat.
    """
    by_k = {}
    for r in rows:
        if r.phase == phase:
            by_k.setdefault(r.k, []).append(r.ms)
    worst = 1.0
    for values in by_k.values():
        if min(values) <= 0:
            return float("inf")
        worst = max(worst, max(values) / min(values))
    return worst if by_k else float("inf")


def growth_slope(rows, phase: str) -> float:
    """Fitted slope of a phase's medians against the workload size u*k."""
    points = [(r.u * r.k, r.ms) for r in rows if r.phase == phase]
    return fit_line(points)[1]


def sort_rows(rows):
    order = {phase: i for i, phase in enumerate(PHASES)}
    return sorted(rows, key=lambda r: (order.get(r.phase, 99), r.u, r.k))


def machine_descriptor() -> dict:
    import os
    import platform

    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "cpu_count": os.cpu_count(),
    }


def report_metadata(config: BenchConfig) -> dict:
    backend = config.backend()
    meta = {
        "backend_params": backend.describe(),
        "machine": machine_descriptor(),
        "seed": config.seed,
        "repetitions": config.reps,
        "median_smoothing": config.reps > 1,
    }
    if config.reps == 1:
        meta["note"] = "single repetition: raw wall times, no median smoothing"
    return meta


def rows_to_csv(rows, metadata=None) -> str:
    lines = []
    if metadata:
        be = metadata["backend_params"]
        lines.append("# backend: " + "; ".join(f"{k}={v}" for k, v in be.items()))
        mach = metadata["machine"]
        lines.append("# machine: " + "; ".join(f"{k}={v}" for k, v in mach.items()))
        lines.append(
            f"# seed: {metadata['seed']}; repetitions: {metadata['repetitions']}"
        )
        if "note" in metadata:
            lines.append("# note: " + metadata["note"])
    lines.append(",".join(CSV_COLUMNS))
    for r in rows:
        lines.append(f"{r.phase},{r.u},{r.k},{r.ms},{r.bytes},{r.backend}")
    return "\n".join(lines) + "\n"


def rows_to_json(rows, metadata=None, report=None) -> dict:
    doc = {
        "metadata": metadata or {},
        "rows": [
            {
                "phase": r.phase, "u": r.u, "k": r.k, "ms": r.ms,
                "bytes": r.bytes, "backend": r.backend,
            }
            for r in rows
        ],
    }
    if report is not None:
        doc["report"] = report
    return doc
