"""Deterministic single-process chain simulator.

One validating node owns all mutable state: a chain of proof-of-work
blocks, a mempool, and the set of published time instant keys.  A block's
transaction root is a digest over ordered per-transaction digests where a
redactable transaction contributes its chameleon hash, so rewriting a
transaction body in place leaves every block header byte-identical - the
defining property the integrity tests pin down.

Difficulty follows the conventional compact form: a block's header digest,
read as an unsigned big-endian integer, must be below ``2^256 //
difficulty``.  The default difficulty of 0x400 keeps the nonce search
cheap enough that timing comparisons are dominated by transaction
processing rather than hashing luck.

Everything is driven by injected seeds; identical seeds and scenario
scripts produce byte-identical chain dumps.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from . import lvs, protocol as ep, timelock
from .errors import MiningError, ScenarioError

MAX_TARGET = 2**256
DEFAULT_DIFFICULTY = 0x0400
DEFAULT_ATTEMPT_CAP = 2**22


def difficulty_to_target(difficulty: int) -> int:
    """Geth-style compact difficulty to a full-width comparison target."""
    if difficulty < 1:
        raise ValueError("difficulty must be positive")
    return MAX_TARGET // difficulty


@dataclass
class ChainEntry:
    """A transaction as carried by mempool and blocks, with verify context."""

    kind: str  # "redactable" | "immutable"
    tx: object
    user: ep.UserPublicKey
    sigma_hat: lvs.AggregateSignature | None = None
    provider_pk: tuple | None = None  # set once the entry was rewritten

    @property
    def tx_id(self) -> bytes:
        return self.tx.tx_id


def entry_digest(backend, entry: ChainEntry) -> bytes:
    """Per-transaction digest: redaction-stable for redactable entries."""
    if entry.kind == "redactable":
        body = b"RTX|" + entry.tx.tx_id + backend.element_to_bytes(entry.tx.h)
    else:
        body = b"ITX|" + entry.tx.tx_id + entry.tx.digest
    return hashlib.sha256(body).digest()


def tx_root(backend, entries) -> bytes:
    acc = hashlib.sha256(b"ROOT|" + len(entries).to_bytes(4, "big"))
    for entry in entries:
        acc.update(entry_digest(backend, entry))
    return acc.digest()


@dataclass
class Block:
    height: int
    prev_digest: bytes
    tx_root: bytes
    nonce: int
    difficulty_target: int
    timestamp_tick: int
    entries: list

    def header_bytes(self) -> bytes:
        return (
            b"BLK1"
            + self.height.to_bytes(8, "big")
            + self.prev_digest
            + self.tx_root
            + self.nonce.to_bytes(8, "big")
            + self.difficulty_target.to_bytes(33, "big")
            + self.timestamp_tick.to_bytes(8, "big")
        )

    def header_digest(self) -> bytes:
        return hashlib.sha256(self.header_bytes()).digest()


GENESIS_PREV = bytes(32)


@dataclass
class SimClock:
    tick: int = 0
    tik_period: int = 1


class Node:
    """Chain, mempool and TIK knowledge of the single validating miner."""

    def __init__(self, backend, params):
        self.backend = backend
        self.params = params
        self.chain: list[Block] = []
        self.mempool: list[ChainEntry] = []
        self.known_tiks: dict[bytes, timelock.TimeInstantKey] = {}
        self._ids: set[bytes] = set()
        self._checked_aggregates: set[bytes] = set()
        self._entry_index: dict[bytes, tuple[int, ChainEntry]] = {}

    # -- acceptance --------------------------------------------------------

    def _aggregate_ok(self, entry: ChainEntry) -> bool:
        """Full aggregate check, once per distinct bundle signature."""
        if entry.sigma_hat is None:
            return False
        key = hashlib.sha256(
            lvs.serialize_aggregate(self.backend, entry.sigma_hat)
        ).digest()
        if key in self._checked_aggregates:
            return True
        if lvs.verify_aggregate_full(
            self.backend, entry.user.pk_powers, entry.sigma_hat
        ):
            self._checked_aggregates.add(key)
            return True
        return False

    def _entry_valid(self, entry: ChainEntry) -> bool:
        if entry.kind == "redactable":
            tx = entry.tx
            provider = None
            if entry.provider_pk is not None:
                provider = ep.ProviderPublicKey(pk_powers=entry.provider_pk)
            if not ep.verify(
                self.params, entry.user, provider, tx.tx_id, tx.payload, tx.h,
                tx.r, tx.sigma, redacted=tx.redacted,
            ):
                return False
            return self._aggregate_ok(entry)
        if entry.kind == "immutable":
            return ep.verify_immutable(self.params, entry.user, entry.tx)
        return False

    def submit_tx(self, entry: ChainEntry):
        """Mempool acceptance: full verification plus duplicate-ID rejection.

        Returns (accepted, diagnostic).
        """
        if entry.tx_id in self._ids:
            return False, "duplicate-id"
        if not self._entry_valid(entry):
            return False, "verification-failure"
        self.mempool.append(entry)
        self._ids.add(entry.tx_id)
        return True, "ok"

    # -- mining ------------------------------------------------------------

    def mine_block(
        self, max_txs: int, tick: int, target: int | None = None,
        attempt_cap: int = DEFAULT_ATTEMPT_CAP,
    ) -> Block:
        if not self.mempool:
            raise MiningError("mempool is empty")
        if target is None:
            target = difficulty_to_target(DEFAULT_DIFFICULTY)
        if target <= 0:
            raise MiningError("unsatisfiable difficulty target")
        entries = self.mempool[:max_txs]
        prev = self.chain[-1].header_digest() if self.chain else GENESIS_PREV
        block = Block(
            height=len(self.chain),
            prev_digest=prev,
            tx_root=tx_root(self.backend, entries),
            nonce=0,
            difficulty_target=target,
            timestamp_tick=tick,
            entries=entries,
        )
        while True:
            if int.from_bytes(block.header_digest(), "big") < target:
                break
            block.nonce += 1
            if block.nonce >= attempt_cap:
                raise MiningError(f"no nonce below target within {attempt_cap} attempts")
        self.append_block(block)
        self.mempool = self.mempool[len(entries):]
        return block

    def validate_block(self, block: Block, check_entries: bool = True) -> bool:
        if int.from_bytes(block.header_digest(), "big") >= block.difficulty_target:
            return False
        prev = self.chain[block.height - 1].header_digest() if block.height else GENESIS_PREV
        if block.prev_digest != prev:
            return False
        if block.tx_root != tx_root(self.backend, block.entries):
            return False
        if check_entries:
            self._checked_aggregates.clear()
            if not all(self._entry_valid(e) for e in block.entries):
                return False
        return True

    def append_block(self, block: Block) -> None:
        if not self.validate_block(block):
            raise MiningError("mined block failed validation")
        self.chain.append(block)
        for entry in block.entries:
            self._entry_index[entry.tx_id] = (block.height, entry)

    # -- redaction -----------------------------------------------------------

    def find_entry(self, tx_id: bytes):
        hit = self._entry_index.get(tx_id)
        if hit is None:
            return None, None
        height, entry = hit
        return self.chain[height], entry

    def apply_redaction(
        self, tx_id: bytes, new_payload: ep.TxPayload, r_new: int,
        sigma_new: lvs.Signature, provider_pk_powers, provider_id, tick: int,
    ):
        """In-place rewrite after verification; headers never change.

        Returns (applied, diagnostic).  No block is mined.  The per-entry
        digest (the transaction's contribution to the tx root) is asserted
        byte-stable, which pins the whole root and header: the root is a
        hash over exactly these per-entry digests in block order.
        """
        block, entry = self.find_entry(tx_id)
        if entry is None:
            return False, "unknown-tx"
        if entry.kind != "redactable":
            return False, "not-redactable"
        tx = entry.tx
        provider = ep.ProviderPublicKey(pk_powers=tuple(provider_pk_powers))
        if not ep.verify(
            self.params, entry.user, provider, tx_id, new_payload, tx.h, r_new,
            sigma_new, redacted=True,
        ):
            return False, "verification-failure"
        leaf_before = entry_digest(self.backend, entry)
        ep.apply_adaption(tx, new_payload, r_new, sigma_new, provider_id, tick)
        entry.provider_pk = tuple(provider_pk_powers)
        assert entry_digest(self.backend, entry) == leaf_before
        return True, "ok"


# --------------------------------------------------------------------------
# simulation wrapper: roles, clock, TIK schedule, scenario scripts
# --------------------------------------------------------------------------


class Simulation:
    """Owns every mutable piece and processes operations strictly in order."""

    def __init__(
        self, backend, *, seed: int = 0, bound: int = 8,
        difficulty: int = DEFAULT_DIFFICULTY, tik_period: int = 1,
    ):
        self.backend = backend
        self.rng = random.Random(seed)
        self.params = ep.setup(backend, bound, self.rng)
        self.server = ep.server_keygen(self.params, self.rng)
        self.node = Node(backend, self.params)
        self.clock = SimClock(tick=0, tik_period=tik_period)
        self.target = difficulty_to_target(difficulty)
        self.users: dict[str, ep.UserKeys] = {}
        self.providers: dict[str, ep.ProviderKeys] = {}
        self.bundles: dict[str, list[ep.DeferredBundle]] = {}
        self.designations: dict[str, list[str]] = {}
        self.delivered_secrets: dict[tuple[str, str], int] = {}
        self._tx_counter = 0

    # -- roles ---------------------------------------------------------------

    def add_user(self, name: str) -> ep.UserKeys:
        if name in self.users:
            raise ScenarioError(f"user {name!r} already exists")
        keys = ep.user_keygen(self.params, self.server.pk, self.rng)
        self.users[name] = keys
        self.bundles[name] = []
        self.designations[name] = []
        return keys

    def add_provider(self, name: str) -> ep.ProviderKeys:
        if name in self.providers:
            raise ScenarioError(f"provider {name!r} already exists")
        keys = ep.provider_keygen(self.params, self.rng)
        self.providers[name] = keys
        return keys

    def designate(self, user_name: str, provider_name: str) -> None:
        user = self.users[user_name]
        key = ep.designate_provider(
            user, provider_name, prior=self.designations[user_name]
        )
        self.designations[user_name].append(provider_name)
        self.delivered_secrets[(provider_name, user_name)] = key.s

    # -- transactions ----------------------------------------------------------

    def next_tx_id(self, user_name: str) -> bytes:
        self._tx_counter += 1
        return f"{user_name}/{self._tx_counter}".encode()

    def submit_bundle(self, user_name: str, items, due_tick: int):
        """Create, aggregate and submit a deferred bundle; returns it."""
        user = self.users[user_name]
        label = ep.tick_label(due_tick)
        bundle = ep.make_bundle(self.params, user, self.server.pk, items, label, self.rng)
        self.bundles[user_name].append(bundle)
        for tx in bundle.transactions:
            accepted, diag = self.node.submit_tx(
                ChainEntry(
                    kind="redactable", tx=tx, user=bundle.user,
                    sigma_hat=bundle.sigma_hat,
                )
            )
            if not accepted:
                raise ScenarioError(f"bundle transaction rejected: {diag}")
        return bundle

    def submit_immutable(self, user_name: str, payload: ep.TxPayload):
        user = self.users[user_name]
        tx = ep.make_immutable(self.params, user, self.next_tx_id(user_name), payload)
        return self.node.submit_tx(
            ChainEntry(kind="immutable", tx=tx, user=user.public())
        )

    def mine(self, max_txs: int = 10_000) -> Block:
        return self.node.mine_block(max_txs, self.clock.tick, target=self.target)

    # -- clock and time keys -----------------------------------------------------

    def advance_clock(self, ticks: int):
        """Move time forward; a TIK is published at every period boundary."""
        if ticks < 0:
            raise ValueError("the clock never goes backwards")
        released = []
        period = self.clock.tik_period
        for _ in range(ticks):
            self.clock.tick += 1
            if self.clock.tick % period == 0:
                label = ep.tick_label(self.clock.tick)
                tik = timelock.extract_tik(self.backend, self.server.sk, label)
                assert timelock.verify_tik(self.backend, self.server.pk, tik)
                self.node.known_tiks[label] = tik
                released.append(tik)
        return released

    # -- redaction ----------------------------------------------------------------

    def _bundle_context(self, user_name: str, tx_id: bytes):
        for bundle in self.bundles[user_name]:
            for index, tx in enumerate(bundle.transactions):
                if tx.tx_id == tx_id:
                    return bundle, index
        return None, None

    def redact(self, provider_name: str, user_name: str, tx_id: bytes,
               new_payload: ep.TxPayload):
        """Full provider-side redaction attempt; returns (ok, diagnostic).

        Uses the TIK published for the transaction's due tick when it exists,
        otherwise the newest published TIK (which then fails the label guard:
        early redaction is impossible by construction).  A provider that was
        never handed the designation secret proceeds with a random guess and
        ends at the trapdoor-mismatch diagnostic.
        """
        provider = self.providers[provider_name]
        user_pk = self.users[user_name].public()
        bundle, index = self._bundle_context(user_name, tx_id)
        if bundle is None:
            return False, "unknown-tx"
        tx = bundle.transactions[index]
        due_label = tx.cipher.t_label
        tik = self.node.known_tiks.get(due_label)
        if tik is None:
            latest = max(self.node.known_tiks, key=lambda k: int(k.decode()), default=None)
            if latest is None:
                return False, "label-mismatch"
            tik = self.node.known_tiks[latest]
        s = self.delivered_secrets.get((provider_name, user_name))
        if s is None:
            s = self.backend.field.rand_nonzero(self.rng)  # outsider's guess
        tik_ok, aux = ep.ext(
            self.params, self.server, user_pk, bundle, [index], tik.t_label
        )
        outcome = ep.released_dec(self.params, user_pk, bundle, aux, tx.cipher, tik_ok, s)
        if not outcome.ok:
            return False, outcome.reason
        r_new, sigma_new = ep.adapt(
            self.params, provider, outcome.trapdoor, tx_id, tx.payload, tx.h,
            tx.r, new_payload,
        )
        return self.node.apply_redaction(
            tx_id, new_payload, r_new, sigma_new, provider.pk_powers,
            provider_name, self.clock.tick,
        )

    # -- dumps ------------------------------------------------------------------

    def tik_schedule(self) -> list:
        """Published time keys in label order (JSON-ready)."""
        labels = sorted(self.node.known_tiks, key=lambda k: int(k.decode()))
        return [
            ep.tik_to_json(self.backend, self.node.known_tiks[label])
            for label in labels
        ]

    def chain_dump(self) -> dict:
        backend = self.backend
        blocks = []
        for block in self.node.chain:
            entries = []
            for entry in block.entries:
                doc = {"kind": entry.kind, "tx_id": entry.tx_id.hex()}
                if entry.kind == "redactable":
                    doc["body"] = ep.transaction_to_json(backend, entry.tx)
                else:
                    doc["body"] = {
                        "payload": ep.payload_to_json(entry.tx.payload),
                        "digest": entry.tx.digest.hex(),
                        "sigma": ep.signature_to_json(backend, entry.tx.sigma),
                    }
                entries.append(doc)
            blocks.append(
                {
                    "height": block.height,
                    "header_digest": block.header_digest().hex(),
                    "prev_digest": block.prev_digest.hex(),
                    "tx_root": block.tx_root.hex(),
                    "nonce": block.nonce,
                    "difficulty_target": hex(block.difficulty_target),
                    "timestamp_tick": block.timestamp_tick,
                    "transactions": entries,
                }
            )
        return {
            "backend": backend.name,
            "height": len(self.node.chain),
            "tick": self.clock.tick,
            "blocks": blocks,
        }


# --------------------------------------------------------------------------
# scenario scripts
# --------------------------------------------------------------------------


def _payload_from_event(doc: dict, due_tick: int) -> ep.TxPayload:
    return ep.TxPayload(
        payee=doc["payee"],
        amount=int(doc["amount"]),
        due_tick=due_tick,
        memo=bytes.fromhex(doc.get("memo", "")),
    )


def run_scenario(doc: dict, backend=None):
    """Execute a JSON scenario; returns (Simulation, trace lines).

    Raises :class:`ScenarioError` whenever an event's ``expect`` clause is
    violated, so expected protocol refusals (early decryption, outsider
    attempts) are assertable scenario content rather than script failures.
    """
    from .backends import make_backend

    if backend is None:
        backend = make_backend(
            doc.get("backend", "toy"),
            **({"toy_order": doc["toy_order"]} if "toy_order" in doc else {}),
        )
    sim = Simulation(
        backend,
        seed=int(doc.get("seed", 0)),
        bound=int(doc.get("bound", 8)),
        difficulty=int(doc.get("difficulty", DEFAULT_DIFFICULTY)),
        tik_period=int(doc.get("tik_period", 1)),
    )
    trace = []
    for event in doc.get("events", []):
        op = event.get("op")
        if op == "user":
            sim.add_user(event["name"])
            trace.append(f"user {event['name']} joined")
        elif op == "provider":
            sim.add_provider(event["name"])
            trace.append(f"provider {event['name']} joined")
        elif op == "designate":
            sim.designate(event["user"], event["provider"])
            trace.append(f"{event['user']} designated {event['provider']}")
        elif op == "bundle":
            due = int(event["due_tick"])
            items = []
            for item in event["items"]:
                items.append(
                    (sim.next_tx_id(event["user"]), _payload_from_event(item, due))
                )
            bundle = sim.submit_bundle(event["user"], items, due)
            ids = ", ".join(tx.tx_id.decode() for tx in bundle.transactions)
            trace.append(
                f"{event['user']} submitted {len(items)} deferred tx due at "
                f"tick {due}: {ids}"
            )
        elif op == "immutable":
            payload = _payload_from_event(event, int(event.get("due_tick", 0)))
            accepted, diag = sim.submit_immutable(event["user"], payload)
            if not accepted:
                raise ScenarioError(f"immutable transaction rejected: {diag}")
            trace.append(f"{event['user']} submitted an immutable tx")
        elif op == "mine":
            block = sim.mine(int(event.get("max_txs", 10_000)))
            trace.append(
                f"mined block {block.height} with {len(block.entries)} tx "
                f"(nonce {block.nonce})"
            )
        elif op == "advance":
            released = sim.advance_clock(int(event["ticks"]))
            trace.append(
                f"clock -> tick {sim.clock.tick}, {len(released)} TIK published"
            )
        elif op == "redact":
            user = event["user"]
            tx_id = event["tx"].encode()
            bundle, index = sim._bundle_context(user, tx_id)
            if bundle is None:
                raise ScenarioError(f"unknown tx {event['tx']!r}")
            old = bundle.transactions[index].payload
            payload = ep.TxPayload(
                payee=event.get("payee", old.payee),
                amount=int(event.get("amount", old.amount)),
                due_tick=old.due_tick,
                memo=bytes.fromhex(event["memo"]) if "memo" in event else old.memo,
            )
            ok, diag = sim.redact(event["provider"], user, tx_id, payload)
            expect = event.get("expect", "ok")
            got = "ok" if ok else diag
            if got != expect:
                raise ScenarioError(
                    f"redact {event['tx']}: expected {expect!r}, got {got!r}"
                )
            trace.append(f"redact {event['tx']}: {got}" + ("" if ok else " (refused)"))
        else:
            raise ScenarioError(f"unknown scenario op {op!r}")
    return sim, trace
