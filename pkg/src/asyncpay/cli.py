"""Command-line front end: scenario demos, benchmarks, key and vector dumps.

Output files land in ``--out`` when given, else in the directory named by
the ``ASYNCPAY_OUT_DIR`` environment variable (default: current directory).
"""

from __future__ import annotations

import json
import os
import random
import sys
from pathlib import Path

import click

from . import bench as bench_mod, lvs, protocol as ep
from .backends import ToyBackend, element_to_hex, make_backend
from .errors import AsyncpayError, ScenarioError
from .ledger import DEFAULT_DIFFICULTY, run_scenario

OUT_DIR_ENV = "ASYNCPAY_OUT_DIR"


def _out_path(out: str | None, default_name: str) -> Path:
    if out:
        return Path(out)
    return Path(os.environ.get(OUT_DIR_ENV, ".")) / default_name


def _int_list(_ctx, _param, value):
    if value is None:
        return None
    try:
        return tuple(int(v) for v in str(value).split(",") if v.strip())
    except ValueError as exc:
        raise click.BadParameter(f"expected comma-separated integers: {exc}")


def _write_report(rows, metadata, report, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(bench_mod.rows_to_csv(rows, metadata))
    json_path = path.with_suffix(".json")
    json_path.write_text(
        json.dumps(bench_mod.rows_to_json(rows, metadata, report), indent=2) + "\n"
    )
    return json_path


backend_option = click.option(
    "--backend", type=click.Choice(["toy", "production"]), default="production",
    show_default=True, help="bilinear-group backend",
)
seed_option = click.option("--seed", type=int, default=1, show_default=True)
reps_option = click.option(
    "--reps", type=int, default=5, show_default=True,
    help="timed repetitions per cell (one warm-up pass is discarded)",
)
out_option = click.option("--out", type=click.Path(dir_okay=False), default=None)


@click.group()
def main():
    """Deferred-payment protocol toolkit: demos and benchmarks."""


@main.command()
@click.argument("scenario_path", type=click.Path())
def demo(scenario_path):
    """Run a scenario script and print its lifecycle trace.

    Exit code 0 when every event (including expected protocol refusals)
    played out as scripted, 1 on a violated expectation, 2 on unreadable
    or malformed input.
    """
    try:
        doc = json.loads(Path(scenario_path).read_text())
        if not isinstance(doc, dict):
            raise ValueError("scenario root must be a JSON object")
    except (OSError, ValueError) as exc:
        click.echo(f"cannot load scenario: {exc}", err=True)
        sys.exit(2)
    try:
        sim, trace = run_scenario(doc)
    except (ScenarioError, AsyncpayError, KeyError) as exc:
        click.echo(f"scenario failed: {exc}", err=True)
        sys.exit(1)
    for line in trace:
        click.echo(line)
    click.echo(
        f"ok: chain height {len(sim.node.chain)}, tick {sim.clock.tick}, "
        f"all expectations matched"
    )


@main.command(name="bench")
@backend_option
@seed_option
@reps_option
@out_option
@click.option("--users", callback=_int_list, default="8,16,24,32", show_default=True)
@click.option("--deferred", callback=_int_list, default="8,16,24", show_default=True)
def bench_cmd(backend, seed, reps, out, users, deferred):
    """Time every protocol phase over the (users, deferred) grid."""
    config = bench_mod.BenchConfig(
        backend_name=backend, seed=seed, reps=reps, users=users, deferred=deferred
    )
    rows = bench_mod.run_phase_grid(config)
    metadata = bench_mod.report_metadata(config)
    path = _out_path(out, "bench.csv")
    json_path = _write_report(rows, metadata, None, path)
    click.echo(f"wrote {path} and {json_path} ({len(rows)} rows)")


@main.command(name="compare-local")
@backend_option
@seed_option
@reps_option
@out_option
@click.option(
    "--deferred", callback=_int_list, default="4,8,12,16,20,24,28,32",
    show_default=True, help="signature counts to sweep",
)
def compare_local(backend, seed, reps, out, deferred):
    """Individual verifications vs one subset verification with aux."""
    config = bench_mod.BenchConfig(
        backend_name=backend, seed=seed, reps=reps, local_ks=deferred
    )
    rows, report = bench_mod.run_local_comparison(config)
    metadata = bench_mod.report_metadata(config)
    path = _out_path(out, "compare_local.csv")
    _write_report(rows, metadata, report, path)
    click.echo(f"wrote {path}")
    click.echo(
        f"speedup at k={max(deferred)}: {report['speedup_at_max_k']:.2f}x "
        f"(individual slope {report['individual_slope_ms_per_item']:.3f} ms/item, "
        f"local slope {report['local_slope_ms_per_item']:.3f} ms/item)"
    )


@main.command(name="compare-redaction")
@backend_option
@seed_option
@click.option("--reps", type=int, default=3, show_default=True)
@out_option
@click.option(
    "--txs-per-block", callback=_int_list, default="500,1000,2000", show_default=True
)
@click.option("--difficulty", type=int, default=DEFAULT_DIFFICULTY, show_default=True)
def compare_redaction(backend, seed, reps, out, txs_per_block, difficulty):
    """In-place redaction vs create/re-validate/re-mine, swept over block size."""
    config = bench_mod.BenchConfig(
        backend_name=backend, seed=seed, reps=reps,
        txs_per_block=txs_per_block, difficulty=difficulty,
    )
    rows, report = bench_mod.run_redaction_comparison(config)
    metadata = bench_mod.report_metadata(config)
    path = _out_path(out, "compare_redaction.csv")
    _write_report(rows, metadata, report, path)
    click.echo(f"wrote {path}")
    click.echo(
        f"speedup at {max(txs_per_block)} txs: {report['speedup_at_max_n']:.2f}x; "
        f"linear fit R^2 redact={report['redact_fit']['r_squared']:.3f} "
        f"remine={report['remine_fit']['r_squared']:.3f}"
    )


@main.command()
@backend_option
@seed_option
@out_option
@click.option(
    "--role", type=click.Choice(["system", "user", "provider", "server"]),
    default="user", show_default=True,
)
@click.option("--bound", type=int, default=8, show_default=True)
@click.option(
    "--include-secrets", is_flag=True,
    help="embed secret scalars (test mode only; the output says so)",
)
def keygen(backend, seed, out, role, bound, include_secrets):
    """Generate keys for one role and write them as JSON."""
    be = make_backend(backend)
    rng = random.Random(seed)
    params = ep.setup(be, bound, rng)
    server = ep.server_keygen(params, rng)
    if role == "system":
        doc = {
            "role": "system",
            "bound": bound,
            "mpk_powers": [element_to_hex(be, p) for p in params.mpk_powers],
        }
        if include_secrets:
            doc["test_mode_secrets"] = True
            doc["secrets"] = {"alpha": be.field.to_hex(params.msk)}
    elif role == "server":
        doc = {"role": "server", "pk": element_to_hex(be, server.pk)}
        if include_secrets:
            doc["test_mode_secrets"] = True
            doc["secrets"] = {"alpha_prime": be.field.to_hex(server.sk)}
    elif role == "provider":
        provider = ep.provider_keygen(params, rng)
        doc = {
            "role": "provider",
            "pk_powers": [element_to_hex(be, p) for p in provider.pk_powers],
        }
        if include_secrets:
            doc["test_mode_secrets"] = True
            doc["secrets"] = {"mu": be.field.to_hex(provider.signer.sk)}
    else:
        user = ep.user_keygen(params, server.pk, rng)
        doc = ep.user_keys_to_json(be, user, include_secrets=include_secrets)
    doc["backend"] = be.describe()
    path = _out_path(out, f"{role}_keys.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    click.echo(f"wrote {path}")


@main.command()
@out_option
def vectors(out):
    """Emit the hand-checkable toy-backend vector set (group order 101)."""
    be = ToyBackend(101)
    f = be.field
    sk = 3
    hashes = (2, 5)
    sigs = [lvs.sign(be, sk, h) for h in hashes]
    powers = tuple(pow(sk, i + 1, 101) for i in range(4))
    agg = lvs.aggregate(be, powers, list(zip(hashes, sigs)))
    aux = lvs.derive_aux(be, powers, hashes, [0])
    doc = {
        "backend": be.describe(),
        "backend_tag": be.tag,
        "group_order": 101,
        "signing": {
            "sk": sk,
            "pk_power_exponents": list(powers),
            "member_hashes": list(hashes),
            "signature_exponents": [s.sigma for s in sigs],
            "aggregate_exponent": agg.sigma_hat,
            "aggregate_hex": lvs.serialize_aggregate(be, agg).hex(),
            "delta_coefficients": lvs.expand_poly(f, hashes),
            "aux_exponents_for_first_member": list(aux.aux_powers),
        },
        "chameleon": {
            "trapdoor": 7,
            "pk_exponent": 7,
            "message_hash": 4,
            "randomness": 10,
            "digest_exponent": (4 + 7 * 10) % 101,
            "new_message_hash": 9,
            "adapted_randomness": f.div(f.sub(f.add(4, f.mul(7, 10)), 9), 7),
        },
        "timed_release": {
            "server_sk": 3,
            "designation_s": 5,
            "r0": 2,
            "h1_exponent": 11,
            "tik_exponent": (3 * 11) % 101,
            "pad_key_exponent": (2 * 5 * 3 * 11) % 101,
        },
    }
    path = _out_path(out, "toy_vectors.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
