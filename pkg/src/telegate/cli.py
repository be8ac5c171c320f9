"""Command-line interface: seeded batch simulation, tomography, pulse
synthesis, budget tables, and parameter sweeps.

Artifacts: records.jsonl (one JSON record per shot), summary.json, Wigner
grid CSVs (columns re_beta, im_beta, W), pulse CSVs, sweep CSVs.  Every
JSON artifact carries a schema_version field.  Exit codes: 0 success,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import budget as budget_mod
from .errors import ConfigError, TelegateError
from .fock import QuantumState, partial_trace, product_state
from .hamiltonians import SystemParams, paper_defaults
from .protocol import (
    OUTCOMES,
    ProtocolOptions,
    TeleportedCnot,
    shot_rng,
)
from .tomography import (
    decode_tomography,
    pauli_vector,
    save_wigner_csv,
    state_fidelity,
    wigner_function,
)

SCHEMA_VERSION = 1

BELL_VECTORS = {
    "00": np.array([0, 1, 1, 0]) / np.sqrt(2),  # Psi+
    "01": np.array([0, -1, 1, 0]) / np.sqrt(2),  # Psi-
    "10": np.array([1, 0, 0, 1]) / np.sqrt(2),  # Phi+
    "11": np.array([1, 0, 0, -1]) / np.sqrt(2),  # Phi-
}


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")


def _system_from_config(cfg):
    sp = cfg.get("system", "paper-defaults")
    if sp == "paper-defaults":
        return paper_defaults(cfg.get("coherences", "mid"))
    return SystemParams.from_dict(sp)


def _options_from_config(cfg, **overrides):
    proto = dict(cfg.get("protocol", {}))
    proto.update({k: v for k, v in overrides.items() if v is not None})
    proto.setdefault("encoding", cfg.get("encoding", "binomial"))
    return ProtocolOptions(**proto)


def _write_json(path, payload):
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


@click.group()
def main():
    """Teleported-CNOT simulator."""


def _run_shots(sim, state, seed, shots, threads):
    def one(i):
        rng = shot_rng(seed, i)
        out, record = sim.run_shot(state, rng, shot_seed=(seed, i))
        return out, record

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(shots)))
    else:
        results = [one(i) for i in range(shots)]
    return results


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--shots", type=int, default=1000, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
@click.option(
    "--preset",
    type=click.Choice(["default", "truth-table", "no-feedforward"]),
    default="default",
    show_default=True,
)
@click.option("--threads", type=int, default=1, show_default=True)
def simulate(config_path, seed, shots, out_dir, preset, threads):
    """Run the teleported CNOT and emit records and a summary."""
    cfg = _load_config(config_path)
    if shots < 1:
        raise ConfigError("shots must be >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    feedforward = preset != "no-feedforward"
    options = _options_from_config(cfg, feedforward=feedforward)
    sim = TeleportedCnot(options, system=_system_from_config(cfg))

    if preset == "truth-table":
        _truth_table(sim, out, seed)
        return

    state = sim.input_state("+X", "+Z")
    results = _run_shots(sim, state, seed, shots, threads)
    with open(out / "records.jsonl", "w") as fh:
        for _, record in results:
            line = {"schema_version": SCHEMA_VERSION, **record.to_json()}
            fh.write(json.dumps(line) + "\n")
    counts = {o: 0 for o in OUTCOMES}
    fid_sums = {o: 0.0 for o in OUTCOMES}
    purity_acc = np.zeros((4, 4), dtype=complex)
    ideal_out = sim.ideal_output(state)
    rho_ideal = sim.logical_density(ideal_out, normalize=True)
    for st, record in results:
        counts[record.outcome] += 1
        rho_l = sim.logical_density(st, normalize=True)
        purity_acc += rho_l
        if feedforward:
            target = rho_ideal
        else:
            v = BELL_VECTORS[record.outcome]
            target = np.outer(v, v.conj())
        fid_sums[record.outcome] += state_fidelity(rho_l, target)
    compiled = purity_acc / len(results)
    summary = {
        "preset": preset,
        "seed": seed,
        "shots": shots,
        "outcome_frequencies": {o: counts[o] / shots for o in OUTCOMES},
        "conditioned_fidelities": {
            o: (fid_sums[o] / counts[o]) if counts[o] else None for o in OUTCOMES
        },
        "compiled_purity": float(np.trace(compiled @ compiled).real),
    }
    _write_json(out / "summary.json", summary)
    click.echo(f"wrote {out / 'records.jsonl'} and {out / 'summary.json'}")


def _truth_table(sim, out, seed):
    grid = _wigner_grid()
    results = {}
    for label_in, label_out in (("00", "00"), ("01", "01"), ("10", "11"), ("11", "10")):
        c1 = "+Z" if label_in[0] == "0" else "-Z"
        c2 = "+Z" if label_in[1] == "0" else "-Z"
        state = sim.input_state(c1, c2)
        rng = shot_rng(seed, 0)
        final, record = sim.run_shot(state, rng, shot_seed=(seed, 0))
        rho_in = partial_trace(state, ("c2",)).data
        rho_out = partial_trace(final, ("c2",)).data
        save_wigner_csv(
            out / f"wigner_in_{label_in}.csv", grid, wigner_function(rho_in, grid)
        )
        save_wigner_csv(
            out / f"wigner_out_{label_in}.csv", grid, wigner_function(rho_out, grid)
        )
        expect_c1 = "+Z" if label_out[0] == "0" else "-Z"
        expect_c2 = "+Z" if label_out[1] == "0" else "-Z"
        expected = sim.input_state(expect_c1, expect_c2)
        fid = state_fidelity(
            sim.logical_density(final, normalize=True),
            sim.logical_density(expected, normalize=True),
        )
        results[label_in] = {"expected": label_out, "fidelity": fid}
    _write_json(out / "summary.json", {"preset": "truth-table", "truth_table": results})
    click.echo(f"wrote truth-table Wigner CSVs to {out}")


def _wigner_grid(n=21, extent=2.5):
    x = np.linspace(-extent, extent, n)
    re, im = np.meshgrid(x, x)
    return re + 1j * im


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--shots", type=int, default=10000, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
@click.option("--ptm", "with_ptm", is_flag=True,
              help="Also run process tomography and write ptm.json.")
def tomography(config_path, seed, shots, out_dir, with_ptm):
    """Reconstruct the heralded logical Bell state through the decode
    pipeline and report its fidelity."""
    cfg = _load_config(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    options = _options_from_config(cfg, feedforward=False)
    sim = TeleportedCnot(options, system=_system_from_config(cfg))
    state = sim.input_state("+X", "+Z")
    rng = shot_rng(seed, 0)
    final, record = sim.run_shot(state, rng, force_outcome="10", shot_seed=(seed, 0))
    rho = decode_tomography(final, sim, shots=shots, rng=rng)
    v = BELL_VECTORS["10"]
    fid = state_fidelity(rho, np.outer(v, v.conj()))
    payload = {
        "outcome": record.outcome,
        "f_bell": fid,
        "pauli_vector": dict(
            zip(
                [a + b for a in "IXYZ" for b in "IXYZ"],
                [float(x) for x in pauli_vector(rho)],
            )
        ),
        "shots": shots,
        "seed": seed,
    }
    _write_json(out / "tomography.json", payload)
    click.echo(f"F_Bell = {fid:.4f}")
    if with_ptm:
        from .tomography import process_tomography

        def chan(pair):
            rho_full = sim.channel(
                sim.input_state(pair[0], pair[1]).density_matrix()
            )
            return sim.logical_density(rho_full)

        ptm = process_tomography(chan)
        _write_json(
            out / "ptm.json",
            {
                "labels": [a + b for a in "IXYZ" for b in "IXYZ"],
                "ptm": [[float(x) for x in row] for row in ptm],
            },
        )
        click.echo(f"wrote {out / 'ptm.json'}")


@main.command()
@click.option("--preset", type=click.Choice(["x-gate", "binomial-encode"]),
              default="x-gate", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
def grape(preset, seed, out_dir):
    """Synthesize a control pulse and report its transfer fidelity."""
    from . import grape as grape_mod
    from .grape import PenaltyConfig, TransferSpec

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    if preset == "x-gate":
        h0 = np.zeros((2, 2), dtype=complex)
        controls = [np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)]  # sigma-
        g = np.array([1.0, 0.0], dtype=complex)
        e = np.array([0.0, 1.0], dtype=complex)
        spec = TransferSpec(pairs=((g, e), (e, g)), gauge="z_phase_free")
        init = grape_mod.random_initial_pulses(1, 20, 2.0, 2.0 * np.pi * 5.0, rng)
        iterations = 200
    else:
        from .codes import binomial_code, encode_transfer_pairs
        from .hamiltonians import kerr_oscillator
        from .fock import HilbertSpaceLayout, embed_many, annihilation

        dim = 12
        system = paper_defaults()
        layout = HilbertSpaceLayout((("q", 2), ("c", dim)))
        mod = system.module2
        hq = np.diag([0.0, 0.0]).astype(complex)
        from .hamiltonians import dispersive, CouplingParams

        h0 = dispersive(mod.data_comm, "c", "q", layout).matrix
        aq = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        ac = annihilation(dim).matrix
        controls = [
            embed_many({"q": aq}, layout).matrix,
            embed_many({"c": ac}, layout).matrix,
        ]
        spec = TransferSpec(
            pairs=tuple(encode_transfer_pairs(binomial_code(), dim)),
            gauge="z_phase_free",
        )
        init = grape_mod.random_initial_pulses(2, 300, 4.0, 2.0 * np.pi * 1.0, rng)
        iterations = 400
    penalties = PenaltyConfig(derivative_weight=1e-6, edge_weight=1e-4)
    result = grape_mod.optimize(
        spec, h0, controls, penalties, init, iterations=iterations
    )
    grape_mod.save_pulses(result.pulses, out / f"pulses_{preset}.csv")
    click.echo(f"F = {result.fidelity:.6f} after {len(result.trace)} iterations")
    if not np.isfinite(result.fidelity):
        raise TelegateError("optimization produced a non-finite fidelity")


@main.command("budget")
@click.option("--preset", type=click.Choice(["binomial", "fock"]),
              default="binomial", show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
def budget_cmd(preset, out_dir):
    """Print and save the additive error-budget table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    comp = budget_mod.defaults(preset)
    table = budget_mod.to_table(comp)
    _write_json(out / f"budget_{preset}.json", table)
    click.echo(f"encoding: {preset}  p_bell: {comp.p_bell:.0%}")
    header = f"{'outcome':>8} {'p_lo':>6} {'p_msmt':>7} {'p_ff':>6} {'total':>6}"
    click.echo(header)
    for o, row in table["outcomes"].items():
        click.echo(
            f"{o:>8} {row['p_lo']:>6.0%} {row['p_msmt']:>7.0%} "
            f"{row['p_ff']:>6.0%} {row['total']:>6.0%}"
        )
    click.echo(f"mean total: {table['mean_total']:.1%}")


@main.command()
@click.option(
    "--kind",
    type=click.Choice(["rip-amplitude", "measurement-angle", "rb-decay"]),
    default="rip-amplitude",
    show_default=True,
)
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
@click.option("--points", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def sweep(kind, out_dir, points, seed):
    """Parameter sweeps: entangling phase vs drive amplitude, conditioned
    correlators vs measurement angle, or a synthetic RB decay curve."""
    from .evolve import RipConfig, default_chi_map, rip_effective_phases

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    system = paper_defaults()
    if kind == "rip-amplitude":
        chi_map = default_chi_map(system)
        amps = np.linspace(0.5, 30.0, points)
        rows = []
        for a in amps:
            cfg = RipConfig(amplitude=a)
            phases = rip_effective_phases(cfg, chi_map, n_pulses=2)
            rows.append([a, phases["ent"]])
        np.savetxt(
            out / "sweep_rip_amplitude.csv",
            np.array(rows),
            delimiter=",",
            header="amplitude,phi_ent",
            comments="",
        )
        click.echo(f"wrote {out / 'sweep_rip_amplitude.csv'}")
    elif kind == "rb-decay":
        from .tomography import synthetic_rb_data

        lengths = np.unique(np.linspace(1, 200, max(points, 3)).astype(int))
        data = synthetic_rb_data(
            lengths, error_per_gate=0.008, shots=3000, rng=shot_rng(seed, 0)
        )
        np.savetxt(
            out / "rb_decay.csv",
            np.column_stack([lengths, data]),
            delimiter=",",
            header="length,survival",
            comments="",
        )
        click.echo(f"wrote {out / 'rb_decay.csv'}")
    else:
        from .protocol import measurement_angle_sweep

        sim = TeleportedCnot(ProtocolOptions(feedforward=False))
        thetas = np.linspace(0.0, 2.0 * np.pi, points)
        results = measurement_angle_sweep(thetas, sim)
        rows = []
        for i, th in enumerate(thetas):
            for o in OUTCOMES:
                rows.append(
                    [th, int(o, 2)]
                    + [results[o][k][i] for k in ("ZZ", "XX", "XY", "YX", "YY")]
                )
        np.savetxt(
            out / "sweep_measurement_angle.csv",
            np.array(rows),
            delimiter=",",
            header="theta,outcome,ZZ,XX,XY,YX,YY",
            comments="",
        )
        click.echo(f"wrote {out / 'sweep_measurement_angle.csv'}")


def run():
    try:
        main(standalone_mode=False)
    except (ConfigError, click.UsageError, click.BadParameter) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except TelegateError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(3)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)


if __name__ == "__main__":
    run()
