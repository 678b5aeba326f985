"""Scenario-driven command line front end.

    ergoscope <subcommand> --config <path> [--out <dir>] [--seed <n>] [--threads <n>]

Subcommands: fig1, bound, protocol, eth-scan, dynamics, thermo-curve.
Exit codes: 0 success, 1 validation error, 2 budget error, 3 verification
failure.  Every emitted file embeds the config hash and seed.
"""

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import dynamics as dyn
from . import eth as eth_mod
from .budget import BudgetError
from .config import ConfigError, config_hash, load_config, parse_matrix
from .ergotropy import (Channel, cnot_protocol, local_control_caps,
                        identity_channel, local_circuit_sampler,
                        ergotropy_bound_report)
from .hamiltonian import (ModelSpec, assemble_full, ising_zz_field,
                          mixed_field_ising)
from .io import write_csv, write_json
from .lattice import build_lattice, partition_hypercubes
from .states import (all_up_state, binary_entropy, build_pair_family,
                     computational_state, density_state, expectation,
                     partial_trace, pure_state, von_neumann_entropy)
from .thermo import (canonical_energy_from_spectrum, energy_to_beta,
                     gibbs_state, thermo_curve, thermo_point)

COMMANDS = ("fig1", "bound", "protocol", "eth-scan", "dynamics", "thermo-curve")


class VerificationFailure(RuntimeError):
    """A run finished but an asserted inequality or fidelity check failed."""


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ergoscope",
        description="Lattice ergotropy bounds, ETH scans, and entropy-rate "
                    "diagnostics at desk scale.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="TOML or JSON scenario file")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for independent scenario points")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors count as validation errors; --help stays 0
        return 0 if exc.code == 0 else 1
    try:
        files = run_scenario(args.config, args.command, out=args.out,
                             seed=args.seed, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError) as exc:
        print(f"config error: {args.config}: {exc}", file=sys.stderr)
        return 1
    for path in files:
        print(path)
    return 0


def run_scenario(config_path, command: str, out=None, seed=None, threads: int = 1):
    """Execute one subcommand; returns the list of emitted files.

    Raises ConfigError / BudgetError / VerificationFailure; main() maps those
    to exit codes 1 / 2 / 3.
    """
    raw = load_config(config_path)
    seed = seed if seed is not None else int(raw.get("seed", 0))
    out_dir = Path(out or raw.get("output_dir", "out"))
    meta = {"config_hash": config_hash(raw), "seed": seed}
    runner = {
        "fig1": _run_fig1,
        "bound": _run_bound,
        "protocol": _run_protocol,
        "eth-scan": _run_eth_scan,
        "dynamics": _run_dynamics,
        "thermo-curve": _run_thermo_curve,
    }[command]
    return runner(raw, out_dir, seed, meta, max(1, threads))


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- builders

def _build_lattice(raw):
    body = raw.get("lattice")
    if body is None:
        raise ConfigError("<config>", "lattice", "section required")
    return build_lattice(int(body.get("D", 1)), int(body["L"]),
                         body.get("boundary", "periodic"))


def _build_model(raw, lattice) -> ModelSpec:
    body = raw.get("model")
    if body is None:
        raise ConfigError("<config>", "model", "section required")
    preset = body.get("preset")
    params = dict(body.get("params", {}))
    overrides = {k: body[k] for k in ("u0", "delta") if k in body}
    if preset == "ising_zz_field":
        bad = set(params) - {"J", "h"}
        if bad:
            raise ConfigError("<config>", f"model.params.{bad.pop()}", "unknown")
        return ising_zz_field(lattice, h=float(params.get("h", 1.0)),
                              J=float(params.get("J", 1.0)), **overrides)
    if preset == "mixed_field_ising":
        bad = set(params) - {"J", "g", "h"}
        if bad:
            raise ConfigError("<config>", f"model.params.{bad.pop()}", "unknown")
        return mixed_field_ising(lattice, g=float(params.get("g", 1.05)),
                                 h=float(params.get("h", 0.5)),
                                 J=float(params.get("J", 1.0)), **overrides)
    if preset is not None:
        raise ConfigError("<config>", "model.preset", f"unknown preset {preset!r}")
    d = int(body.get("d", 2))
    onsite = {int(t["site"]): parse_matrix(t["matrix"])
              for t in body.get("onsite_terms", [])}
    pairs = {}
    for t in body.get("pair_terms", []):
        i, j = (int(s) for s in t["sites"])
        key = (min(i, j), max(i, j))
        mat = parse_matrix(t["matrix"])
        pairs[key] = pairs.get(key, 0.0) + mat
    u0 = float(body["u0"]) if "u0" in body else None
    delta = float(body.get("delta", 1.0))
    if u0 is None:
        from .hamiltonian import minimal_admissible_u0
        u0 = minimal_admissible_u0(onsite, pairs, lattice, delta)
    return ModelSpec(d=d, onsite=onsite, pairs=pairs, u0=u0, delta=delta)


def _build_partition(raw, lattice):
    body = raw.get("partition")
    if body is None:
        raise ConfigError("<config>", "partition", "section required")
    return partition_hypercubes(lattice, int(body["l"]),
                                mode=body.get("mode", "strict"))


def _build_state(raw, spec, lattice, partition=None):
    body = raw.get("state")
    if body is None:
        raise ConfigError("<config>", "state", "section required")
    kind = body.get("kind")
    if kind == "pair_family":
        l = int(body.get("l", partition.block_size if partition else 0))
        if l <= 0:
            raise ConfigError("<config>", "state.l", "pair_family needs a block size")
        return build_pair_family(float(body["lambda"]), lattice, l)
    if kind == "eigenstate":
        H = assemble_full(spec, lattice)
        bundle = eth_mod.diagonalize(H, spec=spec, lattice=lattice)
        index = int(body["index"]) % bundle.dim
        return pure_state(bundle.eigenvectors[:, index], tuple(lattice.sites()),
                          d=spec.d, validate=False)
    if kind == "gibbs":
        H = assemble_full(spec, lattice)
        return gibbs_state(H, float(body["beta"]))
    if kind == "all_up":
        return all_up_state(lattice, d=spec.d)
    if kind == "basis":
        return computational_state([int(v) for v in body["digits"]],
                                   tuple(lattice.sites()), d=spec.d)
    raise ConfigError("<config>", "state.kind", f"unknown state kind {kind!r}")


def _build_reference(raw, spec, lattice, state):
    body = raw.get("reference", {"policy": "canonical_matched"})
    policy = body.get("policy", "canonical_matched")
    H = assemble_full(spec, lattice)
    support = tuple(lattice.sites())
    if policy == "gibbs":
        return gibbs_state(H, float(body["beta"]))
    if policy == "canonical_matched":
        evals = np.linalg.eigvalsh(H.matrix)
        beta = energy_to_beta(evals, expectation(state, H))
        if beta <= 0.0:
            dim = H.dim
            return density_state(np.identity(dim) / dim, support,
                                 d=spec.d, validate=False)
        return gibbs_state(H, beta)
    if policy == "microcanonical_window":
        bundle = eth_mod.diagonalize(H, spec=spec, lattice=lattice)
        window = body.get("window")
        if window is None:
            window = eth_mod.default_window(bundle, lattice.V)
        return eth_mod.microcanonical_state(bundle, expectation(state, H),
                                            float(window))
    raise ConfigError("<config>", "reference.policy", f"unknown policy {policy!r}")


def _build_channels(raw, spec, lattice, partition, state_cfg, seed):
    channels = []
    rng = np.random.default_rng([seed, 7])
    for entry in raw.get("channels", [{"kind": "identity"}]):
        kind = entry["kind"]
        if kind == "identity":
            channels.append(identity_channel())
        elif kind == "cnot_protocol":
            if state_cfg.get("kind") != "pair_family":
                raise ConfigError("<config>", "channels",
                                  "cnot_protocol channel needs a pair_family state")
            lam = float(state_cfg["lambda"])
            l = int(state_cfg.get("l", partition.block_size))
            h = float(raw.get("model", {}).get("params", {}).get("h", 1.0))
            channels.append(cnot_protocol(lam, lattice, l, h).channel)
        elif kind == "random_circuits":
            count = int(entry.get("count", 1))
            sampler = local_circuit_sampler(
                lattice, n_gates=int(entry.get("gates", 4)),
                gate_time=float(entry.get("duration", 0.4))
                / max(1, int(entry.get("gates", 4))))
            for k in range(count):
                ch = sampler(rng)
                channels.append(Channel(kind="circuit", gates=ch.gates,
                                        duration=ch.duration,
                                        label=f"random_local_{k}"))
        else:
            raise ConfigError("<config>", "channels", f"unknown kind {kind!r}")
    return channels


# ---------------------------------------------------------------- commands

def _run_fig1(raw, out_dir, seed, meta, threads):
    body = raw.get("fig1", {})
    l = int(body.get("l", 10))
    h = float(body.get("h", 1.0))
    n_lambda = int(body.get("lambda_points", 50))
    beta_min = float(body.get("beta_min", 0.01))
    beta_max = float(body.get("beta_max", 60.0))
    beta_points = int(body.get("beta_points", 400))
    sizes = [int(v) for v in body.get("crosscheck_sizes", [2, 3, 4, 5])]

    block_lattice = build_lattice(1, l, "periodic")
    block_spec = ising_zz_field(block_lattice, h=h)
    block_evals = np.linalg.eigvalsh(assemble_full(block_spec, block_lattice).matrix)

    betas = np.geomspace(beta_min, beta_max, beta_points)
    gibbs_rows = []
    for beta in betas:
        _, E, S, _ = thermo_point(block_evals, beta)
        gibbs_rows.append((beta, S / l, E / l))

    lambdas = [k / (2.0 * n_lambda) for k in range(1, n_lambda + 1)]
    cross = {}
    for size in sizes:
        lat = build_lattice(1, 2 * size, "periodic")
        spec = ising_zz_field(lat, h=h)
        H = assemble_full(spec, lat)
        block = tuple(range(1, size + 1))

        def one(lam, lat=lat, H=H, block=block, size=size):
            psi = build_pair_family(lam, lat, size)
            s_blk = von_neumann_entropy(partial_trace(psi, block))
            e_full = expectation(psi, H)
            return s_blk / size, e_full / (2 * size)

        cross[size] = _pmap(one, lambdas, threads)

    dominance_ok = True
    lambda_rows = []
    for idx, lam in enumerate(lambdas):
        s_density = binary_entropy(lam)
        e_density = -(1 - 2 * lam) ** 2 - h * (1 - 2 * lam)
        e_gibbs_min = canonical_energy_from_spectrum(block_evals, l * s_density).E / l
        if e_gibbs_min > e_density + 1e-12:
            dominance_ok = False
        row = [lam, s_density, e_density]
        for size in sizes:
            row.extend(cross[size][idx])
        lambda_rows.append(tuple(row))

    meta = dict(meta, l=l, h=h, gibbs_block="periodic_wrap",
                dominance_ok=dominance_ok)
    files = [
        write_csv(out_dir / "fig1_gibbs.csv", ("beta", "S_density", "E_density"),
                  gibbs_rows, meta),
        write_csv(out_dir / "fig1_lambda.csv",
                  ["lambda", "S_density", "E_density"]
                  + [f"ed_{tag}_l{s}" for s in sizes for tag in ("S_density", "E_density")],
                  lambda_rows, meta),
    ]
    if not dominance_ok:
        raise VerificationFailure("Gibbs curve rose above the lambda curve")
    return files


def _run_bound(raw, out_dir, seed, meta, threads):
    lattice = _build_lattice(raw)
    spec = _build_model(raw, lattice)
    partition = _build_partition(raw, lattice)
    state = _build_state(raw, spec, lattice, partition)
    reference = _build_reference(raw, spec, lattice, state)
    channels = _build_channels(raw, spec, lattice, partition,
                               raw.get("state", {}), seed)
    bounds = raw.get("bounds", {})
    beta0 = float(bounds.get("beta0", 1.0))
    beta1 = bounds.get("beta1")
    report = ergotropy_bound_report(state, reference, spec, partition, channels,
                             beta0=beta0,
                             beta1=float(beta1) if beta1 is not None else None,
                             seed=seed)
    payload = report.to_json_dict()
    if "T" in bounds:
        if beta1 is None:
            raise ConfigError("<config>", "bounds.beta1",
                              "local-control caps need beta1 alongside T")
        caps = local_control_caps(state, reference, spec, partition,
                               beta0=beta0, beta1=float(beta1),
                               T=float(bounds["T"]),
                               c_tilde=bounds.get("c_tilde"))
        payload["local_control_caps"] = {
            "athermality_cap": caps.athermality_cap,
            "sie_entropy_cap": caps.sie_entropy_cap,
            "temperature_cap_ok": caps.temperature_cap_ok,
            "cut_sum_total": caps.cut_sum_total,
            "local_control_ratio": caps.local_control_ratio,
            "c_tilde": caps.c_tilde,
        }
    path = write_json(out_dir / "bound_report.json", payload, meta)
    if not all(report.verified):
        raise VerificationFailure("a channel violated the finite-size chain")
    return [path]


def _run_protocol(raw, out_dir, seed, meta, threads):
    lattice = _build_lattice(raw)
    body = raw.get("state", {})
    if body.get("kind") != "pair_family":
        raise ConfigError("<config>", "state.kind", "protocol needs pair_family")
    partition = _build_partition(raw, lattice)
    lam = float(body["lambda"])
    l = int(body.get("l", partition.block_size))
    h = float(raw.get("model", {}).get("params", {}).get("h", 1.0))
    result = cnot_protocol(lam, lattice, l, h)
    closed_form = lattice.V * ((1 + h) - (1 - 2 * lam) ** 2 - h * (1 - 2 * lam))
    payload = {
        "lambda": lam, "l": l, "h": h, "L": lattice.L,
        "work": result.work,
        "closed_form_work": closed_form,
        "fidelity_ground": result.fidelity_ground,
        "block_entropies": list(result.block_entropies),
    }
    path = write_json(out_dir / "protocol_report.json", payload, meta)
    if result.fidelity_ground < 1 - 1e-9:
        raise VerificationFailure("protocol did not reach the ground state")
    return [path]


def _run_eth_scan(raw, out_dir, seed, meta, threads):
    lattice = _build_lattice(raw)
    spec = _build_model(raw, lattice)
    partition = _build_partition(raw, lattice)
    body = raw.get("eth", {})
    band = body.get("band")
    result = eth_mod.eth_scan(
        spec, lattice, partition,
        reference_policy=body.get("reference_policy", "canonical_matched"),
        window=body.get("window"),
        beta0=float(raw.get("bounds", {}).get("beta0", 1.0)),
        channels_per_state=int(body.get("channels_per_state", 8)),
        gates_per_circuit=int(body.get("gates_per_circuit", 4)),
        band=tuple(float(v) for v in band) if band else None,
        seed=seed)
    columns = ["index", "energy", "energy_density", "max_trace_distance",
               "athermality_cap", "best_work"]
    columns += [f"dist_block{k + 1}" for k in range(result.block_count)]
    rows = [
        (r.index, r.energy, r.energy_density, r.max_distance,
         r.athermality_cap, r.best_work, *r.per_block_distance)
        for r in result.rows
    ]
    meta = dict(meta, policy=result.reference_policy,
                window=result.window, beta0=result.beta0,
                channels_per_state=result.channels_per_state,
                residual_sum_bound=result.residual_sum_bound,
                chain_ok=result.all_chains_ok())
    path = write_csv(out_dir / "eth_scan.csv", columns, rows, meta)
    if not result.all_chains_ok():
        raise VerificationFailure("an eigenstate channel violated the chain")
    return [path]


def _run_dynamics(raw, out_dir, seed, meta, threads):
    lattice = _build_lattice(raw)
    spec = _build_model(raw, lattice)
    partition = _build_partition(raw, lattice)
    state = _build_state(raw, spec, lattice, partition)
    body = raw.get("dynamics", {})
    drive = dyn.Drive(spec=spec, lattice=lattice,
                      schedules=_parse_schedules(body.get("schedules", []),
                                                 float(body.get("T", 1.0))))
    traj = dyn.trotter_evolve(state, drive, float(body.get("T", 1.0)),
                              float(body.get("dt", 0.01)),
                              stride=int(body.get("stride", 5)))
    energies = dyn.energy_series(traj)
    block_entropy = [dyn.entropy_series(traj, b) for b in partition.blocks]
    block_rates = [dyn.entropy_rate(traj, b)[1] for b in partition.blocks]
    columns = ["t", "energy"]
    columns += [f"S_block{k + 1}" for k in range(len(partition.blocks))]
    columns += [f"rate_block{k + 1}" for k in range(len(partition.blocks))]
    rows = []
    for i, t in enumerate(traj.times):
        row = [t, energies[i]]
        row += [s[i] for s in block_entropy]
        row += [r[i] for r in block_rates]
        rows.append(tuple(row))
    files = [write_csv(out_dir / "trajectory.csv", columns, rows,
                       dict(meta, l=partition.block_size))]

    l_values = [int(v) for v in body.get("l_values", [])]
    if l_values:
        def one(l):
            part = partition_hypercubes(lattice, l, mode="strict")
            return dyn.sie_diagnostic(traj, part)

        reports = _pmap(one, l_values, threads)
        slope = dyn.area_law_fit(l_values, [r.max_rate for r in reports]) \
            if len(l_values) >= 2 else math.nan
        sie_rows = [(r.l, r.max_rate, max(b.cut_sum for b in r.blocks),
                     r.max_ratio()) for r in reports]
        files.append(write_csv(out_dir / "sie_panel.csv",
                               ("l", "max_rate", "cut_sum", "max_ratio"),
                               sie_rows, dict(meta, area_law_slope=slope)))
    return files


def _parse_schedules(entries, t_total: float):
    out = {}
    for entry in entries:
        sites = [int(s) for s in entry["sites"]]
        key = sites[0] if len(sites) == 1 else (min(sites), max(sites))
        kind = entry["type"]
        if kind == "constant":
            value = float(entry.get("value", 1.0))
            out[key] = (lambda v: lambda t: v)(value)
        elif kind == "ramp":
            start = float(entry.get("start", 0.0))
            stop = float(entry.get("stop", 1.0))
            out[key] = (lambda a, b: lambda t: a + (b - a) * t / max(t_total, 1e-300))(
                start, stop)
        elif kind == "sine":
            amp = float(entry.get("amp", 1.0))
            omega = float(entry.get("omega", 1.0))
            phase = float(entry.get("phase", 0.0))
            out[key] = (lambda a, w, p: lambda t: a * math.sin(w * t + p))(
                amp, omega, phase)
    return out


def _run_thermo_curve(raw, out_dir, seed, meta, threads):
    lattice = _build_lattice(raw)
    spec = _build_model(raw, lattice)
    body = raw.get("thermo", {})
    betas = np.geomspace(float(body.get("beta_min", 0.01)),
                         float(body.get("beta_max", 20.0)),
                         int(body.get("beta_points", 100)))
    curve = thermo_curve(assemble_full(spec, lattice), betas)
    path = write_csv(out_dir / "thermo_curve.csv", curve.COLUMNS,
                     curve.rows(), meta)
    return [path]


if __name__ == "__main__":
    sys.exit(main())
