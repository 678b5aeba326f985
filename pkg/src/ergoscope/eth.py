"""Exact diagonalization, microcanonical shells, MITE indicators, and
per-eigenstate no-go scans.

The scan precomputes, per block, the reduced density matrix of every
eigenvector once (a dim x d^l x d^l tensor); eigenstate reductions, canonical
reference reductions (Gibbs weights contracted against that tensor), and
microcanonical shell averages all come from it, which keeps the per-row cost
trivial even at L = 12.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import budget
from .ergotropy import local_circuit_sampler
from .hamiltonian import (HamiltonianOperator, ModelSpec, assemble_block,
                          assemble_full, residual_norm_bound)
from .lattice import Lattice, Partition
from .states import (QuantumState, density_state, entropy_of_matrix,
                     partial_trace, trace_distance, trace_norm_of_difference)
from .tensor import apply_unitary_vec, matvec, ptrace_vec
from .thermo import (canonical_energy_from_spectrum, energy_to_beta,
                     gibbs_weights)

CHAIN_TOL = 1e-9
DEGENERACY_RTOL = 1e-10


@dataclass(eq=False)
class SpectrumBundle:
    """Full spectrum of a dense Hermitian operator, ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    model_hash: str
    lattice: Lattice

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


def diagonalize(H: HamiltonianOperator, spec: ModelSpec = None,
                lattice: Lattice = None) -> SpectrumBundle:
    budget.check_matrix(H.dim, "eigendecomposition")
    evals, vecs = np.linalg.eigh(H.matrix)
    return SpectrumBundle(eigenvalues=evals, eigenvectors=vecs,
                          model_hash=spec.content_hash() if spec else "",
                          lattice=lattice)


def microcanonical_state(bundle: SpectrumBundle, e_center: float,
                         half_width: float) -> QuantumState:
    """Equal-weight mixture of the eigenprojectors inside the energy shell."""
    mask = np.abs(bundle.eigenvalues - e_center) <= half_width
    count = int(mask.sum())
    if count == 0:
        raise ValueError(
            f"empty microcanonical shell around {e_center} +- {half_width}")
    shell = bundle.eigenvectors[:, mask]
    rho = (shell @ shell.conj().T) / count
    if bundle.lattice is None:
        raise ValueError("bundle carries no lattice; cannot set the support")
    return density_state(rho, tuple(bundle.lattice.sites()), validate=False)


@dataclass(frozen=True)
class MiteResult:
    per_block: tuple
    max_distance: float


def mite_distance(state: QuantumState, partition: Partition,
                  reference: QuantumState) -> MiteResult:
    """Per-block trace distance between the two states' reductions."""
    if tuple(sorted(state.support)) != tuple(sorted(reference.support)):
        raise ValueError("state and reference supports must match")
    dists = tuple(
        trace_distance(partial_trace(state, blk), partial_trace(reference, blk))
        for blk in partition.blocks)
    return MiteResult(per_block=dists, max_distance=max(dists))


def block_reduction_tensors(bundle: SpectrumBundle, partition: Partition,
                            d: int = 2) -> list:
    """For every block: array G with G[k] = reduced density of eigenvector k."""
    lattice = partition.lattice
    n = lattice.V
    dim = bundle.dim
    order = sorted(lattice.sites(), reverse=True)
    tens = bundle.eigenvectors.reshape([d] * n + [dim])
    out = []
    for block in partition.blocks:
        pos = [order.index(s) for s in sorted(block, reverse=True)]
        moved = np.moveaxis(tens, pos, range(len(block)))
        flat = moved.reshape(d ** len(block), -1, dim)
        out.append(np.einsum("arK,brK->Kab", flat, flat.conj(), optimize=True))
    return out


def default_window(bundle: SpectrumBundle, V: int) -> float:
    width = float(bundle.eigenvalues[-1] - bundle.eigenvalues[0])
    return 0.05 * math.sqrt(V) * width / V


@dataclass(eq=False)
class EthScanRow:
    index: int
    energy: float
    energy_density: float
    per_block_distance: tuple
    max_distance: float
    athermality_cap: float
    best_work: float
    chain_ok: bool
    reference_beta: float
    degenerate: bool
    beta_clamped: bool


@dataclass(eq=False)
class EthScanResult:
    rows: list
    reference_policy: str
    window: float
    beta0: float
    seed: int
    channels_per_state: int
    residual_sum_bound: float
    block_count: int

    def all_chains_ok(self) -> bool:
        return all(r.chain_ok for r in self.rows)


def eth_scan(spec: ModelSpec, lattice: Lattice, partition: Partition,
             reference_policy: str = "canonical_matched", window: float = None,
             beta0: float = 1.0, channels_per_state: int = 8,
             gates_per_circuit: int = 4, band: tuple = None,
             seed: int = 0, sampler=None) -> EthScanResult:
    """Scan eigenstates: MITE distances, athermality caps, and sampled work.

    band, if given, is an (lo, hi) fraction of the sorted spectrum to scan
    (e.g. (0.4, 0.6) for the central fifth).  Every sampled channel is checked
    against the exact finite-size work chain.
    """
    if reference_policy not in ("canonical_matched", "microcanonical_window"):
        raise ValueError(f"unknown reference policy {reference_policy!r}")
    H = assemble_full(spec, lattice)
    bundle = diagonalize(H, spec=spec, lattice=lattice)
    evals = bundle.eigenvalues
    dim = bundle.dim
    if window is None:
        window = default_window(bundle, lattice.V)
    if sampler is None:
        sampler = local_circuit_sampler(lattice, n_gates=gates_per_circuit)
    reductions = block_reduction_tensors(bundle, partition, d=spec.d)
    block_evals = [np.linalg.eigvalsh(assemble_block(spec, partition, b).matrix)
                   for b in partition.blocks]
    residual = residual_norm_bound(spec, partition, want_exact=False)
    scale = max(abs(float(evals[0])), abs(float(evals[-1])), 1e-300)

    if band is None:
        indices = range(dim)
    else:
        lo, hi = band
        indices = range(int(lo * dim), max(int(lo * dim) + 1, int(hi * dim)))

    support = tuple(lattice.sites())
    ln_d = math.log(spec.d)
    rows = []
    for k in indices:
        e_k = float(evals[k])
        state_blocks = [g[k] for g in reductions]
        if reference_policy == "canonical_matched":
            beta_k = energy_to_beta(evals, e_k)
            clamped = beta_k == 0.0
            w = gibbs_weights(evals, beta_k) if beta_k > 0 else np.full(dim, 1.0 / dim)
            ref_blocks = [np.tensordot(w, g, axes=(0, 0)) for g in reductions]
        else:
            mask = np.abs(evals - e_k) <= window
            beta_k = math.nan
            clamped = False
            ref_blocks = [g[mask].mean(axis=0) for g in reductions]
        dists = tuple(trace_norm_of_difference(a, b)
                      for a, b in zip(state_blocks, ref_blocks))
        cap = lattice.V / beta0 * ln_d * max(dists)

        s_rho = [entropy_of_matrix(g) for g in state_blocks]
        e_rho = [canonical_energy_from_spectrum(ev, s).E
                 for ev, s in zip(block_evals, s_rho)]
        slack0 = e_k - sum(e_rho)

        rng = np.random.default_rng([seed, k])
        psi = bundle.eigenvectors[:, k]
        best_work = 0.0  # identity channel is always available
        chain_ok = True
        for _ in range(channels_per_state):
            channel = sampler(rng)
            out = psi
            for gate in channel.gates:
                out = apply_unitary_vec(out, gate.matrix, gate.sites, support, spec.d)
            e_out = float(np.real(np.vdot(out, matvec(H.matrix, out))))
            work = e_k - e_out
            entropy_term = 0.0
            for ev, blk, e_r in zip(block_evals, partition.blocks, e_rho):
                s_f = entropy_of_matrix(ptrace_vec(out, blk, support, spec.d))
                entropy_term += e_r - canonical_energy_from_spectrum(ev, s_f).E
            rhs = slack0 + entropy_term + residual.sum_bound
            if work > rhs + CHAIN_TOL:
                chain_ok = False
            best_work = max(best_work, work)

        degenerate = bool(
            (k > 0 and abs(e_k - evals[k - 1]) < DEGENERACY_RTOL * scale)
            or (k < dim - 1 and abs(evals[k + 1] - e_k) < DEGENERACY_RTOL * scale))
        rows.append(EthScanRow(
            index=k, energy=e_k, energy_density=e_k / lattice.V,
            per_block_distance=dists, max_distance=max(dists),
            athermality_cap=cap, best_work=best_work, chain_ok=chain_ok,
            reference_beta=beta_k, degenerate=degenerate, beta_clamped=clamped))
    return EthScanResult(rows=rows, reference_policy=reference_policy,
                         window=window, beta0=beta0, seed=seed,
                         channels_per_state=channels_per_state,
                         residual_sum_bound=residual.sum_bound,
                         block_count=len(partition.blocks))
