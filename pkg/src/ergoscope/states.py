"""Quantum states on site supports: construction, reductions, and distances.

Digit convention (shared with tensor.py): the lowest site of a support is
the least significant basis digit.  Entropies are in nats throughout.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import budget
from .hamiltonian import HamiltonianOperator
from .lattice import Lattice
from .tensor import ptrace_rho, ptrace_vec

NORM_TOL = 1e-10
EIG_CLAMP = 1e-10


@dataclass(eq=False)
class QuantumState:
    """Pure vector or density matrix on a sorted site support."""

    support: tuple
    d: int
    vector: np.ndarray = None
    rho: np.ndarray = None

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @property
    def dim(self) -> int:
        return self.d ** len(self.support)

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.vector, self.vector.conj())
        return self.rho


def pure_state(vector: np.ndarray, support, d: int = 2,
               validate: bool = True) -> QuantumState:
    support = tuple(sorted(support))
    vector = np.asarray(vector)
    dim = d ** len(support)
    if vector.shape != (dim,):
        raise ValueError(f"vector length {vector.shape} != ({dim},)")
    if validate:
        nrm = np.linalg.norm(vector)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"pure state norm {nrm} deviates from 1 beyond {NORM_TOL}")
    return QuantumState(support=support, d=d, vector=vector)


def density_state(rho: np.ndarray, support, d: int = 2,
                  validate: bool = True) -> QuantumState:
    support = tuple(sorted(support))
    rho = np.asarray(rho)
    dim = d ** len(support)
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix shape {rho.shape} != ({dim}, {dim})")
    if validate:
        herm_gap = np.max(np.abs(rho - rho.conj().T))
        if herm_gap > 1e-10:
            raise ValueError(f"density matrix not Hermitian (gap {herm_gap:.3e})")
        tr = complex(np.trace(rho)).real
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace {tr} deviates from 1")
        low = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
        if low < -EIG_CLAMP:
            raise ValueError(f"density matrix has eigenvalue {low} < -{EIG_CLAMP}")
    return QuantumState(support=support, d=d, rho=rho)


def computational_state(digits, support, d: int = 2) -> QuantumState:
    """Product basis state; digits are listed per site in ascending order."""
    support = tuple(sorted(support))
    if len(digits) != len(support):
        raise ValueError("one digit per support site required")
    index = 0
    for m, digit in enumerate(digits):
        if not 0 <= digit < d:
            raise ValueError(f"digit {digit} outside 0..{d - 1}")
        index += digit * d**m
    vec = np.zeros(d ** len(support))
    vec[index] = 1.0
    return QuantumState(support=support, d=d, vector=vec)


def all_up_state(lattice: Lattice, d: int = 2) -> QuantumState:
    return computational_state([0] * lattice.V, tuple(lattice.sites()), d=d)


def partial_trace(state: QuantumState, keep) -> QuantumState:
    """Reduced density matrix on `keep`; positivity is inherited, not re-checked."""
    keep = tuple(sorted(keep))
    if not set(keep) <= set(state.support):
        raise ValueError(f"keep {keep} not a subset of support {state.support}")
    budget.check_matrix(state.d ** len(keep), "reduced density matrix")
    if keep == state.support:
        return density_state(state.density(), keep, d=state.d, validate=False)
    if state.is_pure:
        red = ptrace_vec(state.vector, keep, state.support, state.d)
    else:
        red = ptrace_rho(state.rho, keep, state.support, state.d)
    return density_state(red, keep, d=state.d, validate=False)


def _clamped_eigvals(rho: np.ndarray) -> np.ndarray:
    vals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    low = float(vals.min())
    if low < -EIG_CLAMP:
        raise ValueError(f"state eigenvalue {low} below -{EIG_CLAMP}: invalid state")
    return np.clip(vals, 0.0, None)


def von_neumann_entropy(state: QuantumState) -> float:
    """-sum p ln p over the spectrum, with 0 ln 0 = 0."""
    if state.is_pure:
        return 0.0
    vals = _clamped_eigvals(state.rho)
    pos = vals[vals > 0.0]
    return float(-np.sum(pos * np.log(pos)))


def entropy_of_matrix(rho: np.ndarray) -> float:
    vals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if float(vals.min()) < -EIG_CLAMP:
        raise ValueError("matrix eigenvalue below positivity clamp")
    vals = np.clip(vals, 0.0, None)
    pos = vals[vals > 0.0]
    return float(-np.sum(pos * np.log(pos)))


def trace_distance(a: QuantumState, b: QuantumState) -> float:
    """Schatten-1 norm ||a - b||_1 WITHOUT the conventional 1/2."""
    if a.support != b.support or a.d != b.d:
        raise ValueError("trace distance needs matching supports")
    return trace_norm_of_difference(a.density(), b.density())


def trace_norm_of_difference(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = rho - sigma
    vals = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(np.sum(np.abs(vals)))


def expectation(state: QuantumState, op: HamiltonianOperator) -> float:
    """Tr(O rho); the operator may live on a sub-support of the state."""
    if not set(op.support) <= set(state.support):
        raise ValueError(f"operator support {op.support} not inside {state.support}")
    if op.support == state.support and state.is_pure:
        value = complex(np.vdot(state.vector, op.matrix @ state.vector))
    else:
        red = partial_trace(state, op.support)
        value = complex(np.trace(op.matrix @ red.rho))
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise ValueError(f"expectation of Hermitian operator has Im = {value.imag}")
    return value.real


def fidelity_with_pure(state: QuantumState, reference: QuantumState) -> float:
    """|<ref|psi>|^2 for pure states, <ref|rho|ref> for mixed ones."""
    if reference.vector is None:
        raise ValueError("reference must be pure")
    if state.support != reference.support:
        raise ValueError("fidelity needs matching supports")
    if state.is_pure:
        return float(abs(np.vdot(reference.vector, state.vector)) ** 2)
    return float(np.real(np.vdot(reference.vector, state.rho @ reference.vector)))


def state_to_json(state: QuantumState) -> dict:
    """Text-serializable form (re/im arrays), meant for golden tests.

    Grows as d^V (squared for density matrices); keep it to V <= 10.
    """
    payload = {"support": list(state.support), "d": state.d}
    if state.is_pure:
        payload["kind"] = "pure"
        payload["re"] = np.real(state.vector).tolist()
        payload["im"] = np.imag(state.vector).tolist()
    else:
        payload["kind"] = "density"
        payload["re"] = np.real(state.rho).tolist()
        payload["im"] = np.imag(state.rho).tolist()
    return payload


def state_from_json(payload: dict) -> QuantumState:
    data = np.array(payload["re"]) + 1j * np.array(payload["im"])
    if not np.any(data.imag):
        data = data.real
    support = tuple(payload["support"])
    if payload["kind"] == "pure":
        return pure_state(data, support, d=payload["d"])
    return density_state(data, support, d=payload["d"])


def binary_entropy(lam: float) -> float:
    if lam <= 0.0 or lam >= 1.0:
        return 0.0
    return float(-lam * math.log(lam) - (1 - lam) * math.log(1 - lam))


def pair_partners(lattice: Lattice, l: int) -> list:
    """(control-side, partner) site pairs of the long-range entangled family."""
    if lattice.D != 1:
        raise ValueError("pair family is defined on 1D chains")
    if lattice.L % (2 * l) != 0:
        raise ValueError(f"L = {lattice.L} must be divisible by 2l = {2 * l}")
    pairs = []
    for i in lattice.sites():
        if ((i - 1) // l) % 2 == 0:
            pairs.append((i, i + l))
    return pairs


def build_pair_family(lam: float, lattice: Lattice, l: int) -> QuantumState:
    """Product of sqrt(1-lam)|00> + sqrt(lam)|11> on sites (i, i+l).

    Sites i in even-parity length-l blocks pair with their image one block
    to the right; lam = 0 degenerates to the all-|0> product state.
    """
    if not 0.0 <= lam <= 0.5:
        raise ValueError(f"lambda must lie in [0, 1/2], got {lam}")
    pairs = pair_partners(lattice, l)
    budget.check_vector(2**lattice.V, "pair-family state")
    n = np.arange(2**lattice.V)
    amp = np.array([[math.sqrt(1.0 - lam), 0.0], [0.0, math.sqrt(lam)]])
    psi = np.ones(2**lattice.V)
    for i, j in pairs:
        bi = (n >> (i - 1)) & 1
        bj = (n >> (j - 1)) & 1
        psi *= amp[bi, bj]
    return pure_state(psi, tuple(lattice.sites()), d=2, validate=True)
