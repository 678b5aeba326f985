"""Gibbs states, thermodynamic functions of beta, and the canonical energy.

The canonical energy E_H(S) is the positive-temperature Legendre form
sup_{beta>0} beta^-1 (S - ln Tr e^{-beta H}); on the interior it inverts the
strictly monotone S_H(beta), below ln(ground degeneracy) it pins to the
ground energy, and at the top edge to the infinite-temperature mean.
"""

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import HamiltonianOperator
from .states import QuantumState, density_state, von_neumann_entropy, expectation

MAX_ENTROPY_EDGE = 1e-9
GROUND_DEGENERACY_RTOL = 1e-9
BISECTION_ITERS = 60
NEWTON_ITERS = 3


def _spectrum(H: HamiltonianOperator) -> np.ndarray:
    return np.linalg.eigvalsh(H.matrix)


def gibbs_weights(evals: np.ndarray, beta: float) -> np.ndarray:
    """Normalized e^{-beta E_k}, max-shifted so nothing overflows."""
    shifted = np.exp(-beta * (evals - evals[0]))
    return shifted / shifted.sum()


def gibbs_state(H: HamiltonianOperator, beta: float) -> QuantumState:
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    evals, vecs = np.linalg.eigh(H.matrix)
    w = gibbs_weights(evals, beta)
    rho = (vecs * w) @ vecs.conj().T
    return density_state(rho, H.support, d=H.d, validate=False)


def thermo_point(evals: np.ndarray, beta: float) -> tuple:
    """(F, E, S, sigma^2) of the Gibbs state at one beta, from eigenvalues."""
    e0 = float(evals[0])
    x = evals - e0
    w = np.exp(-beta * x)
    z = float(w.sum())
    mean_x = float((w @ x) / z)
    mean_x2 = float((w @ (x * x)) / z)
    F = e0 - math.log(z) / beta
    E = e0 + mean_x
    S = beta * mean_x + math.log(z)
    var = mean_x2 - mean_x**2
    return F, E, S, max(var, 0.0)


@dataclass(eq=False)
class ThermoCurve:
    """Tabulated (beta, F, E, S, sigma^2) along an ascending beta grid."""

    beta: np.ndarray
    F: np.ndarray
    E: np.ndarray
    S: np.ndarray
    sigma2: np.ndarray

    COLUMNS = ("beta", "F", "E", "S", "sigma2")

    def __post_init__(self):
        if len(self.beta) == 0:
            raise ValueError("empty beta grid")
        if np.any(np.diff(self.beta) <= 0):
            raise ValueError("beta grid must be strictly ascending")
        scale = max(1.0, float(np.max(np.abs(self.E))))
        if np.any(np.diff(self.E) > 1e-12 * scale):
            raise ValueError("internal energy must be nonincreasing in beta")
        if np.any(np.diff(self.S) > 1e-12):
            raise ValueError("entropy must be nonincreasing in beta")
        if np.any(self.sigma2 < -1e-12):
            raise ValueError("negative energy variance")

    def rows(self):
        for k in range(len(self.beta)):
            yield (self.beta[k], self.F[k], self.E[k], self.S[k], self.sigma2[k])


def thermo_curve(H: HamiltonianOperator, beta_grid) -> ThermoCurve:
    beta_grid = np.asarray(beta_grid, dtype=float)
    if beta_grid.size == 0:
        raise ValueError("empty beta grid")
    if np.any(beta_grid <= 0):
        raise ValueError("beta grid must be positive")
    evals = _spectrum(H)
    cols = np.array([thermo_point(evals, b) for b in beta_grid])
    return ThermoCurve(beta=beta_grid, F=cols[:, 0], E=cols[:, 1],
                       S=cols[:, 2], sigma2=cols[:, 3])


@dataclass(frozen=True)
class CanonicalEnergyResult:
    E: float
    beta_star: float
    regime: str  # "interior" | "ground" | "max_entropy"


def ground_degeneracy(evals: np.ndarray) -> int:
    spread = float(evals[-1] - evals[0])
    tol = GROUND_DEGENERACY_RTOL * max(spread, 1.0)
    return int(np.sum(evals - evals[0] <= tol))


def canonical_energy_from_spectrum(evals: np.ndarray, S: float) -> CanonicalEnergyResult:
    evals = np.asarray(evals, dtype=float)
    dim = evals.size
    ln_dim = math.log(dim)
    if S < -1e-12 or S > ln_dim + 1e-12:
        raise ValueError(f"entropy {S} outside [0, ln {dim}]")
    S = min(max(S, 0.0), ln_dim)
    d0 = ground_degeneracy(evals)
    if ln_dim - S < MAX_ENTROPY_EDGE:
        return CanonicalEnergyResult(E=float(evals.mean()), beta_star=0.0,
                                     regime="max_entropy")
    if S <= math.log(d0) + 1e-12:
        return CanonicalEnergyResult(E=float(evals[0]), beta_star=math.inf,
                                     regime="ground")
    beta = _invert_entropy(evals, S)
    _, E, _, _ = thermo_point(evals, beta)
    return CanonicalEnergyResult(E=E, beta_star=beta, regime="interior")


def _entropy_at(evals: np.ndarray, beta: float) -> float:
    return thermo_point(evals, beta)[2]


def _invert_entropy(evals: np.ndarray, S: float) -> float:
    """Solve S_H(beta) = S by bracketed bisection plus Newton polish.

    S_H is strictly decreasing, so a sign-changing bracket always exists for
    S strictly between ln d0 and ln dim.
    """
    lo = 1e-6
    while _entropy_at(evals, lo) <= S and lo > 1e-300:
        lo *= 0.25
    hi = max(2 * lo, 1.0)
    while _entropy_at(evals, hi) >= S and hi < 1e18:
        hi *= 4.0
    a, b = lo, hi
    for _ in range(BISECTION_ITERS):
        mid = 0.5 * (a + b)
        if _entropy_at(evals, mid) > S:
            a = mid
        else:
            b = mid
    beta = 0.5 * (a + b)
    for _ in range(NEWTON_ITERS):
        _, _, s_val, var = thermo_point(evals, beta)
        slope = -beta * var  # dS/dbeta
        if slope == 0.0:
            break
        step = (s_val - S) / slope
        cand = beta - step
        if a <= cand <= b:
            beta = cand
    return beta


def canonical_energy(H: HamiltonianOperator, S: float) -> CanonicalEnergyResult:
    return canonical_energy_from_spectrum(_spectrum(H), S)


def inverse_temperature(H: HamiltonianOperator, S: float) -> float:
    """beta at the canonical-energy optimum; inf/0 sentinels at the regimes."""
    return canonical_energy(H, S).beta_star


def energy_to_beta(evals: np.ndarray, E: float) -> float:
    """Positive beta with E_H(beta) = E, clamped to 0 at/above the mean energy.

    E_H(beta) decreases from the infinite-temperature mean to the ground
    energy; energies outside that range clamp to the nearest end (0 for the
    mean, a large beta cap for the ground energy).
    """
    evals = np.asarray(evals, dtype=float)
    mean = float(evals.mean())
    if E >= mean:
        return 0.0
    lo = 1e-8
    hi = 1.0
    while thermo_point(evals, hi)[1] >= E:
        hi *= 4.0
        if hi >= 1e15:
            return hi
    for _ in range(BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        if thermo_point(evals, mid)[1] > E:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fannes_bound(block_size: int, d: int, t1: float) -> float:
    """|A| ln(d) ||rho - sigma||_1 + 1/e, verbatim."""
    if t1 < 0:
        raise ValueError(f"trace-norm distance must be >= 0, got {t1}")
    return block_size * math.log(d) * t1 + 1.0 / math.e


def audenaert_bound(dim: int, t1: float) -> float:
    """Sharper entropy-continuity bound, exposed for comparison only.

    Uses T = t1/2 (the conventional trace distance); outside its validity
    range T > 1 - 1/dim the trivial cap ln(dim) is returned.
    """
    if t1 < 0:
        raise ValueError(f"trace-norm distance must be >= 0, got {t1}")
    T = t1 / 2.0
    if T > 1.0 - 1.0 / dim:
        return math.log(dim)
    eta = 0.0
    if 0.0 < T < 1.0:
        eta = -T * math.log(T) - (1 - T) * math.log(1 - T)
    return T * math.log(dim - 1) + eta if dim > 1 else eta


def min_energy_gap(H: HamiltonianOperator, sigma: QuantumState) -> float:
    """<H>_sigma - E_H(S(sigma)): nonnegative by the minimum-energy principle."""
    if tuple(sorted(sigma.support)) != H.support:
        raise ValueError("state and Hamiltonian supports must match")
    energy = expectation(sigma, H)
    S = von_neumann_entropy(sigma)
    return energy - canonical_energy(H, S).E
