import math

import numpy as np
import pytest

from ergoscope.hamiltonian import HamiltonianOperator
from ergoscope.rand import random_density, random_hermitian
from ergoscope.states import density_state, von_neumann_entropy
from ergoscope.thermo import (audenaert_bound, canonical_energy, energy_to_beta,
                              fannes_bound, gibbs_state, inverse_temperature,
                              min_energy_gap, thermo_curve, thermo_point)

QUBIT = HamiltonianOperator(support=(1,), matrix=np.diag([0.0, 1.0]), d=2)
# scalar oracle values for the two-level system at beta = 1, Z = 1 + e^-1
P0 = 1.0 / (1.0 + math.exp(-1.0))
F1 = -math.log(1.0 + math.exp(-1.0))
E1 = 1.0 - P0
S1 = E1 - F1
VAR1 = P0 * (1.0 - P0)


def herm_op(mat):
    n = int(round(math.log2(mat.shape[0])))
    return HamiltonianOperator(support=tuple(range(1, n + 1)), matrix=mat, d=2)


def test_gibbs_qubit_weights():
    g = gibbs_state(QUBIT, 1.0)
    assert np.allclose(np.diag(g.rho).real, [P0, 1.0 - P0], atol=1e-12)


def test_gibbs_low_temperature_is_ground_projector():
    g = gibbs_state(QUBIT, 500.0)
    assert np.allclose(g.rho, np.diag([1.0, 0.0]), atol=1e-10)


def test_gibbs_trivial_hamiltonian():
    flat = HamiltonianOperator(support=(1,), matrix=np.zeros((2, 2)), d=2)
    g = gibbs_state(flat, 2.0)
    assert np.allclose(g.rho, np.identity(2) / 2, atol=1e-12)


def test_gibbs_commutes_with_hamiltonian(rng):
    H = herm_op(random_hermitian(8, rng))
    g = gibbs_state(H, 0.7)
    comm = H.matrix @ g.rho - g.rho @ H.matrix
    assert np.max(np.abs(comm)) < 1e-12


def test_thermo_curve_qubit_values():
    tc = thermo_curve(QUBIT, [1.0])
    assert tc.F[0] == pytest.approx(F1, abs=1e-12)
    assert tc.E[0] == pytest.approx(E1, abs=1e-12)
    assert tc.S[0] == pytest.approx(S1, abs=1e-12)
    assert tc.sigma2[0] == pytest.approx(VAR1, abs=1e-12)


def test_thermo_curve_entropy_identity(rng):
    H = herm_op(random_hermitian(8, rng))
    tc = thermo_curve(H, np.geomspace(0.05, 10.0, 40))
    assert np.max(np.abs(tc.S - tc.beta * (tc.E - tc.F))) < 1e-12


def test_energy_derivative_matches_variance(rng):
    # oracle: central finite differences of E(beta) against -sigma^2
    H = herm_op(random_hermitian(8, rng))
    evals = np.linalg.eigvalsh(H.matrix)
    db = 1e-5
    for beta in (0.3, 1.0, 2.5):
        e_plus = thermo_point(evals, beta + db)[1]
        e_minus = thermo_point(evals, beta - db)[1]
        var = thermo_point(evals, beta)[3]
        assert (e_plus - e_minus) / (2 * db) == pytest.approx(-var, abs=1e-6)


def test_thermo_curve_rejects_bad_grids():
    with pytest.raises(ValueError):
        thermo_curve(QUBIT, [])
    with pytest.raises(ValueError):
        thermo_curve(QUBIT, [-1.0, 1.0])
    with pytest.raises(ValueError):
        thermo_curve(QUBIT, [2.0, 1.0])


def test_canonical_energy_edges():
    ground = canonical_energy(QUBIT, 0.0)
    assert ground.regime == "ground" and ground.E == 0.0
    assert math.isinf(ground.beta_star)
    top = canonical_energy(QUBIT, math.log(2))
    assert top.regime == "max_entropy" and top.E == pytest.approx(0.5)
    assert top.beta_star == 0.0


def test_canonical_energy_interior_inverts_entropy():
    res = canonical_energy(QUBIT, S1)
    assert res.regime == "interior"
    assert res.E == pytest.approx(E1, abs=1e-10)
    assert res.beta_star == pytest.approx(1.0, abs=1e-8)


def test_canonical_energy_rejects_out_of_range():
    with pytest.raises(ValueError):
        canonical_energy(QUBIT, -0.1)
    with pytest.raises(ValueError):
        canonical_energy(QUBIT, 1.0)


def test_inverse_temperature_examples():
    assert inverse_temperature(QUBIT, 0.01) > 3.0
    assert inverse_temperature(QUBIT, math.log(2)) == 0.0
    assert inverse_temperature(QUBIT, S1) == pytest.approx(1.0, abs=1e-8)


def test_round_trip_canonical_energy(rng):
    H = herm_op(random_hermitian(8, rng))
    evals = np.linalg.eigvalsh(H.matrix)
    for beta in np.geomspace(0.05, 20.0, 25):
        _, E, S, _ = thermo_point(evals, beta)
        res = canonical_energy(H, S)
        assert res.E == pytest.approx(E, abs=1e-8)


def test_canonical_energy_degenerate_ground():
    H = herm_op(np.diag([0.0, 0.0, 1.0, 2.0]))
    res = canonical_energy(H, 0.5 * math.log(2))
    assert res.regime == "ground" and res.E == 0.0


def test_fannes_examples():
    assert fannes_bound(1, 2, 0.0) == pytest.approx(1 / math.e, abs=1e-12)
    assert fannes_bound(10, 2, 0.1) == pytest.approx(
        10 * math.log(2) * 0.1 + 1 / math.e, abs=1e-12)
    # orthogonal qubit pair: bound 2 ln 2 + 1/e caps the actual gap ln 2
    cap = fannes_bound(1, 2, 2.0)
    assert cap == pytest.approx(2 * math.log(2) + 1 / math.e, abs=1e-12)
    assert cap >= math.log(2)


def test_fannes_dominates_entropy_differences(rng):
    for _ in range(200):
        a = random_density(4, rng)
        b = random_density(4, rng)
        t1 = float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))
        gap = abs(von_neumann_entropy(density_state(a, (1, 2)))
                  - von_neumann_entropy(density_state(b, (1, 2))))
        assert gap <= fannes_bound(2, 2, t1) + 1e-12
        assert gap <= audenaert_bound(4, t1) + 1e-12


def test_audenaert_edges():
    assert audenaert_bound(4, 0.0) == 0.0
    assert audenaert_bound(4, 2.0) == pytest.approx(math.log(4))


def test_min_energy_gap_examples(rng):
    g = gibbs_state(QUBIT, 1.3)
    assert abs(min_energy_gap(QUBIT, g)) <= 1e-9
    excited = density_state(np.diag([0.0, 1.0]), (1,))
    assert min_energy_gap(QUBIT, excited) == pytest.approx(1.0)
    H = herm_op(random_hermitian(4, rng))
    for _ in range(1000):
        sigma = density_state(random_density(4, rng), (1, 2), validate=False)
        assert min_energy_gap(H, sigma) >= -1e-9


def test_energy_to_beta_round_trip(rng):
    H = herm_op(random_hermitian(8, rng))
    evals = np.linalg.eigvalsh(H.matrix)
    for beta in (0.2, 1.0, 4.0):
        E = thermo_point(evals, beta)[1]
        assert energy_to_beta(evals, E) == pytest.approx(beta, rel=1e-6)
    assert energy_to_beta(evals, float(evals.mean())) == 0.0


def test_convexity_of_canonical_energy(rng):
    H = herm_op(random_hermitian(8, rng))
    s_grid = np.linspace(0.05, math.log(8) - 0.05, 40)
    energies = np.array([canonical_energy(H, s).E for s in s_grid])
    second = np.diff(energies, 2)
    assert np.min(second) >= -1e-8


def test_canonical_energy_nondecreasing(rng):
    H = herm_op(random_hermitian(8, rng))
    s_grid = np.linspace(0.01, math.log(8) - 0.01, 60)
    energies = [canonical_energy(H, s).E for s in s_grid]
    assert np.min(np.diff(energies)) >= -1e-10


def test_free_energy_continuity(rng):
    # |F_H - F_H'| <= ||H - H'|| for random perturbations
    from ergoscope.tensor import hermitian_norm
    for _ in range(25):
        base = random_hermitian(8, rng)
        pert = random_hermitian(8, rng, scale=0.1)
        for beta in (0.3, 1.0, 5.0):
            f_a = thermo_point(np.linalg.eigvalsh(base), beta)[0]
            f_b = thermo_point(np.linalg.eigvalsh(base + pert), beta)[0]
            assert abs(f_a - f_b) <= hermitian_norm(pert) + 1e-10


def test_divergence_identity(rng):
    # oracle: D(sigma || rho_beta) computed from eigendecompositions directly;
    # moderate beta * spectral-range keeps the re-diagonalized log of the
    # Gibbs matrix well conditioned at the 1e-9 tolerance
    for _ in range(50):
        mat = random_hermitian(8, rng, scale=0.5)
        H = herm_op(mat)
        evals = np.linalg.eigvalsh(mat)
        beta = float(rng.uniform(0.2, 1.5))
        g = gibbs_state(H, beta)
        sigma = random_density(8, rng)
        sig_vals, sig_vecs = np.linalg.eigh(sigma)
        sig_vals = np.clip(sig_vals, 1e-300, None)
        log_rho = _logm(g.rho)
        direct = float(np.real(
            np.sum(sig_vals * np.log(sig_vals))
            - np.trace(sigma @ log_rho)))
        _, E, S_beta, _ = thermo_point(evals, beta)
        s_sigma = von_neumann_entropy(density_state(sigma, H.support))
        e_sigma = float(np.real(np.trace(sigma @ mat)))
        identity = S_beta - s_sigma + beta * (e_sigma - E)
        assert direct == pytest.approx(identity, abs=1e-9)
        assert direct >= -1e-9


def _logm(rho):
    vals, vecs = np.linalg.eigh(rho)
    return (vecs * np.log(np.clip(vals, 1e-300, None))) @ vecs.conj().T
