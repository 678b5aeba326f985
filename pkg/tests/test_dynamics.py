import math

import numpy as np
import pytest

from ergoscope.dynamics import (Drive, area_law_fit, constant, energy_series,
                                entropy_rate, entropy_series, sie_diagnostic,
                                trotter_evolve)
from ergoscope.ergotropy import default_c_tilde
from ergoscope.hamiltonian import SX, SZ, ModelSpec, mixed_field_ising, two_site
from ergoscope.lattice import build_lattice, partition_hypercubes
from ergoscope.states import computational_state, fidelity_with_pure


def staggered(lat):
    return computational_state([k % 2 for k in range(lat.V)], tuple(lat.sites()))


def test_zero_drive_keeps_state_constant():
    lat = build_lattice(1, 4, "periodic")
    spec = mixed_field_ising(lat)
    keys = list(spec.onsite) + list(spec.pairs)
    drive = Drive(spec=spec, lattice=lat,
                  schedules={k: constant(0.0) for k in keys})
    psi0 = staggered(lat)
    traj = trotter_evolve(psi0, drive, 1.0, 0.05, stride=4)
    assert fidelity_with_pure(traj.states[-1], psi0) == pytest.approx(1.0, abs=1e-12)


def test_order_two_energy_drift():
    lat = build_lattice(1, 8, "periodic")
    drive = Drive(spec=mixed_field_ising(lat), lattice=lat)
    psi0 = staggered(lat)
    drifts = []
    for dt in (0.05, 0.025):
        traj = trotter_evolve(psi0, drive, 1.0, dt, stride=5)
        es = energy_series(traj)
        drifts.append(abs(float(es[-1] - es[0])))
    assert 3.0 <= drifts[0] / drifts[1] <= 5.0


def test_bell_generation_closed_form():
    lat = build_lattice(1, 2, "open")
    spec = ModelSpec(d=2, onsite={}, pairs={(1, 2): two_site(SX, SX)},
                     u0=4.0, delta=1.0)
    drive = Drive(spec=spec, lattice=lat)
    psi0 = computational_state([0, 0], (1, 2))
    traj = trotter_evolve(psi0, drive, math.pi / 4, 0.001, stride=50)
    s = entropy_series(traj, (1,))
    assert s[-1] == pytest.approx(math.log(2), abs=1e-6)
    # exp(-i t XX)|00> = cos t |00> - i sin t |11>: S_A(t) = H2(cos^2 t)
    for t, s_t in zip(traj.times, s):
        p = math.cos(t) ** 2
        closed = 0.0 if p in (0.0, 1.0) else -p * math.log(p) - (1 - p) * math.log(1 - p)
        assert s_t == pytest.approx(closed, abs=1e-6)
    _, rates = entropy_rate(traj, (1,))
    assert np.max(np.abs(rates)) <= default_c_tilde(2) * 1.0


def test_onsite_only_drive_conserves_block_entropy():
    lat = build_lattice(1, 8, "periodic")
    spec = ModelSpec(d=2, onsite={s: SX + 0.4 * SZ for s in lat.sites()},
                     pairs={}, u0=2.0, delta=1.0)
    drive = Drive(spec=spec, lattice=lat)
    traj = trotter_evolve(staggered(lat), drive, 1.0, 0.01, stride=5)
    part = partition_hypercubes(lat, 2)
    rep = sie_diagnostic(traj, part)
    assert rep.max_rate <= 1e-6
    assert rep.max_ratio() == 0.0


def test_rate_series_converges_under_dt_halving():
    lat = build_lattice(1, 6, "periodic")
    drive = Drive(spec=mixed_field_ising(lat), lattice=lat)
    psi0 = staggered(lat)
    block = (1, 2)
    series = {}
    for dt, stride in ((0.04, 5), (0.02, 10), (0.01, 20)):
        traj = trotter_evolve(psi0, drive, 1.0, dt, stride=stride)
        series[dt] = entropy_rate(traj, block)[1]
    d1 = np.max(np.abs(series[0.04] - series[0.02]))
    d2 = np.max(np.abs(series[0.02] - series[0.01]))
    assert d2 < d1
    assert d1 / d2 > 2.0


def test_unitarity_and_energy_conservation():
    lat = build_lattice(1, 8, "periodic")
    drive = Drive(spec=mixed_field_ising(lat), lattice=lat)
    traj = trotter_evolve(staggered(lat), drive, 2.0, 0.01, stride=10)
    for st in traj.states:
        assert abs(np.linalg.norm(st.vector) - 1.0) <= 1e-8
    es = energy_series(traj)
    assert np.max(np.abs(es - es[0])) < 5e-3


def test_complementary_entropy_rates():
    lat = build_lattice(1, 6, "periodic")
    drive = Drive(spec=mixed_field_ising(lat), lattice=lat)
    traj = trotter_evolve(staggered(lat), drive, 1.0, 0.01, stride=5)
    _, r_a = entropy_rate(traj, (1, 2))
    _, r_b = entropy_rate(traj, (3, 4, 5, 6))
    assert np.max(np.abs(r_a - r_b)) < 1e-6


def test_sie_sweep_area_law_flatness():
    lat = build_lattice(1, 12, "periodic")
    drive = Drive(spec=mixed_field_ising(lat), lattice=lat)
    traj = trotter_evolve(staggered(lat), drive, 2.0, 0.01, stride=5)
    rates = []
    c_tilde = default_c_tilde(2)
    for l in (2, 3, 4):
        rep = sie_diagnostic(traj, partition_hypercubes(lat, l))
        rates.append(rep.max_rate)
        assert rep.max_ratio() <= c_tilde
        for blk in rep.blocks:
            assert blk.cut_sum == pytest.approx(2.0)
    assert abs(area_law_fit([2, 3, 4], rates)) < 0.5


def test_schedule_validation():
    lat = build_lattice(1, 4, "periodic")
    spec = mixed_field_ising(lat)
    with pytest.raises(ValueError):
        Drive(spec=spec, lattice=lat, schedules={(9, 10): constant(1.0)})


def test_scheduled_decay_violation_rejected():
    lat = build_lattice(1, 4, "periodic")
    spec = mixed_field_ising(lat)  # u0 is the minimal admissible value
    drive = Drive(spec=spec, lattice=lat,
                  schedules={(1, 2): constant(10.0)})
    with pytest.raises(ValueError):
        trotter_evolve(staggered(lat), drive, 0.5, 0.05)


def test_time_dependent_schedule_runs():
    lat = build_lattice(1, 4, "periodic")
    spec = mixed_field_ising(lat)
    drive = Drive(spec=spec, lattice=lat,
                  schedules={(1, 2): lambda t: 0.5 + 0.5 * math.cos(t)})
    traj = trotter_evolve(staggered(lat), drive, 1.0, 0.01, stride=10)
    assert len(traj.times) == 11
    es = energy_series(traj)
    assert es.shape == traj.times.shape


def test_entropy_rate_needs_three_points():
    lat = build_lattice(1, 4, "periodic")
    drive = Drive(spec=mixed_field_ising(lat), lattice=lat)
    traj = trotter_evolve(staggered(lat), drive, 0.05, 0.05, stride=1)
    with pytest.raises(ValueError):
        entropy_rate(traj, (1, 2))
