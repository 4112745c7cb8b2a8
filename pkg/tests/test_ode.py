"""Trajectory integration, dense output, box enforcement, CSV export."""

import csv

import numpy as np
import pytest

from coop2 import ode
from coop2.models import Model
from coop2.ode import (LeftDomain, integrate, monitor_difference,
                       write_trajectory_csv)


def _linear_decay():
    return Model(name="decay", n=2,
                 field=lambda x: -np.asarray(x, dtype=float),
                 jacobian=lambda x: -np.eye(2),
                 box_lower=np.array([-2.0, -2.0]),
                 box_upper=np.array([2.0, 2.0]))


def _harmonic():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return Model(name="harmonic", n=2,
                 field=lambda x: A @ np.asarray(x, dtype=float),
                 jacobian=lambda x: A,
                 box_lower=np.array([-2.0, -2.0]),
                 box_upper=np.array([2.0, 2.0]))


def test_exponential_decay_accuracy():
    m = _linear_decay()
    traj = integrate(m, np.array([1.0, -1.0]), 5.0)
    exact = np.exp(-traj.times)
    assert np.max(np.abs(traj.states[:, 0] - exact)) < 1e-8
    assert np.max(np.abs(traj.states[:, 1] + exact)) < 1e-8


def test_harmonic_period():
    m = _harmonic()
    traj = integrate(m, np.array([1.0, 0.0]), 2.0 * np.pi)
    assert np.max(np.abs(traj.at(2.0 * np.pi) - [1.0, 0.0])) < 1e-7


def test_dense_output_between_steps():
    m = _harmonic()
    traj = integrate(m, np.array([1.0, 0.0]), 10.0)
    ts = np.linspace(0.0, 10.0, 257)
    vals = traj.at(ts)
    assert np.max(np.abs(vals[:, 0] - np.cos(ts))) < 1e-6


def test_tolerance_halving_consistency(goodwin_model):
    a = np.array([0.1] * 4)
    t = 30.0
    lo = integrate(goodwin_model, a, t, rtol=1e-6, atol=1e-9)
    hi = integrate(goodwin_model, a, t, rtol=1e-9, atol=1e-12)
    assert np.max(np.abs(lo.at(t) - hi.at(t))) < 1e-4


def test_compiled_path_matches_fallback(goodwin_model):
    # strip the compiled right-hand side to force the generic integrator
    plain = Model(name="goodwin", n=4, field=goodwin_model.field,
                  jacobian=goodwin_model.jacobian,
                  box_lower=goodwin_model.box_lower,
                  box_upper=goodwin_model.box_upper,
                  params=goodwin_model.params)
    a = np.array([0.1] * 4)
    fast = integrate(goodwin_model, a, 20.0)
    slow = integrate(plain, a, 20.0)
    assert np.max(np.abs(fast.at(20.0) - slow.at(20.0))) < 1e-7


def test_initial_condition_outside_box(goodwin_model):
    with pytest.raises(LeftDomain):
        integrate(goodwin_model, np.array([-1.0, 0.1, 0.1, 0.1]), 1.0)


def test_tolerance_floor(goodwin_model):
    with pytest.raises(ValueError):
        integrate(goodwin_model, np.array([0.1] * 4), 1.0, rtol=1e-13)
    with pytest.raises(ValueError):
        integrate(goodwin_model, np.array([0.1] * 4), 1.0, atol=1e-15)


def test_sign_variation_annotation(goodwin_model, goodwin_eq):
    a = np.array([0.1] * 4)
    traj = integrate(goodwin_model, a, 50.0, equilibrium=goodwin_eq)
    assert traj.s_minus_to_e is not None
    assert traj.s_minus_to_e.shape == traj.times.shape
    # the low-variation cone is invariant relative to e
    assert traj.s_minus_to_e[0] <= 1
    assert np.all(traj.s_minus_to_e <= 1)


def test_monitor_difference_cone(goodwin_model, rng):
    lo, hi = goodwin_model.box_lower, goodwin_model.box_upper
    t_grid = np.linspace(0.0, 20.0, 41)
    for _ in range(5):
        a = rng.uniform(lo, hi)
        # choose b so that a - b has a single sign change
        b = a - 0.05 * np.array([1.0, 1.0, -1.0, -1.0]) * (hi - lo)
        b = np.clip(b, lo, hi)
        sv = monitor_difference(goodwin_model, a, b, t_grid)
        assert np.all(sv <= 1)


def test_monitor_high_variation_absorbed(goodwin_model, rng):
    # from s^-(a-b) = 3 the monitored value may wander, but once a sample
    # drops to <= 1 every later sample stays <= 1
    lo, hi = goodwin_model.box_lower, goodwin_model.box_upper
    t_grid = np.linspace(0.0, 40.0, 81)
    checked = 0
    while checked < 10:
        a = rng.uniform(lo, hi)
        d = rng.uniform(0.02, 0.3, size=4) * (hi - lo)
        d[1::2] = -d[1::2]
        b = np.clip(a - d, lo, hi)
        if ode.s_minus(a - b) != 3:
            continue
        sv = monitor_difference(goodwin_model, a, b, t_grid)
        low = np.flatnonzero(sv <= 1)
        if low.size:
            assert np.all(sv[low[0]:] <= 1)
        checked += 1


def test_csv_round_trip(tmp_path, goodwin_model, goodwin_eq):
    traj = integrate(goodwin_model, np.array([0.1] * 4), 5.0,
                     equilibrium=goodwin_eq)
    path = tmp_path / "run.csv"
    write_trajectory_csv(traj, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x1", "x2", "x3", "x4", "s_minus"]
    assert len(rows) == traj.times.size + 1
    back = np.array([[float(v) for v in r[:5]] for r in rows[1:]])
    assert np.allclose(back[:, 0], traj.times, atol=1e-10)
    assert np.allclose(back[:, 1:], traj.states, rtol=1e-11, atol=1e-14)
    # fixed-width scientific format
    assert all(len(r[0].split("e")) == 2 for r in rows[1:])


def test_stats_recorded(goodwin_model):
    traj = integrate(goodwin_model, np.array([0.1] * 4), 5.0)
    assert traj.stats["accepted"] == traj.times.size - 1
    assert traj.stats["rhs_evals"] > 0
