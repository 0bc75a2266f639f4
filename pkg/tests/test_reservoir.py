import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delayrc.reservoir import (
    Feedback,
    Nonlinearity,
    ReservoirConfig,
    apply_mask,
    head_sequences,
    normalize_input,
    outputs_batch,
    pad_inputs,
    read_series_csv,
    run,
    run_batch,
    step,
    write_series_csv,
    write_trajectory_csv,
)

from oracles import manual_trajectory

NONLINEARITIES = [Nonlinearity.tanh(), Nonlinearity.sine(), Nonlinearity.scaled_tanh(0.6)]
reals = st.floats(-50, 50, allow_nan=False)


# --- Nonlinearity -----------------------------------------------------------


@pytest.mark.parametrize("f", NONLINEARITIES, ids=lambda f: f.kind)
def test_nonlinearity_lipschitz_by_sampling(f):
    rng = np.random.default_rng(1)
    a, b = rng.uniform(-10, 10, size=(2, 20000))
    assert np.all(np.abs(f(a) - f(b)) <= f.lipschitz * np.abs(a - b) + 1e-15)


@pytest.mark.parametrize("f", NONLINEARITIES, ids=lambda f: f.kind)
def test_nonlinearity_vanishes_at_zero(f):
    assert f(0.0) == 0.0


def test_lipschitz_constants():
    assert Nonlinearity.tanh().lipschitz == 1
    assert Nonlinearity.sine().lipschitz == 1
    assert Nonlinearity.scaled_tanh(0.3).lipschitz == 0.3


def test_sine_period():
    f = Nonlinearity.sine()
    assert f.period == 2 * math.pi
    x = np.linspace(-20, 20, 1001)
    assert np.allclose(f(x + f.period), f(x), atol=1e-12)
    assert Nonlinearity.tanh().period is None


def test_bad_nonlinearity():
    with pytest.raises(ValueError):
        Nonlinearity("relu")
    with pytest.raises(ValueError):
        Nonlinearity.scaled_tanh(0.0)
    with pytest.raises(ValueError):
        Nonlinearity("tanh", 2.0)


# --- ReservoirConfig --------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(N=0, alpha=0.5, beta=0.5),
        dict(N=3, alpha=0.0, beta=0.5),
        dict(N=3, alpha=1.0, beta=0.5),
        dict(N=3, alpha=0.5, beta=0.0),
        dict(N=3, alpha=0.5, beta=1.2),
        dict(N=2.5, alpha=0.5, beta=0.5),
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ReservoirConfig(**kwargs)


def test_config_accepts_string_feedback():
    cfg = ReservoirConfig(3, 0.5, 0.5, feedback="instantaneous")
    assert cfg.feedback is Feedback.INSTANTANEOUS
    assert cfg.num_nodes == 4


# --- preprocessing ------------------------------------------------------------


def test_pad_inputs_examples():
    out = pad_inputs([(1, 2), (3,)])
    assert out.tolist() == [[1, 2], [3, 0]]
    assert pad_inputs([(5,)]).tolist() == [[5]]
    out = pad_inputs([(1, 2, 3), (4,), (5, 6)])
    assert out.tolist() == [[1, 2, 3], [4, 0, 0], [5, 6, 0]]


def test_pad_inputs_empty():
    with pytest.raises(ValueError, match="no inputs"):
        pad_inputs([])


@given(st.lists(st.lists(reals, min_size=1, max_size=12), min_size=1, max_size=6))
def test_pad_inputs_properties(batch):
    out = pad_inputs(batch)
    M = max(len(u) for u in batch)
    assert out.shape == (len(batch), M)
    for row, u in zip(out, batch):
        assert row[: len(u)].tolist() == [float(v) for v in u]
        assert np.all(row[len(u) :] == 0)


def test_normalize_examples():
    assert np.allclose(normalize_input([3, 4]), [0.6, 0.8], atol=1e-15)
    assert normalize_input([1]).tolist() == [1.0]
    assert np.allclose(normalize_input([2, 2, 2, 2]), [0.5] * 4, atol=1e-15)
    with pytest.raises(ValueError, match="cannot normalize zero series"):
        normalize_input([0, 0])


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30).filter(lambda v: any(abs(x) > 1e-3 for x in v)))
def test_normalize_unit_norm(u):
    out = normalize_input(u)
    assert abs(np.linalg.norm(out) - 1) < 1e-12
    assert np.all(np.abs(out) <= 1 + 1e-15)


def test_apply_mask_examples():
    assert apply_mask([1, 1, 1, 1], [2, 3]).tolist() == [2, 3, 2, 3]
    assert apply_mask([4, -1, 7], [1]).tolist() == [4, -1, 7]
    assert apply_mask([1, 2], [0, 5]).tolist() == [0, 10]
    assert apply_mask([1, 2, 3], [1, 2, 3, 4, 5]).tolist() == [1, 4, 9]
    with pytest.raises(ValueError):
        apply_mask([1, 2], [])


# --- step / run ---------------------------------------------------------------


def test_step_zero_fixed_point():
    for f in NONLINEARITIES:
        cfg = ReservoirConfig(4, 0.5, 0.5, f)
        assert step(np.zeros(5), 0.0, cfg).tolist() == [0.0] * 5


def test_step_examples():
    cfg = ReservoirConfig(2, 0.5, 0.5)
    assert step([0, 0, 0], 1.0, cfg).tolist() == pytest.approx([math.tanh(0.5), 0, 0], abs=1e-15)
    a, b, c, u = 0.3, -0.7, 0.9, 0.2
    assert step([a, b, c], u, cfg).tolist() == pytest.approx([math.tanh(0.5 * c + 0.5 * u), a, b], abs=1e-15)


def test_step_instantaneous_uses_shifted_last_node():
    cfg = ReservoirConfig(2, 0.5, 0.5, feedback="instantaneous")
    a, b, c, u = 0.3, -0.7, 0.9, 0.2
    assert step([a, b, c], u, cfg).tolist() == pytest.approx([math.tanh(0.5 * b + 0.5 * u), a, b], abs=1e-15)


def test_step_shape_check():
    with pytest.raises(ValueError):
        step([0, 0], 1.0, ReservoirConfig(2, 0.5, 0.5))


def test_run_two_node_hand_recursion():
    # N=2, alpha=beta=0.5, u=(1,-1): the feedback node is still empty at t=2
    traj = run(ReservoirConfig(2, 0.5, 0.5), [1.0, -1.0])
    oracle = manual_trajectory(2, 0.5, 0.5, math.tanh, [1.0, -1.0])
    assert np.max(np.abs(traj.states - np.array(oracle))) <= 1e-14
    assert abs(traj.states[0, 1] - math.tanh(0.5)) <= 1e-14
    assert abs(traj.states[0, 2] - math.tanh(-0.5)) <= 1e-14
    assert abs(traj.states[1, 2] - math.tanh(0.5)) <= 1e-14


@pytest.mark.parametrize("feedback", ["delayed", "instantaneous"])
@pytest.mark.parametrize("f", NONLINEARITIES, ids=lambda f: f.kind)
def test_run_matches_manual_recursion(f, feedback):
    rng = np.random.default_rng(7)
    for N in (1, 2, 5):
        cfg = ReservoirConfig(N, 0.6, 0.4, f, feedback)
        u = rng.uniform(-1, 1, size=40)
        oracle = manual_trajectory(N, 0.6, 0.4, lambda z: float(f(z)), u, feedback == "instantaneous")
        assert np.max(np.abs(run(cfg, u).states - np.array(oracle))) <= 1e-14


@pytest.mark.parametrize("feedback", ["delayed", "instantaneous"])
def test_run_equals_iterated_step(feedback):
    cfg = ReservoirConfig(4, 0.45, 0.7, Nonlinearity.tanh(), feedback)
    u = np.random.default_rng(3).uniform(-1, 1, 30)
    col = np.zeros(5)
    traj = run(cfg, u)
    for t in range(1, 31):
        col = step(col, u[t - 1], cfg)
        assert np.array_equal(traj.states[:, t], col)


def test_zero_input_zero_trajectory():
    for f in NONLINEARITIES:
        traj = run(ReservoirConfig(3, 0.5, 0.5, f), np.zeros(25))
        assert not traj.states.any()


def test_short_input_longer_than_delay_line():
    traj = run(ReservoirConfig(6, 0.5, 0.5), [0.5, -0.2])
    assert traj.states.shape == (7, 3)
    assert traj.states[0, 1] == pytest.approx(math.tanh(0.25), abs=1e-15)
    assert traj.states[1, 2] == traj.states[0, 1]


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 8),
    st.lists(st.floats(-1, 1), min_size=1, max_size=40),
    st.sampled_from(["delayed", "instantaneous"]),
)
def test_shift_register_and_initial_column(N, u, feedback):
    traj = run(ReservoirConfig(N, 0.5, 0.5, feedback=feedback), u)
    X = traj.states
    assert not X[:, 0].any()
    assert np.array_equal(X[1:, 1:], X[:-1, :-1])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.lists(st.floats(-1, 1), min_size=2, max_size=30), st.data())
def test_causality(N, u, data):
    cut = data.draw(st.integers(1, len(u)))
    cfg = ReservoirConfig(N, 0.55, 0.35)
    full = run(cfg, u).states
    changed = list(u[:cut]) + [9.0] * (len(u) - cut)
    assert np.array_equal(run(cfg, changed).states[:, : cut + 1], full[:, : cut + 1])
    assert np.array_equal(run(cfg, u[:cut]).states, full[:, : cut + 1])


def test_run_batch_matches_single_runs():
    cfg = ReservoirConfig(5, 0.5, 0.5, Nonlinearity.sine())
    U = np.random.default_rng(2).uniform(-1, 1, size=(6, 17))
    X = run_batch(cfg, U)
    for i in range(6):
        assert np.array_equal(X[i], run(cfg, U[i]).states)
    assert np.array_equal(head_sequences(cfg, U), X[:, 0, :])


def test_outputs_batch_matches_weighted_states():
    cfg = ReservoirConfig(4, 0.5, 0.5)
    rng = np.random.default_rng(5)
    U = rng.uniform(-1, 1, size=(3, 12))
    w = rng.standard_normal(5)
    y = outputs_batch(cfg, U, w)
    X = run_batch(cfg, U)
    assert np.allclose(y, np.einsum("k,bkt->bt", w, X)[:, 1:], atol=1e-14)
    with pytest.raises(ValueError):
        outputs_batch(cfg, U, w[:3])


# --- CSV ----------------------------------------------------------------------


def test_series_csv_roundtrip(tmp_path):
    u = np.random.default_rng(0).uniform(-1, 1, 9)
    path = tmp_path / "u.csv"
    write_series_csv(path, u)
    assert path.read_text().splitlines()[0] == "u"
    assert np.array_equal(read_series_csv(path), u)


def test_series_csv_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("u\n1.0\nabc\n")
    with pytest.raises(ValueError, match="bad value"):
        read_series_csv(bad)
    nohead = tmp_path / "nohead.csv"
    nohead.write_text("v\n1\n")
    with pytest.raises(ValueError, match="missing column"):
        read_series_csv(nohead)


def test_trajectory_csv_layout(tmp_path):
    traj = run(ReservoirConfig(2, 0.5, 0.5), [1.0, -1.0, 0.5])
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, traj)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x0,x1,x2"
    assert len(lines) == 5
    back = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(back[:, 1:].T, traj.states)
