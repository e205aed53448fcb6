import numpy as np
import pytest

from cvqnn import fock, layers, nonlin
from cvqnn.errors import ShapeMismatchError
from cvqnn.layers import SimConfig, encode_classical, forward, standard_layer


@pytest.mark.parametrize("p,count", [(1, 5), (2, 12), (3, 19), (4, 26), (5, 33), (6, 40)])
def test_param_count_law(p, count):
    spec = standard_layer(p)
    assert spec.param_count == 7 * p - 2 == count


def test_every_slot_referenced_once():
    for p in range(1, 5):
        kinds = standard_layer(p).slot_kinds()
        assert len(kinds) == 7 * p - 2


def test_zero_parameters_vacuum_passthrough():
    net = [standard_layer(1)]
    cfg = SimConfig(cutoff=8)
    out = forward(net, np.zeros(5), fock.vacuum(1, 8), readout="q_expectations", config=cfg)
    assert abs(out.state.amps[0]) == pytest.approx(1.0, abs=1e-12)
    assert out.readout[0] == pytest.approx(0.0, abs=1e-12)
    # one element at s=0, alpha=1, PNR n=1: success probability e^{-1}
    assert out.success_probability == pytest.approx(np.exp(-1.0), abs=1e-10)


def test_single_displacement_readout():
    # one layer with only D(x) active: <q> = sqrt(2 hbar) x
    net = [standard_layer(1)]
    cfg = SimConfig(cutoff=14)
    zeta = np.zeros(5)
    zeta[2] = 0.5  # displacement real part
    out = forward(net, zeta, fock.vacuum(1, 14), readout="q_expectations", config=cfg)
    assert out.readout[0] == pytest.approx(np.sqrt(2 * cfg.hbar) * 0.5, abs=1e-8)


def test_success_probability_matches_norm_tracked():
    net = [standard_layer(2), standard_layer(2)]
    cfg = SimConfig(cutoff=6)
    rng = np.random.default_rng(4)
    zeta = rng.uniform(-0.3, 0.3, 24)
    out = forward(net, zeta, fock.vacuum(2, 6), config=cfg)
    assert out.state.norm_tracked == pytest.approx(out.success_probability, abs=1e-10)
    assert 0 < out.success_probability <= 1


def test_class_probabilities_bounds_and_joint_sum():
    net = [standard_layer(2)]
    cfg = SimConfig(cutoff=6)
    rng = np.random.default_rng(7)
    zeta = rng.uniform(-0.5, 0.5, 12)
    out = forward(net, zeta, fock.vacuum(2, 6), readout="class_probabilities", config=cfg)
    assert np.all(out.readout >= 0) and np.all(out.readout <= 1)
    joint = np.abs(out.state.amps) ** 2
    assert joint.sum() == pytest.approx(1.0, abs=1e-8)
    # exhaustive Fock-outcome enumeration oracle for the exclusive patterns
    D = 6
    t = (np.abs(out.state.amps) ** 2).reshape(D, D)  # axes (n1, n0)
    assert out.readout[0] == pytest.approx(t[0, 1:].sum(), abs=1e-12)
    assert out.readout[1] == pytest.approx(t[1:, 0].sum(), abs=1e-12)


def test_permutation_equivariance_at_zero():
    net = [standard_layer(2)]
    cfg = SimConfig(cutoff=5)
    state = fock.basis_state([1, 0], 5)
    out = forward(net, np.zeros(12), state, config=cfg).state.normalize()
    swapped_in = fock.basis_state([0, 1], 5)
    out_sw = forward(net, np.zeros(12), swapped_in, config=cfg).state.normalize()
    t = out.amps.reshape(5, 5)
    t_sw = out_sw.amps.reshape(5, 5)
    np.testing.assert_allclose(t, t_sw.T, atol=1e-12)


def test_forward_deterministic():
    net = [standard_layer(1) for _ in range(3)]
    cfg = SimConfig(cutoff=6)
    zeta = layers.init_params(net, seed=9, scale=0.4)
    a = forward(net, zeta, fock.vacuum(1, 6), readout="q_expectations", config=cfg)
    b = forward(net, zeta, fock.vacuum(1, 6), readout="q_expectations", config=cfg)
    np.testing.assert_array_equal(a.state.amps, b.state.amps)
    assert a.success_probability == b.success_probability


def test_encode_classical_identity_at_zero():
    spec = standard_layer(2)
    enc = encode_classical(np.zeros(12), spec)
    np.testing.assert_allclose(enc, np.zeros(12))


def test_encode_classical_length_check():
    with pytest.raises(ShapeMismatchError):
        encode_classical(np.zeros(11), standard_layer(2))


def test_encode_classical_squash_bounds():
    spec = standard_layer(2)
    enc = encode_classical(1e6 * np.ones(12), spec)
    kinds = spec.slot_kinds()
    for value, kind in zip(enc, kinds):
        bound = layers.SQUASH_BOUNDS[kind]
        if bound is not None:
            assert abs(value) <= bound + 1e-12
    # squeeze slots specifically bounded at 1.4
    for value, kind in zip(enc, kinds):
        if kind == "squeeze":
            assert abs(value) <= 1.4


def test_model2_conditioning_changes_state():
    net = [standard_layer(1)]
    cfg1 = SimConfig(cutoff=10, success_at_loop=1)
    cfg2 = SimConfig(cutoff=10, success_at_loop=2)
    zeta = np.array([0.1, 0.2, 0.4, 0.1, 0.5])
    out1 = forward(net, zeta, fock.vacuum(1, 10), config=cfg1)
    out2 = forward(net, zeta, fock.vacuum(1, 10), config=cfg2)
    assert out2.success_probability < out1.success_probability
    f = np.abs(np.vdot(out1.state.normalize().amps, out2.state.normalize().amps)) ** 2
    assert f < 1 - 1e-6


def test_forward_rus_records_stats():
    net = [standard_layer(1), standard_layer(1)]
    cfg = SimConfig(cutoff=8, detector=nonlin.Detector("threshold"))
    zeta = layers.init_params(net, seed=2, scale=0.2)
    stats = nonlin.LoopStats()
    rng = np.random.default_rng(0)
    for _ in range(50):
        layers.forward_rus(net, zeta, fock.vacuum(1, 8), cfg, rng, stats)
    assert sorted(stats.per_layer) == [0, 1]
    assert stats.successes(0) == 50
    assert stats.successes(1) == 50
    # histogram bins sum to sample count x elements per layer
    total = sum(sum(c.values()) for c in stats.per_layer.values())
    assert total == 100


def test_loop_statistics_geometric_for_zero_coupling():
    net = [standard_layer(1)]
    cfg = SimConfig(cutoff=8, detector=nonlin.Detector("threshold"))
    inputs = [fock.vacuum(1, 8)] * 400
    stats = nonlin.loop_statistics(net, np.zeros(5), inputs, cfg, seed=3)
    rate = stats.success_rate_first_try(0)
    assert rate == pytest.approx(1 - np.exp(-1), abs=0.06)
    assert stats.per_layer[0].most_common(1)[0][0] == 1


def test_leak_budget_aborts_forward():
    from cvqnn.errors import LeakageError

    net = [standard_layer(1)]
    cfg = SimConfig(cutoff=6, leak_budget=1e-4)
    zeta = np.zeros(5)
    zeta[2] = 3.0  # displacement far beyond what cutoff 6 can hold
    with pytest.raises(LeakageError):
        forward(net, zeta, fock.vacuum(1, 6), config=cfg)
    # mild parameters stay under budget
    zeta[2] = 0.1
    forward(net, zeta, fock.vacuum(1, 6), config=cfg)


def test_network_json_roundtrip():
    net = [standard_layer(3) for _ in range(2)]
    cfg = SimConfig(cutoff=7, detector=nonlin.Detector("threshold"), success_at_loop=2)
    doc = layers.network_to_json(net, cfg)
    net2, cfg2 = layers.network_from_json(doc)
    assert len(net2) == 2 and net2[0].p == 3
    assert cfg2.detector.kind == "threshold"
    assert cfg2.success_at_loop == 2
    assert cfg2.cutoff == 7
