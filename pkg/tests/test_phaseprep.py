"""Phase estimation on the walk and the rejection cost model."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from fermiprep import phaseprep, qubitize
from fermiprep.phaseprep import CostModelParams, SpectralModel

TWO_PI = 2 * math.pi


def _circ_dist(a: float, b: float) -> float:
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


def _xz() -> qubitize.LcuHamiltonian:
    return qubitize.LcuHamiltonian.from_paulis([(0.5, "X"), (0.5, "Z")])


def _params(**kw) -> CostModelParams:
    base = dict(alpha0=0.5, e0=-1.0, e_star=0.0, e0_bound=-0.5, epsilon_f=0.01)
    base.update(kw)
    return CostModelParams(**base)


# ---------------------------------------------------------------------------
# Parameters and fixtures
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "kw,name",
    [
        (dict(alpha0=0.0), "alpha0_in_unit_interval"),
        (dict(alpha0=1.5), "alpha0_in_unit_interval"),
        (dict(e0_bound=0.1), "energy_ordering"),
        (dict(e0_bound=-2.0), "energy_ordering"),
        (dict(epsilon_f=0.0), "epsilon_f_positive"),
        (dict(e1_bound=-0.7), "e1_bound_above_e0_bound"),
    ],
)
def test_params_invariants(kw, name):
    with pytest.raises(ValueError, match=name):
        _params(**kw)


def test_spectral_model_normalisation():
    with pytest.raises(ValueError, match="overlaps_normalised"):
        SpectralModel([0, 1], [0.5, 0.6])
    with pytest.raises(ValueError):
        SpectralModel([0, 1], [1.0])


def test_water_fixtures_carry_published_constants():
    eq = phaseprep.load_fixture("water-equilibrium")
    st_ = phaseprep.load_fixture("water-stretched")
    assert (eq.alpha0, eq.e0, eq.e1, eq.e_star, eq.e0_bound) == (0.972, -75.0104, -74.6836, -74.3688, -74.9579)
    assert (st_.alpha0, st_.e0, st_.e_star, st_.e0_bound) == (0.107, -74.7505, -74.6394, -74.7248)
    assert eq.epsilon_f == st_.epsilon_f == 0.0016
    assert st_.coarse_gap == pytest.approx(0.0854, abs=1e-12)


def test_unknown_fixture():
    with pytest.raises(KeyError):
        phaseprep.load_fixture("benzene")


def test_data_dir_override(tmp_path, monkeypatch):
    doc = {"epsilon_f": 0.01, "fixtures": {"toy": {"alpha0": 0.5, "e0": -1, "e_star": 0, "e0_bound": -0.5}}}
    (tmp_path / "toy.json").write_text(json.dumps(doc))
    monkeypatch.setenv("FERMIPREP_DATA_DIR", str(tmp_path))
    assert phaseprep.fixture_names() == ["toy"]
    assert phaseprep.load_fixture("toy").epsilon_f == 0.01


# ---------------------------------------------------------------------------
# Iterative phase estimation
# ---------------------------------------------------------------------------


def test_dyadic_phase_is_exact():
    walk = np.diag([1, np.exp(1j * math.pi / 4)])
    for seed in range(10):
        phase, _ = phaseprep.iterative_phase_estimation(walk, np.array([0, 1]), 3, seed)
        assert phase == pytest.approx(math.pi / 4, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 8), st.integers(0, 255))
def test_dyadic_phases_exact_for_any_bits(bits, numerator):
    numerator %= 1 << bits
    phi = TWO_PI * numerator / (1 << bits)
    phase, _ = phaseprep.iterative_phase_estimation(np.array([[np.exp(1j * phi)]]), np.array([1.0]), bits, numerator)
    assert _circ_dist(phase, phi) < 1e-9


@pytest.mark.parametrize("phi", [0.3, 1.234, 4.0, 6.1])
def test_non_dyadic_phase_within_resolution_mostly(phi):
    bits = 6
    walk = np.array([[np.exp(1j * phi)]])
    rng = np.random.default_rng(1)
    hits = sum(
        _circ_dist(phaseprep.iterative_phase_estimation(walk, np.array([1.0]), bits, rng)[0], phi) <= TWO_PI / 2**bits
        for _ in range(200)
    )
    assert hits / 200 >= 0.8


def test_walk_eigenstate_recovers_energy():
    lcu = _xz()
    walk = qubitize.build_qubiterate(lcu)
    w, v = np.linalg.eig(walk.matrix)
    for k in range(w.size):
        phase, _ = phaseprep.iterative_phase_estimation(walk.matrix, v[:, k], 10, k)
        energy = qubitize.recover_energy(phase, lcu.lam)
        target = qubitize.recover_energy(np.angle(w[k]), lcu.lam)
        assert abs(energy - target) <= TWO_PI * lcu.lam / 2**10
    with pytest.raises(ValueError):
        phaseprep.iterative_phase_estimation(walk.matrix, v[:, 0], 0)


def test_collapse_follows_born_weights():
    lcu = _xz()
    walk = qubitize.build_qubiterate(lcu)
    _, ground = lcu.ground_state()
    phi = np.array([1.0, 0.0])
    p0 = abs(np.vdot(ground, phi)) ** 2
    rng = np.random.default_rng(5)
    counts = np.zeros(2)
    for _ in range(2000):
        phase, _ = phaseprep.iterative_phase_estimation(walk.matrix, walk.flagged_state(phi), 5, rng)
        counts[int(qubitize.recover_energy(phase, lcu.lam) > 0)] += 1
    assert chisquare(counts, np.array([p0, 1 - p0]) * 2000).pvalue > 0.001


def test_walk_applications():
    assert [phaseprep.walk_applications(b) for b in (1, 3, 10)] == [1, 7, 1023]


# ---------------------------------------------------------------------------
# Cost model
# ---------------------------------------------------------------------------


def test_rejection_with_full_overlap():
    params = _params(alpha0=1.0)
    rep = phaseprep.rejection_run(SpectralModel.two_level(params), params, trials=50)
    assert rep.mean_cost == pytest.approx(1 / 0.5 + 1 / 0.01)
    assert rep.attempts_histogram == {1: 50}
    assert rep.std_err == 0


def test_naive_with_full_overlap():
    params = _params(alpha0=1.0)
    assert phaseprep.naive_run(SpectralModel.two_level(params), params, trials=20).mean_cost == pytest.approx(100)


def test_naive_half_overlap_mean_200():
    params = _params(alpha0=0.5, epsilon_f=0.01)
    rep = phaseprep.naive_run(SpectralModel.two_level(params), params, rng_seed=3, trials=20_000)
    assert rep.analytic_cost == pytest.approx(200)
    assert abs(rep.mean_cost - 200) <= 3 * rep.std_err
    assert rep.mean_attempts == pytest.approx(2, abs=0.05)


def test_stretched_water_analytic_values():
    params = phaseprep.load_fixture("water-stretched")
    assert phaseprep.rejection_analytic_cost(params) == pytest.approx(734.4355315, abs=1e-6)
    assert phaseprep.naive_analytic_cost(params) == pytest.approx(5841.1, abs=0.1)


def test_equilibrium_water_gap_statements():
    params = phaseprep.load_fixture("water-equilibrium")
    assert params.coarse_gap / params.epsilon_f == pytest.approx(370, rel=0.01)
    for alpha0 in (0.0031, 0.01, 0.5, 0.972):
        assert 1 / (alpha0 * params.coarse_gap) < 1 / params.epsilon_f


def test_amplitude_amplified_examples():
    full = _params(alpha0=1.0, e1_bound=-0.2)
    assert phaseprep.amplitude_amplified_cost(full) == pytest.approx(1 / 0.3 + 1 / 0.01)
    p = CostModelParams(alpha0=0.01, e0=-1, e_star=0.5, e0_bound=-0.5, epsilon_f=0.001, e1_bound=-0.4)
    assert phaseprep.amplitude_amplified_cost(p) == pytest.approx(1100)
    water = phaseprep.load_fixture("water-stretched")
    water.e1_bound = water.e0_bound + 0.085
    assert phaseprep.amplitude_amplified_cost(water) == pytest.approx(661, abs=0.5)
    with pytest.raises(ValueError, match="e1_bound_required"):
        phaseprep.amplitude_amplified_cost(_params())


def test_report_dict_is_serialisable():
    params = _params()
    rep = phaseprep.rejection_run(SpectralModel.two_level(params), params, trials=100)
    doc = rep.to_dict()
    assert "costs" not in doc
    assert set(doc) >= {"strategy", "mean_cost", "std_err", "analytic_cost", "attempts_histogram"}
    json.dumps(doc)


def test_same_seed_same_costs():
    params = _params()
    model = SpectralModel.two_level(params)
    a = phaseprep.rejection_run(model, params, rng_seed=9, trials=500)
    b = phaseprep.rejection_run(model, params, rng_seed=9, trials=500)
    np.testing.assert_array_equal(a.costs, b.costs)


def test_rejection_cost_monotone_on_grid():
    means = {}
    for alpha0 in (0.1, 0.3, 0.6, 1.0):
        for gap in (0.05, 0.1, 0.2):
            params = CostModelParams(alpha0=alpha0, e0=-1, e_star=-0.5 + gap, e0_bound=-0.5, epsilon_f=0.01)
            rep = phaseprep.rejection_run(SpectralModel.two_level(params), params, rng_seed=0, trials=2000)
            means[alpha0, gap] = (rep.mean_cost, phaseprep.rejection_analytic_cost(params))
    alphas, gaps = (0.1, 0.3, 0.6, 1.0), (0.05, 0.1, 0.2)
    for idx in (0, 1):
        for g in gaps:
            seq = [means[a, g][idx] for a in alphas]
            assert all(x >= y for x, y in zip(seq, seq[1:]))
        for a in alphas:
            seq = [means[a, g][idx] for g in gaps]
            assert all(x >= y for x, y in zip(seq, seq[1:]))


# ---------------------------------------------------------------------------
# End-to-end ground-state preparation
# ---------------------------------------------------------------------------


def _xz_params(alpha0: float) -> CostModelParams:
    return CostModelParams(alpha0=alpha0, e0=-(2**-0.5), e_star=2**-0.5, e0_bound=0.0, epsilon_f=0.0016)


def test_xz_end_to_end():
    lcu = _xz()
    phi = np.array([0.0, 1.0])
    res = phaseprep.end_to_end_ground_state(lcu, phi, _xz_params(0.854), rng_seed=1, bits=10)
    assert abs(res.energy + 2**-0.5) <= TWO_PI * lcu.lam / 2**10
    assert res.fidelity >= 0.99
    assert res.cost == res.attempts * phaseprep.walk_applications(res.coarse_bits) + phaseprep.walk_applications(10)


def test_eigenstate_input_never_rejects():
    lcu = _xz()
    _, ground = lcu.ground_state()
    for seed in range(10):
        res = phaseprep.end_to_end_ground_state(lcu, ground, _xz_params(1.0), rng_seed=seed)
        assert res.rejections == 0


@pytest.mark.parametrize("seed", range(6))
def test_random_two_qubit_lcu_accepts_below_bound(seed):
    rng = np.random.default_rng(100 + seed)
    while True:
        lcu = qubitize.random_lcu(rng, 2, 3, "pauli")
        e = lcu.eigenvalues()
        if e[1] - e[0] > 0.2 * lcu.lam:
            break
    w, v = np.linalg.eigh(lcu.matrix())
    alpha0 = rng.uniform(0.3, 0.9)
    phi = math.sqrt(alpha0) * v[:, 0] + math.sqrt(1 - alpha0) * v[:, 1]
    params = CostModelParams(alpha0=alpha0, e0=w[0], e_star=w[1], e0_bound=(w[0] + w[1]) / 2, epsilon_f=0.0016)
    res = phaseprep.end_to_end_ground_state(lcu, phi, params, rng_seed=seed, bits=10)
    assert res.energy <= params.e0_bound
    assert abs(res.energy - w[0]) <= TWO_PI * lcu.lam / 2**10


def test_end_to_end_limits():
    lcu = _xz()
    with pytest.raises(ValueError):
        phaseprep.end_to_end_ground_state(lcu, np.array([1.0, 0]), _xz_params(0.5), bits=13)
    with pytest.raises(RuntimeError, match="attempt_cap_exceeded"):
        # The excited state never passes the coarse test.
        _, ground = lcu.ground_state()
        excited = np.array([-ground[1].conj(), ground[0].conj()])
        phaseprep.end_to_end_ground_state(lcu, excited, _xz_params(0.5), rng_seed=0, max_attempts=5)


def test_coarse_bits_rule():
    params = _xz_params(0.5)
    b = phaseprep.coarse_bits_for(params, 1.0, 12)
    assert TWO_PI / 2**b <= params.coarse_gap / 2 < TWO_PI / 2 ** (b - 1)
