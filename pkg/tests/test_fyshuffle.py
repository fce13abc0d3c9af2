"""Quantum Fisher-Yates shuffle."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fermiprep import antisym, fyshuffle
from fermiprep.sim import RegisterLayout, SimulationCapError, Statevector, run, run_basis, schmidt_rank_across


def _unary(k: int, ell: int) -> int:
    return 1 << ell


def _choice(eta: int, ell: int) -> list[int]:
    # Choice position ell lives on qubit ell of the register, i.e. element eta-1-ell.
    return [int(eta - 1 - e == ell) for e in range(eta)]


# ---------------------------------------------------------------------------
# Choice preparation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_prepare_choice_is_uniform_one_hot(k):
    out = run(Statevector.zeros(k + 1), fyshuffle.prepare_choice(k))
    expected = np.zeros(1 << (k + 1))
    for ell in range(k + 1):
        expected[_unary(k, ell)] = 1 / math.sqrt(k + 1)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)


@pytest.mark.parametrize("ell", range(1, 9))
def test_rotation_matrix_is_orthogonal(ell):
    r = fyshuffle.rotation_matrix(ell)
    np.testing.assert_allclose(r.T @ r, np.eye(2), atol=1e-12)
    theta = fyshuffle.rotation_angle(ell)
    np.testing.assert_allclose(r, [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]], atol=1e-12)


def test_prepare_choice_range():
    with pytest.raises(ValueError):
        fyshuffle.prepare_choice_ops(RegisterLayout.build(("choice", 1, 3)), 3)


# ---------------------------------------------------------------------------
# Selected swap and phase
# ---------------------------------------------------------------------------


def test_selected_swap_self_choice_is_identity():
    layout = fyshuffle.shuffle_layout(2, 4)
    circ = fyshuffle.selected_swap(1, "input", layout)
    idx = layout.encode({"choice": _choice(2, 1), "input": [2, 3]})
    assert run_basis(circ, idx) == idx


def test_selected_swap_choice_zero_swaps():
    layout = fyshuffle.shuffle_layout(2, 4)
    circ = fyshuffle.selected_swap(1, "input", layout)
    out = run_basis(circ, layout.encode({"choice": _choice(2, 0), "input": [2, 3]}))
    assert layout.decode(out, "input") == [3, 2]


def test_selected_swap_exhaustive_eta3():
    layout = fyshuffle.shuffle_layout(3, 4)
    for k in (1, 2):
        circ = fyshuffle.selected_swap(k, "input", layout)
        for ell in range(k + 1):
            choice = _choice(3, ell)
            for values in itertools.product(range(4), repeat=3):
                out = run_basis(circ, layout.encode({"choice": choice, "input": list(values)}))
                expected = list(values)
                expected[ell], expected[k] = expected[k], expected[ell]
                assert layout.decode(out, "input") == expected


@pytest.mark.parametrize("k", [1, 2, 3])
def test_conditional_phase_signs(k):
    layout = RegisterLayout.build(("choice", 1, k + 1))
    prepared = run(Statevector.zeros(layout), fyshuffle.prepare_choice(k, layout))
    out = run(prepared, fyshuffle.conditional_phase(k, layout))
    ratios = [out.amplitudes[1 << ell] / prepared.amplitudes[1 << ell] for ell in range(k + 1)]
    np.testing.assert_allclose(ratios, [-1] * k + [1], atol=1e-12)


# ---------------------------------------------------------------------------
# Reset, decrement, detangle
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("eta,n_orb", [(2, 4), (3, 4)])
def test_choice_reset_after_every_block(eta, n_orb):
    layout = fyshuffle.shuffle_layout(eta, n_orb)
    state = Statevector.basis(layout, {"input": list(range(eta))})
    for name, ops in fyshuffle.shuffle_blocks(layout):
        run(state, ops, inplace=True)
        dist = state.register_distribution("choice")
        assert 1 - dist[0] < 1e-12, name
        assert all(layout.decode(int(i), "choice") == [0] * eta for i in state.support(1e-12))


def test_reset_choice_no_flip_when_index_differs():
    layout = fyshuffle.shuffle_layout(3, 4)
    circ = fyshuffle.reset_choice(2, layout)
    idx = layout.encode({"choice": [0, 0, 0], "index": [0, 1, 3]})
    assert run_basis(circ, idx) == idx


@pytest.mark.parametrize("width", [1, 2, 3, 4])
def test_decrement_table(width):
    circ = fyshuffle.build_decrement(width)
    layout = circ.layout
    for x in range(1 << width):
        for ctrl in (0, 1):
            out = run_basis(circ, layout.encode({"ctrl": ctrl, "x": x}))
            assert layout.decode(out, "x") == [(x - ctrl) % (1 << width)]
            assert layout.decode(out, "anc") == [0]


def test_decrement_width_two_spec_table():
    circ = fyshuffle.build_decrement(2)
    layout = circ.layout
    got = [layout.decode(run_basis(circ, layout.encode({"ctrl": 1, "x": x})), "x")[0] for x in range(4)]
    assert got == [3, 0, 1, 2]


@pytest.mark.parametrize("width", [2, 3, 4, 5])
def test_decrement_toffoli_count_linear(width):
    assert fyshuffle.build_decrement(width).resource_tally["toffoli_count"] == 2 * (width - 1)


def test_detangle_eta_one_empty():
    assert len(fyshuffle.detangle(1)) == 0


def test_detangle_eta_two_disentangles():
    layout = fyshuffle.shuffle_layout(2, 4)
    state = Statevector.basis(layout, {"input": [0, 1]})
    blocks = fyshuffle.shuffle_blocks(layout)
    for name, ops in blocks[:-1]:
        run(state, ops, inplace=True)
    assert schmidt_rank_across(state, ["index"]) == 2
    run(state, blocks[-1][1], inplace=True)
    assert 1 - state.register_distribution("index")[0] < 1e-12
    assert schmidt_rank_across(state, ["index"]) == 1


# ---------------------------------------------------------------------------
# Full shuffle
# ---------------------------------------------------------------------------


def test_eta_two_singlet():
    out = fyshuffle.shuffle_antisymmetrize(fyshuffle.ShuffleJob(2, 4, (0, 1)))
    ref = antisym.antisymmetric_reference((0, 1), 2)
    assert antisym.fidelity_up_to_phase(out.amplitudes, ref) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("values,n_orb", [((0, 1, 2), 4), ((0, 2, 7), 8)])
def test_matches_sort_based_output(values, n_orb):
    fy = fyshuffle.shuffle_antisymmetrize(fyshuffle.ShuffleJob(3, n_orb, values))
    ref = antisym.antisymmetrize(antisym.AntisymJob(3, n_orb, values), rng_seed=0).state
    assert antisym.fidelity_up_to_phase(fy.amplitudes, ref.amplitudes) >= 1 - 1e-10


def test_cap_guardrail():
    job = fyshuffle.ShuffleJob(5, 16, (0, 1, 2, 3, 4))
    assert job.layout.num_qubits > 26
    with pytest.raises(SimulationCapError):
        fyshuffle.shuffle_antisymmetrize(job)


def test_job_rejects_unsorted_input():
    with pytest.raises(ValueError, match="input_strictly_ascending"):
        fyshuffle.ShuffleJob(2, 4, (1, 0))


def test_block_tallies_cover_every_block():
    tallies = fyshuffle.block_tallies(3, 4)
    assert set(tallies) == {"init", "fy_1", "fy_2", "detangle"}
    total = fyshuffle.shuffle_circuit(fyshuffle.ShuffleJob(3, 4, (0, 1, 2))).resource_tally["gate_count"]
    assert sum(t["gate_count"] for t in tallies.values()) == total


def test_gate_counts_frozen():
    counts = [
        fyshuffle.shuffle_circuit(fyshuffle.ShuffleJob(e, n, tuple(range(e)))).resource_tally["gate_count"]
        for e in (2, 3, 4)
        for n in (4, 8, 16)
    ]
    assert counts == [48, 81, 114, 162, 261, 360, 322, 520, 718]


def test_gate_count_linear_in_log_n():
    for eta in (2, 3, 4):
        g = [fyshuffle.shuffle_circuit(fyshuffle.ShuffleJob(eta, n, tuple(range(eta)))).resource_tally["gate_count"] for n in (4, 8, 16)]
        assert g[2] - g[1] == g[1] - g[0]


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([2, 4, 8]).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.integers(0, n - 1), min_size=1, max_size=min(3, n)))))
def test_output_is_antisymmetric(case):
    n_orb, values = case
    values = tuple(sorted(values))
    out = fyshuffle.shuffle_antisymmetrize(fyshuffle.ShuffleJob(len(values), n_orb, values))
    assert antisym.verify_antisymmetry(out, register="input")
    support = out.support(1e-10)
    assert support.size == math.factorial(len(values))


@pytest.mark.slow
def test_eta_four_n_four():
    out = fyshuffle.shuffle_antisymmetrize(fyshuffle.ShuffleJob(4, 4, (0, 1, 2, 3)))
    ref = antisym.antisymmetric_reference((0, 1, 2, 3), 2)
    assert antisym.fidelity_up_to_phase(out.amplitudes, ref) >= 1 - 1e-10
