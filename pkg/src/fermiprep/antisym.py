"""Antisymmetrization of a sorted, repetition-free register by reversing a sort.

The four stages are simulated in two pieces.  Stages 1-3 act on
``seed ⊗ record ⊗ scratch ⊗ flag``; after a successful collision check the
seed factor is a product with the record, so only the record's pure state is
carried into a second simulation of ``target ⊗ record ⊗ scratch`` for stage 4.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import qcompare
from .netgen import ComparatorSchedule, generate
from .sim import (
    MAX_QUBITS,
    Circuit,
    GateOp,
    Register,
    RegisterLayout,
    SimulationCapError,
    Statevector,
    h_gate,
    measure_register,
    reduced_pure_state,
    run,
    x_gate,
    z_gate,
)

DEFAULT_ATTEMPT_LIMIT = 16


class AttemptLimitExceeded(RuntimeError):
    def __init__(self, attempts: int, success_probability: float):
        super().__init__(
            f"collision check failed {attempts} times (per-attempt success probability {success_probability:.6g})"
        )
        self.attempts = attempts
        self.success_probability = success_probability


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _bits(n: int) -> int:
    """Bits needed for values 0..n-1."""
    return max(n - 1, 0).bit_length()


def default_seed_alphabet(eta: int) -> int:
    """Smallest power of two that is at least ``eta**2``."""
    f = 1
    while f < eta * eta:
        f *= 2
    return f


@dataclass
class AntisymJob:
    eta: int
    n_orbitals: int
    target_values: tuple[int, ...]
    f_eta: int | None = None
    network: ComparatorSchedule | None = None

    def __post_init__(self):
        self.target_values = tuple(int(v) for v in self.target_values)
        if self.f_eta is None:
            self.f_eta = default_seed_alphabet(self.eta)
        if self.network is None:
            self.network = generate("bitonic", self.eta)
        if self.eta < 1:
            raise ValueError("eta must be >= 1")
        if not _is_pow2(self.f_eta):
            raise ValueError("f_eta_power_of_two: seed alphabet size must be a power of two")
        if self.f_eta < self.eta**2:
            raise ValueError("f_eta_at_least_eta_squared: seed alphabet must be >= eta**2")
        if len(self.target_values) != self.eta:
            raise ValueError("target_length: need exactly eta target values")
        if any(b <= a for a, b in zip(self.target_values, self.target_values[1:])):
            raise ValueError("target_strictly_ascending: target values must be strictly ascending")
        if any(not 0 <= v < self.n_orbitals for v in self.target_values):
            raise ValueError("target_in_range: target values must lie in [0, N)")
        if self.network.num_wires != self.eta:
            raise ValueError("network_width: network must have eta wires")

    @property
    def seed_width(self) -> int:
        return _bits(self.f_eta)

    @property
    def target_width(self) -> int:
        return _bits(self.n_orbitals)


@dataclass
class AntisymResult:
    state: Statevector
    success: bool
    success_probability: float
    attempts: int
    resources: dict = field(default_factory=dict)
    record_state: np.ndarray | None = None


# ---------------------------------------------------------------------------
# Layout helpers
# ---------------------------------------------------------------------------


def _extend(state: Statevector, *specs: tuple) -> Statevector:
    """Append fresh all-zero registers above the existing ones."""
    regs = list(state.layout.registers)
    start = state.num_qubits
    for name, width, *rest in specs:
        count = rest[0] if rest else 1
        regs.append(Register(name, start, width, count))
        start += width * count
    extra = start - state.num_qubits
    zeros = np.zeros(1 << extra, dtype=np.complex128)
    zeros[0] = 1.0
    return Statevector(start, np.kron(zeros, state.amplitudes), RegisterLayout(tuple(regs)))


def _element_msb(layout: RegisterLayout, name: str, element: int) -> list[int]:
    return layout[name].element_qubits_msb(element)


def sort_ops(
    layout: RegisterLayout,
    network: ComparatorSchedule,
    register: str,
    variant: str = "parallel",
    fanout: bool = True,
) -> list[GateOp]:
    """Reversible sort of ``register`` recording each comparator in ``record``."""
    record = layout["record"]
    scratch = layout["scratch"].qubits if "scratch" in layout else []
    ops: list[GateOp] = []
    for c, (i, j) in enumerate(network.comparators):
        ops += qcompare.comparator_ops(
            _element_msb(layout, register, i),
            _element_msb(layout, register, j),
            record.element_qubits(c)[0],
            scratch,
            variant,
            fanout,
        )
    return ops


def unsort_ops(
    layout: RegisterLayout,
    network: ComparatorSchedule,
    register: str,
    variant: str = "parallel",
    fanout: bool = True,
) -> list[GateOp]:
    """Run the network backwards on ``register`` driven by ``record``.

    Each reversed comparator swaps on its record bit, picks up a ``-1`` on
    that bit, and then erases the bit with the comparison oracle.
    """
    record = layout["record"]
    scratch = layout["scratch"].qubits if "scratch" in layout else []
    ops: list[GateOp] = []
    comps = network.comparators
    for c in reversed(range(len(comps))):
        i, j = comps[c]
        a, b = _element_msb(layout, register, i), _element_msb(layout, register, j)
        r = record.element_qubits(c)[0]
        ops += qcompare.controlled_swap_ops(r, a, b, scratch, fanout)
        ops.append(z_gate(r))
        ops += qcompare._invert(qcompare.comparison_oracle_ops(a, b, r, scratch, variant))
    return ops


def collision_ops(layout: RegisterLayout, register: str = "seed") -> list[GateOp]:
    """Set ``flag`` to 1 iff two adjacent elements of a sorted register are equal.

    Adjacent-equality bits are computed in two parallel rounds, OR-ed into
    ``flag`` and then uncomputed.
    """
    reg = layout[register]
    eta, w = reg.element_count, reg.element_width
    flag = layout["flag"].start
    if eta < 2:
        return []
    leaves = list(layout["scratch"].qubits)[: eta - 1]
    compute: list[GateOp] = []
    for parity in (0, 1):
        for p in range(parity, eta - 1, 2):
            lo, hi = reg.element_qubits(p), reg.element_qubits(p + 1)
            diff = [x_gate(h, [l]) for l, h in zip(lo, hi)]
            compute += diff
            compute.append(x_gate(leaves[p], hi, [0] * w, role="compute"))
            compute += diff[::-1]
    # OR of the leaves as one negated multi-controlled X; its standard
    # decomposition is a balanced AND tree, and skipping explicit tree nodes
    # keeps eta=4 within the qubit cap.
    if len(leaves) == 1:
        root = [x_gate(flag, leaves)]
    else:
        root = [x_gate(flag, leaves, [0] * len(leaves), role="compute"), x_gate(flag)]
    return compute + root + [op.inverse() for op in reversed(compute)]


def stage_one_layout(job: AntisymJob, variant: str = "parallel", fanout: bool = True) -> RegisterLayout:
    eta, w = job.eta, job.seed_width
    n_scratch = max(qcompare.comparator_scratch_size(w, variant, fanout) if w else 0, eta - 1, 0)
    return RegisterLayout.build(
        ("seed", w, eta), ("record", 1, job.network.num_comparators), ("scratch", n_scratch), ("flag", 1)
    )


def stage_two_layout(job: AntisymJob, variant: str = "parallel", fanout: bool = True) -> RegisterLayout:
    d = job.target_width
    n_scratch = qcompare.comparator_scratch_size(d, variant, fanout) if d else 0
    return RegisterLayout.build(
        ("target", d, job.eta), ("record", 1, job.network.num_comparators), ("scratch", n_scratch)
    )


# ---------------------------------------------------------------------------
# The four steps
# ---------------------------------------------------------------------------


def prepare_seed(eta: int, f_eta: int) -> Statevector:
    """Uniform superposition over all length-``eta`` strings of ``0..f_eta-1``."""
    if not _is_pow2(f_eta):
        raise ValueError("f_eta must be a power of two")
    w = _bits(f_eta)
    layout = RegisterLayout.build(("seed", w, eta))
    state = Statevector.zeros(layout)
    return run(state, [h_gate(q) for q in layout["seed"].qubits], inplace=True)


def sort_seed(
    state: Statevector, network: ComparatorSchedule, variant: str = "parallel", fanout: bool = True
) -> tuple[Statevector, Register]:
    """Sort ``seed`` in place and append one record qubit per comparator."""
    seed = state.layout["seed"]
    if network.num_wires != seed.element_count:
        raise ValueError("network width does not match the seed register")
    w = seed.element_width
    n_scratch = max(
        qcompare.comparator_scratch_size(w, variant, fanout) if w else 0, seed.element_count - 1, 0
    )
    specs = [("record", 1, network.num_comparators)]
    if "scratch" not in state.layout:
        specs.append(("scratch", n_scratch))
    out = _extend(state, *specs)
    run(out, sort_ops(out.layout, network, "seed", variant, fanout), inplace=True)
    return out, out.layout["record"]


def flag_collisions(state: Statevector, inplace: bool = False) -> Statevector:
    """Compute the repetition flag (unmeasured)."""
    if "scratch" not in state.layout:
        raise ValueError("state needs a scratch register; run sort_seed first")
    if "flag" not in state.layout:
        state, inplace = _extend(state, ("flag", 1)), True
    return run(state, collision_ops(state.layout), inplace=inplace)


def delete_collisions(state: Statevector, rng_seed=None) -> tuple[bool, float, Statevector]:
    """Flag repetitions in the sorted seed and measure the flag.

    Returns ``(success, success_probability, post_state)`` where the
    probability is the exact Born weight of the repetition-free outcome.
    """
    flagged = flag_collisions(state)
    p_success = float(flagged.register_distribution("flag")[0])
    outcome, post, _ = measure_register(flagged, "flag", rng_seed)
    return outcome == 0, p_success, post


def _record_vector(record) -> np.ndarray:
    if isinstance(record, Statevector):
        return reduced_pure_state(record, ["record"])
    return np.asarray(record, dtype=np.complex128)


def _check_ascending(state: Statevector, register: str) -> None:
    layout = state.layout
    for idx in state.support(1e-12):
        vals = layout.decode(int(idx), register)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError(f"target branch {vals} is not strictly ascending")


def canonical_phase(vector: np.ndarray, reference_index: int) -> np.ndarray:
    """Rotate the global phase so that ``vector[reference_index]`` is positive real."""
    a = vector[reference_index]
    if abs(a) < 1e-14:
        return vector
    return vector * (abs(a) / a)


def reverse_sort_on_target(
    record,
    target_state: Statevector,
    network: ComparatorSchedule,
    variant: str = "parallel",
    fanout: bool = True,
) -> Statevector:
    """Unsort ``target`` using a collision-free record and return the target state.

    ``record`` is the record register's pure state (a vector over its qubits,
    or a state whose record factor is a product with everything else).
    ``target_state`` must live on a layout with a single ``target`` register.
    """
    _check_ascending(target_state, "target")
    rec = _record_vector(record)
    tgt = target_state.layout["target"]
    eta, d = tgt.element_count, tgt.element_width
    if network.num_wires != eta:
        raise ValueError("network width does not match the target register")
    if rec.size != 1 << network.num_comparators:
        raise ValueError("record size does not match the network")
    n_scratch = qcompare.comparator_scratch_size(d, variant, fanout) if d else 0
    layout = RegisterLayout.build(("target", d, eta), ("record", 1, network.num_comparators), ("scratch", n_scratch))
    scratch0 = np.zeros(1 << n_scratch, dtype=np.complex128)
    scratch0[0] = 1.0
    target_amps = target_state.amplitudes[: 1 << tgt.span]
    full = Statevector(layout.num_qubits, np.kron(scratch0, np.kron(rec, target_amps)), layout)
    run(full, unsort_ops(layout, network, "target", variant, fanout), inplace=True)
    block = full.amplitudes.reshape(-1, 1 << tgt.span)
    leftover = float(np.sum(np.abs(block[1:]) ** 2))
    if leftover > 1e-10:
        raise RuntimeError(f"record/scratch not restored to zero (residual weight {leftover:.3g})")
    return Statevector(tgt.span, block[0].copy(), RegisterLayout.build(("target", d, eta)))


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------


def stage_one_state(job: AntisymJob, variant: str = "parallel", fanout: bool = True) -> Statevector:
    """State of ``seed ⊗ record ⊗ scratch ⊗ flag`` just before the flag is measured."""
    state = prepare_seed(job.eta, job.f_eta)
    state, _ = sort_seed(state, job.network, variant, fanout)
    return flag_collisions(state, inplace=True)


@lru_cache(maxsize=32)
def _stage_one(eta: int, f_eta: int, network: ComparatorSchedule, variant: str, fanout: bool):
    # Only the success probability and the record's post-success pure state
    # are needed downstream, so the large stage-one vector is not cached.
    job = AntisymJob(eta, 1 << max(eta - 1, 0).bit_length(), tuple(range(eta)), f_eta, network)
    flagged = stage_one_state(job, variant, fanout)
    flag = flagged.layout["flag"]
    half = 1 << flag.start
    ok = flagged.amplitudes[:half]
    p_success = float(np.vdot(ok, ok).real)
    branch = Statevector(flag.start, ok, RegisterLayout(flagged.layout.registers[:-1]))
    record = reduced_pure_state(branch, ["record"])
    return p_success, record


def check_qubit_budget(job: AntisymJob, variant: str = "parallel", fanout: bool = True) -> None:
    for label, layout in (("stage 1", stage_one_layout(job, variant, fanout)), ("stage 2", stage_two_layout(job, variant, fanout))):
        if layout.num_qubits > MAX_QUBITS:
            raise SimulationCapError(
                f"{label} needs {layout.num_qubits} qubits for eta={job.eta}, f={job.f_eta}; cap is {MAX_QUBITS}"
            )


def stage_resources(job: AntisymJob, variant: str = "parallel", fanout: bool = True) -> dict:
    l1, l2 = stage_one_layout(job, variant, fanout), stage_two_layout(job, variant, fanout)
    prep = Circuit(l1.num_qubits, [h_gate(q) for q in l1["seed"].qubits], l1)
    step2 = Circuit(l1.num_qubits, sort_ops(l1, job.network, "seed", variant, fanout), l1)
    step3 = Circuit(l1.num_qubits, collision_ops(l1), l1)
    step4 = Circuit(l2.num_qubits, unsort_ops(l2, job.network, "target", variant, fanout), l2)
    return {
        "step1_prepare_seed": prep.resource_tally,
        "step2_sort_seed": step2.resource_tally,
        "step3_delete_collisions": step3.resource_tally,
        "step4_unsort_target": step4.resource_tally,
        "comparators_step2": job.network.num_comparators,
        "comparators_step4": job.network.num_comparators,
        "comparator_width_step2": job.seed_width,
        "comparator_width_step4": job.target_width,
        "qubits_stage1": l1.num_qubits,
        "qubits_stage2": l2.num_qubits,
    }


def antisymmetrize(
    job: AntisymJob,
    rng_seed=None,
    attempt_limit: int = DEFAULT_ATTEMPT_LIMIT,
    variant: str = "parallel",
    fanout: bool = True,
) -> AntisymResult:
    """Run all four steps, repeating the seed stage until the collision check passes."""
    check_qubit_budget(job, variant, fanout)
    rng = np.random.default_rng(rng_seed)
    p_success, record = _stage_one(job.eta, job.f_eta, job.network, variant, fanout)
    attempts = 0
    # Each attempt samples the measured flag from its exact Born weight; the
    # repetition-free branch always leaves the same record state.
    while attempts < attempt_limit:
        attempts += 1
        if rng.random() < p_success:
            break
    else:
        raise AttemptLimitExceeded(attempts, p_success)
    layout = RegisterLayout.build(("target", job.target_width, job.eta))
    target = Statevector.basis(layout, {"target": list(job.target_values)})
    out = reverse_sort_on_target(record, target, job.network, variant, fanout)
    ref = layout.encode({"target": list(job.target_values)})
    out.amplitudes = canonical_phase(out.amplitudes, ref)
    return AntisymResult(
        state=out,
        success=True,
        success_probability=p_success,
        attempts=attempts,
        resources=stage_resources(job, variant, fanout),
        record_state=record,
    )


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def permutation_parity(perm: Sequence[int]) -> int:
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return inversions % 2


def antisymmetric_reference(values: Sequence[int], width: int) -> np.ndarray:
    """Brute-force signed sum over all orderings of ``values``, normalised."""
    eta = len(values)
    layout = RegisterLayout.build(("target", width, eta))
    vec = np.zeros(1 << layout.num_qubits, dtype=np.complex128)
    for perm in itertools.permutations(range(eta)):
        idx = layout.encode({"target": [values[p] for p in perm]})
        vec[idx] += (-1) ** permutation_parity(perm)
    return vec / math.sqrt(math.factorial(eta))


def fidelity_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def verify_antisymmetry(state: Statevector, register: str = "target", tolerance: float = 1e-10) -> bool:
    """Every transposition of two elements flips the sign of every amplitude.

    Amplitude on basis states where the other registers are nonzero counts
    as a failure.
    """
    reg = state.layout[register]
    eta, w = reg.element_count, reg.element_width
    amps = state.amplitudes.reshape(-1, 1 << reg.stop)[:, :: 1 << reg.start]
    if np.sum(np.abs(amps[1:]) ** 2) > tolerance or np.abs(state.amplitudes).max() == 0:
        return False
    if reg.start and np.sum(np.abs(state.amplitudes.reshape(-1, 1 << reg.start)[:, 1:]) ** 2) > tolerance:
        return False
    if eta < 2:
        return True
    tens = amps[0].reshape((1 << w,) * eta)
    for a in range(eta):
        for b in range(a + 1, eta):
            if np.max(np.abs(tens + np.swapaxes(tens, a, b))) > tolerance:
                return False
    return True


def collision_probability(eta: int, f_eta: int) -> Fraction:
    """Exact probability that ``eta`` uniform draws from ``f_eta`` symbols repeat."""
    distinct = Fraction(1)
    for k in range(eta):
        distinct *= Fraction(f_eta - k, f_eta)
    return 1 - distinct


def collision_bound(eta: int, f_eta: int) -> Fraction:
    return Fraction(eta * (eta - 1), 2 * f_eta)


def enumerate_collision_probability(network: ComparatorSchedule, f_eta: int, chunk: int = 1 << 20) -> Fraction:
    """Count seed strings whose sorted form has an adjacent repeat.

    Every string is pushed through the comparator schedule and only
    neighbours are compared afterwards, mirroring the circuit.
    """
    eta = network.num_wires
    total = f_eta**eta
    bad = 0
    comps = network.comparators
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        wires = [(codes // f_eta ** (eta - 1 - e)) % f_eta for e in range(eta)]
        for i, j in comps:
            a, b = wires[i], wires[j]
            wires[i], wires[j] = np.minimum(a, b), np.maximum(a, b)
        hit = np.zeros(codes.size, dtype=bool)
        for e in range(eta - 1):
            hit |= wires[e] == wires[e + 1]
        bad += int(hit.sum())
    return Fraction(bad, total)
