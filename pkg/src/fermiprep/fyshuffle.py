"""Antisymmetrization by a quantum Fisher-Yates shuffle.

Registers, from the lowest qubit: ``choice`` (``eta`` qubits, unary),
``index`` (``eta`` elements of ``ceil(log2 eta)`` bits), ``input`` (``eta``
elements of ``ceil(log2 N)`` bits), the comparison output ``q`` and any extra
``scratch`` the comparison oracle needs beyond the idle ``choice`` qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qcompare
from .sim import (
    ROLE_COMPUTE,
    ROLE_UNCOMPUTE,
    Circuit,
    GateOp,
    RegisterLayout,
    SimulationCapError,
    Statevector,
    MAX_QUBITS,
    cswap_gate,
    ry_rotation,
    run,
    x_gate,
    z_gate,
)


def _bits(n: int) -> int:
    return max(n - 1, 0).bit_length()


def rotation_angle(ell: int) -> float:
    """Angle of ``R_ell``: the rotation taking |0> to (|0> + sqrt(ell)|1>)/sqrt(ell+1)."""
    return math.asin(math.sqrt(ell / (ell + 1)))


def rotation_matrix(ell: int) -> np.ndarray:
    return np.array([[1.0, -math.sqrt(ell)], [math.sqrt(ell), 1.0]]) / math.sqrt(ell + 1)


def shuffle_layout(eta: int, n_orbitals: int) -> RegisterLayout:
    w, d = _bits(eta), _bits(n_orbitals)
    need = max(qcompare.oracle_scratch_size(d) if d else 0, w - 1, 0)
    return RegisterLayout.build(
        ("choice", 1, eta), ("index", w, eta), ("input", d, eta), ("q", 1), ("scratch", max(need - eta, 0))
    )


@dataclass
class ShuffleJob:
    eta: int
    n_orbitals: int
    input_values: tuple[int, ...]

    def __post_init__(self):
        self.input_values = tuple(int(v) for v in self.input_values)
        if self.eta < 1:
            raise ValueError("eta must be >= 1")
        if len(self.input_values) != self.eta:
            raise ValueError("input_length: need exactly eta input values")
        if any(b <= a for a, b in zip(self.input_values, self.input_values[1:])):
            raise ValueError("input_strictly_ascending: input values must be strictly ascending")
        if any(not 0 <= v < self.n_orbitals for v in self.input_values):
            raise ValueError("input_in_range: input values must lie in [0, N)")

    @property
    def layout(self) -> RegisterLayout:
        return shuffle_layout(self.eta, self.n_orbitals)


def _choice(layout: RegisterLayout) -> list[int]:
    return list(layout["choice"].qubits)


def _pool(layout: RegisterLayout) -> list[int]:
    # Idle choice qubits double as clean ancillas during detangling.
    extra = list(layout["scratch"].qubits) if "scratch" in layout else []
    return _choice(layout) + extra


def _default_layout(k: int, layout: RegisterLayout | None) -> RegisterLayout:
    return layout if layout is not None else RegisterLayout.build(("choice", 1, k + 1))


# ---------------------------------------------------------------------------
# Fisher-Yates block pieces
# ---------------------------------------------------------------------------


def prepare_choice_ops(layout: RegisterLayout, k: int) -> list[GateOp]:
    c = _choice(layout)
    if not 1 <= k < len(c):
        raise ValueError(f"k={k} out of range for a {len(c)}-qubit choice register")
    # Alternative unary encoding: value ell sets qubits 0..ell.
    ops = [x_gate(c[0]), ry_rotation(c[1], rotation_angle(k))]
    for ell in range(1, k):
        ops.append(ry_rotation(c[ell + 1], rotation_angle(k - ell), controls=[c[ell]]))
    # Translate to one-hot; ascending order so each CNOT sees the
    # untouched upper qubit.
    ops += [x_gate(c[ell - 1], [c[ell]]) for ell in range(1, k + 1)]
    return ops


def prepare_choice(k: int, layout: RegisterLayout | None = None) -> Circuit:
    """Map ``choice`` from all-zeros to the one-hot superposition over 0..k."""
    layout = _default_layout(k, layout)
    return Circuit(layout.num_qubits, [], layout).append(prepare_choice_ops(layout, k))


def selected_swap_ops(layout: RegisterLayout, k: int, target_register: str) -> list[GateOp]:
    c = _choice(layout)
    reg = layout[target_register]
    ops: list[GateOp] = []
    for ell in range(k):
        for a, b in zip(reg.element_qubits(ell), reg.element_qubits(k)):
            ops.append(cswap_gate(c[ell], a, b))
    return ops


def selected_swap(k: int, target_register: str, layout: RegisterLayout) -> Circuit:
    """Swap element ``k`` of ``target_register`` with the element chosen by ``choice``."""
    return Circuit(layout.num_qubits, [], layout).append(selected_swap_ops(layout, k, target_register))


def conditional_phase_ops(layout: RegisterLayout, k: int) -> list[GateOp]:
    c = _choice(layout)
    return [z_gate(c[ell]) for ell in range(k)]


def conditional_phase(k: int, layout: RegisterLayout | None = None) -> Circuit:
    """-1 whenever ``choice`` selects a position below ``k``."""
    layout = _default_layout(k, layout)
    return Circuit(layout.num_qubits, [], layout).append(conditional_phase_ops(layout, k))


def reset_choice_ops(layout: RegisterLayout, k: int) -> list[GateOp]:
    c = _choice(layout)
    idx = layout["index"]
    w = idx.element_width
    pattern = [(k >> b) & 1 for b in range(w)]
    return [x_gate(c[ell], idx.element_qubits(ell), pattern) for ell in range(k + 1)]


def reset_choice(k: int, layout: RegisterLayout) -> Circuit:
    """Clear ``choice[ell]`` wherever ``index[ell] == k``."""
    return Circuit(layout.num_qubits, [], layout).append(reset_choice_ops(layout, k))


def fy_block_ops(layout: RegisterLayout, k: int) -> list[GateOp]:
    return (
        prepare_choice_ops(layout, k)
        + selected_swap_ops(layout, k, "index")
        + selected_swap_ops(layout, k, "input")
        + conditional_phase_ops(layout, k)
        + reset_choice_ops(layout, k)
    )


# ---------------------------------------------------------------------------
# Decrement and detangle
# ---------------------------------------------------------------------------


def decrement_ops(control: int, x: Sequence[int], ancillas: Sequence[int]) -> list[GateOp]:
    """Controlled ``x -> x - 1 mod 2**w`` with ``x`` given least significant bit first.

    Bit ``i`` flips when the control is set and bits ``0..i-1`` are all zero.
    The prefix conditions live on ``w - 1`` clean ancillas and share their
    Toffolis across bits, for ``2(w - 1)`` Toffolis in total.
    """
    w = len(x)
    if w == 0:
        return []
    if len(ancillas) < w - 1:
        raise ValueError(f"decrement on {w} bits needs {w - 1} ancillas")
    a = list(ancillas[: w - 1])
    prefix = []
    for i in range(1, w):
        prev = control if i == 1 else a[i - 2]
        prefix.append(x_gate(a[i - 1], [prev, x[i - 1]], [1, 0], role=ROLE_COMPUTE))
    ops: list[GateOp] = []
    ops += prefix
    for i in range(w - 1, 0, -1):
        ops.append(x_gate(x[i], [a[i - 1]]))
        ops.append(prefix[i - 1].inverse())
    ops.append(x_gate(x[0], [control]))
    return ops


def build_decrement(width: int) -> Circuit:
    """Standalone controlled decrement on registers ``ctrl``, ``x`` and ``anc``."""
    if width < 1:
        raise ValueError("width must be >= 1")
    layout = RegisterLayout.build(("ctrl", 1), ("x", width), ("anc", width - 1))
    ops = decrement_ops(layout["ctrl"].start, layout["x"].element_qubits(0), layout["anc"].qubits)
    return Circuit(layout.num_qubits, [], layout).append(ops)


def detangle_ops(layout: RegisterLayout, variant: str = "parallel") -> list[GateOp]:
    idx, inp = layout["index"], layout["input"]
    eta = inp.element_count
    q = layout["q"].start
    pool = _pool(layout)
    ops: list[GateOp] = []
    if eta < 2:
        return ops
    for ell in range(eta):
        a = inp.element_qubits_msb(ell)
        for k in range(eta):
            if k == ell:
                continue
            b = inp.element_qubits_msb(k)
            # index[ell] holds the rank of input[ell]; count down once per
            # smaller element.
            ops += qcompare.comparison_oracle_ops(a, b, q, pool, variant, role=ROLE_COMPUTE)
            ops += decrement_ops(q, idx.element_qubits(ell), pool)
            ops += qcompare.comparison_oracle_ops(a, b, q, pool, variant, role=ROLE_UNCOMPUTE)
    return ops


def detangle(eta: int, n_orbitals: int | None = None, layout: RegisterLayout | None = None) -> Circuit:
    """Return ``index`` to all-zeros given a shuffled, originally ascending ``input``."""
    if layout is None:
        layout = shuffle_layout(eta, n_orbitals if n_orbitals is not None else max(eta, 2))
    return Circuit(layout.num_qubits, [], layout).append(detangle_ops(layout))


# ---------------------------------------------------------------------------
# Full shuffle
# ---------------------------------------------------------------------------


def init_index_ops(layout: RegisterLayout) -> list[GateOp]:
    idx = layout["index"]
    ops = []
    for ell in range(idx.element_count):
        ops += [x_gate(q) for b, q in enumerate(idx.element_qubits(ell)) if (ell >> b) & 1]
    return ops


def shuffle_blocks(layout: RegisterLayout) -> list[tuple[str, list[GateOp]]]:
    eta = layout["choice"].element_count
    blocks = [("init", init_index_ops(layout))]
    blocks += [(f"fy_{k}", fy_block_ops(layout, k)) for k in range(1, eta)]
    blocks.append(("detangle", detangle_ops(layout)))
    return blocks


def shuffle_circuit(job: ShuffleJob) -> Circuit:
    """Full shuffle, including the ``index`` initialisation but not the input loading."""
    layout = job.layout
    circ = Circuit(layout.num_qubits, [], layout)
    for _, ops in shuffle_blocks(layout):
        circ.append(ops)
    return circ


def block_tallies(eta: int, n_orbitals: int) -> dict:
    layout = shuffle_layout(eta, n_orbitals)
    out = {}
    for name, ops in shuffle_blocks(layout):
        out[name] = Circuit(layout.num_qubits, [], layout).append(ops).resource_tally
    return out


def _zero_mass_outside(state: Statevector, name: str) -> float:
    return 1.0 - float(state.register_distribution(name)[0])


def shuffle_antisymmetrize(job: ShuffleJob, check_tolerance: float = 1e-12) -> Statevector:
    """Antisymmetrize ``input`` and return its state with a canonical global phase.

    ``choice`` is checked to be all-zeros after every block and ``index``
    after detangling; a residual above ``check_tolerance`` raises.
    """
    layout = job.layout
    if layout.num_qubits > MAX_QUBITS:
        raise SimulationCapError(
            f"shuffle needs {layout.num_qubits} qubits for eta={job.eta}, N={job.n_orbitals}; cap is {MAX_QUBITS}"
        )
    state = Statevector.basis(layout, {"input": list(job.input_values)})
    for name, ops in shuffle_blocks(layout):
        run(state, ops, inplace=True)
        residual = _zero_mass_outside(state, "choice")
        if residual > check_tolerance:
            raise RuntimeError(f"choice not reset after {name} (residual {residual:.3g})")
    residual = _zero_mass_outside(state, "index")
    if residual > check_tolerance:
        raise RuntimeError(f"index not reset by detangling (residual {residual:.3g})")
    inp = layout["input"]
    block = state.amplitudes.reshape(-1, 1 << inp.span, 1 << inp.start)
    vec = block[0, :, 0].copy()
    leftover = 1.0 - float(np.vdot(vec, vec).real)
    if leftover > check_tolerance:
        raise RuntimeError(f"ancilla registers not restored (residual {leftover:.3g})")
    out_layout = RegisterLayout.build(("input", inp.element_width, inp.element_count))
    ref = out_layout.encode({"input": list(job.input_values)})
    a = vec[ref]
    if abs(a) > 1e-14:
        vec = vec * (abs(a) / a)
    return Statevector(inp.span, vec, out_layout)
