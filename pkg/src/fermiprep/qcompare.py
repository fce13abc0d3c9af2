"""Reversible comparison oracles and quantum comparators.

Register values are handed to the builders as lists of qubits ordered most
significant bit first.  Every builder returns a flat list of ``GateOp`` so the
pieces can be spliced into larger circuits; the ``build_*`` functions wrap
them into standalone circuits with a named layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .sim import (
    ROLE_COMPUTE,
    ROLE_UNCOMPUTE,
    Circuit,
    GateOp,
    RegisterLayout,
    cswap_gate,
    x_gate,
)

VARIANTS = ("parallel", "sequential")


def oracle_scratch_size(d: int, variant: str = "parallel") -> int:
    """Clean ancillas consumed by one comparison oracle on ``d``-bit registers."""
    if variant == "parallel":
        return max(d - 1, 0)
    if variant == "sequential":
        return 2 * d
    raise ValueError(f"unknown variant {variant!r}")


def swap_scratch_size(d: int, fanout: bool = True) -> int:
    return max(d - 1, 0) if fanout else 0


def comparator_scratch_size(d: int, variant: str = "parallel", fanout: bool = True) -> int:
    # The swap's fan-out copies reuse the oracle's scratch once it is restored.
    return max(oracle_scratch_size(d, variant), swap_scratch_size(d, fanout))


def compare2_ops(x1: int, x0: int, y1: int, y0: int, temp: int) -> list[GateOp]:
    """Compare the 2-bit values ``2*x1 + x0`` and ``2*y1 + y0``.

    Leaves bits on the ``x0``/``y0`` wires whose ordering matches the inputs.
    ``temp`` must be clean; it ends holding ``x1 XOR y1``, which is also the
    control of both Fredkins.
    """
    return [
        x_gate(temp, [x1]),
        x_gate(temp, [y1]),
        cswap_gate(temp, x1, x0, role=ROLE_COMPUTE),
        cswap_gate(temp, y1, y0, role=ROLE_COMPUTE),
    ]


def _compare_tree(a: Sequence[int], b: Sequence[int], scratch: Sequence[int]) -> tuple[list[GateOp], int, int]:
    # Pad with virtual leading zeros up to a power of two.  A slice whose high
    # bits are padding cannot differ there, so it passes through untouched.
    size = 1
    while size < len(a):
        size *= 2
    pad = [None] * (size - len(a))
    layer_a: list = pad + list(a)
    layer_b: list = pad + list(b)
    free = list(scratch)
    ops: list[GateOp] = []
    while len(layer_a) > 1:
        next_a, next_b = [], []
        for i in range(0, len(layer_a), 2):
            ha, la, hb, lb = layer_a[i], layer_a[i + 1], layer_b[i], layer_b[i + 1]
            if ha is not None:
                ops += compare2_ops(ha, la, hb, lb, free.pop(0))
            next_a.append(la)
            next_b.append(lb)
        layer_a, layer_b = next_a, next_b
    return ops, layer_a[0], layer_b[0]


def _sequential_scan(a: Sequence[int], b: Sequence[int], scratch: Sequence[int]) -> tuple[list[GateOp], int, int]:
    d = len(a)
    ap, bp = scratch[:d], scratch[d : 2 * d]
    ops = [
        x_gate(ap[0], [a[0], b[0]], [1, 0], role=ROLE_COMPUTE),
        x_gate(bp[0], [a[0], b[0]], [0, 1], role=ROLE_COMPUTE),
    ]
    for i in range(1, d):
        ops += [
            x_gate(ap[i], [ap[i - 1]]),
            x_gate(bp[i], [bp[i - 1]]),
            x_gate(ap[i], [ap[i - 1], bp[i - 1], a[i], b[i]], [0, 0, 1, 0], role=ROLE_COMPUTE),
            x_gate(bp[i], [ap[i - 1], bp[i - 1], a[i], b[i]], [0, 0, 0, 1], role=ROLE_COMPUTE),
        ]
    return ops, ap[-1], bp[-1]


def _invert(ops: Sequence[GateOp]) -> list[GateOp]:
    return [op.inverse() for op in reversed(ops)]


def comparison_oracle_ops(
    a: Sequence[int],
    b: Sequence[int],
    out: int,
    scratch: Sequence[int],
    variant: str = "parallel",
    role: str | None = ROLE_COMPUTE,
) -> list[GateOp]:
    """``out ^= [A > B]`` with ``A``, ``B`` and the scratch qubits restored.

    ``role`` labels the single Toffoli that writes the result; pass
    ``ROLE_UNCOMPUTE`` when the call erases an earlier result.
    """
    if len(a) != len(b) or not a:
        raise ValueError("registers must be non-empty and of equal width")
    need = oracle_scratch_size(len(a), variant)
    if len(scratch) < need:
        raise ValueError(f"{variant} oracle on {len(a)} bits needs {need} scratch qubits")
    if variant == "parallel":
        body, fa, fb = _compare_tree(a, b, scratch[:need])
    else:
        body, fa, fb = _sequential_scan(a, b, scratch[:need])
    if variant == "sequential":
        # Only A' can be set when A > B, and its last bit is exactly [A > B].
        copy = x_gate(out, [fa], role=None)
    else:
        copy = x_gate(out, [fa, fb], [1, 0], role=role)
    return body + [copy] + _invert(body)


def controlled_swap_ops(
    control: int, a: Sequence[int], b: Sequence[int], scratch: Sequence[int] = (), fanout: bool = True
) -> list[GateOp]:
    """Swap two equal-width registers when ``control`` is 1."""
    if len(a) != len(b):
        raise ValueError("registers must have equal width")
    d = len(a)
    if not fanout or d <= 1:
        return [cswap_gate(control, x, y) for x, y in zip(a, b)]
    copies = list(scratch[: d - 1])
    if len(copies) < d - 1:
        raise ValueError(f"fan-out swap on {d} bits needs {d - 1} scratch qubits")
    holders = [control]
    spread: list[GateOp] = []
    while len(holders) < d:
        for h in list(holders):
            if len(holders) == d:
                break
            nxt = copies[len(holders) - 1]
            spread.append(x_gate(nxt, [h]))
            holders.append(nxt)
    swaps = [cswap_gate(h, x, y) for h, x, y in zip(holders, a, b)]
    return spread + swaps + _invert(spread)


def comparator_ops(
    a: Sequence[int],
    b: Sequence[int],
    record: int,
    scratch: Sequence[int],
    variant: str = "parallel",
    fanout: bool = True,
) -> list[GateOp]:
    """Compare-and-swap: ``(A, B, r) -> (min, max, r ^ [A > B])``."""
    return comparison_oracle_ops(a, b, record, scratch, variant) + controlled_swap_ops(record, a, b, scratch, fanout)


def reverse_comparator_ops(
    a: Sequence[int],
    b: Sequence[int],
    record: int,
    scratch: Sequence[int],
    variant: str = "parallel",
    fanout: bool = True,
) -> list[GateOp]:
    """Inverse of ``comparator_ops`` (valid on inputs with distinct values)."""
    return _invert(comparator_ops(a, b, record, scratch, variant, fanout))


# ---------------------------------------------------------------------------
# Standalone circuits
# ---------------------------------------------------------------------------


def _pair_layout(d: int, scratch: int) -> RegisterLayout:
    return RegisterLayout.build(("A", d), ("B", d), ("q", 1), ("scratch", scratch))


def _msb(layout: RegisterLayout, name: str) -> list[int]:
    return layout[name].element_qubits_msb(0)


def build_comparison_oracle(d: int, variant: str = "parallel") -> Circuit:
    """Standalone oracle on registers ``A``, ``B`` (``d`` bits), ``q`` and ``scratch``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    layout = _pair_layout(d, oracle_scratch_size(d, variant))
    ops = comparison_oracle_ops(
        _msb(layout, "A"), _msb(layout, "B"), layout["q"].start, layout["scratch"].qubits, variant
    )
    circ = Circuit(layout.num_qubits, [], layout)
    return circ.append(ops)


def build_compare2() -> Circuit:
    """Compare2 on ``x = x0 + 2 x1`` and ``y = y0 + 2 y1``.

    Outputs land on the ``x0`` and ``y0`` wires (bit 0 of registers ``x`` and
    ``y``); the ``x1``, ``y1`` and ``temp`` wires hold values kept for a later
    uncompute.
    """
    layout = RegisterLayout.build(("x", 2), ("y", 2), ("temp", 1))
    x0, x1 = layout["x"].element_qubits(0)
    y0, y1 = layout["y"].element_qubits(0)
    circ = Circuit(layout.num_qubits, [], layout)
    return circ.append(compare2_ops(x1, x0, y1, y0, layout["temp"].start))


def build_compare_finish() -> Circuit:
    """Split the final bits ``(a, b)`` into three exclusive flags.

    Flag registers, from the lowest qubit: ``descending`` (a > b),
    ``ascending`` (a < b), ``equal``.  The ``descending`` Toffoli alone is the
    oracle's output step.
    """
    layout = RegisterLayout.build(("a", 1), ("b", 1), ("descending", 1), ("ascending", 1), ("equal", 1))
    a, b = layout["a"].start, layout["b"].start
    desc, asc, eq = layout["descending"].start, layout["ascending"].start, layout["equal"].start
    circ = Circuit(layout.num_qubits, [], layout)
    return circ.append(
        [
            x_gate(desc, [a, b], [1, 0], role=ROLE_COMPUTE),
            x_gate(asc, [a, b], [0, 1], role=ROLE_COMPUTE),
            x_gate(eq, [a, b], [0, 0], role=ROLE_COMPUTE),
            x_gate(eq, [a, b], [1, 1], role=ROLE_COMPUTE),
        ]
    )


def build_controlled_register_swap(d: int, fanout: bool = True) -> Circuit:
    """Registers ``A``, ``B`` swapped on control ``q``; ``scratch`` holds fan-out copies."""
    if d < 1:
        raise ValueError("d must be >= 1")
    layout = _pair_layout(d, swap_scratch_size(d, fanout))
    ops = controlled_swap_ops(
        layout["q"].start, _msb(layout, "A"), _msb(layout, "B"), layout["scratch"].qubits, fanout
    )
    circ = Circuit(layout.num_qubits, [], layout)
    return circ.append(ops)


@dataclass
class ComparatorCircuitBundle:
    oracle_circuit: Circuit
    swap_circuit: Circuit
    full_comparator: Circuit
    ancilla_count: int
    variant: str
    layout: RegisterLayout


def build_full_comparator(d: int, variant: str = "parallel", fanout: bool = True) -> ComparatorCircuitBundle:
    """Oracle and conditional swap on one shared layout (``q`` is the record qubit)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    n_scratch = comparator_scratch_size(d, variant, fanout)
    layout = _pair_layout(d, n_scratch)
    a, b, q, scratch = _msb(layout, "A"), _msb(layout, "B"), layout["q"].start, layout["scratch"].qubits
    oracle = Circuit(layout.num_qubits, [], layout).append(comparison_oracle_ops(a, b, q, scratch, variant))
    swap = Circuit(layout.num_qubits, [], layout).append(controlled_swap_ops(q, a, b, scratch, fanout))
    full = Circuit(layout.num_qubits, [], layout).extend(oracle).extend(swap)
    return ComparatorCircuitBundle(oracle, swap, full, n_scratch, variant, layout)


def oracle_t_count(d: int, variant: str = "parallel") -> int:
    return build_comparison_oracle(d, variant).resource_tally["t_count"]
