"""Dense statevector simulation and the gate vocabulary shared by all circuit builders.

Conventions:
    * qubit 0 is the least significant bit of the basis-state index;
    * inside a register, element 0 is the most significant element and the
      bits of an element are stored least-significant first.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 26

# Kinds of gate understood by ``apply``.
X = "X"
H = "H"
CNOT = "CNOT"
TOFFOLI = "TOFFOLI"
MCX = "MCX"
CSWAP = "CSWAP"
CROT = "CROT"
CPHASE = "CPHASE"
PROJ = "PROJ"

GATE_KINDS = (X, H, CNOT, TOFFOLI, MCX, CSWAP, CROT, CPHASE, PROJ)

# Roles used by the T-count convention: a Toffoli-class gate that computes
# into a clean ancilla costs 4 T, its measurement-assisted uncompute costs 0 T,
# anything else costs the textbook 7 T.
ROLE_COMPUTE = "compute"
ROLE_UNCOMPUTE = "uncompute"
_ROLE_SWAP = {ROLE_COMPUTE: ROLE_UNCOMPUTE, ROLE_UNCOMPUTE: ROLE_COMPUTE, None: None}


class SimulationCapError(ValueError):
    """Raised when a request would exceed the simulator's qubit cap."""


class CircuitError(ValueError):
    """Raised for malformed gates or gates that do not fit a state."""


# ---------------------------------------------------------------------------
# Layout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Register:
    name: str
    start: int
    element_width: int
    element_count: int = 1

    @property
    def span(self) -> int:
        return self.element_width * self.element_count

    @property
    def stop(self) -> int:
        return self.start + self.span

    def element_qubits(self, element: int) -> list[int]:
        """Qubits of one element, least significant bit first."""
        if not 0 <= element < self.element_count:
            raise IndexError(f"{self.name} has no element {element}")
        base = self.start + (self.element_count - 1 - element) * self.element_width
        return list(range(base, base + self.element_width))

    def element_qubits_msb(self, element: int) -> list[int]:
        return self.element_qubits(element)[::-1]

    @property
    def qubits(self) -> list[int]:
        return list(range(self.start, self.stop))


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered, disjoint named registers packed from qubit 0 upwards."""

    registers: tuple[Register, ...] = ()

    def __post_init__(self):
        seen: set[int] = set()
        for reg in self.registers:
            if reg.element_width < 0 or reg.element_count < 0:
                raise ValueError(f"register {reg.name} has negative size")
            qs = set(reg.qubits)
            if qs & seen:
                raise ValueError(f"register {reg.name} overlaps another register")
            seen |= qs
        names = [r.name for r in self.registers]
        if len(set(names)) != len(names):
            raise ValueError("register names must be unique")

    @classmethod
    def build(cls, *specs: tuple) -> "RegisterLayout":
        """Pack ``(name, width)`` or ``(name, width, count)`` tuples contiguously."""
        regs = []
        start = 0
        for spec in specs:
            name, width, *rest = spec
            count = rest[0] if rest else 1
            regs.append(Register(name, start, width, count))
            start += width * count
        return cls(tuple(regs))

    @property
    def num_qubits(self) -> int:
        return max((r.stop for r in self.registers), default=0)

    def __getitem__(self, name: str) -> Register:
        for reg in self.registers:
            if reg.name == name:
                return reg
        raise KeyError(f"no register named {name!r}")

    def __contains__(self, name: str) -> bool:
        return any(r.name == name for r in self.registers)

    def names(self) -> list[str]:
        return [r.name for r in self.registers]

    def encode(self, values: dict[str, int | Sequence[int]]) -> int:
        """Basis index for the given register values (missing registers are 0)."""
        index = 0
        for name, val in values.items():
            reg = self[name]
            elems = [val] if isinstance(val, (int, np.integer)) and reg.element_count == 1 else list(val)
            if len(elems) != reg.element_count:
                raise ValueError(f"{name} expects {reg.element_count} elements")
            for e, v in enumerate(elems):
                if not 0 <= int(v) < (1 << reg.element_width) or (reg.element_width == 0 and v != 0):
                    raise ValueError(f"value {v} does not fit {reg.element_width} bits")
                for b, q in enumerate(reg.element_qubits(e)):
                    if (int(v) >> b) & 1:
                        index |= 1 << q
        return index

    def decode(self, index: int, name: str) -> list[int]:
        reg = self[name]
        out = []
        for e in range(reg.element_count):
            v = 0
            for b, q in enumerate(reg.element_qubits(e)):
                v |= ((index >> q) & 1) << b
            out.append(v)
        return out

    def to_dict(self) -> list[dict]:
        return [
            {"name": r.name, "start": r.start, "element_width": r.element_width, "element_count": r.element_count}
            for r in self.registers
        ]


# ---------------------------------------------------------------------------
# Statevector
# ---------------------------------------------------------------------------


def _check_cap(num_qubits: int, cap: int = MAX_QUBITS) -> None:
    if num_qubits > cap:
        raise SimulationCapError(f"{num_qubits} qubits exceeds the simulation cap of {cap}")


@dataclass
class Statevector:
    num_qubits: int
    amplitudes: np.ndarray
    layout: RegisterLayout = field(default_factory=RegisterLayout)

    def __post_init__(self):
        _check_cap(self.num_qubits)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise ValueError(
                f"expected {1 << self.num_qubits} amplitudes, got {self.amplitudes.shape}"
            )
        if self.layout.num_qubits > self.num_qubits:
            raise ValueError("layout does not fit in the state")

    @classmethod
    def zeros(cls, layout: RegisterLayout | int) -> "Statevector":
        return cls.basis(layout, {})

    @classmethod
    def basis(cls, layout: RegisterLayout | int, values: dict | int) -> "Statevector":
        if isinstance(layout, int):
            n = layout
            layout = RegisterLayout()
        else:
            n = layout.num_qubits
        _check_cap(n)
        amps = np.zeros(1 << n, dtype=np.complex128)
        index = values if isinstance(values, int) else layout.encode(values)
        amps[index] = 1.0
        return cls(n, amps, layout)

    def copy(self) -> "Statevector":
        return Statevector(self.num_qubits, self.amplitudes.copy(), self.layout)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def support(self, tol: float = 1e-12) -> np.ndarray:
        return np.flatnonzero(np.abs(self.amplitudes) > tol)

    def register_distribution(self, name: str) -> np.ndarray:
        """Marginal Born distribution over the integer value of one register."""
        reg = self.layout[name]
        probs = self.probabilities().reshape(
            (1 << (self.num_qubits - reg.stop), 1 << reg.span, 1 << reg.start)
        )
        return probs.sum(axis=(0, 2))

    def fidelity(self, other: "Statevector | np.ndarray") -> float:
        vec = other.amplitudes if isinstance(other, Statevector) else np.asarray(other)
        return float(abs(np.vdot(self.amplitudes, vec)) ** 2)


def tensor(*states: Statevector, layout: RegisterLayout | None = None) -> Statevector:
    """Tensor product; the first argument occupies the lowest qubits."""
    amps = np.ones(1, dtype=np.complex128)
    n = 0
    for st in states:
        amps = np.kron(st.amplitudes, amps)
        n += st.num_qubits
    return Statevector(n, amps, layout or RegisterLayout())


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    control_values: tuple[int, ...] = ()
    param: float | None = None
    role: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if not self.control_values:
            object.__setattr__(self, "control_values", (1,) * len(self.controls))
        else:
            object.__setattr__(self, "control_values", tuple(int(v) for v in self.control_values))
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if len(self.control_values) != len(self.controls):
            raise CircuitError("one polarity per control is required")
        if any(v not in (0, 1) for v in self.control_values):
            raise CircuitError("control polarity must be 0 or 1")
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"{self.kind}: targets and controls overlap or repeat: {qubits}")
        if any(q < 0 for q in qubits):
            raise CircuitError("negative qubit index")
        expected_targets = {CSWAP: 2}.get(self.kind, 1)
        if len(self.targets) != expected_targets:
            raise CircuitError(f"{self.kind} takes {expected_targets} target(s)")
        if self.kind in (CROT, CPHASE) and self.param is None:
            raise CircuitError(f"{self.kind} requires an angle")
        if self.kind == PROJ and (self.param not in (0, 1) or self.controls):
            raise CircuitError("PROJ takes an outcome 0/1 as param and no controls")
        if self.role not in _ROLE_SWAP:
            raise CircuitError(f"unknown role {self.role!r}")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def inverse(self) -> "GateOp":
        if self.kind == PROJ:
            raise CircuitError("projectors have no inverse")
        param = -self.param if self.kind in (CROT, CPHASE) else self.param
        return GateOp(self.kind, self.targets, self.controls, self.control_values, param, _ROLE_SWAP[self.role])

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "targets": list(self.targets)}
        if self.controls:
            out["controls"] = list(self.controls)
            out["control_values"] = list(self.control_values)
        if self.param is not None:
            out["param"] = self.param
        if self.role:
            out["role"] = self.role
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "GateOp":
        return cls(
            d["kind"],
            tuple(d["targets"]),
            tuple(d.get("controls", ())),
            tuple(d.get("control_values", ())),
            d.get("param"),
            d.get("role"),
        )


def x_gate(target: int, controls: Sequence[int] = (), values: Sequence[int] = (), role: str | None = None) -> GateOp:
    """X with any number of controls; the kind follows the control count."""
    kind = {0: X, 1: CNOT, 2: TOFFOLI}.get(len(controls), MCX)
    return GateOp(kind, (target,), tuple(controls), tuple(values), role=role)


def h_gate(target: int) -> GateOp:
    return GateOp(H, (target,))


def cswap_gate(control: int, a: int, b: int, value: int = 1, role: str | None = None) -> GateOp:
    return GateOp(CSWAP, (a, b), (control,), (value,), role=role)


def ry_rotation(target: int, angle: float, controls: Sequence[int] = (), values: Sequence[int] = ()) -> GateOp:
    """Real rotation ``[[cos a, -sin a], [sin a, cos a]]`` on the target."""
    return GateOp(CROT, (target,), tuple(controls), tuple(values), float(angle))


def phase_gate(target: int, angle: float, controls: Sequence[int] = (), values: Sequence[int] = ()) -> GateOp:
    """Multiply the amplitude of target=1 (and controls satisfied) by ``exp(i angle)``."""
    return GateOp(CPHASE, (target,), tuple(controls), tuple(values), float(angle))


def z_gate(target: int, controls: Sequence[int] = ()) -> GateOp:
    return phase_gate(target, math.pi, controls)


# ---------------------------------------------------------------------------
# Resource accounting
# ---------------------------------------------------------------------------


def _is_clifford_phase(angle: float) -> bool:
    k = angle / (math.pi / 2)
    return abs(k - round(k)) < 1e-12


def _is_t_phase(angle: float) -> bool:
    k = angle / (math.pi / 4)
    return abs(k - round(k)) < 1e-12 and round(k) % 2 == 1


def gate_cost(op: GateOp) -> dict[str, int]:
    """Resource contribution of a single gate.

    Toffoli-class gates (Toffoli, Fredkin, CCZ, and the V-chain expansion of
    an ``m``-controlled X) contribute to ``toffoli_count``; ``t_count`` uses
    the role-aware 4/0/7 convention and ``t_count_standard`` charges 7 T for
    every Toffoli-class gate.
    """
    cost = dict(clifford_count=0, toffoli_count=0, t_count=0, t_count_standard=0, rotation_count=0)
    nc = len(op.controls)
    if op.kind == PROJ:
        return cost
    if op.kind in (X, CNOT, H) or (op.kind == MCX and nc <= 1):
        cost["clifford_count"] = 1
        return cost
    if op.kind == CPHASE:
        if nc == 0 and _is_clifford_phase(op.param):
            cost["clifford_count"] = 1
            return cost
        if nc == 0 and _is_t_phase(op.param):
            cost["t_count"] = cost["t_count_standard"] = 1
            return cost
        if nc == 1 and abs(abs(op.param) - math.pi) < 1e-12:
            cost["clifford_count"] = 1
            return cost
        if abs(abs(op.param) - math.pi) < 1e-12:
            toffolis = 2 * nc - 3
        else:
            cost["rotation_count"] = 1
            return cost
    elif op.kind == CROT:
        cost["rotation_count"] = 1
        return cost
    elif op.kind in (TOFFOLI, MCX):
        toffolis = max(2 * nc - 3, 1)
    elif op.kind == CSWAP:
        # CNOT, Toffoli, CNOT per Fredkin; extra controls use a V-chain.
        toffolis = 2 * nc - 1
        cost["clifford_count"] = 2
    else:  # pragma: no cover - exhaustive over GATE_KINDS
        raise CircuitError(op.kind)
    cost["toffoli_count"] = toffolis
    cost["t_count_standard"] = 7 * toffolis
    # A V-chain of k Toffolis contains (k - 1) / 2 compute/uncompute pairs.
    pairs = (toffolis - 1) // 2
    core = {ROLE_COMPUTE: 4, ROLE_UNCOMPUTE: 0, None: 7}[op.role]
    cost["t_count"] = 4 * pairs + core
    return cost


def greedy_depth(ops: Iterable[GateOp]) -> int:
    """Number of rounds in an as-soon-as-possible layering on disjoint qubits."""
    level: dict[int, int] = {}
    depth = 0
    for op in ops:
        r = 1 + max((level.get(q, 0) for q in op.qubits), default=0)
        for q in op.qubits:
            level[q] = r
        depth = max(depth, r)
    return depth


def tally(ops: Sequence[GateOp]) -> dict[str, int]:
    total = dict(
        gate_count=len(ops), clifford_count=0, toffoli_count=0, t_count=0, t_count_standard=0, rotation_count=0
    )
    for op in ops:
        for k, v in gate_cost(op).items():
            total[k] += v
    total["depth"] = greedy_depth(ops)
    return total


@dataclass
class Circuit:
    """Ordered gate list with a cached resource tally."""

    num_qubits: int = 0
    ops: list[GateOp] = field(default_factory=list)
    layout: RegisterLayout | None = None

    def append(self, op: GateOp | Iterable[GateOp]) -> "Circuit":
        if isinstance(op, GateOp):
            op = [op]
        for o in op:
            if o.kind == PROJ:
                raise CircuitError("projectors are not allowed inside a circuit; use measure_register")
            self.ops.append(o)
            self.num_qubits = max(self.num_qubits, 1 + max(o.qubits))
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        return self.append(other.ops)

    def inverse(self) -> "Circuit":
        return Circuit(self.num_qubits, [op.inverse() for op in reversed(self.ops)], self.layout)

    def __len__(self) -> int:
        return len(self.ops)

    @property
    def resource_tally(self) -> dict[str, int]:
        return tally(self.ops)

    @property
    def depth(self) -> int:
        return greedy_depth(self.ops)

    def to_dict(self) -> dict:
        out = {"num_qubits": self.num_qubits, "ops": [op.to_dict() for op in self.ops]}
        if self.layout is not None:
            out["layout"] = self.layout.to_dict()
        out["resource_tally"] = self.resource_tally
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        layout = None
        if "layout" in d:
            layout = RegisterLayout(
                tuple(Register(r["name"], r["start"], r["element_width"], r["element_count"]) for r in d["layout"])
            )
        circ = cls(d["num_qubits"], [], layout)
        circ.append(GateOp.from_dict(o) for o in d["ops"])
        if "resource_tally" in d and d["resource_tally"] != circ.resource_tally:
            raise CircuitError("stored resource tally does not match the gate list")
        return circ


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------


def _axis(n: int, q: int) -> int:
    return n - 1 - q


def _slices(n: int, op: GateOp, extra: dict[int, int]) -> tuple:
    idx: list = [slice(None)] * n
    for c, v in zip(op.controls, op.control_values):
        idx[_axis(n, c)] = v
    for q, v in extra.items():
        idx[_axis(n, q)] = v
    return tuple(idx)


def apply(state: Statevector, op: GateOp, inplace: bool = False) -> Statevector:
    """Apply one gate; projectors renormalise the result."""
    n = state.num_qubits
    if any(q >= n for q in op.qubits):
        raise CircuitError(f"{op.kind} acts on qubit {max(op.qubits)} but the state has {n}")
    out = state if inplace else state.copy()
    psi = out.amplitudes.reshape((2,) * n) if n else out.amplitudes
    t = op.targets[0]
    if op.kind in (X, CNOT, TOFFOLI, MCX):
        i0, i1 = _slices(n, op, {t: 0}), _slices(n, op, {t: 1})
        tmp = psi[i0].copy()
        psi[i0] = psi[i1]
        psi[i1] = tmp
    elif op.kind == CSWAP:
        a, b = op.targets
        i01, i10 = _slices(n, op, {a: 0, b: 1}), _slices(n, op, {a: 1, b: 0})
        tmp = psi[i01].copy()
        psi[i01] = psi[i10]
        psi[i10] = tmp
    elif op.kind == CPHASE:
        psi[_slices(n, op, {t: 1})] *= np.exp(1j * op.param)
    elif op.kind in (H, CROT):
        if op.kind == H:
            u = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        else:
            c, s = math.cos(op.param), math.sin(op.param)
            u = np.array([[c, -s], [s, c]])
        i0, i1 = _slices(n, op, {t: 0}), _slices(n, op, {t: 1})
        a0 = psi[i0].copy()
        a1 = psi[i1].copy()
        psi[i0] = u[0, 0] * a0 + u[0, 1] * a1
        psi[i1] = u[1, 0] * a0 + u[1, 1] * a1
    elif op.kind == PROJ:
        psi[_slices(n, op, {t: 1 - int(op.param)})] = 0
        nrm = np.linalg.norm(out.amplitudes)
        if nrm < 1e-15:
            raise CircuitError("projection onto a zero-probability outcome")
        out.amplitudes /= nrm
    return out


def run(state: Statevector, circuit: Circuit | Sequence[GateOp], inplace: bool = False) -> Statevector:
    ops = circuit.ops if isinstance(circuit, Circuit) else circuit
    for op in ops:
        if op.kind == PROJ:
            raise CircuitError("projectors are not allowed inside run(); use measure_register")
    out = state if inplace else state.copy()
    for op in ops:
        apply(out, op, inplace=True)
    return out


def run_basis(circuit: Circuit | Sequence[GateOp], bits: int) -> int:
    """Classical evaluation of a permutation circuit on one basis index."""
    ops = circuit.ops if isinstance(circuit, Circuit) else circuit
    for op in ops:
        if op.kind in (H, CROT):
            raise CircuitError(f"{op.kind} is not a classical reversible gate")
        if all(((bits >> c) & 1) == v for c, v in zip(op.controls, op.control_values)):
            if op.kind == CSWAP:
                a, b = op.targets
                ba, bb = (bits >> a) & 1, (bits >> b) & 1
                if ba != bb:
                    bits ^= (1 << a) | (1 << b)
            elif op.kind in (X, CNOT, TOFFOLI, MCX):
                bits ^= 1 << op.targets[0]
    return bits


# ---------------------------------------------------------------------------
# Measurement and entanglement
# ---------------------------------------------------------------------------


def measure_register(
    state: Statevector, register: str, rng_seed: int | np.random.Generator | None = None
) -> tuple[int, Statevector, float]:
    """Sample a register in the computational basis.

    Returns the outcome (register value, elements packed most significant
    first), the renormalised post-measurement state and the exact Born
    probability of the outcome.
    """
    reg = state.layout[register]
    dist = state.register_distribution(register)
    total = dist.sum()
    if total < 1e-15:
        raise CircuitError(f"register {register!r} carries no probability mass")
    dist = dist / total
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    outcome = int(rng.choice(dist.size, p=dist))
    prob = float(dist[outcome])
    amps = state.amplitudes.reshape((1 << (state.num_qubits - reg.stop), 1 << reg.span, 1 << reg.start)).copy()
    keep = np.zeros(1 << reg.span, dtype=bool)
    keep[outcome] = True
    amps[:, ~keep, :] = 0
    amps = amps.reshape(-1)
    amps /= np.linalg.norm(amps)
    return outcome, Statevector(state.num_qubits, amps, state.layout), prob


def _bipartition(state: Statevector, qubits: Sequence[int]) -> np.ndarray:
    n = state.num_qubits
    qubits = sorted(set(qubits))
    if any(not 0 <= q < n for q in qubits):
        raise ValueError("qubit outside the state")
    rest = [q for q in range(n) if q not in qubits]
    psi = state.amplitudes.reshape((2,) * n)
    perm = [_axis(n, q) for q in reversed(qubits)] + [_axis(n, q) for q in reversed(rest)]
    return psi.transpose(perm).reshape(1 << len(qubits), 1 << len(rest))


def schmidt_coefficients(state: Statevector, register_subset: Sequence[str]) -> np.ndarray:
    qubits = [q for name in register_subset for q in state.layout[name].qubits]
    return np.linalg.svd(_bipartition(state, qubits), compute_uv=False)


def schmidt_rank_across(state: Statevector, register_subset: Sequence[str], tolerance: float = 1e-10) -> int:
    """Number of Schmidt coefficients above ``tolerance`` for the named cut."""
    return int(np.sum(schmidt_coefficients(state, register_subset) > tolerance))


def _contiguous_density(amps: np.ndarray, start: int, span: int, chunk: int = 1 << 18) -> np.ndarray:
    # Reduced density matrix of qubits start..start+span-1 without a full copy.
    m = amps.reshape(-1, 1 << span, 1 << start)
    rho = np.zeros((1 << span, 1 << span), dtype=np.complex128)
    for h in range(m.shape[0]):
        for lo in range(0, m.shape[2], chunk):
            a = m[h, :, lo : lo + chunk]
            rho += a @ a.conj().T
    return rho


def reduced_pure_state(state: Statevector, register_subset: Sequence[str]) -> np.ndarray:
    """Pure state of a subsystem that is in a product with the rest.

    The vector is ordered like the subsystem's own qubits (lowest first)
    and has an arbitrary global phase.
    """
    qubits = sorted(q for name in register_subset for q in state.layout[name].qubits)
    if not qubits:
        return np.ones(1, dtype=np.complex128)
    if qubits == list(range(qubits[0], qubits[-1] + 1)):
        rho = _contiguous_density(state.amplitudes, qubits[0], len(qubits))
        w, v = np.linalg.eigh(rho)
        if len(w) > 1 and w[-2] > 1e-12 * max(w[-1], 1e-300):
            raise ValueError("subsystem is entangled with the rest of the state")
        return v[:, -1]
    mat = _bipartition(state, qubits)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if len(s) > 1 and s[1] > 1e-8:
        raise ValueError("subsystem is entangled with the rest of the state")
    # _bipartition orders the subset's axes from its highest qubit down, which
    # is exactly little-endian integer order once the subset is relabelled 0..k-1.
    return u[:, 0]
