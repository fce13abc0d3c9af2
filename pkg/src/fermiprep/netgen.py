"""Classical sorting networks: generation, 0-1 verification and cost roll-ups.

Every comparator ``(i, j)`` has ``i < j`` and leaves the minimum on wire ``i``,
so a schedule sorts ascending.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

FAMILIES = ("bitonic", "odd-even-mergesort", "insertion")

# Best known network for 20 inputs (depth-optimised), used as a reference point.
REFERENCE_20_INPUTS = {"num_wires": 20, "depth": 11, "comparators": 92, "depth_lower_bound": 10, "comparators_lower_bound": 73}


@dataclass(frozen=True)
class ComparatorSchedule:
    num_wires: int
    rounds: tuple[tuple[tuple[int, int], ...], ...]
    family: str

    def __post_init__(self):
        for rnd in self.rounds:
            wires = [w for pair in rnd for w in pair]
            if len(set(wires)) != len(wires):
                raise ValueError(f"round {rnd} is not wire-disjoint")
            for i, j in rnd:
                if not 0 <= i < j < self.num_wires:
                    raise ValueError(f"bad comparator {(i, j)} for {self.num_wires} wires")

    @property
    def comparators(self) -> list[tuple[int, int]]:
        return [pair for rnd in self.rounds for pair in rnd]

    @property
    def num_comparators(self) -> int:
        return sum(len(r) for r in self.rounds)

    @property
    def depth(self) -> int:
        return len(self.rounds)

    def without(self, round_index: int, pair_index: int) -> "ComparatorSchedule":
        """Copy with one comparator removed (used to build broken networks)."""
        rounds = [list(r) for r in self.rounds]
        del rounds[round_index][pair_index]
        return ComparatorSchedule(self.num_wires, tuple(tuple(r) for r in rounds if r), self.family)

    def apply(self, values: Sequence) -> list:
        out = list(values)
        for i, j in self.comparators:
            if out[i] > out[j]:
                out[i], out[j] = out[j], out[i]
        return out

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "num_wires": self.num_wires,
            "rounds": [[list(p) for p in rnd] for rnd in self.rounds],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ComparatorSchedule":
        rounds = tuple(tuple((int(i), int(j)) for i, j in rnd) for rnd in d["rounds"])
        return cls(int(d["num_wires"]), rounds, d["family"])

    @classmethod
    def from_json(cls, text: str) -> "ComparatorSchedule":
        return cls.from_dict(json.loads(text))


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def _bitonic_rounds(n: int) -> list[list[tuple[int, int]]]:
    # All-ascending formulation: the first step of each merge compares mirrored
    # positions, the later steps are ordinary half-cleaners.
    rounds = []
    k = 2
    while k <= n:
        rnd = []
        for base in range(0, n, k):
            for i in range(k // 2):
                rnd.append((base + i, base + k - 1 - i))
        rounds.append(rnd)
        j = k // 4
        while j >= 1:
            rnd = []
            for base in range(0, n, 2 * j):
                for i in range(j):
                    rnd.append((base + i, base + i + j))
            rounds.append(rnd)
            j //= 2
        k *= 2
    return rounds


def _odd_even_rounds(n: int) -> list[list[tuple[int, int]]]:
    rounds = []
    p = 1
    while p < n:
        k = p
        while k >= 1:
            rnd = []
            for j in range(k % p, n - k, 2 * k):
                for i in range(min(k, n - j - k)):
                    if (i + j) // (2 * p) == (i + j + k) // (2 * p):
                        rnd.append((i + j, i + j + k))
            rounds.append(rnd)
            k //= 2
        p *= 2
    return rounds


def layer(comparators: Sequence[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """Greedy as-soon-as-possible grouping of a comparator sequence into rounds."""
    level: dict[int, int] = {}
    rounds: list[list[tuple[int, int]]] = []
    for i, j in comparators:
        r = max(level.get(i, 0), level.get(j, 0))
        if r == len(rounds):
            rounds.append([])
        rounds[r].append((i, j))
        level[i] = level[j] = r + 1
    return rounds


def generate(family: str, num_wires: int) -> ComparatorSchedule:
    """Build a sorting network for ``num_wires`` inputs.

    Power-of-two families are generated on the next power of two with the
    extra wires treated as holding ``+inf``; every comparator that touches
    one of them is a no-op and is dropped.
    """
    if num_wires < 1:
        raise ValueError("num_wires must be >= 1")
    if family == "insertion":
        seq = [(j - 1, j) for i in range(1, num_wires) for j in range(i, 0, -1)]
        rounds = layer(seq)
    elif family in ("bitonic", "odd-even-mergesort"):
        padded = _next_pow2(num_wires)
        raw = _bitonic_rounds(padded) if family == "bitonic" else _odd_even_rounds(padded)
        rounds = [[(i, j) for i, j in rnd if j < num_wires] for rnd in raw]
        rounds = [r for r in rounds if r]
    else:
        raise ValueError(f"unsupported family {family!r}; choose from {FAMILIES}")
    return ComparatorSchedule(num_wires, tuple(tuple(r) for r in rounds), family)


def verify_zero_one(schedule: ComparatorSchedule, chunk: int = 1 << 16) -> bool:
    """Exhaustive 0-1 principle check over all ``2**num_wires`` binary inputs."""
    n = schedule.num_wires
    if n > 24:
        raise ValueError("exhaustive 0-1 check is limited to 24 wires")
    comps = schedule.comparators
    total = 1 << n
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        wires = [((codes >> (n - 1 - w)) & 1).astype(np.uint8) for w in range(n)]
        for i, j in comps:
            a, b = wires[i], wires[j]
            wires[i], wires[j] = np.minimum(a, b), np.maximum(a, b)
        for w in range(n - 1):
            if np.any(wires[w] > wires[w + 1]):
                return False
    return True


def comparator_formula(family: str, num_wires: int) -> tuple[int, int]:
    """Closed-form (comparators, depth) for power-of-two bitonic/odd-even, any-size insertion."""
    n = num_wires
    if family == "insertion":
        return n * (n - 1) // 2, max(2 * n - 3, 0) if n > 1 else 0
    if n & (n - 1):
        raise ValueError("closed forms are for powers of two")
    lg = n.bit_length() - 1
    depth = lg * (lg + 1) // 2
    if family == "bitonic":
        return n * lg * (lg + 1) // 4, depth
    if family == "odd-even-mergesort":
        return ((lg * lg - lg + 4) * n) // 4 - 1 if n > 1 else 0, depth
    raise ValueError(family)


def resource_summary(schedule: ComparatorSchedule, element_width: int, variant: str = "parallel") -> dict:
    """Roll per-comparator quantum costs up to the whole network."""
    from .qcompare import build_full_comparator

    if element_width < 1:
        raise ValueError("element_width must be >= 1")
    bundle = build_full_comparator(element_width, variant=variant)
    per = bundle.full_comparator.resource_tally
    count, depth = schedule.num_comparators, schedule.depth
    return {
        "family": schedule.family,
        "num_wires": schedule.num_wires,
        "element_width": element_width,
        "comparators": count,
        "rounds": depth,
        "per_comparator": {
            "gates": per["gate_count"],
            "depth": per["depth"],
            "t_count": per["t_count"],
            "t_count_standard": per["t_count_standard"],
            "toffoli_count": per["toffoli_count"],
            "ancillas": bundle.ancilla_count,
        },
        "total": {
            "gates": count * per["gate_count"],
            "depth": depth * per["depth"],
            "t_count": count * per["t_count"],
            "t_count_standard": count * per["t_count_standard"],
            "toffoli_count": count * per["toffoli_count"],
        },
        "reference_20_inputs": dict(REFERENCE_20_INPUTS),
    }
