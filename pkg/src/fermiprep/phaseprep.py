"""Phase estimation on the walk operator and the rejection strategy for ground states.

Two levels live here: an exact simulation of single-ancilla iterative phase
estimation on dense unitaries, and a Monte-Carlo cost model in units of walk
applications.
"""

from __future__ import annotations

import json
import math
import os
from collections import Counter
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .qubitize import LcuHamiltonian, build_qubiterate, recover_energy

TWO_PI = 2 * math.pi


# ---------------------------------------------------------------------------
# Parameters and fixtures
# ---------------------------------------------------------------------------


@dataclass
class CostModelParams:
    alpha0: float
    e0: float
    e_star: float
    e0_bound: float
    epsilon_f: float
    e1: float | None = None
    use_amplitude_amplification: bool = False
    e1_bound: float | None = None

    def __post_init__(self):
        if not 0 < self.alpha0 <= 1:
            raise ValueError("alpha0_in_unit_interval: need 0 < alpha0 <= 1")
        if not self.e0 <= self.e0_bound < self.e_star:
            raise ValueError("energy_ordering: need e0 <= e0_bound < e_star")
        if self.epsilon_f <= 0:
            raise ValueError("epsilon_f_positive: target precision must be > 0")
        if self.e1_bound is not None and self.e1_bound <= self.e0_bound:
            raise ValueError("e1_bound_above_e0_bound: need e1_bound > e0_bound")

    @property
    def coarse_gap(self) -> float:
        return self.e_star - self.e0_bound


@dataclass
class SpectralModel:
    energies: np.ndarray
    overlaps: np.ndarray

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=float)
        self.overlaps = np.asarray(self.overlaps, dtype=float)
        if self.energies.shape != self.overlaps.shape:
            raise ValueError("energies and overlaps differ in length")
        if np.any(self.overlaps < 0) or abs(self.overlaps.sum() - 1) > 1e-12:
            raise ValueError("overlaps_normalised: overlaps must be nonnegative and sum to 1")

    @classmethod
    def two_level(cls, params: CostModelParams) -> "SpectralModel":
        """Ground state plus all remaining weight on the lowest supported excitation."""
        if params.alpha0 == 1:
            return cls([params.e0], [1.0])
        return cls([params.e0, params.e_star], [params.alpha0, 1 - params.alpha0])


def data_dir() -> Path:
    env = os.environ.get("FERMIPREP_DATA_DIR")
    if env:
        return Path(env)
    return Path(str(resources.files("fermiprep") / "data"))


def fixture_names() -> list[str]:
    names = []
    for path in sorted(data_dir().glob("*.json")):
        doc = json.loads(path.read_text())
        names += list(doc.get("fixtures", {}))
    return names


def load_fixture(name: str) -> CostModelParams:
    """Cost-model parameters for a named fixture under the data directory."""
    for path in sorted(data_dir().glob("*.json")):
        doc = json.loads(path.read_text())
        entry = doc.get("fixtures", {}).get(name)
        if entry is not None:
            return CostModelParams(
                alpha0=entry["alpha0"],
                e0=entry["e0"],
                e_star=entry["e_star"],
                e0_bound=entry["e0_bound"],
                epsilon_f=entry.get("epsilon_f", doc.get("epsilon_f")),
                e1=entry.get("e1"),
                e1_bound=entry.get("e1_bound"),
            )
    raise KeyError(f"unknown fixture {name!r}; available: {fixture_names()}")


# ---------------------------------------------------------------------------
# Iterative phase estimation
# ---------------------------------------------------------------------------


def _rng(rng_seed) -> np.random.Generator:
    return rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)


def walk_applications(bits: int) -> int:
    """Controlled applications of the unitary used by ``bits`` rounds."""
    return (1 << bits) - 1


def iterative_phase_estimation(
    walk: np.ndarray, initial_state: np.ndarray, bits: int, rng_seed=None
) -> tuple[float, np.ndarray]:
    """Single-ancilla phase estimation, least significant bit first.

    Round ``k`` (from ``bits`` down to 1) applies controlled ``U**(2**(k-1))``,
    rotates the ancilla back by the phase implied by the bits already
    measured, applies H and measures.  Returns the phase in ``[0, 2 pi)``
    and the normalised post-measurement state of the register ``U`` acts on.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    u = np.asarray(walk, dtype=complex)
    psi = np.asarray(initial_state, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    rng = _rng(rng_seed)
    powers = [u]
    for _ in range(bits - 1):
        powers.append(powers[-1] @ powers[-1])
    measured: list[int] = []  # x_bits, x_{bits-1}, ...
    for k in range(bits, 0, -1):
        # Correction 2 pi * 0.0 x_{k+1} x_{k+2} ... from bits already known.
        omega = TWO_PI * sum(x / 2 ** (j + 2) for j, x in enumerate(reversed(measured)))
        upsi = np.exp(-1j * omega) * (powers[k - 1] @ psi)
        branch0 = (psi + upsi) / 2
        branch1 = (psi - upsi) / 2
        p0 = float(np.vdot(branch0, branch0).real)
        x = 0 if rng.random() < p0 else 1
        nxt = branch0 if x == 0 else branch1
        psi = nxt / np.linalg.norm(nxt)
        measured.append(x)
    # measured[i] is bit x_{bits-i}; phase = 2 pi sum_j x_j 2**-j.
    phase = TWO_PI * sum(x * 2.0 ** -(bits - i) for i, x in enumerate(measured))
    return phase % TWO_PI, psi


# ---------------------------------------------------------------------------
# Monte-Carlo cost model
# ---------------------------------------------------------------------------


@dataclass
class RunReport:
    strategy: str
    trials: int
    mean_cost: float
    std_err: float
    analytic_cost: float
    mean_attempts: float
    attempts_histogram: dict[int, int]
    costs: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("costs")
        d["attempts_histogram"] = {str(k): v for k, v in sorted(self.attempts_histogram.items())}
        return d


def rejection_analytic_cost(params: CostModelParams) -> float:
    return 1 / (params.alpha0 * params.coarse_gap) + 1 / params.epsilon_f


def naive_analytic_cost(params: CostModelParams) -> float:
    return 1 / (params.alpha0 * params.epsilon_f)


def amplitude_amplified_cost(params: CostModelParams) -> float:
    """``(1/sqrt(alpha0)) / (e1_bound - e0_bound) + 1/epsilon_f`` (formula only)."""
    if params.e1_bound is None:
        raise ValueError("e1_bound_required: amplitude-amplified cost needs e1_bound")
    return 1 / (math.sqrt(params.alpha0) * (params.e1_bound - params.e0_bound)) + 1 / params.epsilon_f


def _attempts_until_ground(rng: np.random.Generator, cumulative: np.ndarray, accept: np.ndarray, cap: int) -> int:
    # Eigenstates are sampled by inverse CDF with the ground state first, so a
    # larger alpha0 never needs more attempts on the same random stream.
    for attempt in range(1, cap + 1):
        k = int(np.searchsorted(cumulative, rng.random(), side="right"))
        if accept[min(k, accept.size - 1)]:
            return attempt
    raise RuntimeError(f"no acceptance within {cap} attempts")


def _simulate(strategy, model, params, rng_seed, trials, attempt_cost, final_cost, analytic, cap):
    order = np.argsort(model.energies, kind="stable")
    cumulative = np.cumsum(model.overlaps[order])
    accept = model.energies[order] <= params.e0_bound
    if not accept.any():
        raise ValueError("no supported eigenstate lies at or below e0_bound")
    base = 0 if rng_seed is None else int(rng_seed)
    attempts = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        attempts[t] = _attempts_until_ground(np.random.default_rng(base + t), cumulative, accept, cap)
    costs = attempts * attempt_cost + final_cost
    return RunReport(
        strategy=strategy,
        trials=trials,
        mean_cost=float(costs.mean()),
        std_err=float(costs.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
        analytic_cost=analytic,
        mean_attempts=float(attempts.mean()),
        attempts_histogram=dict(Counter(int(a) for a in attempts)),
        costs=costs,
    )


def rejection_run(
    model: SpectralModel, params: CostModelParams, rng_seed=0, trials: int = 10_000, cap: int = 1_000_000
) -> RunReport:
    """Coarse phase estimation (cost ``1/(E* - E0_bound)``) with restarts, then one fine run.

    Trial ``t`` draws from a generator seeded with ``rng_seed + t``.
    """
    return _simulate(
        "rejection", model, params, rng_seed, trials,
        attempt_cost=1 / params.coarse_gap,
        final_cost=1 / params.epsilon_f,
        analytic=rejection_analytic_cost(params),
        cap=cap,
    )


def naive_run(
    model: SpectralModel, params: CostModelParams, rng_seed=0, trials: int = 10_000, cap: int = 1_000_000
) -> RunReport:
    """Full-precision phase estimation (cost ``1/epsilon_f``) on every attempt."""
    return _simulate(
        "naive", model, params, rng_seed, trials,
        attempt_cost=1 / params.epsilon_f,
        final_cost=0.0,
        analytic=naive_analytic_cost(params),
        cap=cap,
    )


# ---------------------------------------------------------------------------
# Circuit-level pipeline
# ---------------------------------------------------------------------------


@dataclass
class GroundStateResult:
    energy: float
    state: np.ndarray
    walk_state: np.ndarray
    cost: int
    attempts: int
    rejections: int
    fidelity: float
    coarse_bits: int
    fine_bits: int


def coarse_bits_for(params: CostModelParams, lam: float, max_bits: int) -> int:
    """Fewest bits whose energy bin ``2 pi lam / 2**b`` is at most half of ``E* - E0_bound``."""
    b = 1
    while TWO_PI * lam / (1 << b) > params.coarse_gap / 2 and b < max_bits:
        b += 1
    return b


def end_to_end_ground_state(
    lcu: LcuHamiltonian,
    initial_state: np.ndarray,
    params: CostModelParams,
    rng_seed=None,
    bits: int = 10,
    max_attempts: int = 64,
) -> GroundStateResult:
    """Prepare a ground state by phase estimation on the walk with rejection.

    Each attempt starts from ``|0>_a |phi>_s`` and runs a coarse estimate; it
    is rejected when the coarse energy exceeds ``e0_bound`` by more than one
    coarse bin.  An accepted attempt continues with ``bits`` fine rounds on
    the collapsed state.
    """
    if lcu.n_sys > 3:
        raise ValueError("end-to-end simulation is limited to 3 system qubits")
    if bits > 12:
        raise ValueError("bits is limited to 12")
    rng = _rng(rng_seed)
    walk = build_qubiterate(lcu)
    phi = np.asarray(initial_state, dtype=complex)
    phi = phi / np.linalg.norm(phi)
    start = walk.flagged_state(phi)
    b_c = coarse_bits_for(params, lcu.lam, bits)
    bin_energy = TWO_PI * lcu.lam / (1 << b_c)
    cost = 0
    for attempt in range(1, max_attempts + 1):
        theta_c, psi = iterative_phase_estimation(walk.matrix, start, b_c, rng)
        cost += walk_applications(b_c)
        if recover_energy(theta_c, lcu.lam) > params.e0_bound + bin_energy:
            continue
        theta, psi = iterative_phase_estimation(walk.matrix, psi, bits, rng)
        cost += walk_applications(bits)
        d = 1 << lcu.n_sys
        sys_part = psi[:d]
        nrm = np.linalg.norm(sys_part)
        sys_state = sys_part / nrm if nrm > 1e-14 else sys_part
        _, ground = lcu.ground_state()
        return GroundStateResult(
            energy=recover_energy(theta, lcu.lam),
            state=sys_state,
            walk_state=psi,
            cost=cost,
            attempts=attempt,
            rejections=attempt - 1,
            fidelity=float(abs(np.vdot(ground, sys_state)) ** 2),
            coarse_bits=b_c,
            fine_bits=bits,
        )
    raise RuntimeError(f"attempt_cap_exceeded: no acceptance within {max_attempts} attempts")
