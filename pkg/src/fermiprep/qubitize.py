"""Block encodings of LCU Hamiltonians and the qubitization walk operator.

All operators are dense matrices.  The ancilla register is the most
significant factor, so ``kron(ancilla_op, system_op)`` acts on
``ancilla ⊗ system`` and the flagged block is the top-left
``2**n_sys x 2**n_sys`` corner.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

HERMITIAN_TOL = 1e-10

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(label: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis; the leftmost letter is the most significant qubit."""
    label = label.upper()
    if not label or any(c not in PAULI for c in label):
        raise ValueError(f"bad Pauli string {label!r}")
    return reduce(np.kron, (PAULI[c] for c in label))


def _is_unitary(u: np.ndarray, tol: float = 1e-12) -> bool:
    return np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol)


def _is_hermitian(u: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return float(np.max(np.abs(u - u.conj().T))) <= tol


@dataclass
class LcuHamiltonian:
    coefficients: np.ndarray
    terms: list[np.ndarray]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        self.terms = [np.asarray(t, dtype=complex) for t in self.terms]
        if len(self.terms) != len(self.coefficients) or not self.terms:
            raise ValueError("need one unitary term per coefficient")
        if np.any(self.coefficients <= 0):
            raise ValueError("coefficients_positive: LCU coefficients must be > 0")
        dim = self.terms[0].shape[0]
        if dim & (dim - 1) or dim < 1:
            raise ValueError("term dimension must be a power of two")
        for t in self.terms:
            if t.shape != (dim, dim):
                raise ValueError("dimension mismatch between terms")
            if not _is_unitary(t):
                raise ValueError("terms_unitary: every term must be unitary")
        if self.lam + 1e-9 < np.linalg.norm(self.matrix(), 2):
            raise ValueError("lambda_bounds_norm: lambda must be at least the spectral norm of H")

    @property
    def lam(self) -> float:
        return float(np.sum(self.coefficients))

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    @property
    def n_sys(self) -> int:
        return self.terms[0].shape[0].bit_length() - 1

    @property
    def is_hermitian(self) -> bool:
        return _is_hermitian(self.matrix(), 1e-9)

    def require_hermitian(self) -> None:
        if not self.is_hermitian:
            raise ValueError("hamiltonian_hermitian: the weighted sum of terms must be Hermitian")

    @property
    def hermitian_terms(self) -> bool:
        return all(_is_hermitian(t) for t in self.terms)

    def matrix(self) -> np.ndarray:
        return sum(a * u for a, u in zip(self.coefficients, self.terms))

    def eigenvalues(self) -> np.ndarray:
        self.require_hermitian()
        return np.linalg.eigvalsh(self.matrix())

    def ground_state(self) -> tuple[float, np.ndarray]:
        self.require_hermitian()
        w, v = np.linalg.eigh(self.matrix())
        return float(w[0]), v[:, 0]

    @classmethod
    def from_paulis(cls, terms: Iterable[tuple[complex, str]]) -> "LcuHamiltonian":
        """Build from ``(weight, pauli_string)`` pairs.

        Signs and complex phases of the weights move into the unitary, so
        every stored coefficient is positive.  Zero weights are dropped.
        """
        coeffs, mats, labels = [], [], []
        for w, label in terms:
            w = complex(w)
            if abs(w) < 1e-15:
                continue
            coeffs.append(abs(w))
            mats.append((w / abs(w)) * pauli_matrix(label))
            labels.append(label)
        return cls(np.array(coeffs), mats, labels)

    @classmethod
    def from_dict(cls, doc: dict) -> "LcuHamiltonian":
        """Parse ``{coefficients: [...], terms: [{pauli: "XZ"} | {matrix: rows}]}``.

        Matrix entries are either real numbers or ``[re, im]`` pairs.
        """
        weights = doc["coefficients"]
        specs = doc["terms"]
        if len(weights) != len(specs):
            raise ValueError("coefficients and terms differ in length")
        coeffs, mats, labels = [], [], []
        for w, spec in zip(weights, specs):
            w = complex(*w) if isinstance(w, (list, tuple)) else complex(w)
            if "pauli" in spec:
                m, label = pauli_matrix(spec["pauli"]), spec["pauli"]
            elif "matrix" in spec:
                m = np.array(
                    [[complex(*e) if isinstance(e, (list, tuple)) else complex(e) for e in row] for row in spec["matrix"]]
                )
                label = "matrix"
            else:
                raise ValueError("each term needs a 'pauli' or 'matrix' entry")
            if abs(w) < 1e-15:
                continue
            coeffs.append(abs(w))
            mats.append((w / abs(w)) * m)
            labels.append(label)
        return cls(np.array(coeffs), mats, labels)

    @classmethod
    def from_json(cls, text: str) -> "LcuHamiltonian":
        return cls.from_dict(json.loads(text))


def _haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_lcu(rng: np.random.Generator, n_sys: int, n_terms: int, kind: str = "pauli") -> LcuHamiltonian:
    """Random positive weights with Pauli-string or general unitary terms.

    ``kind="unitary"`` emits non-Hermitian terms in ``(U, U†)`` pairs with
    equal weights so the sum stays Hermitian; an odd count adds one random
    reflection.
    """
    coeffs = rng.uniform(0.1, 1.0, n_terms)
    if kind == "pauli":
        labels = ["".join(rng.choice(list("IXYZ"), n_sys)) for _ in range(n_terms)]
        return LcuHamiltonian(coeffs, [pauli_matrix(s) for s in labels], labels)
    if kind != "unitary":
        raise ValueError(f"unknown kind {kind!r}")
    dim = 1 << n_sys
    mats = []
    for j in range(0, n_terms - 1, 2):
        u = _haar_unitary(rng, dim)
        mats += [u, u.conj().T]
        coeffs[j + 1] = coeffs[j]
    if n_terms % 2:
        q = _haar_unitary(rng, dim)
        signs = rng.choice([-1.0, 1.0], dim)
        mats.append(q @ np.diag(signs) @ q.conj().T)
    return LcuHamiltonian(coeffs, mats)


# ---------------------------------------------------------------------------
# PREPARE, SELECT, V, W
# ---------------------------------------------------------------------------


def index_qubits(num_terms: int) -> int:
    return max(num_terms - 1, 0).bit_length()


def build_prepare(coefficients: Sequence[float]) -> np.ndarray:
    """Unitary whose first column is ``sqrt(a_j / lambda)``, padded with zeros.

    The completion is the Householder reflection taking ``|0>`` to that
    column (with a sign fix so column 0 matches exactly).
    """
    a = np.asarray(coefficients, dtype=float)
    if a.size == 0 or np.any(a <= 0):
        raise ValueError("coefficients_positive: PREPARE needs strictly positive coefficients")
    dim = 1 << index_qubits(a.size)
    target = np.zeros(dim)
    target[: a.size] = np.sqrt(a / a.sum())
    e0 = np.zeros(dim)
    e0[0] = 1.0
    v = e0 - target
    nv = np.linalg.norm(v)
    if nv < 1e-15:
        return np.eye(dim, dtype=complex)
    v /= nv
    return (np.eye(dim) - 2 * np.outer(v, v)).astype(complex)


def build_select(terms: Sequence[np.ndarray]) -> np.ndarray:
    """Block-diagonal ``sum_j |j><j| ⊗ U_j`` with identity blocks on unused indices."""
    terms = [np.asarray(t, dtype=complex) for t in terms]
    if not terms:
        raise ValueError("need at least one term")
    dim = terms[0].shape[0]
    if any(t.shape != (dim, dim) for t in terms):
        raise ValueError("dimension mismatch between terms")
    n_idx = 1 << index_qubits(len(terms))
    out = np.zeros((n_idx * dim, n_idx * dim), dtype=complex)
    for j in range(n_idx):
        out[j * dim : (j + 1) * dim, j * dim : (j + 1) * dim] = terms[j] if j < len(terms) else np.eye(dim)
    return out


@dataclass
class SignalOracle:
    matrix: np.ndarray
    n_ancilla: int
    n_sys: int
    embedded: bool

    def block(self) -> np.ndarray:
        d = 1 << self.n_sys
        return self.matrix[:d, :d]


def build_signal_oracle(lcu: LcuHamiltonian) -> SignalOracle:
    """``V = (A† ⊗ 1) SELECT (A ⊗ 1)``, made Hermitian with one more ancilla if needed."""
    a = build_prepare(lcu.coefficients)
    eye = np.eye(1 << lcu.n_sys)
    u = np.kron(a.conj().T, eye) @ build_select(lcu.terms) @ np.kron(a, eye)
    n_anc = index_qubits(lcu.num_terms)
    if _is_hermitian(u):
        return SignalOracle(u, n_anc, lcu.n_sys, False)
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    v = np.kron(np.outer(plus, minus), u) + np.kron(np.outer(minus, plus), u.conj().T)
    return SignalOracle(v, n_anc + 1, lcu.n_sys, True)


def flag_projector(n_ancilla: int, n_sys: int) -> np.ndarray:
    """``|0><0|_a ⊗ 1_s`` as a diagonal matrix."""
    diag = np.zeros(1 << (n_ancilla + n_sys))
    diag[: 1 << n_sys] = 1.0
    return np.diag(diag)


@dataclass
class Qubiterate:
    matrix: np.ndarray
    n_ancilla: int
    n_sys: int
    lam: float
    embedded: bool

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def flagged_state(self, system_state: np.ndarray) -> np.ndarray:
        """``|0>_a ⊗ |phi>_s`` in the walk space."""
        out = np.zeros(self.dim, dtype=complex)
        out[: system_state.size] = system_state
        return out


def build_qubiterate(lcu: LcuHamiltonian) -> Qubiterate:
    """``W = i (2 |0><0|_a ⊗ 1 - 1) V``."""
    v = build_signal_oracle(lcu)
    refl = 2 * flag_projector(v.n_ancilla, v.n_sys) - np.eye(v.matrix.shape[0])
    return Qubiterate(1j * refl @ v.matrix, v.n_ancilla, v.n_sys, lcu.lam, v.embedded)


# ---------------------------------------------------------------------------
# Spectrum
# ---------------------------------------------------------------------------


def recover_energy(phase, lam: float, include_i: bool = True):
    """Energy from a walk eigenphase.

    With the ``i`` prefactor kept in ``W`` the eigenphases are
    ``arcsin(E/lam)`` or ``pi - arcsin(E/lam)``, both mapping to ``E`` under
    ``lam * sin``.  For a walk built without the ``i`` every phase sits
    ``pi/2`` lower, which ``include_i=False`` undoes.
    """
    phase = np.asarray(phase, dtype=float)
    if not include_i:
        phase = phase + math.pi / 2
    out = lam * np.sin(phase)
    return float(out) if out.ndim == 0 else out


def expected_walk_eigenvalues(energy: float, lam: float, tol: float = 1e-9) -> list[complex]:
    """``∓ exp(∓ i arcsin(E/lam))``; a single ``i E/lam`` when ``|E| = lam``."""
    x = float(np.clip(energy / lam, -1.0, 1.0))
    if abs(abs(x) - 1) < tol:
        return [1j * x]
    phi = math.asin(x)
    return [-np.exp(-1j * phi), np.exp(1j * phi)]


def invariant_subspace(walk: Qubiterate, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of ``span{Π, W Π}`` (columns)."""
    d = 1 << walk.n_sys
    p = np.zeros((walk.dim, d), dtype=complex)
    p[:d, :d] = np.eye(d)
    stacked = np.hstack([p, walk.matrix @ p])
    u, s, _ = np.linalg.svd(stacked, full_matrices=False)
    return u[:, s > tol]


@dataclass
class QubiterateReport:
    walk_eigenvalues: np.ndarray
    restricted_eigenvalues: np.ndarray
    recovered_energies: np.ndarray
    reference_energies: np.ndarray
    max_abs_error: float
    lam: float
    embedded: bool

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "embedded": self.embedded,
            "walk_eigenvalues": [[float(z.real), float(z.imag)] for z in self.walk_eigenvalues],
            "recovered_energies": [float(e) for e in self.recovered_energies],
            "reference_energies": [float(e) for e in self.reference_energies],
            "max_abs_error": self.max_abs_error,
        }


def _match_error(recovered: np.ndarray, expected: np.ndarray) -> float:
    if recovered.size == expected.size:
        cost = np.abs(recovered[:, None] - expected[None, :])
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].max()) if rows.size else 0.0
    # Multiplicities disagree (near-degenerate |E| = lam); fall back to set distance.
    cost = np.abs(recovered[:, None] - expected[None, :])
    return float(max(cost.min(axis=1).max(), cost.min(axis=0).max()))


def spectral_check(lcu: LcuHamiltonian, tol: float = 1e-9) -> QubiterateReport:
    """Compare energies recovered from the walk with a direct diagonalisation of ``H``."""
    if lcu.n_sys > 6:
        raise ValueError("spectral_check is limited to 6 system qubits")
    walk = build_qubiterate(lcu)
    all_eigs = np.linalg.eigvals(walk.matrix)
    basis = invariant_subspace(walk, tol)
    restricted = np.linalg.eigvals(basis.conj().T @ walk.matrix @ basis)
    recovered = np.sort(recover_energy(np.angle(restricted), lcu.lam))
    reference = lcu.eigenvalues()
    expected = np.sort(
        np.array([lcu.lam * np.sin(np.angle(z)) for e in reference for z in expected_walk_eigenvalues(e, lcu.lam, tol)])
    )
    return QubiterateReport(
        walk_eigenvalues=all_eigs,
        restricted_eigenvalues=restricted,
        recovered_energies=recovered,
        reference_energies=reference,
        max_abs_error=_match_error(recovered, expected),
        lam=lcu.lam,
        embedded=walk.embedded,
    )


def error_propagation(sigma_phase: float, energy: float, lam: float) -> float:
    """First-order energy error ``sigma_phase * sqrt(lam**2 - E**2)`` from inverting ``lam * sin``."""
    if abs(energy) > lam * (1 + 1e-12):
        raise ValueError("energy_within_lambda: |E| must not exceed lambda")
    return float(sigma_phase * math.sqrt(max(lam * lam - energy * energy, 0.0)))
