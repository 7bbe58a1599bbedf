"""Dense statevector evolution. Brute-force oracle for the MPS backend.

Bit convention: qubit i with spin +1 is |0>; bit i of the basis index is
the state of qubit i (qubit 0 = least significant bit).
"""
from __future__ import annotations

import warnings

import numpy as np

from .circuit import GateSequence, ProductState

MAX_QUBITS = 24
_NORM_TOL = 1e-10


class CapacityError(ValueError):
    """Raised when a statevector would exceed the dense-backend qubit cap."""


class StateVector:
    def __init__(self, amplitudes: np.ndarray, n_qubits: int):
        if n_qubits > MAX_QUBITS:
            raise CapacityError(
                f"dense backend capped at {MAX_QUBITS} qubits, got {n_qubits}"
            )
        if amplitudes.shape != (2**n_qubits,):
            raise ValueError("amplitude array has wrong length")
        self.amplitudes = np.asarray(amplitudes, dtype=complex)
        self.n_qubits = n_qubits

    @classmethod
    def from_product(cls, state: ProductState) -> "StateVector":
        n = state.n_qubits
        if n > MAX_QUBITS:
            raise CapacityError(
                f"dense backend capped at {MAX_QUBITS} qubits, got {n}"
            )
        amplitudes = np.zeros(2**n, dtype=complex)
        index = int(np.sum(state.bits.astype(np.int64) << np.arange(n)))
        amplitudes[index] = 1.0
        return cls(amplitudes, n)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    # numpy's reshape((2,)*n) puts qubit q on axis n-1-q
    def _axis(self, qubit: int) -> int:
        if not 0 <= qubit < self.n_qubits:
            raise IndexError(f"qubit {qubit} out of range for n={self.n_qubits}")
        return self.n_qubits - 1 - qubit

    def apply_1q(self, qubit: int, gate: np.ndarray) -> None:
        axis = self._axis(qubit)
        psi = self.amplitudes.reshape((2,) * self.n_qubits)
        psi = np.tensordot(gate, psi, axes=([1], [axis]))
        self.amplitudes = np.moveaxis(psi, 0, axis).reshape(-1)

    def apply_2q(self, qubit_a: int, qubit_b: int, gate: np.ndarray) -> None:
        if qubit_a == qubit_b:
            raise ValueError("two-qubit gate needs distinct qubits")
        ax_a, ax_b = self._axis(qubit_a), self._axis(qubit_b)
        psi = self.amplitudes.reshape((2,) * self.n_qubits)
        g = gate.reshape(2, 2, 2, 2)  # (out_a, out_b, in_a, in_b)
        psi = np.tensordot(g, psi, axes=([2, 3], [ax_a, ax_b]))
        self.amplitudes = np.moveaxis(psi, (0, 1), (ax_a, ax_b)).reshape(-1)

    def apply_cycle(self, cycle: GateSequence) -> None:
        if cycle.n_qubits != self.n_qubits:
            raise ValueError("cycle and state have different qubit counts")
        for q in range(self.n_qubits):
            self.apply_1q(q, cycle.kick)
        for layer in cycle.layers:
            for i, j, gate in layer:
                self.apply_2q(i, j, gate)
        drift = abs(self.norm() - 1.0)
        if drift > _NORM_TOL:
            warnings.warn(f"norm drifted by {drift:.2e}; renormalizing")
            self.amplitudes /= self.norm()

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def expect_z(self, qubit: int) -> float:
        marginal = self.probabilities().reshape((2,) * self.n_qubits)
        axes = tuple(a for a in range(self.n_qubits) if a != self._axis(qubit))
        p = marginal.sum(axis=axes)
        return float(p[0] - p[1])

    def expect_zz(self, qubit_a: int, qubit_b: int) -> float:
        if qubit_a == qubit_b:
            return 1.0
        ax = sorted((self._axis(qubit_a), self._axis(qubit_b)))
        marginal = self.probabilities().reshape((2,) * self.n_qubits)
        axes = tuple(a for a in range(self.n_qubits) if a not in ax)
        p = marginal.sum(axis=axes)
        return float(p[0, 0] - p[0, 1] - p[1, 0] + p[1, 1])

    def per_site_z(self) -> np.ndarray:
        probs = self.probabilities().reshape((2,) * self.n_qubits)
        values = np.empty(self.n_qubits)
        for q in range(self.n_qubits):
            axes = tuple(a for a in range(self.n_qubits) if a != self._axis(q))
            p = probs.sum(axis=axes)
            values[q] = p[0] - p[1]
        return values

    def zz_pairs(self, pairs: list[tuple[int, int]]) -> np.ndarray:
        return np.array([self.expect_zz(i, j) for i, j in pairs])

    def zz_matrix(self) -> np.ndarray:
        """Full <Z_i Z_j> matrix (diagonal = 1)."""
        n = self.n_qubits
        if n > 16:  # the (2^n, n) z table gets too large; fall back to marginals
            matrix = np.eye(n)
            for i in range(n):
                for j in range(i + 1, n):
                    matrix[i, j] = matrix[j, i] = self.expect_zz(i, j)
            return matrix
        probs = self.probabilities()
        indices = np.arange(2**n, dtype=np.int64)
        z_bits = 1.0 - 2.0 * ((indices[:, None] >> np.arange(n)) & 1)  # (2^n, n)
        weighted = probs[:, None] * z_bits
        matrix = weighted.T @ z_bits
        np.fill_diagonal(matrix, 1.0)
        return matrix

    def sample_bits(self, shots: int, seed: int) -> np.ndarray:
        """Sample bitstrings from |amplitude|^2; returns (shots, n) bit array."""
        if shots < 1:
            raise ValueError("shots must be >= 1")
        rng = np.random.default_rng(seed)
        probs = self.probabilities()
        probs = probs / probs.sum()
        outcomes = rng.choice(len(probs), size=shots, p=probs)
        bits = (outcomes[:, None] >> np.arange(self.n_qubits)) & 1
        return bits.astype(np.uint8)

    def dump_amplitudes(self, path: str) -> None:
        """Debug dump: little-endian f64 interleaved re/im."""
        stacked = np.empty(2 * len(self.amplitudes))
        stacked[0::2] = self.amplitudes.real
        stacked[1::2] = self.amplitudes.imag
        stacked.astype("<f8").tofile(path)


def init_product(state: ProductState) -> StateVector:
    return StateVector.from_product(state)


def evolve(state: ProductState, cycle: GateSequence, n_cycles: int) -> StateVector:
    """Apply the Floquet cycle n_cycles times to a product state."""
    sv = StateVector.from_product(state)
    for _ in range(n_cycles):
        sv.apply_cycle(cycle)
    return sv
