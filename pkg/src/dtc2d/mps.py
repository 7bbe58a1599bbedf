"""Matrix-product-state evolution of the unrolled lattice.

Site tensors have shape (left_bond, 2, right_bond). The state is kept
right-canonical with the orthogonality center at site 0, so expectation
values close with identity environments on the right.

MPO application uses a left-to-right zip-up contraction (truncating as it
goes) followed by a right-to-left SVD sweep that restores canonical form,
enforces the bond cap, and accumulates the discarded weight. When chi_max
exceeds the entanglement requirement the result is exact up to the
singular-value floor.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .circuit import GateSequence, ProductState
from .lattice import UnrollOrder

_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_GATE_SPLIT_TOL = 1e-14


def _svd(matrix: np.ndarray):
    try:
        return scipy.linalg.svd(matrix, full_matrices=False, check_finite=False)
    except scipy.linalg.LinAlgError:
        return scipy.linalg.svd(
            matrix, full_matrices=False, check_finite=False, lapack_driver="gesvd"
        )


class MPO:
    """Operator as a chain of (left, phys_out, phys_in, right) tensors."""

    def __init__(self, tensors: list[np.ndarray]):
        self.tensors = tensors

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[3] for t in self.tensors[:-1]]

    @classmethod
    def identity(cls, n_sites: int) -> "MPO":
        eye = np.eye(2, dtype=complex).reshape(1, 2, 2, 1)
        return cls([eye.copy() for _ in range(n_sites)])


def gate_mpo(n_sites: int, pos_a: int, pos_b: int, gate: np.ndarray) -> MPO:
    """MPO of a single two-qubit gate acting on chain positions a < b.

    The 4x4 gate is split by SVD into two site tensors with bond <= 4;
    identity pass-through tensors fill the chain positions in between.
    """
    if not 0 <= pos_a < pos_b < n_sites:
        raise ValueError(f"invalid gate span ({pos_a}, {pos_b}) on {n_sites} sites")
    g = gate.reshape(2, 2, 2, 2)  # (out_a, out_b, in_a, in_b)
    m = g.transpose(0, 2, 1, 3).reshape(4, 4)  # (out_a in_a), (out_b in_b)
    u, s, vh = _svd(m)
    rank = max(1, int(np.sum(s > _GATE_SPLIT_TOL)))
    left = (u[:, :rank] * np.sqrt(s[:rank])).reshape(2, 2, rank)
    right = (np.sqrt(s[:rank])[:, None] * vh[:rank]).reshape(rank, 2, 2)

    tensors = []
    passthrough = np.einsum(
        "ab,pq->apqb", np.eye(rank, dtype=complex), np.eye(2, dtype=complex)
    )
    eye = np.eye(2, dtype=complex).reshape(1, 2, 2, 1)
    for pos in range(n_sites):
        if pos == pos_a:
            tensors.append(left.reshape(1, 2, 2, rank))
        elif pos == pos_b:
            tensors.append(right.reshape(rank, 2, 2, 1))
        elif pos_a < pos < pos_b:
            tensors.append(passthrough.copy())
        else:
            tensors.append(eye.copy())
    return MPO(tensors)


def mpo_product(after: MPO, before: MPO) -> MPO:
    """Compose MPOs: (after . before) applies ``before`` first."""
    if after.n_sites != before.n_sites:
        raise ValueError("MPO lengths differ")
    tensors = []
    for a, b in zip(after.tensors, before.tensors):
        c = np.einsum("apmr,bmqs->abpqrs", a, b)
        wl = a.shape[0] * b.shape[0]
        wr = a.shape[3] * b.shape[3]
        tensors.append(c.reshape(wl, 2, 2, wr))
    return MPO(tensors)


def layer_to_mpo(
    layer: tuple[tuple[int, int, np.ndarray], ...],
    order: UnrollOrder,
) -> MPO:
    """Build the MPO of one gate layer on the unrolled chain.

    Gate endpoints are lattice qubit indices; they are mapped to chain
    positions and the gate is reindexed when the chain order reverses the
    pair. Gates must act on disjoint qubits.
    """
    n = order.n_sites
    seen: set[int] = set()
    mpo = MPO.identity(n)
    for i, j, gate in layer:
        if i in seen or j in seen or i == j:
            raise ValueError(f"layer gates overlap at qubits ({i}, {j})")
        seen.update((i, j))
        pos_i, pos_j = order.position[i], order.position[j]
        if pos_i < pos_j:
            oriented = gate
            a, b = pos_i, pos_j
        else:
            oriented = (
                gate.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
            )
            a, b = pos_j, pos_i
        mpo = mpo_product(gate_mpo(n, a, b, oriented), mpo)
    return mpo


class MPS:
    """MPS with bond cap ``chi_max`` and singular-value floor ``cutoff``.

    ``truncation_error`` accumulates the discarded weight of every SVD
    (sum over truncations of the discarded squared singular values,
    normalized per truncation); it stays 0 while chi_max never binds.

    During the zip-up contraction the working bond is allowed to grow to
    ``zip_factor * chi_max``: intermediate ranks legitimately exceed the
    final state rank because the MPO tail is not yet applied, and capping
    them at chi_max would discard real weight. The closing sweep enforces
    chi_max where the singular values are genuine Schmidt coefficients.
    """

    def __init__(
        self,
        tensors: list[np.ndarray],
        chi_max: int = 64,
        cutoff: float = 1e-12,
        zip_factor: int = 4,
    ):
        self.tensors = tensors
        self.chi_max = int(chi_max)
        self.cutoff = float(cutoff)
        self.zip_factor = int(zip_factor)
        self.truncation_error = 0.0

    @classmethod
    def from_product(
        cls,
        bits: np.ndarray,
        chi_max: int = 64,
        cutoff: float = 1e-12,
        zip_factor: int = 4,
    ) -> "MPS":
        tensors = []
        for b in bits:
            t = np.zeros((1, 2, 1), dtype=complex)
            t[0, int(b), 0] = 1.0
            tensors.append(t)
        return cls(tensors, chi_max=chi_max, cutoff=cutoff, zip_factor=zip_factor)

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def norm(self) -> float:
        value = np.ones((1, 1), dtype=complex)
        for t in self.tensors:
            value = _transfer(value, t)
        return float(np.sqrt(abs(value[0, 0].real)))

    def copy(self) -> "MPS":
        clone = MPS(
            [t.copy() for t in self.tensors],
            chi_max=self.chi_max,
            cutoff=self.cutoff,
            zip_factor=self.zip_factor,
        )
        clone.truncation_error = self.truncation_error
        return clone

    def apply_1q(self, site: int, gate: np.ndarray) -> None:
        self.tensors[site] = np.einsum("qp,apb->aqb", gate, self.tensors[site])

    def apply_mpo(self, mpo: MPO) -> None:
        if mpo.n_sites != self.n_sites:
            raise ValueError("MPO and MPS lengths differ")
        n = self.n_sites
        new: list[np.ndarray] = []
        zip_cap = self.zip_factor * self.chi_max
        carry = np.ones((1, 1, 1), dtype=complex)  # (new_bond, mps_bond, mpo_bond)
        for i in range(n):
            a, w = self.tensors[i], mpo.tensors[i]
            t1 = np.tensordot(carry, a, axes=([1], [0]))  # (k, w, p, b)
            t2 = np.tensordot(t1, w, axes=([1, 2], [0, 2]))  # (k, b, po, y)
            t = t2.transpose(0, 2, 1, 3)  # (k, po, b, y)
            k = t.shape[0]
            if i == n - 1:
                new.append(t.reshape(k, 2, 1))
                break
            m = t.reshape(k * 2, t.shape[2] * t.shape[3])
            u, s, vh = _svd(m)
            rank = self._keep(s, zip_cap)
            total = float(np.sum(s**2))
            if total > 0:
                self.truncation_error += float(np.sum(s[rank:] ** 2)) / total
            new.append(u[:, :rank].reshape(k, 2, rank))
            carry = (s[:rank, None] * vh[:rank]).reshape(rank, t.shape[2], t.shape[3])
        self.tensors = new
        self._canonicalize()

    def _keep(self, s: np.ndarray, cap: int | None = None) -> int:
        cap = self.chi_max if cap is None else cap
        return max(1, min(cap, int(np.sum(s > self.cutoff))))

    def _canonicalize(self) -> None:
        """Right-to-left SVD sweep: right-canonical form, center at site 0."""
        for i in range(self.n_sites - 1, 0, -1):
            t = self.tensors[i]
            dl = t.shape[0]
            m = t.reshape(dl, -1)
            u, s, vh = _svd(m)
            rank = self._keep(s)
            total = float(np.sum(s**2))
            if total > 0:
                self.truncation_error += float(np.sum(s[rank:] ** 2)) / total
            self.tensors[i] = vh[:rank].reshape(rank, 2, t.shape[2])
            factor = u[:, :rank] * s[:rank]
            self.tensors[i - 1] = np.tensordot(
                self.tensors[i - 1], factor, axes=([2], [0])
            )
        nrm = np.linalg.norm(self.tensors[0])
        if nrm > 0:
            self.tensors[0] = self.tensors[0] / nrm

    def canonical_defect(self) -> float:
        """Max deviation of the right-isometry identities over sites 1..n-1."""
        worst = 0.0
        for t in self.tensors[1:]:
            m = t.reshape(t.shape[0], -1)
            gram = m @ m.conj().T
            worst = max(worst, float(np.max(np.abs(gram - np.eye(t.shape[0])))))
        return worst

    # --- observables (chain indexing) ---

    def expect_z(self, site: int) -> float:
        return self._expect_ops({site: _PAULI_Z})

    def expect_zz(self, site_a: int, site_b: int) -> float:
        if site_a == site_b:
            return 1.0
        return self._expect_ops({site_a: _PAULI_Z, site_b: _PAULI_Z})

    def _expect_ops(self, ops: dict[int, np.ndarray]) -> float:
        last = max(ops)
        env = np.ones((1, 1), dtype=complex)
        for i in range(last + 1):
            env = _transfer(env, self.tensors[i], ops.get(i))
        value = np.trace(env).real / self._norm_sq()
        return float(min(1.0, max(-1.0, value)))

    def per_site_z(self) -> np.ndarray:
        n = self.n_sites
        norm_sq = self._norm_sq()
        values = np.empty(n)
        env = np.ones((1, 1), dtype=complex)
        for i in range(n):
            values[i] = np.trace(_transfer(env, self.tensors[i], _PAULI_Z)).real
            env = _transfer(env, self.tensors[i])
        return np.clip(values / norm_sq, -1.0, 1.0)

    def zz_matrix(self, pairs: list[tuple[int, int]] | None = None) -> np.ndarray:
        """<Z_i Z_j> for chain-position pairs (full matrix when pairs=None)."""
        n = self.n_sites
        norm_sq = self._norm_sq()
        left_envs = [np.ones((1, 1), dtype=complex)]
        for i in range(n - 1):
            left_envs.append(_transfer(left_envs[-1], self.tensors[i]))

        if pairs is None:
            matrix = np.eye(n)
            for i in range(n):
                env = _transfer(left_envs[i], self.tensors[i], _PAULI_Z)
                for j in range(i + 1, n):
                    value = np.trace(_transfer(env, self.tensors[j], _PAULI_Z)).real
                    matrix[i, j] = matrix[j, i] = np.clip(value / norm_sq, -1.0, 1.0)
                    if j < n - 1:
                        env = _transfer(env, self.tensors[j])
            return matrix

        values = np.empty(len(pairs))
        for k, (a, b) in enumerate(pairs):
            i, j = min(a, b), max(a, b)
            if i == j:
                values[k] = 1.0
                continue
            env = _transfer(left_envs[i], self.tensors[i], _PAULI_Z)
            for mid in range(i + 1, j):
                env = _transfer(env, self.tensors[mid])
            value = np.trace(_transfer(env, self.tensors[j], _PAULI_Z)).real
            values[k] = np.clip(value / norm_sq, -1.0, 1.0)
        return values

    def _norm_sq(self) -> float:
        # site 0 carries the norm; the rest is right-canonical
        return float(np.linalg.norm(self.tensors[0]) ** 2)

    def sample_bits(self, shots: int, seed: int) -> np.ndarray:
        """Perfect sampling from the MPS; returns (shots, n) bit array.

        Requires right-canonical form (center at site 0), which apply_mpo
        maintains. Vectorized over shots.
        """
        if shots < 1:
            raise ValueError("shots must be >= 1")
        rng = np.random.default_rng(seed)
        n = self.n_sites
        bits = np.empty((shots, n), dtype=np.uint8)
        t0 = self.tensors[0] / np.linalg.norm(self.tensors[0])
        vec = np.ones((shots, 1), dtype=complex)
        for i in range(n):
            t = self.tensors[i] if i > 0 else t0
            branch0 = vec @ t[:, 0, :]
            branch1 = vec @ t[:, 1, :]
            w0 = np.sum(np.abs(branch0) ** 2, axis=1)
            w1 = np.sum(np.abs(branch1) ** 2, axis=1)
            p1 = w1 / (w0 + w1)
            outcome = (rng.random(shots) < p1).astype(np.uint8)
            bits[:, i] = outcome
            vec = np.where(outcome[:, None] == 1, branch1, branch0)
            scale = np.sqrt(np.where(outcome == 1, w1, w0))
            vec = vec / scale[:, None]
        return bits

    def to_statevector(self) -> np.ndarray:
        """Dense amplitudes in the chain's bit convention (site 0 = bit 0)."""
        if self.n_sites > 20:
            raise ValueError("refusing to densify an MPS with more than 20 sites")
        psi = self.tensors[0][0]  # (2, b)
        for t in self.tensors[1:]:
            psi = np.tensordot(psi, t, axes=([-1], [0]))
        psi = psi[..., 0]  # axes ordered site0..siteN-1
        # match the dense backend: qubit/site 0 is the least significant bit
        return np.transpose(psi, tuple(reversed(range(self.n_sites)))).reshape(-1)


def _transfer(
    env: np.ndarray, tensor: np.ndarray, op: np.ndarray | None = None
) -> np.ndarray:
    t1 = np.tensordot(env, tensor, axes=([0], [0]))  # (bra, p, bk)
    if op is not None:
        t1 = np.einsum("qp,apb->aqb", op, t1)
    return np.tensordot(tensor.conj(), t1, axes=([0, 1], [0, 1])).T  # (bk, bb)


def build_cycle_mpos(cycle: GateSequence, order: UnrollOrder) -> list[MPO]:
    """Per-layer MPOs of one Floquet cycle (reusable across cycles)."""
    return [layer_to_mpo(layer, order) for layer in cycle.layers]


def evolve_cycle_mps(
    mps: MPS,
    cycle: GateSequence,
    order: UnrollOrder,
    layer_mpos: list[MPO] | None = None,
) -> None:
    """Apply one Floquet cycle in place: local kicks, then the three layers.

    Single-qubit kicks act directly on site tensors (exact, no truncation);
    each layer MPO contraction is followed by SVD truncation.
    """
    if layer_mpos is None:
        layer_mpos = build_cycle_mpos(cycle, order)
    for site in range(mps.n_sites):
        mps.apply_1q(site, cycle.kick)
    for mpo in layer_mpos:
        mps.apply_mpo(mpo)


class MPSState:
    """Lattice-indexed view of an MPS evolving under a Floquet cycle.

    Exposes the same observable queries as the dense backend; qubit
    indices are lattice indices, translated internally through the unroll
    order.
    """

    def __init__(
        self,
        state: ProductState,
        order: UnrollOrder,
        chi_max: int = 64,
        cutoff: float = 1e-12,
        zip_factor: int = 4,
    ):
        self.order = order
        bits_chain = state.bits[list(order.qubit_at)]
        self.mps = MPS.from_product(
            bits_chain, chi_max=chi_max, cutoff=cutoff, zip_factor=zip_factor
        )

    @property
    def n_qubits(self) -> int:
        return self.mps.n_sites

    @property
    def truncation_error(self) -> float:
        return self.mps.truncation_error

    def apply_cycle(self, cycle: GateSequence, layer_mpos: list[MPO] | None = None):
        evolve_cycle_mps(self.mps, cycle, self.order, layer_mpos)

    def per_site_z(self) -> np.ndarray:
        chain_values = self.mps.per_site_z()
        return chain_values[list(self.order.position)]

    def expect_z(self, qubit: int) -> float:
        return self.mps.expect_z(self.order.position[qubit])

    def expect_zz(self, qubit_a: int, qubit_b: int) -> float:
        return self.mps.expect_zz(
            self.order.position[qubit_a], self.order.position[qubit_b]
        )

    def zz_pairs(self, pairs: list[tuple[int, int]]) -> np.ndarray:
        chain_pairs = [
            (self.order.position[i], self.order.position[j]) for i, j in pairs
        ]
        return self.mps.zz_matrix(chain_pairs)

    def zz_matrix(self) -> np.ndarray:
        chain_matrix = self.mps.zz_matrix()
        perm = list(self.order.position)
        return chain_matrix[np.ix_(perm, perm)]

    def sample_bits(self, shots: int, seed: int) -> np.ndarray:
        chain_bits = self.mps.sample_bits(shots, seed)
        return chain_bits[:, list(self.order.position)]
