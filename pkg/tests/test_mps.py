import numpy as np
import pytest

from dtc2d import (
    FloquetParams,
    build_cycle,
    neel_state,
    sample_disorder,
    unroll,
)
from dtc2d.exact import StateVector
from dtc2d.mps import (
    MPO,
    MPS,
    MPSState,
    build_cycle_mpos,
    gate_mpo,
    layer_to_mpo,
    mpo_product,
)
from dtc2d.observables import chi, chi_from_matrix, delta, qfi


def chain_statevector_from_lattice(sv: StateVector, order) -> np.ndarray:
    """Permute dense amplitudes from lattice to chain qubit ordering."""
    n = sv.n_qubits
    idx = np.arange(2**n)
    chain_idx = np.zeros_like(idx)
    for pos, qubit in enumerate(order.qubit_at):
        chain_idx |= ((idx >> qubit) & 1) << pos
    out = np.zeros_like(sv.amplitudes)
    out[chain_idx] = sv.amplitudes
    return out


def random_gate(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q, _ = np.linalg.qr(m)
    return q


class TestMPOConstruction:
    def test_single_gate_bond_is_four(self):
        mpo = gate_mpo(6, 1, 4, random_gate(0))
        assert max(mpo.bond_dims) == 4

    def test_empty_layer_is_identity(self, hexagon_order):
        mpo = layer_to_mpo((), hexagon_order)
        assert all(b == 1 for b in mpo.bond_dims)
        for t in mpo.tensors:
            np.testing.assert_allclose(t[0, :, :, 0], np.eye(2), atol=1e-15)

    def test_overlap_rejected(self, hexagon_order):
        g = random_gate(1)
        with pytest.raises(ValueError):
            layer_to_mpo(((0, 1, g), (1, 2, g)), hexagon_order)

    def test_layer_mpo_matches_dense_action(self, hexagon, hexagon_order, dtc_cycle):
        s0 = neel_state(hexagon)
        for layer_gates in dtc_cycle.layers:
            mpo = layer_to_mpo(layer_gates, hexagon_order)
            state = MPSState(s0, hexagon_order, chi_max=256)
            state.mps.apply_mpo(mpo)
            sv = StateVector.from_product(s0)
            for i, j, gate in layer_gates:
                sv.apply_2q(i, j, gate)
            expected = chain_statevector_from_lattice(sv, hexagon_order)
            np.testing.assert_allclose(
                state.mps.to_statevector(), expected, atol=1e-10
            )

    def test_bond_dims_bounded_by_overlap_count(self, lattice_2x2):
        order = unroll(lattice_2x2)
        disorder = sample_disorder(lattice_2x2, seed=2)
        cycle = build_cycle(lattice_2x2, disorder, FloquetParams(0.3, 0.25 * np.pi))
        worst = 0
        for layer_gates in cycle.layers:
            mpo = layer_to_mpo(layer_gates, order)
            spans = [
                sorted((order.position[i], order.position[j]))
                for i, j, _ in layer_gates
            ]
            for cut, bond in enumerate(mpo.bond_dims):
                overlap = sum(1 for a, b in spans if a <= cut < b)
                assert bond <= 4**overlap
            worst = max(worst, max(mpo.bond_dims))
        assert worst <= 64  # 2x2 lattice: worst layer fits in bond 64

    def test_mpo_product_composes(self):
        a, b = random_gate(3), random_gate(4)
        mpo = mpo_product(gate_mpo(2, 0, 1, a), gate_mpo(2, 0, 1, b))
        dense = np.einsum("apqr,rstu->apsqtu", mpo.tensors[0], mpo.tensors[1])[
            0, :, :, :, :, 0
        ].reshape(4, 4)
        np.testing.assert_allclose(dense, a @ b, atol=1e-12)


class TestApplyMPO:
    def test_identity_leaves_state_unchanged(self, hexagon, hexagon_order, dtc_cycle):
        state = MPSState(neel_state(hexagon), hexagon_order, chi_max=64)
        state.apply_cycle(dtc_cycle)
        before = state.mps.to_statevector()
        state.mps.apply_mpo(MPO.identity(12))
        np.testing.assert_allclose(state.mps.to_statevector(), before, atol=1e-12)

    def test_chi_one_reports_truncation(self, hexagon_order):
        bits = np.zeros(12, dtype=np.uint8)
        mps = MPS.from_product(bits, chi_max=1)
        kick = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        for site in range(12):
            mps.apply_1q(site, kick)
        entangler = gate_mpo(12, 0, 1, random_gate(5))
        mps.apply_mpo(entangler)
        assert mps.truncation_error > 0

    def test_no_truncation_when_chi_unbinding(self, hexagon, hexagon_order, dtc_cycle):
        state = MPSState(neel_state(hexagon), hexagon_order, chi_max=256)
        for _ in range(3):
            state.apply_cycle(dtc_cycle)
        assert state.truncation_error < 1e-20

    def test_truncation_error_monotone(self, hexagon, hexagon_order, dtc_cycle):
        state = MPSState(neel_state(hexagon), hexagon_order, chi_max=4)
        errors = []
        for _ in range(6):
            state.apply_cycle(dtc_cycle)
            errors.append(state.truncation_error)
        assert all(b >= a for a, b in zip(errors, errors[1:]))
        assert errors[-1] > 0

    def test_canonical_form_after_evolution(self, hexagon, hexagon_order, dtc_cycle):
        state = MPSState(neel_state(hexagon), hexagon_order, chi_max=16)
        for _ in range(4):
            state.apply_cycle(dtc_cycle)
        assert state.mps.canonical_defect() < 1e-10
        assert abs(state.mps.norm() - 1.0) < 1e-8

    def test_bond_cap_respected(self, hexagon, hexagon_order, dtc_cycle):
        state = MPSState(neel_state(hexagon), hexagon_order, chi_max=8)
        for _ in range(5):
            state.apply_cycle(dtc_cycle)
        assert max(state.mps.bond_dims) <= 8


class TestCliffordEvolution:
    @pytest.mark.parametrize("chi_max", [1, 16])
    def test_flip_point_period_doubling(self, hexagon, hexagon_order, chi_max):
        s0 = neel_state(hexagon)
        disorder = sample_disorder(hexagon, seed=3)
        cycle = build_cycle(hexagon, disorder, FloquetParams(0.0, np.pi / 2))
        mpos = build_cycle_mpos(cycle, hexagon_order)
        state = MPSState(s0, hexagon_order, chi_max=chi_max)
        for t in range(1, 7):
            state.apply_cycle(cycle, mpos)
            value = delta(state.per_site_z(), s0.spins)
            assert abs(value - (-1.0) ** t) < 1e-12


class TestOracleEquivalence:
    def test_random_points_match_exact(self, hexagon, hexagon_order):
        # chain cap 2^(N/2) makes the MPS exact on 12 qubits
        s0 = neel_state(hexagon)
        disorder = sample_disorder(hexagon, seed=13)
        rng = np.random.default_rng(21)
        for _ in range(5):
            params = FloquetParams(rng.uniform(0, 0.4), rng.uniform(0, np.pi / 2))
            cycle = build_cycle(hexagon, disorder, params)
            mpos = build_cycle_mpos(cycle, hexagon_order)
            sv = StateVector.from_product(s0)
            state = MPSState(s0, hexagon_order, chi_max=64)
            for _ in range(10):
                sv.apply_cycle(cycle)
                state.apply_cycle(cycle, mpos)
            z_e, z_m = sv.per_site_z(), state.per_site_z()
            assert np.max(np.abs(z_e - z_m)) < 1e-8
            zz_e, zz_m = sv.zz_matrix(), state.zz_matrix()
            assert np.max(np.abs(zz_e - zz_m)) < 1e-8
            edges = list(hexagon.edges)
            chi_e = chi(np.array([zz_e[i, j] for i, j in edges]))
            chi_m = chi(state.zz_pairs(edges))
            assert abs(chi_e - chi_m) < 1e-8
            assert abs(chi_from_matrix(zz_e) - chi_from_matrix(zz_m)) < 1e-8
            assert abs(qfi(z_e, zz_e, s0.spins) - qfi(z_m, zz_m, s0.spins)) < 1e-8


class TestExpectations:
    def test_product_state_recovery(self, hexagon, hexagon_order):
        s0 = neel_state(hexagon)
        state = MPSState(s0, hexagon_order, chi_max=4)
        np.testing.assert_array_equal(state.per_site_z(), s0.spins)
        for i, j in hexagon.edges:
            assert state.expect_zz(i, j) == s0.spins[i] * s0.spins[j]

    def test_single_site_matches_sweep(self, hexagon, hexagon_order, dtc_cycle):
        state = MPSState(neel_state(hexagon), hexagon_order, chi_max=64)
        state.apply_cycle(dtc_cycle)
        z = state.per_site_z()
        for q in (0, 5, 11):
            assert abs(state.expect_z(q) - z[q]) < 1e-12


class TestSampling:
    def test_product_state_sampling(self, hexagon, hexagon_order):
        s0 = neel_state(hexagon)
        state = MPSState(s0, hexagon_order, chi_max=4)
        bits = state.sample_bits(shots=64, seed=1)
        np.testing.assert_array_equal(bits, np.tile(s0.bits, (64, 1)))

    def test_statistics_match_exact(self, hexagon, hexagon_order, dtc_cycle):
        s0 = neel_state(hexagon)
        sv = StateVector.from_product(s0)
        state = MPSState(s0, hexagon_order, chi_max=64)
        for _ in range(2):
            sv.apply_cycle(dtc_cycle)
            state.apply_cycle(dtc_cycle)
        shots = 40_000
        bits = state.sample_bits(shots=shots, seed=8)
        z_hat = 1.0 - 2.0 * bits.mean(axis=0)
        assert np.max(np.abs(z_hat - sv.per_site_z())) < 4.0 / np.sqrt(shots)
