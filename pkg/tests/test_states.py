import numpy as np
import pytest

from ionbell.states import (
    BASIS_LABELS,
    KrausChannel,
    TwoQubitState,
    apply_channel,
    basis_index,
    bell_state,
    best_phase,
    f_min,
    fidelity_vs_bell,
    format_density_matrix,
    is_entangled_ppt,
    parse_density_matrix,
    partial_transpose,
    random_physical_matrices,
    random_physical_state,
    state_fidelity,
    werner_state,
)


def raw_bell_matrix(phase):
    """Oracle: build the density matrix by hand from the ket."""
    ket = np.zeros(4, dtype=complex)
    ket[1] = 1 / np.sqrt(2)
    ket[2] = np.exp(1j * phase) / np.sqrt(2)
    return np.outer(ket, ket.conj())


def raw_werner_matrix(p, phase=0.0):
    return p * raw_bell_matrix(phase) + (1 - p) * np.eye(4) / 4


class TestBasis:
    def test_four_labels_fixed_order(self):
        assert BASIS_LABELS == ("00", "01", "10", "11")
        assert [basis_index(lbl) for lbl in BASIS_LABELS] == [0, 1, 2, 3]

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            basis_index("02")


class TestTwoQubitState:
    def test_matrix_is_read_only(self):
        state = bell_state(0.0)
        with pytest.raises(ValueError):
            state.matrix[0, 0] = 1.0

    def test_rejects_non_hermitian(self):
        mat = np.eye(4, dtype=complex) / 4
        mat[0, 1] = 1e-6
        with pytest.raises(ValueError, match="Hermitian"):
            TwoQubitState(mat)

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValueError, match="trace"):
            TwoQubitState(np.eye(4) / 2)

    def test_rejects_negative_eigenvalue(self):
        mat = np.diag([0.6, 0.5, -0.1, 0.0]).astype(complex)
        with pytest.raises(ValueError, match="positive"):
            TwoQubitState(mat)

    def test_element_by_label(self):
        state = bell_state(0.0)
        assert state.element("01", "10") == pytest.approx(0.5)


class TestBellState:
    @pytest.mark.parametrize("phase", [0.0, np.pi, np.pi / 2, 0.7, -2.3])
    def test_matches_raw_construction(self, phase):
        np.testing.assert_allclose(bell_state(phase).matrix, raw_bell_matrix(phase), atol=1e-15)

    def test_phase_zero_coherence(self):
        assert bell_state(0.0).element("01", "10") == pytest.approx(0.5)

    def test_phase_pi_flips_sign(self):
        assert bell_state(np.pi).element("01", "10").real == pytest.approx(-0.5)

    def test_phase_half_pi_is_imaginary(self):
        coh = bell_state(np.pi / 2).element("01", "10")
        assert abs(coh) == pytest.approx(0.5)
        assert coh.real == pytest.approx(0.0, abs=1e-15)

    def test_outside_block_empty(self):
        mat = bell_state(1.3).matrix
        assert np.all(np.abs(mat[0]) < 1e-15)
        assert np.all(np.abs(mat[3]) < 1e-15)

    def test_infinite_phase_rejected(self):
        with pytest.raises(ValueError):
            bell_state(np.inf)


class TestFidelity:
    def test_self_fidelity_is_one(self):
        assert fidelity_vs_bell(bell_state(0.0), 0.0) == pytest.approx(1.0)

    def test_maximally_mixed_quarter(self):
        mixed = TwoQubitState(np.eye(4) / 4)
        for phase in (0.0, 1.0, np.pi):
            assert fidelity_vs_bell(mixed, phase) == pytest.approx(0.25)

    def test_werner_08_against_matrix_oracle(self):
        # direct 4x4 arithmetic: F = <psi| rho |psi>
        rho = raw_werner_matrix(0.8)
        ket = np.zeros(4, dtype=complex)
        ket[1] = ket[2] = 1 / np.sqrt(2)
        oracle = float(np.real(ket.conj() @ rho @ ket))
        assert oracle == pytest.approx(0.85)
        assert fidelity_vs_bell(werner_state(0.8), 0.0) == pytest.approx(oracle)

    def test_formula_on_random_states(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            state = random_physical_state(rng)
            phase = rng.uniform(-np.pi, np.pi)
            ket = np.zeros(4, dtype=complex)
            ket[1] = 1 / np.sqrt(2)
            ket[2] = np.exp(1j * phase) / np.sqrt(2)
            oracle = float(np.real(ket.conj() @ state.matrix @ ket))
            assert fidelity_vs_bell(state, phase) == pytest.approx(oracle, abs=1e-12)


class TestFMin:
    @pytest.mark.parametrize("phase", [0.0, 1.0, -2.5, np.pi])
    def test_bell_state_is_one(self, phase):
        assert f_min(bell_state(phase)) == pytest.approx(1.0)

    def test_maximally_mixed_zero(self):
        assert f_min(TwoQubitState(np.eye(4) / 4)) == 0.0

    def test_werner_08(self):
        oracle = 2 * abs(raw_werner_matrix(0.8)[1, 2])
        assert oracle == pytest.approx(0.8)
        assert f_min(werner_state(0.8)) == pytest.approx(0.8)


class TestBestPhase:
    def test_recovers_preparation_phase(self):
        assert best_phase(bell_state(0.7)) == pytest.approx(0.7)

    def test_zero_coherence_convention(self):
        assert best_phase(TwoQubitState(np.eye(4) / 4)) == 0.0

    def test_after_deterministic_phase_evolution(self):
        # 30 Hz for 1/60 s advances the phase by pi
        from ionbell.channels import NoiseConfig, deterministic_phase

        state = apply_channel(bell_state(0.0), deterministic_phase(1 / 60, NoiseConfig()))
        assert best_phase(state) == pytest.approx(np.pi)

    def test_maximises_fidelity(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            state = random_physical_state(rng)
            opt = fidelity_vs_bell(state, best_phase(state))
            for phase in rng.uniform(-np.pi, np.pi, 10):
                assert opt >= fidelity_vs_bell(state, phase) - 1e-12


class TestApplyChannel:
    def test_identity_channel(self):
        chan = KrausChannel(np.eye(4, dtype=complex)[None])
        state = werner_state(0.6, 1.2)
        np.testing.assert_allclose(apply_channel(state, chan).matrix, state.matrix, atol=1e-15)

    def test_full_dephasing_keeps_diagonal(self):
        projectors = np.zeros((4, 4, 4), dtype=complex)
        for k in range(4):
            projectors[k, k, k] = 1.0
        out = apply_channel(bell_state(0.0), KrausChannel(projectors))
        np.testing.assert_allclose(out.matrix, np.diag([0, 0.5, 0.5, 0]), atol=1e-15)

    def test_rejects_non_trace_preserving(self):
        bad = np.zeros((1, 4, 4), dtype=complex)
        bad[0] = np.eye(4) * 0.9
        with pytest.raises(ValueError, match="trace preserving"):
            KrausChannel(bad)

    def test_trace_and_hermiticity_preserved(self):
        rng = np.random.default_rng(5)
        from ionbell.channels import NoiseConfig, spontaneous_decay_sd

        chan = spontaneous_decay_sd(0.4, NoiseConfig())
        for _ in range(20):
            out = apply_channel(random_physical_state(rng), chan)
            assert abs(out.matrix.trace() - 1) < 1e-12
            assert np.max(np.abs(out.matrix - out.matrix.conj().T)) < 1e-12


class TestPartialTransposeWitness:
    def test_bell_entangled(self):
        assert is_entangled_ppt(bell_state(0.0))

    def test_maximally_mixed_separable(self):
        assert not is_entangled_ppt(TwoQubitState(np.eye(4) / 4))

    def test_werner_threshold(self):
        # Analytic eigenvalues of the partial transpose: min is (1 - 3p)/4.
        for p in (0.5, 0.4, 0.34):
            singlet_min = (1 - 3 * p) / 4
            eigs = np.linalg.eigvalsh(partial_transpose(raw_werner_matrix(p)))
            assert eigs[0] == pytest.approx(singlet_min, abs=1e-12)
            assert is_entangled_ppt(werner_state(p)) == (p > 1 / 3)
        assert not is_entangled_ppt(werner_state(1 / 3))

    def test_partial_transpose_moves_coherence(self):
        mat = raw_bell_matrix(0.0)
        pt = partial_transpose(mat)
        assert pt[0, 3] == pytest.approx(mat[1, 2])
        assert pt[1, 2] == pytest.approx(0.0)


class TestBoundTheorem:
    def test_best_phase_fidelity_dominates_bound(self):
        rng = np.random.default_rng(42)
        mats = random_physical_matrices(rng, 10_000)
        diag_part = (mats[:, 1, 1].real + mats[:, 2, 2].real) / 2
        bound = 2 * np.abs(mats[:, 1, 2])
        best = diag_part + np.abs(mats[:, 1, 2])
        assert np.all(best >= bound)

    def test_entangled_when_bound_exceeds_half(self):
        rng = np.random.default_rng(43)
        found = 0
        while found < 1000:
            weight = rng.uniform(0.3, 1.0)
            state = TwoQubitState(
                weight * raw_bell_matrix(rng.uniform(0, 2 * np.pi))
                + (1 - weight) * random_physical_matrices(rng, 1)[0]
            )
            if f_min(state) > 0.5:
                found += 1
                assert is_entangled_ppt(state)


class TestStateFidelity:
    def test_identical_states(self):
        state = werner_state(0.7)
        assert state_fidelity(state, state) == pytest.approx(1.0)

    def test_pure_state_overlap(self):
        a = bell_state(0.0)
        b = bell_state(np.pi / 3)
        ket_a = np.array([0, 1, 1, 0]) / np.sqrt(2)
        ket_b = np.array([0, 1, np.exp(1j * np.pi / 3), 0]) / np.sqrt(2)
        assert state_fidelity(a, b) == pytest.approx(abs(np.vdot(ket_a, ket_b)) ** 2)

    def test_orthogonal_states(self):
        a = TwoQubitState(np.diag([1.0, 0, 0, 0]))
        b = TwoQubitState(np.diag([0, 0, 0, 1.0]))
        assert state_fidelity(a, b) == pytest.approx(0.0, abs=1e-12)


class TestRandomStates:
    def test_batch_is_physical(self):
        rng = np.random.default_rng(9)
        mats = random_physical_matrices(rng, 500)
        traces = np.trace(mats, axis1=1, axis2=2)
        np.testing.assert_allclose(traces.real, 1.0, atol=1e-12)
        for mat in mats[:50]:
            assert np.linalg.eigvalsh(mat)[0] > -1e-12

    def test_generically_full_rank(self):
        rng = np.random.default_rng(10)
        mats = random_physical_matrices(rng, 100)
        ranks = [np.sum(np.linalg.eigvalsh(m) > 1e-9) for m in mats]
        assert all(r == 4 for r in ranks)


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(12)
        state = random_physical_state(rng)
        again = parse_density_matrix(format_density_matrix(state))
        np.testing.assert_allclose(again.matrix, state.matrix, atol=1e-15)

    def test_bell_golden_text(self):
        text = format_density_matrix(bell_state(0.0))
        lines = text.splitlines()
        assert len(lines) == 4
        assert lines[0].split() == ["0+0j"] * 4
        assert lines[1].split()[1] == "0.5+0j"
        assert lines[1].split()[2] == "0.5+0j"

    def test_rejects_malformed_text(self):
        with pytest.raises(ValueError):
            parse_density_matrix("1+0j 0+0j\n0+0j 0+0j\n")
