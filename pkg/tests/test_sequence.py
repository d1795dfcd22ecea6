import numpy as np
import pytest

from ionbell.channels import NoiseConfig
from ionbell.sequence import (
    ENCODING_OPTICAL,
    ENCODING_ZEEMAN,
    PulseSpec,
    analysis_rotation,
    format_log,
    prepare_bell,
    replay,
    rotation_matrix,
    single_qubit_rotation,
    transfer_to_dfs,
    white_noise_weight,
)
from ionbell.states import (
    TwoQubitState,
    bell_state,
    f_min,
    fidelity_vs_bell,
)

CFG = NoiseConfig()


def ground_state():
    return TwoQubitState(np.diag([1.0, 0, 0, 0]))


class TestPulseSpec:
    def test_valid(self):
        PulseSpec(ion=1, theta=np.pi, phase=0.0, kind="carrier_sd")

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"ion": 3, "theta": 1.0, "phase": 0.0},
            {"ion": 1, "theta": -0.1, "phase": 0.0},
            {"ion": 1, "theta": 7.0, "phase": 0.0},
            {"ion": 1, "theta": 1.0, "phase": 0.0, "kind": "raman"},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            PulseSpec(**kwargs)


class TestSingleQubitRotation:
    def test_zero_angle_is_identity(self):
        state = bell_state(0.2)
        out = single_qubit_rotation(state, PulseSpec(ion=1, theta=0.0, phase=0.3))
        np.testing.assert_allclose(out.matrix, state.matrix, atol=1e-15)

    def test_pi_pulse_flips_ion1(self):
        out = single_qubit_rotation(ground_state(), PulseSpec(ion=1, theta=np.pi, phase=0.0))
        assert out.populations[2] == pytest.approx(1.0)

    def test_pi_pulse_flips_ion2(self):
        out = single_qubit_rotation(ground_state(), PulseSpec(ion=2, theta=np.pi, phase=0.0))
        assert out.populations[1] == pytest.approx(1.0)

    def test_two_half_pulses_compose_to_pi(self):
        half = PulseSpec(ion=1, theta=np.pi / 2, phase=0.7)
        full = PulseSpec(ion=1, theta=np.pi, phase=0.7)
        twice = single_qubit_rotation(single_qubit_rotation(ground_state(), half), half)
        once = single_qubit_rotation(ground_state(), full)
        np.testing.assert_allclose(twice.matrix, once.matrix, atol=1e-14)

    def test_rotation_matrix_convention(self):
        # R(theta, phase) = exp(-i theta (cos X + sin Y)/2), checked elementwise
        theta, phase = 0.9, 1.3
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        y = np.array([[0, -1j], [1j, 0]], dtype=complex)
        gen = np.cos(phase) * x + np.sin(phase) * y
        vals, vecs = np.linalg.eigh(gen)
        expm = (vecs * np.exp(-1j * theta * vals / 2)) @ vecs.conj().T
        np.testing.assert_allclose(rotation_matrix(theta, phase), expm, atol=1e-12)


class TestPrepareBell:
    def test_perfect_preparation(self):
        result = prepare_bell(CFG.replace(prep_fidelity=1.0))
        np.testing.assert_allclose(result.state.matrix, bell_state(0.0).matrix, atol=1e-15)

    def test_default_fidelity_exact(self):
        result = prepare_bell(CFG)
        assert fidelity_vs_bell(result.state, 0.0) == pytest.approx(0.96, abs=1e-12)

    def test_bound_matches_matrix_arithmetic(self):
        # Oracle: the white-noise mixture reaching fidelity F has weight
        # (4F-1)/3 and coherence weight/2, checked by direct construction.
        fid = 0.96
        w = (4 * fid - 1) / 3
        bell = np.zeros((4, 4), dtype=complex)
        bell[1, 1] = bell[2, 2] = bell[1, 2] = bell[2, 1] = 0.5
        raw = w * bell + (1 - w) * np.eye(4) / 4
        oracle = 2 * abs(raw[1, 2])
        assert oracle == pytest.approx(w)
        result = prepare_bell(CFG)
        assert f_min(result.state) == pytest.approx(oracle, abs=1e-12)
        np.testing.assert_allclose(result.state.matrix, raw, atol=1e-12)

    def test_white_noise_weight_formula(self):
        assert white_noise_weight(1.0) == pytest.approx(1.0)
        assert white_noise_weight(0.25) == pytest.approx(0.0)

    def test_rejects_fidelity_below_white_noise_floor(self):
        with pytest.raises(ValueError, match="white-noise"):
            prepare_bell(NoiseConfig(prep_fidelity=0.1))

    @pytest.mark.parametrize("fid", [1.01, -0.3])
    def test_config_rejects_out_of_range_fidelity(self, fid):
        with pytest.raises(ValueError):
            NoiseConfig(prep_fidelity=fid)

    def test_log_records_three_symbolic_pulses(self):
        result = prepare_bell(CFG)
        pulses = [e for e in result.log if e.op == "pulse"]
        assert len(pulses) == 3
        assert all(e.symbolic for e in pulses)
        assert result.encoding == ENCODING_OPTICAL


class TestTransfer:
    def test_lossless_transfer_preserves_state(self):
        cfg = CFG.replace(transfer_loss=0.0)
        prepared = prepare_bell(cfg)
        out = transfer_to_dfs(prepared, cfg)
        np.testing.assert_allclose(out.state.matrix, prepared.state.matrix, atol=1e-15)
        assert out.encoding == ENCODING_ZEEMAN

    def test_default_ladder(self):
        out = transfer_to_dfs(prepare_bell(CFG), CFG)
        assert fidelity_vs_bell(out.state, 0.0) == pytest.approx(0.89, abs=1e-12)

    def test_end_to_end_lossless_is_unit_fidelity(self):
        cfg = CFG.replace(prep_fidelity=1.0, transfer_loss=0.0)
        out = transfer_to_dfs(prepare_bell(cfg), cfg)
        assert fidelity_vs_bell(out.state, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_double_transfer_rejected(self):
        out = transfer_to_dfs(prepare_bell(CFG), CFG)
        with pytest.raises(ValueError, match="optical"):
            transfer_to_dfs(out, CFG)

    def test_loss_below_white_noise_floor_rejected(self):
        cfg = CFG.replace(prep_fidelity=0.3, transfer_loss=0.2)
        with pytest.raises(ValueError, match="floor"):
            transfer_to_dfs(prepare_bell(cfg), cfg)


class TestReplay:
    def test_log_replays_bit_exactly(self):
        out = transfer_to_dfs(prepare_bell(CFG), CFG)
        replayed = replay(out.log)
        assert np.array_equal(replayed.matrix, out.state.matrix)

    def test_prepare_only_log(self):
        result = prepare_bell(CFG.replace(prep_fidelity=0.8))
        assert np.array_equal(replay(result.log).matrix, result.state.matrix)

    def test_log_serialises_line_per_step(self):
        out = transfer_to_dfs(prepare_bell(CFG), CFG)
        text = format_log(out.log)
        lines = text.strip().splitlines()
        assert len(lines) == len(out.log)
        assert lines[0].startswith("pulse ion=1")
        assert any(line.startswith("white_noise_mix") for line in lines)

    def test_unknown_entry_rejected(self):
        from ionbell.sequence import LogEntry

        with pytest.raises(ValueError):
            replay((LogEntry("warp", ()),))


class TestAnalysisRotation:
    def test_ideal_pulses_at_zero_delay(self):
        state = bell_state(0.0)
        out = analysis_rotation(state, 0.0, 0.0, 0.0, CFG.replace(nbar0=0.0))
        # ideal pi/2 pulses on both ions of the entangled pair keep parity 1
        parity = out.populations @ np.array([1.0, -1.0, -1.0, 1.0])
        assert parity == pytest.approx(1.0, abs=1e-12)

    def test_uniform_populations_from_ground(self):
        # Oracle: direct matrix computation of R(pi/2,0) x R(pi/2,0) |00>
        r = rotation_matrix(np.pi / 2, 0.0)
        u = np.kron(r, r)
        oracle = np.abs(u[:, 0]) ** 2
        np.testing.assert_allclose(oracle, [0.25] * 4, atol=1e-12)
        out = analysis_rotation(ground_state(), 0.0, 0.0, 0.0, CFG)
        np.testing.assert_allclose(out.populations, [0.25] * 4, atol=1e-12)

    def test_deficit_reduces_fringe_amplitude(self):
        state = bell_state(0.0)
        signs = np.array([1.0, -1.0, -1.0, 1.0])
        ideal = analysis_rotation(state, 0.0, 0.0, 0.0, CFG).populations @ signs
        cfg_hot = CFG.replace(lamb_dicke=0.12)
        degraded = analysis_rotation(state, 0.0, 0.0, 20.0, cfg_hot).populations @ signs
        assert degraded < ideal - 1e-3
