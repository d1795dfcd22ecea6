"""Scenario orchestration: the delay-scan decay experiment, the Gaussian
decay fit, heating calibration and flat-file report emission.

Monte Carlo model of one delay point: the post-transfer state is evolved
through the closed-form noise channels for the delay, then every
simulated experimental cycle draws one slow-drift detuning and adds its
phase (plus the deterministic gradient phase) to the surviving coherence.
Analysis pulses used for the estimate are degraded by the heating-induced
angle deficit at that delay, while the reconstruction keeps assuming
ideal pulses, exactly like the lab analysis would.

Randomness: a scenario's single seed spawns one detuning stream and one
measurement stream per delay point, so points are independent, results
are reproducible, and the detuning streams are shared between the two
estimation modes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ._backend import kernels
from .channels import (
    NoiseConfig,
    analysis_pulse_error,
    bitflip_scattering,
    collision_depolarizing,
    detuning_sigma_hz,
    gaussian_gradient_dephasing,
    phase_unitary,
)
from .sequence import prepare_bell, transfer_to_dfs, two_ion_rotation
from .states import (
    IDX_01,
    IDX_10,
    TwoQubitState,
    apply_channel,
    bell_state,
    best_phase,
    f_min,
    fidelity_vs_bell,
)
from .tomo import (
    PARITY_SIGNS,
    MeasurementRecord,
    all_settings,
    apply_readout_error,
    estimate_fmin_parity,
    fit_parity_curve,
    measurement_effects,
    mle_reconstruct_full,
    parity_design_matrix,
    setting_unitary,
    simulate_counts,
)

DEFAULT_SEED = 7

DEFAULT_DELAYS_S = (0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0)

#: Relative analysis phases of the parity scan (13 points spanning 2*pi).
DEFAULT_PHASE_POINTS = 13

MODES = ("full_tomography", "parity_fmin")

_MODE_STREAM = {"full_tomography": 1, "parity_fmin": 2}


class ConfigError(Exception):
    """Malformed or unknown configuration input."""


class NumericalError(Exception):
    """A numerical procedure failed to produce a usable result."""


@dataclass(frozen=True)
class Scenario:
    """Everything needed to run one decay experiment."""

    noise: NoiseConfig = NoiseConfig()
    delays_s: tuple[float, ...] = DEFAULT_DELAYS_S
    shots_per_setting: int = 50
    cycles_per_point: int = 200
    mode: str = "parity_fmin"
    seed: int = DEFAULT_SEED
    phase_points: int = DEFAULT_PHASE_POINTS
    n_bootstrap: int = 200
    fit_offset: bool = False
    fix_phase_from_gradient: bool = False

    def __post_init__(self):
        delays = tuple(float(t) for t in self.delays_s)
        if any(t < 0 for t in delays):
            raise ValueError("delays must be nonnegative")
        if list(delays) != sorted(delays):
            raise ValueError("delays must be sorted ascending")
        object.__setattr__(self, "delays_s", delays)
        if self.shots_per_setting < 1 or self.cycles_per_point < 1:
            raise ValueError("shots_per_setting and cycles_per_point must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.phase_points < 4:
            raise ValueError("phase_points must be >= 4")

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)

    @property
    def phase_grid(self) -> np.ndarray:
        return np.linspace(0.0, 2.0 * np.pi, self.phase_points)


@dataclass(frozen=True)
class DecayCurve:
    """Fidelity-bound estimates over the delay grid."""

    times_s: tuple[float, ...]
    fmin: tuple[float, ...]
    stderr: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.times_s) == len(self.fmin) == len(self.stderr)):
            raise ValueError("times, fmin and stderr must have equal length")
        times = tuple(float(t) for t in self.times_s)
        if list(times) != sorted(times):
            raise ValueError("rows must be sorted by time")
        for value, err in zip(self.fmin, self.stderr):
            if np.isnan(value) and np.isinf(err):
                continue  # flagged failed point
            if err < 0:
                raise ValueError("stderr must be nonnegative")
            if not 0.0 <= value <= 1.0 + 3.0 * err:
                raise ValueError(f"fmin value {value} outside [0, 1 + 3*stderr]")
        object.__setattr__(self, "times_s", times)
        object.__setattr__(self, "fmin", tuple(float(v) for v in self.fmin))
        object.__setattr__(self, "stderr", tuple(float(e) for e in self.stderr))

    def __len__(self) -> int:
        return len(self.times_s)


@dataclass(frozen=True)
class FitResult:
    """Gaussian decay fit ``f(t) = A exp(-(t/tau)^2)``."""

    amplitude: float
    tau_s: float
    tau_stderr_s: float
    residual_rms: float

    def __post_init__(self):
        if self.tau_s <= 0:
            raise ValueError("tau_s must be positive")


# ---------------------------------------------------------------------------
# True-state evolution (ensemble picture).

def post_transfer_state(cfg: NoiseConfig) -> TwoQubitState:
    """Prepared pair after the transfer into the protected encoding."""
    return transfer_to_dfs(prepare_bell(cfg), cfg).state


def base_state_at(t: float, cfg: NoiseConfig) -> TwoQubitState:
    """Post-transfer state after the phase-independent channels at delay ``t``.

    Scattering and collisions act here; the gradient phases (deterministic
    and sampled) are applied afterwards, which is exact because the
    post-transfer coherence is real.
    """
    state = post_transfer_state(cfg)
    if cfg.scattering_rate_per_s > 0:
        state = apply_channel(state, bitflip_scattering(t, cfg))
    if cfg.collision_rate_per_s > 0:
        state = apply_channel(state, collision_depolarizing(t, cfg))
    return state


def true_state_at(t: float, cfg: NoiseConfig) -> TwoQubitState:
    """Cycle-averaged state at delay ``t`` (gradient drift taken as its
    closed-form ensemble map, deterministic phase included)."""
    state = apply_channel(base_state_at(t, cfg), gaussian_gradient_dephasing(t, cfg))
    u = phase_unitary(2.0 * np.pi * cfg.gradient_hz * t)
    return TwoQubitState(u @ state.matrix @ u.conj().T)


# ---------------------------------------------------------------------------
# One delay point of the decay experiment.

def _split_coherence(matrix: np.ndarray) -> tuple[np.ndarray, complex]:
    """Split off the entangled-pair coherence: ``rho = rest + z M + conj(z) M^+``."""
    rest = np.array(matrix, dtype=np.complex128)
    z = complex(rest[IDX_01, IDX_10])
    rest[IDX_01, IDX_10] = 0.0
    rest[IDX_10, IDX_01] = 0.0
    return rest, z


def _phase_scan_probabilities(
    rho_rest: np.ndarray,
    coherences: np.ndarray,
    unitaries: np.ndarray,
    readout_error: float,
) -> np.ndarray:
    """Outcome probabilities, shape (cycles, n_unitaries, 4).

    Valid because each cycle state differs only in the phase of the
    single surviving coherence ``z_c``.
    """
    base = np.einsum("uij,jk,uik->ui", unitaries, rho_rest, unitaries.conj()).real
    coupling = unitaries[:, :, IDX_01] * unitaries[:, :, IDX_10].conj()
    probs = base[None, :, :] + 2.0 * np.real(coherences[:, None, None] * coupling[None, :, :])
    probs = np.clip(probs, 0.0, None)
    if readout_error > 0:
        probs = apply_readout_error(probs, readout_error)
    return probs / probs.sum(axis=2, keepdims=True)


def _bootstrap_cycle_indices(
    rng: np.random.Generator, cycles: int, n_bootstrap: int
) -> np.ndarray:
    return rng.integers(0, cycles, size=(n_bootstrap, cycles))


def _parity_point(
    scenario: Scenario,
    t: float,
    probs: np.ndarray,
    rng_meas: np.random.Generator,
) -> tuple[float, float]:
    shots = scenario.shots_per_setting
    counts = rng_meas.multinomial(shots, probs)
    parities = counts @ PARITY_SIGNS / shots  # (cycles, phases)
    phase_grid = scenario.phase_grid

    if scenario.fix_phase_from_gradient:
        # coherence phase advances as +2*pi*f*t, so the fitted offset is +2*pi*f*t
        phi0 = (2.0 * np.pi * scenario.noise.gradient_hz * t) % (2.0 * np.pi)
        design = np.column_stack(
            [np.cos(phase_grid - phi0), np.ones_like(phase_grid)]
        )
        pinv = np.linalg.pinv(design)
        amp = float((pinv @ parities.mean(axis=0))[0])
        boot = parities[
            _bootstrap_cycle_indices(rng_meas, parities.shape[0], scenario.n_bootstrap)
        ].mean(axis=1)
        amps = np.abs((boot @ pinv.T)[:, 0])
        return abs(amp), float(np.std(amps, ddof=1))

    amplitude, _, _ = fit_parity_curve(phase_grid, parities.mean(axis=0))
    pinv = np.linalg.pinv(parity_design_matrix(phase_grid))
    boot = parities[
        _bootstrap_cycle_indices(rng_meas, parities.shape[0], scenario.n_bootstrap)
    ].mean(axis=1)
    coeffs = boot @ pinv.T
    amplitudes = np.hypot(coeffs[:, 0], coeffs[:, 1])
    return float(amplitude), float(np.std(amplitudes, ddof=1))


def _tomography_point(
    scenario: Scenario,
    probs: np.ndarray,
    rng_meas: np.random.Generator,
) -> tuple[float, float]:
    shots = scenario.shots_per_setting
    counts = rng_meas.multinomial(shots, probs)  # (cycles, 9, 4)
    effects = measurement_effects()
    rho0 = np.eye(4, dtype=np.complex128) / 4.0

    aggregate = counts.sum(axis=0).astype(float)
    freqs = aggregate.flatten() / aggregate.sum()
    rho, iterations, residual, _ = kernels.mle_fixed_point(effects, freqs, rho0)
    if not np.all(np.isfinite(rho)):
        raise NumericalError(
            f"tomographic reconstruction diverged ({iterations} iterations, "
            f"residual {residual:.3e})"
        )
    fmin_hat = 2.0 * abs(rho[IDX_01, IDX_10])

    indices = _bootstrap_cycle_indices(rng_meas, counts.shape[0], scenario.n_bootstrap)
    boot_counts = counts[indices].sum(axis=1).reshape(scenario.n_bootstrap, -1).astype(float)
    freq_sets = boot_counts / boot_counts.sum(axis=1, keepdims=True)
    rhos, _ = kernels.mle_fixed_point_batch(effects, freq_sets, rho0)
    boot_fmin = 2.0 * np.abs(rhos[:, IDX_01, IDX_10])
    return float(fmin_hat), float(np.std(boot_fmin, ddof=1))


def _decay_point(scenario: Scenario, point_index: int, t: float) -> tuple[float, float]:
    cfg = scenario.noise
    rng_det = np.random.default_rng([scenario.seed, 11, point_index])
    rng_meas = np.random.default_rng(
        [scenario.seed, 13, point_index, _MODE_STREAM[scenario.mode]]
    )

    rho_rest, z_base = _split_coherence(base_state_at(t, cfg).matrix)
    detunings = rng_det.normal(0.0, detuning_sigma_hz(cfg), scenario.cycles_per_point)
    cycle_phases = 2.0 * np.pi * (cfg.gradient_hz + detunings) * t
    coherences = z_base * np.exp(-1j * cycle_phases)

    deficit = analysis_pulse_error(t, cfg)
    theta = np.pi / 2.0 - deficit
    if scenario.mode == "parity_fmin":
        unitaries = np.array(
            [two_ion_rotation(theta, delta, theta, 0.0) for delta in scenario.phase_grid]
        )
        probs = _phase_scan_probabilities(rho_rest, coherences, unitaries, cfg.readout_error)
        return _parity_point(scenario, t, probs, rng_meas)

    unitaries = np.array([setting_unitary(s, deficit) for s in all_settings()])
    probs = _phase_scan_probabilities(rho_rest, coherences, unitaries, cfg.readout_error)
    return _tomography_point(scenario, probs, rng_meas)


def run_decay_experiment(scenario: Scenario) -> DecayCurve:
    """Estimate the fidelity bound at every delay of the scenario.

    A failing point is recorded as ``(nan, inf)`` and the run continues.
    """
    times, values, errors = [], [], []
    for index, t in enumerate(scenario.delays_s):
        try:
            fmin_hat, stderr = _decay_point(scenario, index, t)
        except NumericalError:
            fmin_hat, stderr = float("nan"), float("inf")
        times.append(t)
        values.append(fmin_hat)
        errors.append(stderr)
    return DecayCurve(tuple(times), tuple(values), tuple(errors))


# ---------------------------------------------------------------------------
# Gaussian decay fit.

def _gaussian_model(t: np.ndarray, params: np.ndarray, offset: bool) -> np.ndarray:
    amp, tau = params[0], params[1]
    values = amp * np.exp(-((t / tau) ** 2))
    if offset:
        values = values + params[2]
    return values


def _gaussian_jacobian(t: np.ndarray, params: np.ndarray, offset: bool) -> np.ndarray:
    amp, tau = params[0], params[1]
    decay = np.exp(-((t / tau) ** 2))
    cols = [decay, amp * decay * 2.0 * t**2 / tau**3]
    if offset:
        cols.append(np.ones_like(t))
    return np.column_stack(cols)


def fit_gaussian_decay(curve: DecayCurve, include_offset: bool = False) -> FitResult:
    """Weighted least-squares fit of ``A exp(-(t/tau)^2)`` to a decay curve.

    The initial guess comes from a linearised fit of ``log f`` against
    ``t^2``; Levenberg-damped Gauss-Newton then iterates to relative
    parameter changes below 1e-10.  With per-point standard errors the
    parameter covariance is used as-is; without them it is scaled by the
    reduced chi-square.
    """
    t = np.asarray(curve.times_s, dtype=float)
    f = np.asarray(curve.fmin, dtype=float)
    sig = np.asarray(curve.stderr, dtype=float)
    keep = np.isfinite(f)
    t, f, sig = t[keep], f[keep], sig[keep]
    if t.size < 4:
        raise NumericalError("fit needs at least 4 finite points")
    if np.unique(t[t > 0]).size < 2:
        raise NumericalError("fit needs at least 2 distinct positive times")
    if np.allclose(f, 0.0):
        raise NumericalError("all fidelity values are zero")

    have_sigma = bool(np.all(sig > 0))
    weights = 1.0 / sig**2 if have_sigma else np.ones_like(f)
    sqrt_w = np.sqrt(weights)

    positive = f > 0
    if np.count_nonzero(positive) < 2:
        raise NumericalError("not enough positive points for the initial guess")
    # log-space linearisation; delta-method weights w * f^2.
    slope, intercept = np.polyfit(
        t[positive] ** 2, np.log(f[positive]), 1, w=np.sqrt(weights[positive]) * f[positive]
    )
    if slope >= 0:
        slope = -1.0 / (2.0 * max(t.max(), 1.0)) ** 2
    params = np.array([float(np.exp(intercept)), float(1.0 / np.sqrt(-slope))])
    if include_offset:
        params = np.append(params, 0.0)

    damping = 1e-8
    converged = False
    for _ in range(500):
        residual = sqrt_w * (f - _gaussian_model(t, params, include_offset))
        jac = sqrt_w[:, None] * _gaussian_jacobian(t, params, include_offset)
        cost = float(residual @ residual)
        normal = jac.T @ jac
        gradient = jac.T @ residual
        step_ok = False
        for _ in range(60):
            try:
                step = np.linalg.solve(normal + damping * np.diag(np.diag(normal)), gradient)
            except np.linalg.LinAlgError:
                damping *= 10.0
                continue
            trial = params + step
            trial[1] = abs(trial[1])
            trial_res = sqrt_w * (f - _gaussian_model(t, trial, include_offset))
            if float(trial_res @ trial_res) <= cost:
                step_ok = True
                break
            damping *= 10.0
        if not step_ok:
            break
        rel_change = np.max(np.abs(step) / np.maximum(np.abs(trial), 1e-30))
        params = trial
        damping = max(damping / 10.0, 1e-12)
        if rel_change < 1e-10:
            converged = True
            break
    if not converged or not np.all(np.isfinite(params)) or params[1] <= 0:
        raise NumericalError("Gaussian decay fit did not converge")

    jac = sqrt_w[:, None] * _gaussian_jacobian(t, params, include_offset)
    try:
        covariance = np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular normal equations in the decay fit") from exc
    if not have_sigma:
        dof = max(t.size - params.size, 1)
        residual = sqrt_w * (f - _gaussian_model(t, params, include_offset))
        covariance = covariance * float(residual @ residual) / dof
    plain_residual = f - _gaussian_model(t, params, include_offset)
    return FitResult(
        amplitude=float(params[0]),
        tau_s=float(params[1]),
        tau_stderr_s=float(np.sqrt(max(covariance[1, 1], 0.0))),
        residual_rms=float(np.sqrt(np.mean(plain_residual**2))),
    )


# ---------------------------------------------------------------------------
# Heating calibration.

def analysis_fidelity_loss(t: float, cfg: NoiseConfig) -> float:
    """Drop of the parity-scan estimate caused only by degraded pulses.

    Evaluated on a perfect entangled pair with every other noise source
    disabled and exact outcome probabilities, so the result isolates the
    heating-induced pulse deficit.
    """
    probe = cfg.replace(
        scattering_rate_per_s=0.0,
        collision_rate_per_s=0.0,
        prep_fidelity=1.0,
        transfer_loss=0.0,
        readout_error=0.0,
    )
    grid = np.linspace(0.0, 2.0 * np.pi, DEFAULT_PHASE_POINTS)
    estimate = estimate_fmin_parity(bell_state(0.0), grid, None, t, probe)
    return 1.0 - estimate.fmin


def calibrate_heating(
    cfg: NoiseConfig,
    target_loss: float = 0.1,
    at_time_s: float = 20.0,
    tol: float = 1e-6,
) -> NoiseConfig:
    """Solve for the coupling factor that makes the analysis-induced
    fidelity loss equal ``target_loss`` at ``at_time_s``.

    Bisection on ``lamb_dicke`` over a bracket where the loss is monotone;
    raises :class:`NumericalError` when the bracket contains no root.
    """
    low, high = 0.0, 0.18

    def loss_at(eta: float) -> float:
        return analysis_fidelity_loss(at_time_s, cfg.replace(lamb_dicke=eta))

    loss_low, loss_high = loss_at(low), loss_at(high)
    if not loss_low <= target_loss <= loss_high:
        raise NumericalError(
            f"no root in bracket: loss({low})={loss_low:.4f}, "
            f"loss({high})={loss_high:.4f}, target {target_loss}"
        )
    while high - low > tol:
        mid = (low + high) / 2.0
        if loss_at(mid) < target_loss:
            low = mid
        else:
            high = mid
    return cfg.replace(lamb_dicke=(low + high) / 2.0)


# ---------------------------------------------------------------------------
# Single-delay tomography snapshot (used by the CLI and the fidelity ladder).

@dataclass(frozen=True)
class TomographySnapshot:
    records: list[MeasurementRecord]
    state_hat: TwoQubitState
    fidelity_best_phase: float
    fmin: float
    phase: float
    true_state: TwoQubitState


def tomography_snapshot(
    t: float, cfg: NoiseConfig, shots_per_setting: int, seed: int
) -> TomographySnapshot:
    """Full tomography of the cycle-averaged state at one delay.

    Counts are generated with heating-degraded setting rotations; the
    reconstruction assumes ideal ones.
    """
    rng = np.random.default_rng([seed, 17])
    truth = true_state_at(t, cfg)
    deficit = analysis_pulse_error(t, cfg)
    records = [
        simulate_counts(truth, setting, shots_per_setting, rng, deficit, cfg.readout_error)
        for setting in all_settings()
    ]
    state_hat, _ = mle_reconstruct_full(records)
    phi = best_phase(state_hat)
    return TomographySnapshot(
        records=records,
        state_hat=state_hat,
        fidelity_best_phase=fidelity_vs_bell(state_hat, phi),
        fmin=f_min(state_hat),
        phase=phi,
        true_state=truth,
    )


# ---------------------------------------------------------------------------
# Report emission.

def entangled_until(curve: DecayCurve) -> float:
    """Largest delay with ``fmin - 2*stderr > 0.5`` (0 when never)."""
    best = 0.0
    for t, value, err in zip(curve.times_s, curve.fmin, curve.stderr):
        if np.isfinite(value) and value - 2.0 * err > 0.5:
            best = max(best, t)
    return best


def format_decay_csv(curve: DecayCurve) -> str:
    lines = ["t_s,fmin,stderr"]
    for t, value, err in zip(curve.times_s, curve.fmin, curve.stderr):
        lines.append(f"{t:.10g},{value:.10g},{err:.10g}")
    return "\n".join(lines) + "\n"


def read_decay_csv(path: str | Path) -> DecayCurve:
    times, values, errors = [], [], []
    text = Path(path).read_text()
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0].strip() != "t_s,fmin,stderr":
        raise ConfigError(f"{path}: expected header 't_s,fmin,stderr'")
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != 3:
            raise ConfigError(f"{path}: malformed row {line!r}")
        times.append(float(parts[0]))
        values.append(float(parts[1]))
        errors.append(float(parts[2]))
    return DecayCurve(tuple(times), tuple(values), tuple(errors))


def format_fit_summary(curve: DecayCurve, fit: FitResult) -> str:
    return (
        f"amplitude = {fit.amplitude:.10g}\n"
        f"tau_s = {fit.tau_s:.10g}\n"
        f"tau_stderr_s = {fit.tau_stderr_s:.10g}\n"
        f"residual_rms = {fit.residual_rms:.10g}\n"
        f"entangled_until_s = {entangled_until(curve):.10g}\n"
    )


def format_gnuplot_data(curve: DecayCurve, fit: FitResult) -> str:
    lines = ["# t_s fmin stderr fit"]
    for t, value, err in zip(curve.times_s, curve.fmin, curve.stderr):
        model = fit.amplitude * np.exp(-((t / fit.tau_s) ** 2))
        lines.append(f"{t:.10g} {value:.10g} {err:.10g} {model:.10g}")
    return "\n".join(lines) + "\n"


def emit_report(curve: DecayCurve, fit: FitResult, out_dir: str | Path) -> list[Path]:
    """Write decay CSV, fit summary and a gnuplot data file.

    Contents are rendered before anything touches the disk, so failures
    leave no partial files; output bytes depend only on the inputs.
    """
    if len(curve) == 0:
        raise NumericalError("cannot emit a report for an empty decay curve")
    rendered = {
        "decay.csv": format_decay_csv(curve),
        "fit_summary.txt": format_fit_summary(curve, fit),
        "decay.dat": format_gnuplot_data(curve, fit),
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in rendered.items():
        path = out / name
        path.write_text(text)
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# Flat key = value configuration files.

_NOISE_KEYS = {
    "noise.d_lifetime_s": ("d_lifetime_s", float),
    "noise.gradient_hz": ("gradient_hz", float),
    "noise.tau_dephasing_s": ("tau_dephasing_s", float),
    "noise.heating_rate_phonons_per_s": ("heating_rate_phonons_per_s", float),
    "noise.nbar0": ("nbar0", float),
    "noise.lamb_dicke": ("lamb_dicke", float),
    "noise.scattering_rate_per_s": ("scattering_rate_per_s", float),
    "noise.collision_rate_per_s": ("collision_rate_per_s", float),
    "noise.prep_fidelity": ("prep_fidelity", float),
    "noise.transfer_loss": ("transfer_loss", float),
    "noise.readout_error": ("readout_error", float),
}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_delays(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


_SCENARIO_KEYS = {
    "scenario.delays_s": ("delays_s", _parse_delays),
    "scenario.shots_per_setting": ("shots_per_setting", int),
    "scenario.cycles_per_point": ("cycles_per_point", int),
    "scenario.mode": ("mode", str.strip),
    "scenario.seed": ("seed", int),
    "scenario.phase_points": ("phase_points", int),
    "scenario.n_bootstrap": ("n_bootstrap", int),
    "scenario.fit_offset": ("fit_offset", _parse_bool),
    "scenario.fix_phase_from_gradient": ("fix_phase_from_gradient", _parse_bool),
}


def parse_config_text(text: str, source: str = "<config>") -> Scenario:
    """Parse flat ``key = value`` text (``#`` comments and blanks allowed).

    Unknown keys are errors; every field is optional and defaults apply.
    """
    noise_fields: dict[str, object] = {}
    scenario_fields: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key in _NOISE_KEYS:
                field_name, parser = _NOISE_KEYS[key]
                noise_fields[field_name] = parser(value)
            elif key in _SCENARIO_KEYS:
                field_name, parser = _SCENARIO_KEYS[key]
                scenario_fields[field_name] = parser(value)
            else:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    try:
        noise = NoiseConfig(**noise_fields)
        return Scenario(noise=noise, **scenario_fields)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def dump_config(scenario: Scenario) -> str:
    """Render a scenario back into the flat config format."""
    lines = []
    for key, (field_name, _) in _NOISE_KEYS.items():
        lines.append(f"{key} = {getattr(scenario.noise, field_name)!r}")
    for key, (field_name, _) in _SCENARIO_KEYS.items():
        value = getattr(scenario, field_name)
        if field_name == "delays_s":
            rendered = ", ".join(f"{t:g}" for t in value)
        elif isinstance(value, bool):
            rendered = "true" if value else "false"
        elif isinstance(value, str):
            rendered = value
        else:
            rendered = repr(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"
