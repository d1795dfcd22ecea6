"""Simulated measurement with shot noise, two-qubit state tomography and
the parity-scan estimator of the fidelity lower bound.

Measurement model: each ion receives one of the pre-measurement rotations
``Id``, ``X90`` (= R(pi/2, 0)) or ``Y90`` (= R(pi/2, pi/2)) followed by a
projective readout in the computational basis, giving 9 settings with 4
outcomes each.  In the Heisenberg picture the measured single-ion
operators are ``Z``, ``Y`` and ``-X`` respectively.

Reconstruction routes:

* :func:`linear_inversion` assembles the state from the 15 empirical
  Pauli correlators; the result may violate positivity and is flagged,
  never silently fixed.
* :func:`mle_reconstruct` maximises the multinomial likelihood with the
  iterative fixed point ``rho <- N[R(rho) rho R(rho)]`` (diluted with
  ``(I+R)/2`` whenever a raw step lowers the likelihood), which always
  returns a physical state.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import kernels
from .channels import NoiseConfig
from .sequence import analysis_rotation, rotation_matrix
from .states import TwoQubitState

ROTATION_CODES = ("Id", "X90", "Y90")

#: Outcome sign of the measured bit per ion: 0 -> +1, 1 -> -1.
_BIT_SIGNS = np.array([1.0, -1.0])

#: Parity sign of the four outcomes 00, 01, 10, 11.
PARITY_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])

_PAULIS = {
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

#: Measured operator (sign, axis) per rotation code, Heisenberg picture.
_MEASURED_OPERATOR = {"Id": (1.0, "z"), "X90": (1.0, "y"), "Y90": (-1.0, "x")}


@dataclass(frozen=True)
class MeasurementSetting:
    """Pre-measurement rotation codes for the two ions."""

    rot1: str
    rot2: str

    def __post_init__(self):
        for code in (self.rot1, self.rot2):
            if code not in ROTATION_CODES:
                raise ValueError(f"rotation code must be one of {ROTATION_CODES}, got {code!r}")


def all_settings() -> tuple[MeasurementSetting, ...]:
    """The 9 tomography settings in canonical order."""
    return tuple(
        MeasurementSetting(r1, r2) for r1 in ROTATION_CODES for r2 in ROTATION_CODES
    )


@dataclass(frozen=True)
class MeasurementRecord:
    """Counts of the four outcomes for one setting."""

    setting: MeasurementSetting
    counts: tuple[int, int, int, int]
    shots: int

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if len(self.counts) != 4 or any(c < 0 for c in self.counts):
            raise ValueError("counts must be 4 nonnegative integers")
        if sum(self.counts) != self.shots:
            raise ValueError("counts must sum to shots")


@dataclass(frozen=True)
class ParityScan:
    """Parity values measured over a grid of relative analysis phases."""

    relative_phases: tuple[float, ...]
    parities: tuple[float, ...]
    shots_per_point: int

    def __post_init__(self):
        if len(self.relative_phases) != len(self.parities):
            raise ValueError("phases and parities must have equal length")
        if self.shots_per_point < 1:
            raise ValueError("shots_per_point must be positive")
        if any(abs(p) > 1.0 + 1e-12 for p in self.parities):
            raise ValueError("parities must lie in [-1, 1]")


def rotation_unitary(code: str, deficit: float = 0.0) -> np.ndarray:
    """Single-ion unitary of a setting rotation.

    ``deficit`` shortens the nominal pi/2 pulse angle; ``Id`` applies no
    pulse and therefore takes no deficit.
    """
    if code == "Id":
        return np.eye(2, dtype=np.complex128)
    theta = np.pi / 2.0 - deficit
    if code == "X90":
        return rotation_matrix(theta, 0.0)
    if code == "Y90":
        return rotation_matrix(theta, np.pi / 2.0)
    raise ValueError(f"unknown rotation code {code!r}")


def setting_unitary(setting: MeasurementSetting, deficit: float = 0.0) -> np.ndarray:
    return np.kron(
        rotation_unitary(setting.rot1, deficit), rotation_unitary(setting.rot2, deficit)
    )


def measurement_effects(deficit: float = 0.0) -> np.ndarray:
    """POVM elements ``E_{s,o} = U_s^+ |o><o| U_s``, shape (36, 4, 4)."""
    effects = np.empty((9, 4, 4, 4), dtype=np.complex128)
    for s, setting in enumerate(all_settings()):
        u = setting_unitary(setting, deficit)
        for o in range(4):
            proj = np.zeros((4, 4), dtype=np.complex128)
            proj[o, o] = 1.0
            effects[s, o] = u.conj().T @ proj @ u
    return effects.reshape(36, 4, 4)


def apply_readout_error(probs: np.ndarray, error: float) -> np.ndarray:
    """Symmetric per-ion misassignment of the readout bit."""
    if error == 0.0:
        return probs
    conf1 = np.array([[1 - error, error], [error, 1 - error]])
    conf = np.kron(conf1, conf1)
    return probs @ conf.T


def outcome_probabilities(
    state: TwoQubitState | np.ndarray,
    setting: MeasurementSetting,
    deficit: float = 0.0,
    readout_error: float = 0.0,
) -> np.ndarray:
    """Outcome probabilities (00, 01, 10, 11) for one setting."""
    mat = state.matrix if isinstance(state, TwoQubitState) else np.asarray(state)
    u = setting_unitary(setting, deficit)
    probs = np.clip(np.real(np.diag(u @ mat @ u.conj().T)), 0.0, None)
    probs = apply_readout_error(probs, readout_error)
    return probs / probs.sum()


def simulate_counts(
    state: TwoQubitState,
    setting: MeasurementSetting,
    shots: int,
    rng: np.random.Generator | int,
    deficit: float = 0.0,
    readout_error: float = 0.0,
) -> MeasurementRecord:
    """Multinomial draw of ``shots`` outcomes; deterministic given the seed."""
    if shots < 1:
        raise ValueError("shots must be positive")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    probs = outcome_probabilities(state, setting, deficit, readout_error)
    counts = gen.multinomial(shots, probs)
    return MeasurementRecord(setting=setting, counts=tuple(int(c) for c in counts), shots=shots)


def simulate_records(
    state: TwoQubitState,
    shots: int,
    rng: np.random.Generator | int,
    deficit: float = 0.0,
    readout_error: float = 0.0,
) -> list[MeasurementRecord]:
    """One record per tomography setting, in canonical order."""
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return [
        simulate_counts(state, setting, shots, gen, deficit, readout_error)
        for setting in all_settings()
    ]


def _records_to_frequency_rows(records) -> np.ndarray:
    """Frequencies per setting, canonical (9, 4) layout; validates input."""
    if len(records) != 9:
        raise ValueError(f"expected 9 measurement records, got {len(records)}")
    by_setting = {}
    for record in records:
        key = (record.setting.rot1, record.setting.rot2)
        if key in by_setting:
            raise ValueError(f"duplicate setting {key}")
        if record.shots < 1:
            raise ValueError("zero-shot record")
        by_setting[key] = record
    rows = np.empty((9, 4))
    for s, setting in enumerate(all_settings()):
        key = (setting.rot1, setting.rot2)
        if key not in by_setting:
            raise ValueError(f"missing setting {key}")
        record = by_setting[key]
        rows[s] = np.asarray(record.counts, dtype=float) / record.shots
    return rows


@dataclass(frozen=True)
class LinearInversionResult:
    """Linear-inversion estimate; may violate positivity (flagged)."""

    matrix: np.ndarray
    is_physical: bool
    min_eigenvalue: float

    def as_state(self) -> TwoQubitState:
        if not self.is_physical:
            raise ValueError(
                f"linear-inversion estimate is unphysical (min eigenvalue "
                f"{self.min_eigenvalue:.3e}); use project_to_physical"
            )
        return TwoQubitState(self.matrix)


def linear_inversion(records) -> LinearInversionResult:
    """Assemble ``rho = (1/4) sum_ij s_ij sigma_i x sigma_j`` from counts.

    The 9 two-body correlators come one per setting; each single-ion
    expectation is the average of its three redundant estimates.
    """
    return linear_inversion_from_frequencies(_records_to_frequency_rows(records))


def linear_inversion_from_frequencies(rows: np.ndarray) -> LinearInversionResult:
    """Linear inversion fed directly with per-setting outcome frequencies.

    With exact probabilities the input state is recovered exactly.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.shape != (9, 4):
        raise ValueError(f"frequency table must have shape (9, 4), got {rows.shape}")
    axes = ("x", "y", "z")
    corr = np.zeros((3, 3))
    single1 = {ax: [] for ax in axes}
    single2 = {ax: [] for ax in axes}
    signs1 = _BIT_SIGNS[[0, 0, 1, 1]]
    signs2 = _BIT_SIGNS[[0, 1, 0, 1]]
    for s, setting in enumerate(all_settings()):
        sign_a, axis_a = _MEASURED_OPERATOR[setting.rot1]
        sign_b, axis_b = _MEASURED_OPERATOR[setting.rot2]
        freq = rows[s]
        corr[axes.index(axis_a), axes.index(axis_b)] = sign_a * sign_b * float(
            freq @ (signs1 * signs2)
        )
        single1[axis_a].append(sign_a * float(freq @ signs1))
        single2[axis_b].append(sign_b * float(freq @ signs2))
    mat = np.eye(4, dtype=np.complex128)
    eye2 = np.eye(2, dtype=np.complex128)
    for i, ax_a in enumerate(axes):
        mat += np.mean(single1[ax_a]) * np.kron(_PAULIS[ax_a], eye2)
        mat += np.mean(single2[ax_a]) * np.kron(eye2, _PAULIS[ax_a])
        for j, ax_b in enumerate(axes):
            mat += corr[i, j] * np.kron(_PAULIS[ax_a], _PAULIS[ax_b])
    mat /= 4.0
    eig_min = float(np.linalg.eigvalsh(mat)[0])
    return LinearInversionResult(matrix=mat, is_physical=eig_min >= -1e-8, min_eigenvalue=eig_min)


def project_to_physical(matrix: np.ndarray) -> TwoQubitState:
    """Euclidean projection of a Hermitian unit-trace matrix onto states.

    Projects the eigenvalue vector onto the probability simplex while
    keeping the eigenvectors.
    """
    mat = np.asarray(matrix, dtype=np.complex128)
    mat = (mat + mat.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(mat)
    desc = vals[::-1]
    cumulative = np.cumsum(desc)
    ks = np.arange(1, len(desc) + 1)
    shifted = desc + (1.0 - cumulative) / ks
    k = int(np.max(np.nonzero(shifted > 0)[0])) + 1
    shift = (1.0 - cumulative[k - 1]) / k
    new_desc = np.clip(desc + shift, 0.0, None)
    new_desc[k:] = 0.0
    new_vals = new_desc[::-1]
    return TwoQubitState((vecs * new_vals) @ vecs.conj().T)


@dataclass(frozen=True)
class MleInfo:
    iterations: int
    residual: float
    log_likelihood: float
    converged: bool


def log_likelihood(matrix: np.ndarray | TwoQubitState, records) -> float:
    """Multinomial log-likelihood ``sum_k n_k ln p_k`` of ``matrix``."""
    mat = matrix.matrix if isinstance(matrix, TwoQubitState) else np.asarray(matrix)
    effects = measurement_effects()
    probs = np.clip(np.einsum("kab,ba->k", effects, mat).real, 1e-12, None)
    counts = []
    rows = {((r.setting.rot1, r.setting.rot2)): r for r in records}
    for setting in all_settings():
        counts.extend(rows[(setting.rot1, setting.rot2)].counts)
    return float(np.asarray(counts, dtype=float) @ np.log(probs))


def _mle_from_frequency_rows(rows: np.ndarray, tol: float, max_iter: int):
    freqs = rows.flatten() / rows.sum()
    effects = measurement_effects()
    rho0 = np.eye(4, dtype=np.complex128) / 4.0
    rho, iterations, residual, ll = kernels.mle_fixed_point(effects, freqs, rho0, tol, max_iter)
    if not np.all(np.isfinite(rho)):
        raise ArithmeticError(
            f"likelihood iteration diverged after {iterations} iterations "
            f"(residual {residual:.3e})"
        )
    info = MleInfo(
        iterations=iterations,
        residual=residual,
        log_likelihood=ll,
        converged=residual < tol,
    )
    return TwoQubitState(rho), info


def mle_reconstruct_full(
    records, tol: float = 1e-10, max_iter: int = 10_000
) -> tuple[TwoQubitState, MleInfo]:
    """Maximum-likelihood state plus iteration diagnostics.

    Stops when the max entrywise change drops below ``tol`` or after
    ``max_iter`` iterations (iteration count and residual are reported on
    the returned info either way).
    """
    rows = _records_to_frequency_rows(records)
    return _mle_from_frequency_rows(rows, tol, max_iter)


def mle_reconstruct(records, tol: float = 1e-10, max_iter: int = 10_000) -> TwoQubitState:
    """Physical state maximising the multinomial likelihood of ``records``."""
    state, _ = mle_reconstruct_full(records, tol, max_iter)
    return state


def reconstruct_from_probabilities(
    prob_rows: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000
) -> tuple[TwoQubitState, MleInfo]:
    """Likelihood fixed point fed with exact outcome probabilities.

    ``prob_rows`` has shape (9, 4), one probability row per canonical
    setting; the fixed point is then the true state itself.
    """
    rows = np.asarray(prob_rows, dtype=float)
    if rows.shape != (9, 4):
        raise ValueError(f"probability table must have shape (9, 4), got {rows.shape}")
    return _mle_from_frequency_rows(rows, tol, max_iter)


def parity(record: MeasurementRecord) -> float:
    """``(n00 + n11 - n01 - n10) / shots``."""
    return float(np.asarray(record.counts, dtype=float) @ PARITY_SIGNS / record.shots)


def parity_from_probabilities(probs: np.ndarray) -> float:
    return float(np.asarray(probs, dtype=float) @ PARITY_SIGNS)


def parity_design_matrix(phases: np.ndarray) -> np.ndarray:
    """Design matrix of the sinusoid fit ``a cos(x) + b sin(x) + c``."""
    phases = np.asarray(phases, dtype=float)
    return np.column_stack([np.cos(phases), np.sin(phases), np.ones_like(phases)])


def fit_parity_curve(phases, parities) -> tuple[float, float, float]:
    """Least-squares fit of ``C cos(phi - phi0) + b`` to a parity scan.

    Linear in ``(C cos(phi0), C sin(phi0), b)``; returns
    ``(amplitude, phi0, offset)``.
    """
    design = parity_design_matrix(phases)
    coeff, *_ = np.linalg.lstsq(design, np.asarray(parities, dtype=float), rcond=None)
    amplitude = float(np.hypot(coeff[0], coeff[1]))
    phi0 = float(np.arctan2(coeff[1], coeff[0]))
    return amplitude, phi0, float(coeff[2])


def _validate_phase_grid(phases: np.ndarray):
    distinct = np.unique(phases)
    if distinct.size < 4:
        raise ValueError("phase grid must contain at least 4 distinct phases")
    if distinct[-1] - distinct[0] < 2.0 * np.pi - 1e-9:
        raise ValueError("phase grid must span at least 2*pi")


@dataclass(frozen=True)
class ParityEstimate:
    """Fitted parity-scan amplitude (the fidelity-bound estimate)."""

    fmin: float
    phase: float
    stderr: float
    scan: ParityScan


def estimate_fmin_parity(
    state: TwoQubitState,
    phases,
    shots_per_point: int | None,
    t: float,
    cfg: NoiseConfig,
    seed: np.random.Generator | int = 0,
    n_bootstrap: int = 200,
) -> ParityEstimate:
    """Parity-scan estimate of ``2 |rho_01,10|``.

    Analysis pulses with relative phase ``delta_phi`` (= phase on ion 1,
    zero on ion 2) are applied at delay ``t`` (degraded by heating per the
    config), the parity is measured with ``shots_per_point`` shots per
    phase, and ``C cos(delta_phi - phi0) + b`` is fitted.  ``phi0``
    estimates the coherence phase (equals :func:`ionbell.states.best_phase`
    for an undisturbed scan).  ``shots_per_point=None`` uses exact
    probabilities (stderr 0).  The standard error comes from
    ``n_bootstrap`` parametric resamples of the per-phase outcomes.
    """
    phase_arr = np.asarray(phases, dtype=float)
    _validate_phase_grid(phase_arr)
    gen = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    exact_parities = np.empty(phase_arr.size)
    for j, delta in enumerate(phase_arr):
        rotated = analysis_rotation(state, float(delta), 0.0, t, cfg)
        probs = apply_readout_error(
            np.clip(np.real(np.diag(rotated.matrix)), 0.0, None), cfg.readout_error
        )
        exact_parities[j] = parity_from_probabilities(probs / probs.sum())

    if shots_per_point is None:
        amplitude, phi0, _ = fit_parity_curve(phase_arr, exact_parities)
        scan = ParityScan(tuple(phase_arr), tuple(exact_parities), shots_per_point=1)
        return ParityEstimate(fmin=amplitude, phase=phi0, stderr=0.0, scan=scan)

    if shots_per_point < 1:
        raise ValueError("shots_per_point must be positive")
    # A parity shot is a +-1 Bernoulli variable, so the per-phase counts of
    # +1 outcomes are a sufficient statistic for both sampling and bootstrap.
    p_up = (1.0 + exact_parities) / 2.0
    ups = gen.binomial(shots_per_point, np.clip(p_up, 0.0, 1.0))
    parities = 2.0 * ups / shots_per_point - 1.0
    amplitude, phi0, _ = fit_parity_curve(phase_arr, parities)

    boot_up = gen.binomial(
        shots_per_point, np.tile((1.0 + parities) / 2.0, (n_bootstrap, 1))
    )
    boot_parities = 2.0 * boot_up / shots_per_point - 1.0
    pinv = np.linalg.pinv(parity_design_matrix(phase_arr))
    coeffs = boot_parities @ pinv.T
    amplitudes = np.hypot(coeffs[:, 0], coeffs[:, 1])
    stderr = float(np.std(amplitudes, ddof=1))

    scan = ParityScan(tuple(phase_arr), tuple(parities), shots_per_point=shots_per_point)
    return ParityEstimate(fmin=float(amplitude), phase=float(phi0), stderr=stderr, scan=scan)


# ---------------------------------------------------------------------------
# Flat-file formats.

def write_counts_csv(records, path: str | Path) -> None:
    """Columns: setting_rot1, setting_rot2, n00, n01, n10, n11, shots."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["setting_rot1", "setting_rot2", "n00", "n01", "n10", "n11", "shots"])
        for record in records:
            writer.writerow(
                [record.setting.rot1, record.setting.rot2, *record.counts, record.shots]
            )


def read_counts_csv(path: str | Path) -> list[MeasurementRecord]:
    records = []
    with Path(path).open(newline="") as handle:
        for row in csv.DictReader(handle):
            records.append(
                MeasurementRecord(
                    setting=MeasurementSetting(row["setting_rot1"], row["setting_rot2"]),
                    counts=tuple(int(row[k]) for k in ("n00", "n01", "n10", "n11")),
                    shots=int(row["shots"]),
                )
            )
    return records


def write_parity_csv(scan: ParityScan, path: str | Path) -> None:
    """Columns: delta_phi_rad, parity, shots."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["delta_phi_rad", "parity", "shots"])
        for phi, par in zip(scan.relative_phases, scan.parities):
            writer.writerow([f"{phi:.12g}", f"{par:.12g}", scan.shots_per_point])


def read_parity_csv(path: str | Path) -> ParityScan:
    phases, parities, shots = [], [], 1
    with Path(path).open(newline="") as handle:
        for row in csv.DictReader(handle):
            phases.append(float(row["delta_phi_rad"]))
            parities.append(float(row["parity"]))
            shots = int(row["shots"])
    return ParityScan(tuple(phases), tuple(parities), shots_per_point=shots)
