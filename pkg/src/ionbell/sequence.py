"""Logical-level pulse engine: entangling preparation, encoding transfer
and analysis rotations with the quoted scalar imperfections.

Preparation and transfer imperfections are modelled as white-noise
(depolarising) admixtures: the experiment quotes only scalar fidelity
losses, and white noise is the maximum-entropy realisation that keeps the
fidelity/bound relations simple.  The physical three-pulse entangling
sequence is recorded symbolically in the log but not simulated at the
sideband level; its quoted fidelity is what matters downstream.

Every step taken by :func:`prepare_bell` / :func:`transfer_to_dfs` is
appended to the result log and executed through the same registry used by
:func:`replay`, so replaying a log reproduces the returned state
bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import NoiseConfig, analysis_pulse_error
from .states import TwoQubitState, bell_state, best_phase, fidelity_vs_bell

ENCODING_OPTICAL = "optical_sd"
ENCODING_ZEEMAN = "zeeman"

_PULSE_KINDS = ("carrier_sd", "carrier_zeeman")


@dataclass(frozen=True)
class PulseSpec:
    """One addressed single-ion rotation ``R(theta, phase)``."""

    ion: int
    theta: float
    phase: float
    kind: str = "carrier_zeeman"

    def __post_init__(self):
        if self.ion not in (1, 2):
            raise ValueError(f"ion must be 1 or 2, got {self.ion}")
        if not 0.0 <= self.theta <= 2.0 * np.pi:
            raise ValueError(f"theta must be in [0, 2*pi], got {self.theta}")
        if self.kind not in _PULSE_KINDS:
            raise ValueError(f"kind must be one of {_PULSE_KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class LogEntry:
    """One applied (or symbolic) step of a sequence."""

    op: str
    params: tuple[tuple[str, object], ...]
    symbolic: bool = False

    def param(self, key: str):
        for name, value in self.params:
            if name == key:
                return value
        raise KeyError(key)

    def format_line(self) -> str:
        parts = [self.op] + [f"{k}={v!r}" for k, v in self.params]
        if self.symbolic:
            parts.append("symbolic=True")
        return " ".join(parts)


@dataclass(frozen=True)
class SequenceResult:
    """Final state plus the ordered log of pulses and channels applied."""

    state: TwoQubitState
    log: tuple[LogEntry, ...]
    encoding: str = ENCODING_OPTICAL


def rotation_matrix(theta: float, phase: float) -> np.ndarray:
    """``R(theta, phase) = exp(-i*theta*(cos(phase)*X + sin(phase)*Y)/2)``."""
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    return np.array(
        [
            [c, -1j * np.exp(-1j * phase) * s],
            [-1j * np.exp(1j * phase) * s, c],
        ],
        dtype=np.complex128,
    )


def two_ion_rotation(theta1: float, phase1: float, theta2: float, phase2: float) -> np.ndarray:
    """Product rotation acting on both ions."""
    return np.kron(rotation_matrix(theta1, phase1), rotation_matrix(theta2, phase2))


def single_qubit_rotation(state: TwoQubitState, pulse: PulseSpec) -> TwoQubitState:
    """Apply ``R(theta, phase)`` on the addressed ion, identity on the other."""
    r = rotation_matrix(pulse.theta, pulse.phase)
    full = np.kron(r, np.eye(2)) if pulse.ion == 1 else np.kron(np.eye(2), r)
    return TwoQubitState(full @ state.matrix @ full.conj().T)


def white_noise_weight(fidelity: float) -> float:
    """Mixing weight ``w`` with ``w*bell + (1-w)*I/4`` reaching ``fidelity``.

    Solves ``w + (1-w)/4 = fidelity``, i.e. ``w = (4*fidelity - 1)/3``.
    """
    return (4.0 * fidelity - 1.0) / 3.0


# ---------------------------------------------------------------------------
# Log step registry.  prepare_bell / transfer_to_dfs fold the state through
# these appliers while logging, so replay() is bit-exact by construction.

def _apply_ideal_bell(_state, entry: LogEntry) -> TwoQubitState:
    return bell_state(float(entry.param("phase")))


def _apply_white_noise_mix(state: TwoQubitState, entry: LogEntry) -> TwoQubitState:
    w = float(entry.param("weight"))
    return TwoQubitState(w * state.matrix + (1.0 - w) * np.eye(4) / 4.0)


def _apply_relabel(state: TwoQubitState, entry: LogEntry) -> TwoQubitState:
    # Encoding change only: the four matrix slots keep their values.
    return state


_STEP_APPLIERS = {
    "ideal_bell": _apply_ideal_bell,
    "white_noise_mix": _apply_white_noise_mix,
    "relabel_encoding": _apply_relabel,
}


def replay(log: tuple[LogEntry, ...]) -> TwoQubitState:
    """Re-execute a sequence log; symbolic entries are annotations only."""
    state = None
    for entry in log:
        if entry.symbolic:
            continue
        try:
            applier = _STEP_APPLIERS[entry.op]
        except KeyError:
            raise ValueError(f"log entry {entry.op!r} is not replayable") from None
        state = applier(state, entry)
    if state is None:
        raise ValueError("log contains no applied steps")
    return state


def format_log(log: tuple[LogEntry, ...]) -> str:
    """Line-oriented text form of a sequence log (one step per line)."""
    return "\n".join(entry.format_line() for entry in log) + "\n"


def prepare_bell(cfg: NoiseConfig) -> SequenceResult:
    """Entangling preparation in the optical encoding.

    Returns ``w*|bell><bell| + (1-w)*I/4`` with ``w`` chosen so the
    resulting fidelity equals ``cfg.prep_fidelity``.  The three addressed
    pulses of the physical entangling sequence appear symbolically in the
    log.
    """
    fid = cfg.prep_fidelity
    if not 0.25 <= fid <= 1.0:
        raise ValueError(
            f"prep_fidelity must be in [0.25, 1]; the white-noise model cannot reach {fid}"
        )
    log = [
        LogEntry(
            "pulse",
            (("ion", 1), ("theta", np.pi / 2), ("phase", 0.0), ("kind", "carrier_sd")),
            symbolic=True,
        ),
        LogEntry(
            "pulse",
            (("ion", 2), ("theta", np.pi), ("phase", 0.0), ("kind", "carrier_sd")),
            symbolic=True,
        ),
        LogEntry(
            "pulse",
            (("ion", 1), ("theta", np.pi / 2), ("phase", np.pi), ("kind", "carrier_sd")),
            symbolic=True,
        ),
        LogEntry("ideal_bell", (("phase", 0.0),)),
        LogEntry("white_noise_mix", (("weight", white_noise_weight(fid)),)),
    ]
    state = None
    for entry in log:
        if not entry.symbolic:
            state = _STEP_APPLIERS[entry.op](state, entry)
    return SequenceResult(state=state, log=tuple(log), encoding=ENCODING_OPTICAL)


def transfer_to_dfs(result: SequenceResult, cfg: NoiseConfig) -> SequenceResult:
    """Move the entangled pair into the protected ground-state encoding.

    The encoding change is a relabelling of the same four matrix slots;
    pulse imperfection is a white-noise admixture lowering the fidelity by
    ``cfg.transfer_loss``.
    """
    if result.encoding != ENCODING_OPTICAL:
        raise ValueError("input must still be in the optical encoding")
    fid_in = fidelity_vs_bell(result.state, best_phase(result.state))
    fid_out = fid_in - cfg.transfer_loss
    if fid_out < 0.25:
        raise ValueError(
            f"transfer loss {cfg.transfer_loss} would push fidelity below the "
            f"white-noise floor (input fidelity {fid_in})"
        )
    # Mixing q*rho + (1-q)*I/4 lowers the fidelity by (1-q)*(fid_in - 1/4).
    q = 1.0 - cfg.transfer_loss / (fid_in - 0.25)
    new_entries = [
        LogEntry("relabel_encoding", (("to", ENCODING_ZEEMAN),)),
        LogEntry("white_noise_mix", (("weight", q),)),
    ]
    state = result.state
    for entry in new_entries:
        state = _STEP_APPLIERS[entry.op](state, entry)
    return SequenceResult(
        state=state, log=result.log + tuple(new_entries), encoding=ENCODING_ZEEMAN
    )


def analysis_rotation(
    state: TwoQubitState, phase1: float, phase2: float, t: float, cfg: NoiseConfig
) -> TwoQubitState:
    """Nominal pi/2 analysis pulses on both ions with heating-induced deficit.

    Each pulse rotates by ``pi/2 - analysis_pulse_error(t, cfg)`` about the
    equatorial axis set by its phase.
    """
    theta = np.pi / 2.0 - analysis_pulse_error(t, cfg)
    u = two_ion_rotation(theta, phase1, theta, phase2)
    return TwoQubitState(u @ state.matrix @ u.conj().T)
