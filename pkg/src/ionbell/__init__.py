"""Desk-scale simulator of a two-trapped-ion entangled-pair experiment.

Pipeline: entangling preparation, transfer into a decay-protected
ground-state encoding, closed-form noise evolution, simulated projective
measurement with shot noise, tomographic / parity-scan estimation, and a
Gaussian fit of the entanglement decay.
"""

from ._backend import BACKEND
from .channels import (
    COLLISION_RATE_BOUND,
    SCATTERING_RATE_BOUND,
    NoiseConfig,
    bitflip_scattering,
    collective_dephasing,
    collision_depolarizing,
    deterministic_phase,
    gaussian_gradient_dephasing,
    heating_nbar,
    sample_run_detuning,
    spontaneous_decay_sd,
)
from .sequence import (
    PulseSpec,
    SequenceResult,
    analysis_rotation,
    prepare_bell,
    single_qubit_rotation,
    transfer_to_dfs,
)
from .states import (
    KrausChannel,
    TwoQubitState,
    apply_channel,
    bell_state,
    best_phase,
    f_min,
    fidelity_vs_bell,
    is_entangled_ppt,
    state_fidelity,
    werner_state,
)
from .tomo import (
    MeasurementRecord,
    MeasurementSetting,
    ParityScan,
    estimate_fmin_parity,
    linear_inversion,
    mle_reconstruct,
    parity,
    simulate_counts,
)
from .runner import (
    DecayCurve,
    FitResult,
    Scenario,
    calibrate_heating,
    emit_report,
    fit_gaussian_decay,
    run_decay_experiment,
)

__version__ = "0.1.0"
