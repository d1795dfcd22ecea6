"""Exact two-qubit density-matrix algebra for a pair of trapped-ion qubits.

Conventions (fixed here, referenced everywhere else)
----------------------------------------------------
* Basis order is ``|00>, |01>, |10>, |11>`` with matrix index
  ``2*b1 + b2``; ion 1 supplies the most significant bit.  Before the
  transfer pulse the two logical values of each ion label the ground
  (``0``) and metastable (``1``) level of the optical qubit; afterwards
  they label the two ground-state Zeeman sublevels.
* The target entangled state is ``(|01> + e^{i*phi}|10>)/sqrt(2)``.  Its
  density matrix stores the coherence ``<01|rho|10> = e^{-i*phi}/2``, so
  :func:`best_phase` returns ``-arg(<01|rho|10>)`` normalised to
  ``(-pi, pi]``.
* A rotation ``R(theta, phi) = exp(-i*theta*(cos(phi)*X + sin(phi)*Y)/2)``
  is the single convention used by pulses and measurement settings.

All values are immutable after construction and all operations are pure,
so they are safe to use from concurrent workers without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BASIS_LABELS = ("00", "01", "10", "11")

#: Matrix index of each basis label.
BASIS_INDEX = {label: i for i, label in enumerate(BASIS_LABELS)}

IDX_00, IDX_01, IDX_10, IDX_11 = 0, 1, 2, 3

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_TOL = -1e-8


def basis_index(label: str) -> int:
    """Row/column index of a two-bit basis label (``'01' -> 1``)."""
    try:
        return BASIS_INDEX[label]
    except KeyError:
        raise ValueError(f"unknown basis label {label!r}; expected one of {BASIS_LABELS}") from None


@dataclass(frozen=True)
class TwoQubitState:
    """A physical two-qubit density matrix.

    Construction validates hermiticity (1e-10), unit trace (1e-10) and
    positivity (smallest eigenvalue >= -1e-8, the reconstruction noise
    floor).  The stored array is read-only.
    """

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got shape {mat.shape}")
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > HERMITICITY_TOL:
            raise ValueError(f"matrix is not Hermitian: max |rho - rho^+| = {herm:.3e}")
        trace_err = abs(mat.trace() - 1.0)
        if trace_err > TRACE_TOL:
            raise ValueError(f"matrix trace deviates from 1 by {trace_err:.3e}")
        eig_min = float(np.linalg.eigvalsh(mat)[0])
        if eig_min < EIGENVALUE_TOL:
            raise ValueError(f"matrix is not positive semidefinite: min eigenvalue {eig_min:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def element(self, row: str, col: str) -> complex:
        """Matrix element ``<row|rho|col>`` addressed by basis labels."""
        return complex(self.matrix[basis_index(row), basis_index(col)])

    @property
    def populations(self) -> np.ndarray:
        """Diagonal populations in basis order (real)."""
        return np.real(np.diag(self.matrix))


@dataclass(frozen=True)
class KrausChannel:
    """A trace-preserving channel given by Kraus operators ``{K_i}``.

    Validates ``sum_i K_i^+ K_i = I`` to 1e-10.
    """

    operators: np.ndarray

    def __post_init__(self):
        ops = np.array(self.operators, dtype=np.complex128)
        if ops.ndim == 2:
            ops = ops[None, :, :]
        if ops.ndim != 3 or ops.shape[1:] != (4, 4):
            raise ValueError(f"Kraus operators must have shape (k, 4, 4), got {ops.shape}")
        total = np.einsum("kij,kil->jl", ops.conj(), ops)
        dev = np.max(np.abs(total - np.eye(4)))
        if dev > 1e-10:
            raise ValueError(f"channel is not trace preserving: |sum K^+K - I| = {dev:.3e}")
        ops.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @classmethod
    def from_unitary(cls, unitary: np.ndarray) -> "KrausChannel":
        return cls(np.asarray(unitary, dtype=np.complex128)[None, :, :])

    def __len__(self) -> int:
        return self.operators.shape[0]


def bell_state(phase: float) -> TwoQubitState:
    """Pure state ``(|01> + e^{i*phase}|10>)/sqrt(2)``.

    The stored coherence is ``<01|rho|10> = e^{-i*phase}/2``.
    """
    if not np.isfinite(phase):
        raise ValueError("phase must be finite")
    mat = np.zeros((4, 4), dtype=np.complex128)
    mat[IDX_01, IDX_01] = 0.5
    mat[IDX_10, IDX_10] = 0.5
    mat[IDX_01, IDX_10] = 0.5 * np.exp(-1j * phase)
    mat[IDX_10, IDX_01] = 0.5 * np.exp(1j * phase)
    return TwoQubitState(mat)


def werner_state(weight: float, phase: float = 0.0) -> TwoQubitState:
    """Mixture ``weight * bell_state(phase) + (1 - weight) * I/4``."""
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"mixing weight must be in [0, 1], got {weight}")
    mat = weight * bell_state(phase).matrix + (1.0 - weight) * np.eye(4) / 4.0
    return TwoQubitState(mat)


def fidelity_vs_bell(state: TwoQubitState, phase: float) -> float:
    """Overlap of ``state`` with ``bell_state(phase)``.

    Equals ``(rho_01,01 + rho_10,10)/2 + Re(rho_01,10 * e^{i*phase})``.
    """
    if not np.isfinite(phase):
        raise ValueError("phase must be finite")
    rho = state.matrix
    diag = (rho[IDX_01, IDX_01].real + rho[IDX_10, IDX_10].real) / 2.0
    return float(diag + (rho[IDX_01, IDX_10] * np.exp(1j * phase)).real)


def f_min(state: TwoQubitState) -> float:
    """Phase-free lower bound ``2 * |rho_01,10|`` on the best-phase fidelity.

    A value above 0.5 certifies entanglement.
    """
    return float(2.0 * np.abs(state.matrix[IDX_01, IDX_10]))


def best_phase(state: TwoQubitState) -> float:
    """Phase maximising :func:`fidelity_vs_bell`, in ``(-pi, pi]``.

    Returns ``-arg(rho_01,10)``; zero coherence maps to 0 by convention.
    """
    coherence = state.matrix[IDX_01, IDX_10]
    if abs(coherence) < 1e-14:
        return 0.0
    phi = float(-np.angle(coherence))
    if phi <= -np.pi:
        phi += 2.0 * np.pi
    elif phi > np.pi:
        phi -= 2.0 * np.pi
    return phi


def apply_channel(state: TwoQubitState, channel: KrausChannel) -> TwoQubitState:
    """Apply ``rho -> sum_i K_i rho K_i^+``."""
    ops = channel.operators
    out = np.einsum("kij,jl,kml->im", ops, state.matrix, ops.conj())
    out = (out + out.conj().T) / 2.0
    return TwoQubitState(out)


def partial_transpose(matrix: np.ndarray) -> np.ndarray:
    """Partial transpose over the second ion."""
    mat = np.asarray(matrix, dtype=np.complex128).reshape(2, 2, 2, 2)
    return mat.transpose(0, 3, 2, 1).reshape(4, 4)


def is_entangled_ppt(state: TwoQubitState) -> bool:
    """Entanglement witness via the partial-transpose criterion.

    For two qubits a negative eigenvalue of the partial transpose is
    necessary and sufficient; eigenvalues above -1e-10 count as
    non-negative.
    """
    eigs = np.linalg.eigvalsh(partial_transpose(state.matrix))
    return bool(eigs[0] < -1e-10)


def state_fidelity(a: TwoQubitState, b: TwoQubitState) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(a) b sqrt(a)))^2`` between states."""
    vals_a, vecs_a = np.linalg.eigh(a.matrix)
    sqrt_a = (vecs_a * np.sqrt(np.clip(vals_a, 0.0, None))) @ vecs_a.conj().T
    inner = sqrt_a @ b.matrix @ sqrt_a
    vals = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    root_sum = np.sum(np.sqrt(np.clip(vals, 0.0, None)))
    return float(min(root_sum**2, 1.0))


def random_physical_matrices(rng: np.random.Generator, count: int) -> np.ndarray:
    """Batch of ``count`` full-rank random density matrices.

    Sampled as ``G G^+ / tr(G G^+)`` with ``G`` a 4x4 matrix of independent
    standard complex Gaussians, which covers full rank generically.
    """
    g = rng.standard_normal((count, 4, 4)) + 1j * rng.standard_normal((count, 4, 4))
    mats = g @ np.conj(np.swapaxes(g, 1, 2))
    traces = np.trace(mats, axis1=1, axis2=2).real
    return mats / traces[:, None, None]


def random_physical_state(rng: np.random.Generator) -> TwoQubitState:
    """One random full-rank state; see :func:`random_physical_matrices`."""
    return TwoQubitState(random_physical_matrices(rng, 1)[0])


def format_density_matrix(state: TwoQubitState) -> str:
    """Serialise to plain text: 4 rows x 4 columns of ``re+imj`` pairs.

    Row-major, whitespace separated; parseable by Python's ``complex``.
    """
    lines = []
    for row in state.matrix:
        lines.append(" ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row))
    return "\n".join(lines) + "\n"


def parse_density_matrix(text: str) -> TwoQubitState:
    """Inverse of :func:`format_density_matrix`."""
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    if len(rows) != 4 or any(len(r) != 4 for r in rows):
        raise ValueError("density-matrix text must contain 4 rows of 4 entries")
    mat = np.array([[complex(entry) for entry in row] for row in rows])
    return TwoQubitState(mat)
