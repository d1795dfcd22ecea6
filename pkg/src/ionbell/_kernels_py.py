"""Pure-NumPy reference implementation of the reconstruction kernels.

Mirrors ``_kernels_cy`` exactly (including the dilution rule), so either
backend can serve the tomography code. See ``_backend`` for selection.
"""

from __future__ import annotations

import numpy as np

_PROB_FLOOR = 1e-12


def mle_fixed_point(
    effects: np.ndarray,
    freqs: np.ndarray,
    rho0: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 10_000,
):
    """Iterate ``rho <- N[R(rho) rho R(rho)]`` to the likelihood maximum.

    ``effects``: (m, 4, 4) POVM elements; ``freqs``: (m,) observed
    frequencies normalised to sum to 1.  ``R(rho) = sum_k f_k E_k / p_k``
    with ``p_k = tr(E_k rho)``.  A step that lowers the log-likelihood is
    retaken in diluted form with ``(I + R)/2``.

    Returns ``(rho, iterations, residual, log_likelihood)``.
    """
    effects = np.ascontiguousarray(effects, dtype=np.complex128)
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    rho = np.array(rho0, dtype=np.complex128)
    eye = np.eye(4, dtype=np.complex128)

    prev_ll = -np.inf
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        probs = np.einsum("kab,ba->k", effects, rho).real
        np.clip(probs, _PROB_FLOOR, None, out=probs)
        ll = float(freqs @ np.log(probs))
        r_op = np.einsum("k,kab->ab", freqs / probs, effects)
        if ll + 1e-12 < prev_ll:
            r_op = (eye + r_op) / 2.0
        new = r_op @ rho @ r_op
        new = (new + new.conj().T) / 2.0
        new /= new.trace().real
        residual = float(np.max(np.abs(new - rho)))
        rho = new
        prev_ll = ll
        if residual < tol:
            break
    probs = np.clip(np.einsum("kab,ba->k", effects, rho).real, _PROB_FLOOR, None)
    ll = float(freqs @ np.log(probs))
    return rho, iterations, residual, ll


def mle_fixed_point_batch(
    effects: np.ndarray,
    freq_sets: np.ndarray,
    rho0: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 10_000,
):
    """Run :func:`mle_fixed_point` for each row of ``freq_sets``.

    Returns ``(rhos, iterations)`` with shapes ``(B, 4, 4)`` and ``(B,)``.
    """
    freq_sets = np.asarray(freq_sets, dtype=np.float64)
    batch = freq_sets.shape[0]
    rhos = np.empty((batch, 4, 4), dtype=np.complex128)
    iters = np.empty(batch, dtype=np.int64)
    for b in range(batch):
        rho, n_it, _, _ = mle_fixed_point(effects, freq_sets[b], rho0, tol, max_iter)
        rhos[b] = rho
        iters[b] = n_it
    return rhos, iters
