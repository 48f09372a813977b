"""Zero-forcing post-processing SNR and sum spectral efficiency.

For a selected channel H_sel (columns = selected users), the ZF receiver's
per-stream SNR is 1 / (n0 * diag(inv(G))) with G = H_sel^H H_sel. G is
Hermitian positive definite whenever the columns are independent, so the
inverse diagonal is taken through a Cholesky factor, guarded by a condition
number limit.
"""

from __future__ import annotations

import numpy as np

from .numerics import OpLedger

__all__ = [
    "SingularSetError",
    "COND_LIMIT",
    "zf_post_snr",
    "sum_spectral_efficiency",
]

#: Selected sets whose Gram matrix condition number exceeds this are treated
#: as rank deficient; callers score them as minus-infinity sum rate.
COND_LIMIT = 1e12


class SingularSetError(ValueError):
    """The selected columns are not linearly independent at working precision."""


def _as_selected(h_sel) -> np.ndarray:
    h = np.asarray(h_sel, dtype=np.complex128)
    if h.ndim == 1:
        h = h[:, np.newaxis]
    if h.ndim != 2:
        raise ValueError(f"selected channel must be 2-D, got shape {h.shape}")
    m, k = h.shape
    if not 1 <= k <= m:
        raise ValueError(f"require 1 <= K <= M for zero forcing, got K={k}, M={m}")
    return h


def zf_post_snr(h_sel, n0: float, ledger: OpLedger) -> np.ndarray:
    """Per-stream post-processing SNR of the ZF receiver for each column.

    Raises :class:`SingularSetError` when the Gram matrix is singular or its
    condition number exceeds ``COND_LIMIT``.
    """
    h = _as_selected(h_sel)
    m, k = h.shape
    if n0 <= 0:
        raise ValueError(f"n0 must be positive, got {n0}")
    gram = h.conj().T @ h
    ledger.complex_macs += k * k * m
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 0.0 or eigs[-1] / eigs[0] > COND_LIMIT:
        raise SingularSetError(
            f"gram matrix of the selected set is ill conditioned (K={k}, M={m})"
        )
    chol = np.linalg.cholesky(gram)
    chol_inv = np.linalg.solve(chol, np.eye(k, dtype=np.complex128))
    ledger.complex_macs += k**3
    gram_inv_diag = np.sum(np.abs(chol_inv) ** 2, axis=0)
    ledger.divisions += k
    return 1.0 / (n0 * gram_inv_diag)


def sum_spectral_efficiency(h_sel, n0: float, ledger: OpLedger) -> float:
    """ZF sum spectral efficiency sum_k log2(1 + SNR_k) in bits/s/Hz."""
    snr = zf_post_snr(h_sel, n0, ledger)
    return float(np.sum(np.log2(1.0 + snr)))
