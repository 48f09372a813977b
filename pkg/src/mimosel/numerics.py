"""Complex vector primitives, orthonormal basis construction, and counting.

The dominant floating-point work of every kernel is funnelled through an
:class:`OpLedger` so that measured costs can be reconciled against the
closed-form models in :mod:`mimosel.complexity`. One "complex MAC" is one
term of a complex inner product; scalar divisions and comparisons are
tracked separately because the cost models ignore them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "OpLedger",
    "OrthonormalBasis",
    "BasisConstructionError",
    "hermitian_inner",
    "correlation",
    "gram_schmidt_extend",
    "orthonormality_defect",
    "subset_count",
]

#: Tolerance on basis orthonormality (off-diagonal inner products and norms).
ORTHO_TOL = 1e-10

#: A Gram-Schmidt residual below this norm means the draw was (numerically)
#: dependent on the existing columns and is redrawn.
RESIDUAL_FLOOR = 1e-8

#: Gaussian draws are almost surely independent, so exhausting the redraw
#: budget signals a broken random stream rather than bad luck.
MAX_REDRAWS = 100


class BasisConstructionError(RuntimeError):
    """Random draws repeatedly failed to extend the basis; the RNG is suspect."""


@dataclass
class OpLedger:
    """Running totals of dominant operation counts for one task.

    Concurrent tasks each own a private ledger; merge them at join points.
    """

    complex_macs: int = 0
    divisions: int = 0
    comparisons: int = 0

    def merge(self, other: "OpLedger") -> None:
        self.complex_macs += other.complex_macs
        self.divisions += other.divisions
        self.comparisons += other.comparisons


@dataclass(frozen=True)
class OrthonormalBasis:
    """Square matrix with orthonormal columns; column 0 is the seed direction."""

    matrix: np.ndarray
    basis_index: int = 0


def _as_vector(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a 1-D vector of length >= 1, got shape {arr.shape}")
    return arr


def hermitian_inner(a, b, ledger: OpLedger) -> complex:
    """Inner product sum(conj(a_i) * b_i); costs len(a) complex MACs."""
    av = _as_vector(a, "a")
    bv = _as_vector(b, "b")
    if av.size != bv.size:
        raise ValueError(f"dimension mismatch: len(a)={av.size}, len(b)={bv.size}")
    ledger.complex_macs += av.size
    return complex(np.vdot(av, bv))


def correlation(h, v, ledger: OpLedger) -> float:
    """Normalized magnitude of the inner product, clamped to [0, 1].

    Both norms and the inner product are computed here (3M MACs, one
    division); callers with precomputed norms should inline the cheaper form.
    """
    hv = _as_vector(h, "h")
    vv = _as_vector(v, "v")
    if hv.size != vv.size:
        raise ValueError(f"dimension mismatch: len(h)={hv.size}, len(v)={vv.size}")
    nh = np.linalg.norm(hv)
    nv = np.linalg.norm(vv)
    ledger.complex_macs += 3 * hv.size
    if nh == 0.0 or nv == 0.0:
        raise ValueError("correlation undefined for a zero-norm vector")
    num = abs(np.vdot(hv, vv))
    ledger.divisions += 1
    return float(min(max(num / (nh * nv), 0.0), 1.0))


def gram_schmidt_extend(
    seed,
    rng: np.random.Generator,
    ledger: OpLedger,
    basis_index: int = 0,
) -> OrthonormalBasis:
    """Extend a unit seed vector to a full orthonormal basis.

    Columns beyond the seed are drawn as complex Gaussian vectors (real and
    imaginary parts standard normal) and orthogonalized with modified
    Gram-Schmidt; a draw whose residual falls below ``RESIDUAL_FLOOR`` is
    redrawn, at most ``MAX_REDRAWS`` times.
    """
    sv = _as_vector(seed, "seed")
    m = sv.size
    ledger.complex_macs += m
    if abs(np.linalg.norm(sv) - 1.0) > ORTHO_TOL:
        raise ValueError("seed vector must have unit norm")

    basis = np.empty((m, m), dtype=np.complex128)
    basis[:, 0] = sv
    for j in range(1, m):
        for _ in range(MAX_REDRAWS + 1):
            z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            for i in range(j):
                coef = np.vdot(basis[:, i], z)
                z -= coef * basis[:, i]
                ledger.complex_macs += 2 * m
            resid = np.linalg.norm(z)
            ledger.complex_macs += m
            if resid >= RESIDUAL_FLOOR:
                break
        else:
            raise BasisConstructionError(
                f"no independent draw for column {j} after {MAX_REDRAWS} redraws"
            )
        basis[:, j] = z / resid
        ledger.divisions += m
    return OrthonormalBasis(matrix=basis, basis_index=basis_index)


def orthonormality_defect(matrix: np.ndarray) -> tuple[float, float]:
    """Return (max off-diagonal |inner product|, max |column norm - 1|)."""
    gram = matrix.conj().T @ matrix
    off = gram - np.diag(np.diag(gram))
    max_cross = float(np.max(np.abs(off))) if matrix.shape[1] > 1 else 0.0
    max_norm_err = float(np.max(np.abs(np.sqrt(np.diag(gram).real) - 1.0)))
    return max_cross, max_norm_err


def subset_count(u: int, k: int) -> int:
    """Number of non-empty subsets of at most k elements out of u (exact)."""
    u = int(u)
    k = int(k)
    if k < 1 or k > u:
        raise ValueError(f"require 1 <= k <= u, got k={k}, u={u}")
    return sum(math.comb(u, j) for j in range(1, k + 1))
