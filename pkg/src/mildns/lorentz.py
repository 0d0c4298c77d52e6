"""Discrete Lorentz-space calculus.

Distribution functions, decreasing rearrangements, the quasi-norm ||f||_{p,q}
and the equivalent Banach norm computed over superlevel sets.  Everything is
exact on the step-function distribution induced by the grid: the quasi-norm
supremum is attained at a jump point, the Banach-norm supremum over sets of a
fixed measure is attained on the cells holding the largest magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import Field

__all__ = [
    "Rearrangement",
    "rearrangement",
    "rearrangement_of_magnitude",
    "lorentz_quasinorm",
    "lorentz_banach_norm",
    "quasinorm_of_magnitude",
    "lp_norm",
    "l2_norm",
]


@dataclass(frozen=True)
class Rearrangement:
    """Sorted magnitudes m_1 >= m_2 >= ... over grid cells.

    mu_k = k * cell_volume is the measure of the k strongest cells; the pair
    (mu_k, m_k) is the discrete decreasing rearrangement of |f|.
    """

    magnitudes: np.ndarray
    cell_volume: float

    @property
    def measures(self) -> np.ndarray:
        return self.cell_volume * np.arange(1, len(self.magnitudes) + 1)

    def l1(self) -> float:
        return float(self.magnitudes.sum() * self.cell_volume)

    def to_csv_rows(self):
        mu = self.measures
        for k in range(len(self.magnitudes)):
            yield mu[k], self.magnitudes[k]


def rearrangement(f: Field) -> Rearrangement:
    """Decreasing rearrangement of |f| (Euclidean magnitude for vectors)."""
    f.require_finite()
    mags = np.sort(f.magnitude(), axis=None)[::-1]
    return Rearrangement(mags, f.grid.cell_volume)


def rearrangement_of_magnitude(mag: np.ndarray, cell_volume: float) -> Rearrangement:
    """Rearrangement of an arbitrary nonnegative magnitude array.

    Used for objects that are not Fields, e.g. the Frobenius magnitude of a
    full Jacobian.
    """
    if not np.isfinite(mag).all():
        idx = int(np.flatnonzero(~np.isfinite(mag).ravel())[0])
        raise ValueError(f"non-finite magnitude at flat index {idx}")
    return Rearrangement(np.sort(mag, axis=None)[::-1], cell_volume)


def quasinorm_of_magnitude(
    mag: np.ndarray, cell_volume: float, p: float, q: float = np.inf
) -> float:
    return lorentz_quasinorm(rearrangement_of_magnitude(mag, cell_volume), p, q)


def lorentz_quasinorm(f: Field | Rearrangement, p: float, q: float = np.inf) -> float:
    """Quasi-norm ||f||_{p,q}; q = inf is the primary (weak-L^p) path.

    For q = inf this is max_k m_k * mu_k^(1/p); for finite q the lambda
    integral is evaluated exactly on the step distribution function.
    """
    if p <= 1:
        raise ValueError(f"p must exceed 1 (Banach regime), got {p}")
    r = f if isinstance(f, Rearrangement) else rearrangement(f)
    m = r.magnitudes
    if m[0] == 0.0:
        return 0.0
    mu = r.measures
    if np.isinf(q):
        return float(np.max(m * mu ** (1.0 / p)))
    if q < 1:
        raise ValueError(f"q must lie in [1, inf], got {q}")
    # integral of lambda^{q-1} d(lambda)^{q/p} over [m_{k+1}, m_k)
    m_next = np.append(m[1:], 0.0)
    seg = mu ** (q / p) * (m**q - m_next**q) / q
    return float(np.sum(seg) ** (1.0 / q))


def lorentz_banach_norm(f: Field | Rearrangement, p: float, r: float = 1.0) -> float:
    """Banach norm sup_E |E|^{-1/r+1/p} (int_E |f|^r)^{1/r}, default r = 1.

    The supremum over sets of each fixed measure is attained on superlevel
    sets, so only prefix sums of the rearrangement enter.
    """
    if r >= p:
        raise ValueError(f"need r < p, got r={r}, p={p}")
    if r < 1:
        raise ValueError(f"need r >= 1, got {r}")
    re = f if isinstance(f, Rearrangement) else rearrangement(f)
    m = re.magnitudes
    if m[0] == 0.0:
        return 0.0
    mu = re.measures
    prefix = np.cumsum(m**r) * re.cell_volume
    return float(np.max(mu ** (-1.0 / r + 1.0 / p) * prefix ** (1.0 / r)))


def lp_norm(f: Field, p: float) -> float:
    """Plain grid L^p norm, p in [1, inf]."""
    mag = f.magnitude()
    if np.isinf(p):
        return float(mag.max())
    return float((np.sum(mag**p) * f.grid.cell_volume) ** (1.0 / p))


def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(f.data**2) * f.grid.cell_volume))
