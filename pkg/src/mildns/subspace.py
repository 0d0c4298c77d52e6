"""Probes for the maximal strong-continuity subspace.

The heat semigroup fails to be strongly continuous at t = 0 on the whole weak
space; it is strongly continuous exactly on the closure of the Laplacian's
domain.  Numerically that dichotomy shows up in an epsilon sweep of
|e^{eps D} f - f|: members decay linearly in eps, scale-invariant profiles
plateau.  Membership is decided three-valued with pinned thresholds; a probe
cannot certify a closure property, so borderline data stays inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import weak_norm
from .duhamel import duhamel_force_all
from .field import Field
from .harnessutil import fit_loglog
from .lorentz import lorentz_quasinorm
from .spectral import heat_semigroup, leray_project
from .timegrid import Trajectory

__all__ = [
    "ContinuitySweep",
    "semigroup_continuity_sweep",
    "xsigma_membership",
    "density_approximation",
    "DensityReport",
    "duhamel_xsigma_check",
    "DuhamelMembershipReport",
    "default_ladder",
]

SLOPE_POINTS = 6  # tail points used for the log-log slope fit
PLATEAU_POINTS = 3
PLATEAU_VARIATION = 0.10
TAU_ABS_REL = 1e-3  # membership cut, relative to |f|
SLOPE_CUT = 0.5
PLATEAU_FACTOR = 10.0


@dataclass
class ContinuitySweep:
    """Measured semigroup-continuity ladder for one field."""

    epsilons: np.ndarray  # strictly decreasing
    deltas: np.ndarray  # |e^{eps D} f - f| in the weak norm
    slope: float  # log-log slope over the smallest SLOPE_POINTS epsilons
    plateau: bool  # last PLATEAU_POINTS vary by < PLATEAU_VARIATION
    norm: float  # |f| itself, for relative thresholds

    def csv_rows(self):
        yield ["epsilon", "delta"]
        for e, d in zip(self.epsilons, self.deltas):
            yield [e, d]


def default_ladder(top: float = 1.0, steps: int = 12) -> np.ndarray:
    return top * 2.0 ** (-np.arange(steps + 1, dtype=np.float64))


def semigroup_continuity_sweep(
    f: Field, p: float | None = None, ladder: np.ndarray | None = None
) -> ContinuitySweep:
    """delta_j = |e^{eps_j D} f - f|_{p,w} down a geometric epsilon ladder."""
    if ladder is None:
        ladder = default_ladder()
    ladder = np.asarray(ladder, dtype=np.float64)
    if len(ladder) < 4:
        raise ValueError("ladder must hold at least 4 epsilons for the fit")
    if np.any(np.diff(ladder) >= 0):
        raise ValueError("ladder must be strictly decreasing")
    if f.is_vector:
        f = leray_project(f)
    p = float(f.grid.n) if p is None else p
    norm = lorentz_quasinorm(f, p)
    deltas = np.array(
        [lorentz_quasinorm(heat_semigroup(f, e) - f, p) for e in ladder]
    )
    tail = slice(max(0, len(ladder) - SLOPE_POINTS), len(ladder))
    positive = deltas[tail] > 0
    if positive.all():
        slope, _, _ = fit_loglog(ladder[tail], deltas[tail])
    else:
        slope = float("inf")  # identically continuous at resolution
    last = deltas[-PLATEAU_POINTS:]
    plateau = bool(
        last.min() > 0 and (last.max() - last.min()) / last.max() < PLATEAU_VARIATION
    )
    return ContinuitySweep(ladder, deltas, float(slope), plateau, norm)


def xsigma_membership(f: Field, sweep: ContinuitySweep | None = None,
                      ladder: np.ndarray | None = None) -> str:
    """Three-valued membership decision: member | non_member | inconclusive."""
    if sweep is None:
        sweep = semigroup_continuity_sweep(f, ladder=ladder)
    tau_abs = TAU_ABS_REL * sweep.norm
    if sweep.deltas[-1] < tau_abs and (
        sweep.slope >= SLOPE_CUT or not np.isfinite(sweep.slope)
    ):
        return "member"
    if sweep.plateau and sweep.deltas[-1] > PLATEAU_FACTOR * tau_abs:
        return "non_member"
    return "inconclusive"


@dataclass
class DensityReport:
    approximant: Trajectory
    achieved: float  # measured sup-in-t weak-L^p error at the nodes
    kept_nodes: int  # snapshot count of the interpolant
    modulus: float  # discrete modulus of continuity of the input


def density_approximation(
    f: Trajectory, eps: float, p: float, p_prime: float
) -> DensityReport:
    """Piecewise-linear-in-time interpolant through subsampled snapshots.

    Snapshot times are chosen greedily so adjacent kept snapshots differ by
    less than eps/5 in the weak-L^p norm, then the interpolant is evaluated
    back on every node and the achieved error measured.  On a bounded grid
    the height/radius truncation of snapshots is degenerate (every field is
    already bounded with bounded support), so the time refinement carries the
    approximation content: halving eps never decreases the snapshot count.
    """
    if not p_prime > p:
        raise ValueError("need p_prime > p")
    if eps <= 0:
        raise ValueError("eps must be positive")
    nodes = f.time_grid.nodes
    diffs = [lorentz_quasinorm(f[i + 1] - f[i], p) for i in range(len(f) - 1)]
    modulus = max(diffs) if diffs else 0.0

    kept = [0]
    cur = 0
    for j in range(1, len(f)):
        if lorentz_quasinorm(f[j] - f[cur], p) >= eps / 5.0 or j == len(f) - 1:
            kept.append(j)
            cur = j
    if kept[-1] != len(f) - 1:
        kept.append(len(f) - 1)

    phis = []
    seg = 0
    for i in range(len(f)):
        while seg + 1 < len(kept) and nodes[kept[seg + 1]] < nodes[i]:
            seg += 1
        a, b = kept[seg], kept[min(seg + 1, len(kept) - 1)]
        if b == a:
            phis.append(f[a])
            continue
        theta = (nodes[i] - nodes[a]) / (nodes[b] - nodes[a])
        phis.append(f[a] * (1.0 - theta) + f[b] * theta)
    approx = Trajectory(f.time_grid, phis)
    achieved = max(
        lorentz_quasinorm(f[i] - approx[i], p) for i in range(len(f))
    )
    return DensityReport(approx, float(achieved), len(kept), float(modulus))


@dataclass
class DuhamelMembershipReport:
    times: list[float]
    decisions: list[str]
    norms: list[float]
    small_time_slope: float
    all_member: bool


def duhamel_xsigma_check(
    f: Trajectory, battery: int = 3, ladder: np.ndarray | None = None
) -> DuhamelMembershipReport:
    """Check Duhamel integrals of f land in the subspace and vanish at t=0.

    Evaluates F(t) at a battery of nodes, sweeps each for membership, and
    fits the small-time decay of |F(t)|.
    """
    F = duhamel_force_all(f)
    n = f.grid.n
    nodes = F.time_grid.nodes
    # battery of positive nodes, geometrically spread over the horizon
    idx = sorted(
        {max(1, int(round(len(nodes) * frac))) for frac in (0.25, 0.5, 1.0)}
    )[:battery]
    idx = [min(i, len(nodes) - 1) for i in idx]
    times, decisions, norms = [], [], []
    for i in idx:
        times.append(float(nodes[i]))
        decisions.append(xsigma_membership(F[i], ladder=ladder))
        norms.append(weak_norm(F[i], n))
    # small-time decay of |F(t)| over the early positive nodes
    early = [i for i in range(1, len(nodes)) if nodes[i] <= nodes[-1] / 4][:8]
    if len(early) >= 3:
        ts = np.array([nodes[i] for i in early])
        vs = np.array([weak_norm(F[i], n) for i in early])
        if (vs > 0).all():
            slope, _, _ = fit_loglog(ts, vs)
        else:
            slope = float("nan")
    else:
        slope = float("nan")
    return DuhamelMembershipReport(
        times, decisions, norms, float(slope),
        all(d == "member" for d in decisions),
    )
