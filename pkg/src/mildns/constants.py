"""Empirically calibrated estimate constants.

The contraction arguments rely on bilinear bounds whose constants the theory
leaves existential.  Here each constant is measured as the maximal observed
ratio over a fixed, versioned probe family on the run's own grid; prechecks
later divide by a safety factor.  The probe family is hashed into every
ledger so certificates are reproducible.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field, asdict

import numpy as np

from .field import Field, Grid
from .lorentz import lorentz_quasinorm, lp_norm, quasinorm_of_magnitude
from .duhamel import (
    critical_estimate_ratio,
    duhamel_G_all,
    duhamel_Gstar_all,
    heat_trajectory,
)
from .profiles import random_solenoidal
from .spectral import jacobian_magnitude
from .timegrid import TimeGrid, Trajectory

__all__ = ["EmpiricalConstants", "measure_constants", "weak_norm", "grad_weak_norm"]

PROBE_FAMILY_VERSION = 1
_PROBE_SEEDS = (101, 211, 307)


def weak_norm(f: Field, p: float) -> float:
    return lorentz_quasinorm(f, p)


def grad_weak_norm(f: Field, p: float) -> float:
    """Weak-L^p norm of the Jacobian's Frobenius magnitude."""
    mag = jacobian_magnitude(f)
    return quasinorm_of_magnitude(mag, f.grid.cell_volume, p)


def grad_lp_norm(f: Field, p: float) -> float:
    mag = jacobian_magnitude(f)
    return float((np.sum(mag**p) * f.grid.cell_volume) ** (1.0 / p))


@dataclass(frozen=True)
class EmpiricalConstants:
    """Maximal observed bilinear-estimate ratios over the probe family."""

    c1: float  # tensor form, flat weak-L^n ledger
    c2: float  # convective form, joint (value, gradient) ledger
    c5: float  # quadratic constant of the shifted local recurrence
    c6: float  # Kato weighted L^r ledger
    c7: float  # Kato weak-L^n ledger
    c8: float  # Kato weighted gradient ledger
    a_hat: float  # force-estimate ratio envelope at the canonical exponent
    b_hat: float  # gradient-estimate ratio envelope
    r: float
    probe_hash: str

    def to_dict(self) -> dict:
        return asdict(self)


_cache: dict = {}


def _probe_trajectories(grid: Grid, tg: TimeGrid) -> list[Trajectory]:
    """Seeded solenoidal probes shaped like scheme iterates."""
    probes = []
    T = tg.horizon
    for seed in _PROBE_SEEDS:
        rng = np.random.default_rng(seed)
        base = random_solenoidal(grid, rng)
        probes.append(Trajectory.constant(tg, base))
        probes.append(
            Trajectory(tg, [base * float(np.exp(-t)) for t in tg.nodes])
        )
        probes.append(heat_trajectory(base, tg))
        second = random_solenoidal(grid, rng)
        probes.append(
            Trajectory(
                tg,
                [
                    base * float(np.cos(2 * np.pi * t / T))
                    + second * float(np.sin(2 * np.pi * t / T))
                    for t in tg.nodes
                ],
            )
        )
    return probes


def _sup(traj: Trajectory, norm, weight: float = 0.0) -> float:
    vals = []
    for t, f in zip(traj.time_grid.nodes, traj.fields):
        if weight > 0.0 and t == 0.0:
            continue
        w = t**weight if weight > 0.0 else 1.0
        vals.append(w * norm(f))
    return max(vals)


def probe_family_hash(grid: Grid, tg: TimeGrid) -> str:
    payload = {
        "version": PROBE_FAMILY_VERSION,
        "grid": [grid.n, grid.N, grid.L],
        "nodes": [float(t) for t in tg.nodes],
        "seeds": list(_PROBE_SEEDS),
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def measure_constants(grid: Grid, tg: TimeGrid, r: float = 6.0) -> EmpiricalConstants:
    """Measure every contraction constant on (grid, tg); cached per signature."""
    key = (grid, tg.nodes.tobytes(), r, PROBE_FAMILY_VERSION)
    if key in _cache:
        return _cache[key]

    n = grid.n
    kw = 0.5 - n / (2.0 * r)  # Kato weight on the L^r ledger
    c1 = c2 = c6 = c7 = c8 = 0.0
    for probe in _probe_trajectories(grid, tg):
        k_flat = _sup(probe, lambda f: weak_norm(f, n))
        g_tensor = duhamel_G_all(probe, probe)
        c1 = max(c1, _sup(g_tensor, lambda f: weak_norm(f, n)) / k_flat**2)

        g_conv = duhamel_Gstar_all(probe, probe)
        k_star = max(
            k_flat, _sup(probe, lambda f: grad_weak_norm(f, n / 2.0))
        )
        g_star_sup = max(
            _sup(g_conv, lambda f: weak_norm(f, n)),
            _sup(g_conv, lambda f: grad_weak_norm(f, n / 2.0)),
        )
        c2 = max(c2, g_star_sup / k_star**2)

        K = _sup(probe, lambda f: lp_norm(f, r), weight=kw)
        L = _sup(probe, lambda f: weak_norm(f, n))
        M = _sup(probe, lambda f: grad_weak_norm(f, n), weight=0.5)
        c6 = max(c6, _sup(g_conv, lambda f: lp_norm(f, r), weight=kw) / K**2)
        c7 = max(c7, _sup(g_conv, lambda f: weak_norm(f, n)) / (K * L))
        c8 = max(
            c8, _sup(g_conv, lambda f: grad_weak_norm(f, n), weight=0.5) / (K * M)
        )

    # critical-estimate envelopes at the exponents the schemes use
    p_modi = 1.0 if n == 3 else n / 3.0
    p_meyer = n / 2.0
    a_hat = b_hat = 0.0
    rng = np.random.default_rng(_PROBE_SEEDS[0])
    for _ in range(2):
        base = random_solenoidal(grid, rng)
        probe = Trajectory(tg, [base * float(np.exp(-t)) for t in tg.nodes])
        a_hat = max(a_hat, critical_estimate_ratio(probe, p_modi, "modi").ratio)
        b_hat = max(b_hat, critical_estimate_ratio(probe, p_meyer, "meyer").ratio)

    out = EmpiricalConstants(
        c1=c1, c2=c2, c5=c1, c6=c6, c7=c7, c8=c8,
        a_hat=a_hat, b_hat=b_hat, r=r,
        probe_hash=probe_family_hash(grid, tg),
    )
    _cache[key] = out
    return out
