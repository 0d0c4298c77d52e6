"""Pseudospectral laboratory for Navier-Stokes mild solutions in weak-L^n.

Lorentz-norm calculus, the heat/Stokes multiplier algebra, singular Duhamel
quadrature, four successive-approximation schemes with contraction ledgers,
strong-continuity subspace probes, and an experiment harness that emits
delimited reports with rendered figures.
"""

from .field import Field, Grid
from .lorentz import (
    Rearrangement,
    lorentz_banach_norm,
    lorentz_quasinorm,
    lp_norm,
    rearrangement,
)
from .spectral import (
    Spectrum,
    differential,
    heat_semigroup,
    inverse_laplacian,
    leray_project,
    pressure_recover,
    transform,
    inverse_transform,
)
from .timegrid import TimeGrid, Trajectory
from .duhamel import (
    critical_estimate_ratio,
    duhamel_force,
    duhamel_G,
    duhamel_Gstar,
    heat_trajectory,
)
from .picard import (
    NormLedger,
    SchemeConfig,
    SchemeDivergence,
    SchemeRefusal,
    global_scheme,
    kato_scheme,
    local_shifted_scheme,
    residual_integral_equation,
    uniqueness_compare,
)
from .subspace import (
    ContinuitySweep,
    density_approximation,
    duhamel_xsigma_check,
    semigroup_continuity_sweep,
    xsigma_membership,
)
from .harness import (
    ExperimentSpec,
    brezis_decay_profile,
    decay_rate_fit,
    run_experiment,
    verify_strong_de,
)

__version__ = "0.1.0"
