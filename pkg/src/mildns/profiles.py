"""Reference profiles and randomized probe fields.

The catalogue carries the regression surface for the membership probes: each
entry knows its expected decision and why.  Singular profiles are mollified at
a declared multiple of the grid spacing (default two cells) so they stay
representable while the mollification scale shrinks under refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import Field, Grid, coordinate_arrays, radius_array
from .spectral import dealias_field, leray_project, transform, inverse_transform, Spectrum

__all__ = [
    "gaussian_bump",
    "mollified_power",
    "far_field_decay",
    "checkerboard_singular",
    "single_mode",
    "solenoidal_single_mode",
    "random_band_limited",
    "random_solenoidal",
    "mean_free",
    "vectorize",
    "CatalogueEntry",
    "catalogue",
]


def gaussian_bump(grid: Grid, sigma: float = 2.0, amplitude: float = 1.0) -> Field:
    r2 = radius_array(grid) ** 2
    return Field(grid, amplitude * np.exp(-r2 / sigma**2))


def mollified_power(grid: Grid, alpha: float = 1.0, moll_cells: float = 2.0) -> Field:
    """(|x|^2 + eps^2)^(-alpha/2) with eps = moll_cells * h.

    For alpha = n/p this is the scale-invariant profile whose weak-L^p norm
    carries the analytic constant; the mollification scale tracks the grid.
    """
    eps = moll_cells * grid.h
    r2 = radius_array(grid) ** 2
    return Field(grid, (r2 + eps**2) ** (-alpha / 2.0))


def capped_power(grid: Grid, alpha: float = 1.0, moll_cells: float = 2.0) -> Field:
    """min(|x|^(-alpha), cap) with cap = (moll_cells * h)^(-alpha).

    The sharp cap keeps the distribution function exactly analytic below the
    cap level, so the scale-invariance signatures (norm constant, semigroup
    plateau) settle much faster than with the smooth mollification.
    """
    eps = moll_cells * grid.h
    r = radius_array(grid)
    r = np.maximum(r, eps)
    return Field(grid, r ** (-alpha))


def far_field_decay(grid: Grid, core: float = 1.0) -> Field:
    """Smooth near 0, ~ 1/|x| for |x| >> core; the core scale is physical."""
    r2 = radius_array(grid) ** 2
    return Field(grid, (r2 + core**2) ** (-0.5))


def checkerboard_singular(grid: Grid, moll_cells: float = 2.0) -> Field:
    """Scale-invariant |x|^{-1} magnitude with sign alternating by quadrant."""
    eps = moll_cells * grid.h
    xs = coordinate_arrays(grid)
    r2 = sum(x**2 for x in xs) + eps**2
    return Field(grid, xs[0] * xs[1] * r2 ** (-3.0 / 2.0))


def single_mode(grid: Grid, k: tuple[int, ...], amplitude: float = 1.0) -> Field:
    """cos(xi . x) with xi = 2 pi k / L."""
    xs = coordinate_arrays(grid)
    phase = sum(2.0 * np.pi * ki / grid.L * x for ki, x in zip(k, xs))
    return Field(grid, amplitude * np.cos(phase))


def solenoidal_single_mode(
    grid: Grid, k: tuple[int, ...] = (0, 1, 0), amplitude: float = 1.0
) -> Field:
    """Divergence-free single mode: direction orthogonal to the wavevector."""
    k = tuple(k)
    direction = np.zeros(grid.n)
    # pick the first axis with zero wavenumber; fall back to a projected axis
    for j in range(grid.n):
        if k[j] == 0:
            direction[j] = 1.0
            break
    else:
        raise ValueError("wavevector must have a zero component")
    mode = single_mode(grid, k, amplitude)
    data = np.stack([direction[j] * mode.data[0] for j in range(grid.n)])
    return Field(grid, data)


def random_band_limited(
    grid: Grid,
    rng: np.random.Generator,
    components: int = 1,
    kmax: int | None = None,
) -> Field:
    """Random smooth field: white noise low-passed to |k_i| <= kmax.

    kmax defaults to N/6, half the dealiasing cutoff, so quadratic products of
    probes remain alias-free.
    """
    if kmax is None:
        kmax = max(2, grid.N // 6)
    data = rng.standard_normal((components,) + grid.shape)
    f = Field(grid, data)
    s = transform(f)
    kk = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    ks = np.meshgrid(*([kk] * grid.n), indexing="ij")
    mask = np.ones(grid.shape, dtype=bool)
    for karr in ks:
        mask &= np.abs(karr) <= kmax
    coeffs = s.coeffs * mask
    coeffs[(slice(None),) + (0,) * grid.n] = 0.0  # mean-free
    out = inverse_transform(Spectrum(grid, coeffs))
    peak = np.max(np.abs(out.data))
    return Field(grid, out.data / peak if peak > 0 else out.data)


def random_solenoidal(
    grid: Grid, rng: np.random.Generator, kmax: int | None = None
) -> Field:
    return leray_project(random_band_limited(grid, rng, grid.n, kmax))


def mean_free(f: Field) -> Field:
    mean = f.data.reshape(f.components, -1).mean(axis=1)
    return Field(f.grid, f.data - mean[(...,) + (np.newaxis,) * f.grid.n])


def vectorize(f: Field, project: bool = True) -> Field:
    """Scalar profile times e_1, optionally Leray-projected.

    Projection preserves the decay class of the profile (the Riesz symbols are
    homogeneous of degree zero), which is what the membership probes need.
    """
    if f.is_vector:
        return leray_project(f) if project else f
    data = np.zeros((f.grid.n,) + f.grid.shape)
    data[0] = f.data[0]
    out = Field(f.grid, data)
    return leray_project(out) if project else out


@dataclass(frozen=True)
class CatalogueEntry:
    name: str
    expected: str  # member | non_member
    provenance: str
    ladder_top: float  # largest epsilon of the suggested sweep ladder
    ladder_steps: int

    def build(self, grid: Grid) -> Field:
        builder = _BUILDERS[self.name]
        return vectorize(builder(grid))


def _bump(grid):
    return gaussian_bump(grid, sigma=grid.L / 10.0)


def _far_field(grid):
    return far_field_decay(grid, core=grid.L / 20.0)


def _global_xinv(grid):
    # one-cell cap: separates the invariance window from the box's spectral
    # gap, which a two-cell cap cannot do at desk resolutions
    return capped_power(grid, alpha=1.0, moll_cells=1.0)


def _checkerboard(grid):
    return checkerboard_singular(grid, moll_cells=1.0)


_BUILDERS = {
    "smooth_bump": _bump,
    "far_field_xinv": _far_field,
    "global_xinv": _global_xinv,
    "checkerboard_xinv": _checkerboard,
}

catalogue: tuple[CatalogueEntry, ...] = (
    CatalogueEntry(
        "smooth_bump",
        "member",
        "compactly-concentrated smooth profile; semigroup continuity is O(eps)",
        1.0,
        12,
    ),
    CatalogueEntry(
        "far_field_xinv",
        "member",
        "smooth core with 1/|x| far field: inside the Laplacian domain closure "
        "despite missing from the C0 closure",
        1.0,
        12,
    ),
    CatalogueEntry(
        "global_xinv",
        "non_member",
        "scale-invariant 1/|x| profile capped at one cell: semigroup "
        "distance plateaus on the invariance window",
        16.0,
        3,
    ),
    CatalogueEntry(
        "checkerboard_xinv",
        "non_member",
        "same scale-invariant magnitude with quadrant-alternating sign",
        16.0,
        3,
    ),
)
