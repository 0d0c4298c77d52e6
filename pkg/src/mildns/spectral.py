"""Fourier-side calculus on the discrete wavevector lattice.

Transforms, the heat semigroup, the Leray projection, derivatives, inverse and
fractional Laplacians and pressure recovery are all exact multipliers on the
lattice xi = 2*pi*k/L, k in {-N/2, ..., N/2-1}^n.  Coefficients follow the
Fourier-series convention c_k = fft(f)/N^n, so f(x) = sum_k c_k exp(i xi.x)
and the grid L^2 norm of f equals L^(n/2) times the l^2 norm of c.

Quadratic products (u (x) v, u.grad v) are dealiased with the 2/3-rule before
returning to mode space.
"""

from __future__ import annotations

import numpy as np

from .field import Field, Grid

__all__ = [
    "Spectrum",
    "transform",
    "inverse_transform",
    "heat_semigroup",
    "leray_project",
    "differential",
    "inverse_laplacian",
    "fractional_laplacian",
    "dealias_field",
    "tensor_divergence",
    "convective_term",
    "pressure_recover",
    "solenoidal_defect",
]

_lattice_cache: dict[tuple[int, int, float], dict] = {}


def lattice(grid: Grid) -> dict:
    """Cached wavevector arrays: xi components, |xi|^2, masks.

    The unpaired Nyquist row k = -N/2 breaks Hermitian symmetry under odd
    symbols (i xi, Riesz products), so derivative wavevectors `xi_d` vanish on
    any mode with a Nyquist component and the projection acts as the identity
    there; even scalar symbols (heat, Laplacian powers) use the full lattice.
    """
    key = (grid.n, grid.N, grid.L)
    if key not in _lattice_cache:
        k = np.fft.fftfreq(grid.N, d=1.0 / grid.N)  # integers, fft order
        ks = np.meshgrid(*([k] * grid.n), indexing="ij")
        xi = [2.0 * np.pi / grid.L * kk for kk in ks]
        xi_sq = sum(x**2 for x in xi)
        nyq = np.ones(grid.shape, dtype=bool)
        for kk in ks:
            nyq &= kk != -(grid.N // 2)
        xi_d = [x * nyq for x in xi]
        cutoff = grid.N // 3  # keep |k_i| <= N/3: quadratic products alias-free
        mask = np.ones(grid.shape, dtype=bool)
        for kk in ks:
            mask &= np.abs(kk) <= cutoff
        _lattice_cache[key] = {
            "xi": xi, "xi_d": xi_d, "xi_sq": xi_sq, "dealias": mask,
        }
    return _lattice_cache[key]


class Spectrum:
    """Fourier coefficients of a Field, same (c, N, ..., N) layout."""

    def __init__(self, grid: Grid, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim == grid.n:
            coeffs = coeffs[np.newaxis]
        if coeffs.shape[1:] != grid.shape:
            raise ValueError(f"coefficient shape {coeffs.shape} vs grid {grid}")
        self.grid = grid
        self.coeffs = coeffs

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]


def transform(f: Field) -> Spectrum:
    axes = tuple(range(1, f.grid.n + 1))
    return Spectrum(f.grid, np.fft.fftn(f.data, axes=axes) / f.grid.N**f.grid.n)


def inverse_transform(s: Spectrum) -> Field:
    axes = tuple(range(1, s.grid.n + 1))
    data = np.fft.ifftn(s.coeffs * s.grid.N**s.grid.n, axes=axes)
    return Field(s.grid, data.real)


def _apply_scalar_symbol(f: Field, symbol: np.ndarray) -> Field:
    s = transform(f)
    return inverse_transform(Spectrum(f.grid, s.coeffs * symbol))


def heat_semigroup(f: Field, t: float) -> Field:
    """e^{t Laplacian} f via the multiplier exp(-t |xi|^2).

    Preserves the mean (k = 0 mode) and satisfies the semigroup law exactly
    in mode space.
    """
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if t == 0:
        return f.copy()
    return _apply_scalar_symbol(f, np.exp(-t * lattice(f.grid)["xi_sq"]))


def heat_multiplier(grid: Grid, t: float) -> np.ndarray:
    return np.exp(-t * lattice(grid)["xi_sq"])


def leray_project_spectrum(s: Spectrum) -> Spectrum:
    """u_hat -> u_hat - xi (xi . u_hat)/|xi|^2; identity on the zero mode."""
    if s.components != s.grid.n:
        raise ValueError("Leray projection needs a vector field")
    lat = lattice(s.grid)
    xi_d, xi_sq = lat["xi_d"], lat["xi_sq"]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(xi_sq > 0, 1.0 / np.where(xi_sq > 0, xi_sq, 1.0), 0.0)
    dot = sum(xi_d[j] * s.coeffs[j] for j in range(s.grid.n)) * inv
    out = np.stack([s.coeffs[j] - xi_d[j] * dot for j in range(s.grid.n)])
    return Spectrum(s.grid, out)


def leray_project(u: Field) -> Field:
    """Projection onto divergence-free fields."""
    return inverse_transform(leray_project_spectrum(transform(u)))


def differential(f: Field, kind: str) -> Field:
    """Exact spectral derivative: gradient, divergence or laplacian."""
    lat = lattice(f.grid)
    xi_d, xi_sq = lat["xi_d"], lat["xi_sq"]
    s = transform(f)
    if kind == "gradient":
        if f.components != 1:
            raise ValueError("gradient takes a scalar field")
        coeffs = np.stack([1j * xi_d[j] * s.coeffs[0] for j in range(f.grid.n)])
    elif kind == "divergence":
        if not f.is_vector:
            raise ValueError("divergence takes a vector field")
        coeffs = sum(1j * xi_d[j] * s.coeffs[j] for j in range(f.grid.n))[np.newaxis]
    elif kind == "laplacian":
        coeffs = -xi_sq * s.coeffs
    else:
        raise ValueError(f"unknown derivative kind {kind!r}")
    return inverse_transform(Spectrum(f.grid, coeffs))


def vector_gradient(f: Field) -> np.ndarray:
    """All partials d_l f_j as an array of shape (c, n, N, ..., N)."""
    lat = lattice(f.grid)
    xi_d = lat["xi_d"]
    s = transform(f)
    out = np.empty((f.components, f.grid.n) + f.grid.shape)
    scale = f.grid.N**f.grid.n
    for j in range(f.components):
        for l in range(f.grid.n):
            out[j, l] = np.fft.ifftn(1j * xi_d[l] * s.coeffs[j] * scale, axes=tuple(range(f.grid.n))).real
    return out


def jacobian_magnitude(f: Field) -> np.ndarray:
    """Pointwise Frobenius magnitude of the full Jacobian of f."""
    grads = vector_gradient(f)
    return np.sqrt(np.sum(grads**2, axis=(0, 1)))


def inverse_laplacian(f: Field, s: float = 1.0) -> Field:
    """(-Laplacian)^{-s} with the zero mode annihilated, s in (0, 1]."""
    if not 0 < s <= 1:
        raise ValueError(f"s must lie in (0, 1], got {s}")
    xi_sq = lattice(f.grid)["xi_sq"]
    with np.errstate(divide="ignore"):
        symbol = np.where(xi_sq > 0, xi_sq ** (-s), 0.0)
    return _apply_scalar_symbol(f, symbol)


def fractional_laplacian(f: Field, s: float) -> Field:
    """(-Laplacian)^{s} for s > 0 (|xi|^{2s} multiplier)."""
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    return _apply_scalar_symbol(f, lattice(f.grid)["xi_sq"] ** s)


def dealias_field(f: Field) -> Field:
    """2/3-rule truncation: zero all modes with any |k_i| > N/3."""
    mask = lattice(f.grid)["dealias"]
    s = transform(f)
    return inverse_transform(Spectrum(f.grid, s.coeffs * mask))


def tensor_divergence(
    u: Field, v: Field, project: bool = True, assume_dealiased: bool = False
) -> Spectrum:
    """Mode-space div(u (x) v), component j = sum_k d_k (u_k v_j), dealiased.

    This is the tensor-form nonlinearity; for divergence-free u it coincides
    with the convective form u.grad v.  The optional Leray projection acts on
    the free index j.
    """
    if not (u.is_vector and v.is_vector):
        raise ValueError("tensor divergence needs vector fields")
    u.check_composable(v)
    lat = lattice(u.grid)
    xi_d, mask = lat["xi_d"], lat["dealias"]
    if assume_dealiased:
        ud, vd = u, v
    else:
        ud = dealias_field(u)
        vd = ud if v is u else dealias_field(v)
    n = u.grid.n
    scale = u.grid.N**n
    axes = tuple(range(n))
    coeffs = np.empty((n,) + u.grid.shape, dtype=np.complex128)
    for j in range(n):
        acc = np.zeros(u.grid.shape, dtype=np.complex128)
        for k in range(n):
            prod_hat = np.fft.fftn(ud.data[k] * vd.data[j], axes=axes) / scale
            acc += 1j * xi_d[k] * (prod_hat * mask)
        coeffs[j] = acc
    out = Spectrum(u.grid, coeffs)
    return leray_project_spectrum(out) if project else out


def convective_term(
    u: Field, v: Field, project: bool = True, assume_dealiased: bool = False
) -> Spectrum:
    """Mode-space u.grad v (convective form), dealiased."""
    if not (u.is_vector and v.is_vector):
        raise ValueError("convective term needs vector fields")
    u.check_composable(v)
    if assume_dealiased:
        ud, vd = u, v
    else:
        ud = dealias_field(u)
        vd = ud if v is u else dealias_field(v)
    grads = vector_gradient(vd)
    lat = lattice(u.grid)
    mask = lat["dealias"]
    n = u.grid.n
    scale = u.grid.N**n
    axes = tuple(range(n))
    coeffs = np.empty((n,) + u.grid.shape, dtype=np.complex128)
    for j in range(n):
        pointwise = sum(ud.data[l] * grads[j, l] for l in range(n))
        coeffs[j] = np.fft.fftn(pointwise, axes=axes) / scale * mask
    out = Spectrum(u.grid, coeffs)
    return leray_project_spectrum(out) if project else out


def pressure_recover(u: Field, f: Field) -> Field:
    """Recover the pressure from velocity and force.

    pi solves Laplacian pi = div(f - u.grad u), i.e. grad pi equals the
    gradient part (I - P)(f - u.grad u); the mean of pi is zero.
    """
    if not u.is_vector:
        raise ValueError("velocity must be a vector field")
    g = convective_term(u, u, project=False)
    lat = lattice(u.grid)
    xi_d, xi_sq = lat["xi_d"], lat["xi_sq"]
    fs = transform(f)
    rhs = fs.coeffs - g.coeffs
    div_rhs = sum(1j * xi_d[j] * rhs[j] for j in range(u.grid.n))
    with np.errstate(divide="ignore"):
        inv = np.where(xi_sq > 0, 1.0 / np.where(xi_sq > 0, xi_sq, 1.0), 0.0)
    pi_hat = -div_rhs * inv  # Laplacian pi = div rhs, zero mean
    return inverse_transform(Spectrum(u.grid, pi_hat[np.newaxis]))


def solenoidal_defect(u: Field) -> float:
    """Max spectral divergence magnitude relative to the field size."""
    div = differential(u, "divergence")
    scale = float(np.max(np.abs(u.data)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(div.data))) / scale
