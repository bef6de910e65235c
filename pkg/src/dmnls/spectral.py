"""Periodic pseudo-spectral toolbox: grids, the free Schrodinger flow,
Galilean operators, and discrete norms.

Conventions
-----------
* Centered periodic box [-L/2, L/2)^d with a uniform power-of-two lattice.
* Unitary FFT pair (symmetric 1/sqrt(N) scaling), so Parseval holds with the
  same cell-volume weight on both sides.
* The free propagator exp(it*Lap) is the Fourier multiplier exp(-i*t*|xi|^2);
  the sign is fixed by the linear equation i*u_t + Lap u = 0.
* Coordinate weights (x*u, |x|^gamma*u) use the centered box coordinate with
  no unwrapping; they are meaningful only while the solution stays away from
  the boundary, which is what `boundary_mass_fraction` monitors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Default validity threshold for mass in the outer 10% of the box.
BOUNDARY_MASS_DEFAULT = 1e-8

# Below this |t| the conjugated-Laplacian form of J^gamma degenerates
# (quadratic phase ~ 1/t); route to the exact t=0 expression |x|^gamma.
T_EPS_FRACTIONAL = 1e-8


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic lattice on [-L/2, L/2)^d plus its dual lattice.

    Arrays are precomputed once: coordinate meshes, |x|^2, angular frequency
    meshes xi_k = 2*pi*k/L in FFT ordering, |xi|^2, and per-axis odd-symbol
    multipliers with the (unpaired) Nyquist mode zeroed.
    """

    dimension: int
    points_per_axis: int
    box_length: float
    spacing: float
    axes: tuple = field(repr=False)           # d arrays of shape (N,)
    freq_axes: tuple = field(repr=False)      # d arrays of shape (N,), FFT order
    x: tuple = field(repr=False)              # d full-shape coordinate meshes
    x_sq: np.ndarray = field(repr=False)      # |x|^2, full shape
    xi: tuple = field(repr=False)             # d full-shape frequency meshes
    xi_sq: np.ndarray = field(repr=False)     # |xi|^2, full shape
    xi_grad: tuple = field(repr=False)        # xi meshes with Nyquist zeroed
    boundary_mask: np.ndarray = field(repr=False)  # outer 10% of the box

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.dimension == other.dimension
                and self.points_per_axis == other.points_per_axis
                and self.box_length == other.box_length)

    def __hash__(self):
        return hash((self.dimension, self.points_per_axis, self.box_length))

    @property
    def shape(self):
        return (self.points_per_axis,) * self.dimension

    @property
    def cell_volume(self):
        return self.spacing ** self.dimension


@dataclass(frozen=True)
class ComplexField:
    """One complex amplitude per grid point: the state u and everything
    derived from it (w(sigma), v(t), probes)."""

    grid: Grid
    values: np.ndarray

    def copy(self):
        return ComplexField(self.grid, self.values.copy())


def make_grid(dimension, points_per_axis, box_length):
    """Build a Grid for the centered box [-L/2, L/2)^d.

    Parameters
    ----------
    dimension : int
        1 or 2.
    points_per_axis : int
        Power of two >= 16 (FFT contract).
    box_length : float
        Side length L > 0.
    """
    if dimension not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {dimension}")
    n = int(points_per_axis)
    if n < 16 or (n & (n - 1)) != 0:
        raise ValueError(f"points_per_axis must be a power of two >= 16, got {points_per_axis}")
    length = float(box_length)
    if not (length > 0):
        raise ValueError(f"box_length must be positive, got {box_length}")

    h = length / n
    axis = -length / 2 + h * np.arange(n)
    freq = 2 * np.pi * np.fft.fftfreq(n, d=h)  # xi_k = 2*pi*k/L in FFT order
    axes = (axis,) * dimension
    freq_axes = (freq,) * dimension

    mesh = np.meshgrid(*axes, indexing="ij") if dimension > 1 else [axis]
    fmesh = np.meshgrid(*freq_axes, indexing="ij") if dimension > 1 else [freq]
    x = tuple(np.ascontiguousarray(m) for m in mesh)
    xi = tuple(np.ascontiguousarray(m) for m in fmesh)
    x_sq = sum(m ** 2 for m in x)
    xi_sq = sum(m ** 2 for m in xi)

    # Odd multipliers (i*xi) would act on the unpaired Nyquist mode with an
    # arbitrary sign choice; zero it instead.
    grad_axis = freq.copy()
    grad_axis[n // 2] = 0.0
    gmesh = (np.meshgrid(*((grad_axis,) * dimension), indexing="ij")
             if dimension > 1 else [grad_axis])
    xi_grad = tuple(np.ascontiguousarray(m) for m in gmesh)

    edge = 0.45 * length  # outer 10% of each axis, split between the two ends
    boundary_mask = np.zeros((n,) * dimension, dtype=bool)
    for m in x:
        boundary_mask |= np.abs(m) >= edge

    return Grid(dimension=dimension, points_per_axis=n, box_length=length,
                spacing=h, axes=axes, freq_axes=freq_axes, x=x, x_sq=x_sq,
                xi=xi, xi_sq=xi_sq, xi_grad=xi_grad,
                boundary_mask=boundary_mask)


def make_field(grid, values):
    """Wrap `values` (broadcastable to the grid shape) as a ComplexField."""
    arr = np.asarray(values, dtype=np.complex128)
    if arr.shape != grid.shape:
        arr = np.broadcast_to(arr, grid.shape).copy()
    return ComplexField(grid, np.ascontiguousarray(arr))


def _require_finite(values, what="field"):
    # np.isfinite on complex arrays requires both parts finite.
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{what} contains non-finite values")


def fft(values):
    """Forward unitary FFT (all axes)."""
    return np.fft.fftn(values, norm="ortho")


def ifft(values):
    """Inverse unitary FFT (all axes)."""
    return np.fft.ifftn(values, norm="ortho")


def free_propagate_hat(grid, values_hat, t):
    """Apply exp(it*Lap) to a spectral-space array."""
    return np.exp(-1j * t * grid.xi_sq) * values_hat


def free_propagate(u, t):
    """exp(it*Lap) u via the multiplier exp(-i*t*|xi|^2); unitary on L^2."""
    _require_finite(u.values)
    out = ifft(free_propagate_hat(u.grid, fft(u.values), t))
    return ComplexField(u.grid, out)


def gradient(u):
    """Spectral gradient: one field per axis, multiplier i*xi_j (Nyquist
    zeroed)."""
    _require_finite(u.values)
    u_hat = fft(u.values)
    return [ComplexField(u.grid, ifft(1j * xi_j * u_hat))
            for xi_j in u.grid.xi_grad]


def gradient_norm_sq(u):
    """||grad u||_2^2 evaluated spectrally (Parseval), consistent with
    `gradient`'s Nyquist convention."""
    u_hat = fft(u.values)
    power = np.abs(u_hat) ** 2
    return float(u.grid.cell_volume
                 * sum(np.sum(xi_j ** 2 * power) for xi_j in u.grid.xi_grad))


def galilean_apply(u, t):
    """J(t)u = x*u + 2it*grad(u), one component per axis."""
    grads = gradient(u)
    return [ComplexField(u.grid, x_j * u.values + 2j * t * g_j.values)
            for x_j, g_j in zip(u.grid.x, grads)]


def galilean_norm(u, t):
    """||J(t)u||_2 summed over components (vector L^2 norm)."""
    comps = galilean_apply(u, t)
    total = sum(np.sum(np.abs(c.values) ** 2) for c in comps)
    return math.sqrt(u.grid.cell_volume * float(total))


def fractional_galilean(u, t, gamma):
    """J^gamma(t)u for gamma in (0, 1].

    For |t| >= T_EPS_FRACTIONAL this is the conjugated fractional Laplacian
    exp(i|x|^2/4t) * (4 t^2 |xi|^2)^{gamma/2} * exp(-i|x|^2/4t); below the
    cutoff it reduces to the exact t=0 expression |x|^gamma * u.
    """
    if not (0 < gamma <= 1):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    _require_finite(u.values)
    grid = u.grid
    if abs(t) < T_EPS_FRACTIONAL:
        return ComplexField(grid, grid.x_sq ** (gamma / 2) * u.values)
    phase = np.exp(-1j * grid.x_sq / (4 * t))
    mult = (4 * t * t * grid.xi_sq) ** (gamma / 2)
    out = np.conj(phase) * ifft(mult * fft(phase * u.values))
    return ComplexField(grid, out)


@dataclass(frozen=True)
class NormSpec:
    """Which norm to compute: Lr, Sobolev H^s, homogeneous H^s, weighted
    L^2 (|| |x|^gamma u ||_2), or Sigma = sqrt(H^1 norm^2 + ||x u||_2^2)."""

    kind: str          # "Lr" | "Hs" | "Hs_hom" | "weighted_L2" | "sigma"
    order: float = 2.0

    @classmethod
    def lebesgue(cls, r):
        if not (r >= 1):
            raise ValueError(f"Lebesgue exponent must be >= 1, got {r}")
        return cls("Lr", float(r))

    @classmethod
    def sobolev(cls, s):
        if s < 0:
            raise ValueError(f"Sobolev index must be >= 0, got {s}")
        return cls("Hs", float(s))

    @classmethod
    def sobolev_hom(cls, s):
        if s < 0:
            raise ValueError(f"Sobolev index must be >= 0, got {s}")
        return cls("Hs_hom", float(s))

    @classmethod
    def weighted_l2(cls, gamma):
        if gamma < 0:
            raise ValueError(f"weight exponent must be >= 0, got {gamma}")
        return cls("weighted_L2", float(gamma))

    @classmethod
    def sigma(cls):
        return cls("sigma", 0.0)


def lr_norm(values, grid, r):
    """Discrete L^r norm (Riemann sum with cell-volume weight); r=inf gives
    the max modulus."""
    mod = np.abs(values)
    if math.isinf(r):
        return float(mod.max())
    return float((grid.cell_volume * np.sum(mod ** r)) ** (1.0 / r))


def l2_norm(values, grid):
    return lr_norm(values, grid, 2.0)


def inner(u, v):
    """Discrete L^2 inner product <u, v> = sum conj(u)*v * cell_volume
    (conjugate-linear in the FIRST slot)."""
    return complex(u.grid.cell_volume * np.sum(np.conj(u.values) * v.values))


def norm(u, spec):
    """Evaluate the norm named by `spec` on the field `u`."""
    grid = u.grid
    if spec.kind == "Lr":
        return lr_norm(u.values, grid, spec.order)
    if spec.kind == "Hs":
        u_hat = fft(u.values)
        w = (1.0 + grid.xi_sq) ** spec.order
        return math.sqrt(grid.cell_volume * float(np.sum(w * np.abs(u_hat) ** 2)))
    if spec.kind == "Hs_hom":
        u_hat = fft(u.values)
        w = grid.xi_sq ** spec.order
        return math.sqrt(grid.cell_volume * float(np.sum(w * np.abs(u_hat) ** 2)))
    if spec.kind == "weighted_L2":
        w = grid.x_sq ** spec.order
        return math.sqrt(grid.cell_volume * float(np.sum(w * np.abs(u.values) ** 2)))
    if spec.kind == "sigma":
        h1 = norm(u, NormSpec.sobolev(1.0))
        xu = norm(u, NormSpec.weighted_l2(1.0))
        return math.sqrt(h1 * h1 + xu * xu)
    raise ValueError(f"unknown norm kind {spec.kind!r}")


def boundary_mass_fraction(u):
    """Fraction of total mass living in the outer 10% of the box.

    Runs whose x-weighted diagnostics should be trusted must keep this below
    BOUNDARY_MASS_DEFAULT (or the configured threshold): once mass wraps
    around, J(t)u and |x|^gamma*u are meaningless.
    """
    density = np.abs(u.values) ** 2
    total = float(density.sum())
    if total == 0.0:
        return 0.0
    return float(density[u.grid.boundary_mask].sum()) / total


def continuum_transform(u):
    """Values of the continuum Fourier transform (2*pi)^{-d/2} int e^{-ix.xi} u dx
    at the dual lattice points, in FFT ordering.

    The discrete coefficients are rescaled by (h*sqrt(N/(2*pi)))^d and carry
    the half-box phase exp(i*(L/2)*sum_j xi_j) from the x-origin shift.
    """
    grid = u.grid
    u_hat = fft(u.values)
    scale = (grid.spacing * math.sqrt(grid.points_per_axis / (2 * np.pi))) ** grid.dimension
    phase = np.exp(1j * (grid.box_length / 2) * sum(grid.xi))
    return scale * phase * u_hat
