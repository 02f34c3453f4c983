"""Torus grids, spectral transforms, wavenumber algebra and projectors.

Everything downstream (semigroup stepping, penalty sweeps, diagnostics) is
built on the primitives in this module: a periodic grid on [0, 2pi)^d with
integer wavenumbers, scalar/vector fields carrying synchronized physical and
spectral views, mode-wise compressible/solenoidal projectors and the 2/3-rule
dealiasing mask.

Conventions
-----------
* Spectral coefficients are Fourier-series coefficients: ``u(x) = sum_k
  c(k) exp(i k.x)``, i.e. ``fftn(samples, norm="forward")``.
* Per-axis wavenumbers run over {-N/2+1, ..., N/2}; the Nyquist mode N/2 is
  zeroed in every differentiation multiplier (its sign is not well defined
  for real data).
* The mean mode carries no compressible content: P(0) := 0.
* All arithmetic is float64/complex128.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft


def fft_workers() -> int:
    """Worker count for FFT calls, capped by the LAMENS_THREADS env var."""
    try:
        return max(1, int(os.environ.get("LAMENS_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, 2pi)^dim with integer wavenumbers."""

    dim: int
    n: int

    def __post_init__(self) -> None:
        if self.dim not in (2, 3):
            raise ValueError(f"grid dimension must be 2 or 3, got {self.dim}")
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError(
                f"points per axis must be even and >= 4, got {self.n}"
            )

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return (2.0 * np.pi / self.n) ** self.dim

    @cached_property
    def x_axis(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n) / self.n

    @cached_property
    def k_axis(self) -> np.ndarray:
        """Per-axis wavenumbers {-N/2+1, ..., N/2} in FFT storage order."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.float64)
        k[self.n // 2] = self.n // 2  # Nyquist stored as +N/2
        return k

    @cached_property
    def k_deriv_axis(self) -> np.ndarray:
        """Differentiation wavenumbers: as k_axis but with Nyquist zeroed."""
        k = self.k_axis.copy()
        k[self.n // 2] = 0.0
        return k

    def coords(self) -> list[np.ndarray]:
        """Physical coordinate arrays, each of shape ``self.shape``."""
        return list(np.meshgrid(*([self.x_axis] * self.dim), indexing="ij"))

    @cached_property
    def kvec(self) -> np.ndarray:
        """Wavenumber mesh, shape (dim, N, ..., N), Nyquist as +N/2."""
        mesh = np.meshgrid(*([self.k_axis] * self.dim), indexing="ij")
        return np.stack(mesh)

    @cached_property
    def kvec_deriv(self) -> np.ndarray:
        """Differentiation wavenumber mesh (Nyquist rows/planes zeroed)."""
        mesh = np.meshgrid(*([self.k_deriv_axis] * self.dim), indexing="ij")
        return np.stack(mesh)

    @cached_property
    def k_sq(self) -> np.ndarray:
        """|k|^2 including the Nyquist magnitude (sign-free, for diffusion)."""
        return np.sum(self.kvec**2, axis=0)

    @cached_property
    def k_deriv_sq(self) -> np.ndarray:
        return np.sum(self.kvec_deriv**2, axis=0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: True where every |k_i| <= N/3."""
        cut = self.n / 3.0
        mask = np.ones(self.shape, dtype=bool)
        for axis_k in self.kvec:
            mask &= np.abs(axis_k) <= cut
        return mask

    def mode_index(self, k: tuple[int, ...]) -> tuple[int, ...]:
        """Array index of the spectral coefficient for integer mode k."""
        if len(k) != self.dim:
            raise ValueError(f"mode {k} has wrong dimension for grid")
        idx = []
        for ki in k:
            if not -self.n // 2 + 1 <= ki <= self.n // 2:
                raise ValueError(f"mode {k} outside resolved range")
            idx.append(ki % self.n)
        return tuple(idx)


def make_grid(dim: int, n_per_axis: int) -> Grid:
    """Create a torus grid; rejects odd or too-small resolutions."""
    return Grid(dim, n_per_axis)


def _fftn(phys: np.ndarray, grid: Grid) -> np.ndarray:
    axes = tuple(range(-grid.dim, 0))
    return scipy.fft.fftn(phys, axes=axes, norm="forward", workers=fft_workers())


def _ifftn(spec: np.ndarray, grid: Grid) -> np.ndarray:
    axes = tuple(range(-grid.dim, 0))
    out = scipy.fft.ifftn(spec, axes=axes, norm="forward", workers=fft_workers())
    return np.ascontiguousarray(out.real)


def _hermitian_symmetrize(spec: np.ndarray, grid: Grid) -> np.ndarray:
    """Project onto the conjugate-symmetric subspace c(-k) = conj(c(k))."""
    axes = tuple(range(-grid.dim, 0))
    flipped = spec
    for ax in axes:
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    return 0.5 * (spec + np.conj(flipped))


class _FieldBase:
    """Shared physical/spectral bookkeeping for scalar and vector fields."""

    _extra_axes = 0

    def __init__(self, grid: Grid, phys: np.ndarray | None, spec: np.ndarray | None):
        if phys is None and spec is None:
            raise ValueError("field needs at least one view")
        self.grid = grid
        self._phys = None if phys is None else np.asarray(phys, dtype=np.float64)
        self._spec = None if spec is None else np.asarray(spec, dtype=np.complex128)
        for arr in (self._phys, self._spec):
            if arr is not None:
                expect = self._expected_shape(grid)
                if arr.shape != expect:
                    raise ValueError(f"field shape {arr.shape}, expected {expect}")

    def _expected_shape(self, grid: Grid) -> tuple[int, ...]:
        raise NotImplementedError

    @property
    def phys(self) -> np.ndarray:
        if self._phys is None:
            self._phys = _ifftn(self._spec, self.grid)
        return self._phys

    @property
    def spec(self) -> np.ndarray:
        if self._spec is None:
            self._spec = _fftn(self._phys, self.grid)
        return self._spec

    @property
    def has_phys(self) -> bool:
        return self._phys is not None

    @property
    def has_spec(self) -> bool:
        return self._spec is not None


class ScalarField(_FieldBase):
    """A real scalar field on the torus with lazy dual views."""

    def _expected_shape(self, grid: Grid) -> tuple[int, ...]:
        return grid.shape

    @classmethod
    def from_physical(cls, grid: Grid, samples: np.ndarray) -> "ScalarField":
        return cls(grid, samples, None)

    @classmethod
    def from_spectral(
        cls, grid: Grid, coeffs: np.ndarray, symmetrize: bool = False
    ) -> "ScalarField":
        if symmetrize:
            coeffs = _hermitian_symmetrize(coeffs, grid)
        return cls(grid, None, coeffs)


class VectorField(_FieldBase):
    """A dim-component real field; component axis leads the spatial axes."""

    def _expected_shape(self, grid: Grid) -> tuple[int, ...]:
        return (grid.dim,) + grid.shape

    @classmethod
    def from_physical(cls, grid: Grid, samples: np.ndarray) -> "VectorField":
        return cls(grid, samples, None)

    @classmethod
    def from_spectral(
        cls, grid: Grid, coeffs: np.ndarray, symmetrize: bool = False
    ) -> "VectorField":
        if symmetrize:
            coeffs = _hermitian_symmetrize(coeffs, grid)
        return cls(grid, None, coeffs)

    @classmethod
    def zero(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((grid.dim,) + grid.shape), None)

    def max_abs(self) -> float:
        """Collocation maximum of |u| (vector magnitude)."""
        return float(np.sqrt(np.max(np.sum(self.phys**2, axis=0))))


def to_spectral(field):
    """Populate the spectral view (no-op if already present)."""
    field.spec
    return field


def to_physical(field):
    """Populate the physical view (no-op if already present)."""
    field.phys
    return field


def l2_norm_sq(field) -> float:
    """Squared discrete L^2 norm, computed from the spectral view."""
    return float((2.0 * np.pi) ** field.grid.dim * np.sum(np.abs(field.spec) ** 2))


def l2_norm(field) -> float:
    return float(np.sqrt(l2_norm_sq(field)))


def l2_norm_sq_physical(field) -> float:
    """Squared discrete L^2 norm as a collocation Riemann sum (Parseval twin)."""
    return float(field.grid.cell_volume * np.sum(field.phys**2))


def l2_inner(a, b) -> float:
    """Discrete L^2 inner product of two fields on the same grid."""
    return float(a.grid.cell_volume * np.sum(a.phys * b.phys))


def l2_diff(a, b) -> float:
    """L^2 norm of the difference of two same-shaped fields."""
    cls = type(a)
    return l2_norm(cls(a.grid, None, a.spec - b.spec))


def gradient(s: ScalarField) -> VectorField:
    """Spectral gradient of a scalar field (Nyquist multipliers zeroed)."""
    g = s.grid
    out = 1j * g.kvec_deriv * s.spec[np.newaxis]
    return VectorField.from_spectral(g, out)


def divergence(u: VectorField) -> ScalarField:
    """Spectral divergence i k . u_hat; exact on resolved modes."""
    g = u.grid
    out = np.sum(1j * g.kvec_deriv * u.spec, axis=0)
    return ScalarField.from_spectral(g, out)


def partial_deriv(field, axis: int):
    """Spectral partial derivative along one axis (any field kind)."""
    g = field.grid
    k = g.kvec_deriv[axis]
    if isinstance(field, VectorField):
        return VectorField.from_spectral(g, 1j * k[np.newaxis] * field.spec)
    return ScalarField.from_spectral(g, 1j * k * field.spec)


class ModeProjector:
    """Mode-wise compressible/solenoidal projector pair P(k), Q(k) = I - P(k).

    P(k) = k k^T / |k|^2 with P(0) := 0; Nyquist-ambiguous axes are excluded
    from k (they carry no well-defined direction for real data).
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self._kd = grid.kvec_deriv
        ksq = grid.k_deriv_sq
        with np.errstate(divide="ignore"):
            self._inv_ksq = np.where(ksq > 0, 1.0 / np.maximum(ksq, 1e-300), 0.0)

    def apply_compressible(self, u: VectorField) -> VectorField:
        """P u: the gradient-directed (compressible) part."""
        g = self.grid
        k_dot_u = np.sum(self._kd * u.spec, axis=0)
        out = self._kd * (k_dot_u * self._inv_ksq)[np.newaxis]
        return VectorField.from_spectral(g, out)

    def apply_solenoidal(self, u: VectorField) -> VectorField:
        """Q u = u - P u: the divergence-free part."""
        g = self.grid
        k_dot_u = np.sum(self._kd * u.spec, axis=0)
        out = u.spec - self._kd * (k_dot_u * self._inv_ksq)[np.newaxis]
        return VectorField.from_spectral(g, out)

    def p_matrix(self, k: np.ndarray) -> np.ndarray:
        """Dense P(k) for a single wavevector (for oracles and tests)."""
        k = np.asarray(k, dtype=np.float64)
        ksq = float(np.dot(k, k))
        if ksq == 0.0:
            return np.zeros((len(k), len(k)))
        return np.outer(k, k) / ksq

    def q_matrix(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=np.float64)
        return np.eye(len(k)) - self.p_matrix(k)


def project_solenoidal(u: VectorField) -> VectorField:
    """Leray projection onto divergence-free fields; idempotent."""
    return ModeProjector(u.grid).apply_solenoidal(u)


def project_compressible(u: VectorField) -> VectorField:
    """Complementary projection onto gradient-directed modes."""
    return ModeProjector(u.grid).apply_compressible(u)


def dealias(field):
    """Zero every coefficient with any per-axis |k| > N/3 (2/3 rule)."""
    g = field.grid
    if isinstance(field, VectorField):
        return VectorField.from_spectral(g, field.spec * g.dealias_mask[np.newaxis])
    return ScalarField.from_spectral(g, field.spec * g.dealias_mask)


def solenoidal_fraction(u: VectorField) -> float:
    """||Q u||_2 / ||u||_2 over nonzero modes; 0 for the zero field.

    The mean mode is excluded: with P(0) = 0 it would count as solenoidal,
    but it is irrelevant to gradient-structure checks.
    """
    g = u.grid
    q = ModeProjector(g).apply_solenoidal(u).spec.copy()
    q[(slice(None),) + (0,) * g.dim] = 0.0
    total = l2_norm(u)
    if total == 0.0:
        return 0.0
    return l2_norm(VectorField.from_spectral(g, q)) / total
