"""Grids with quadrature weights, differencing stencils, and measure-weighted adjoints.

Hermiticity is always judged in the weighted inner product
<u, v>_W = sum_i w_i conj(u_i) v_i, where the weights are the discrete
surface measure.  The adjoint of an operator A is W^-1 A^H W.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import SurfaceKind, SurfaceSpec

# 4th-order centered first/second derivative coefficients (offsets -2..2)
_D1_O4 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2_O4 = np.array([-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0])


@dataclass(frozen=True)
class Grid:
    """Nodes and quadrature weights for one surface.

    coords1 is theta on every surface (azimuthal on ring/cylinder, polar on
    the sphere); coords2 is z (cylinder) or phi (sphere).  The flat node
    index is j1 * n2 + j2.  Weights are per-node patch areas; they sum to the
    exact surface area.
    """

    surface: SurfaceSpec
    n1: int
    n2: int
    coords1: np.ndarray
    coords2: np.ndarray
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.n1 * self.n2

    @property
    def h1(self) -> float:
        if self.surface.kind is SurfaceKind.SPHERE:
            return np.pi / self.n1
        return 2 * np.pi / self.n1

    @property
    def h2(self) -> float:
        if self.surface.kind is SurfaceKind.CYLINDER:
            return 2 * self.surface.L / self.n2
        if self.surface.kind is SurfaceKind.SPHERE:
            return 2 * np.pi / self.n2
        return 0.0


def build_grid(surface: SurfaceSpec, n1: int, n2: int = 1) -> Grid:
    """Grid with periodic azimuthal nodes, half-offset polar/z nodes.

    Half offsets keep sphere nodes away from the poles and cylinder nodes
    away from the Dirichlet walls at z = +-L.  Ring grids ignore n2.
    """
    if n1 < 3:
        raise ValueError(f"grid too small: n1={n1} < 3")
    R = surface.R
    if surface.kind is SurfaceKind.RING:
        h1 = 2 * np.pi / n1
        th = np.arange(n1) * h1
        w = np.full(n1, R * h1)
        return Grid(surface, n1, 1, th, np.zeros(1), w)
    if n2 < 3:
        raise ValueError(f"grid too small: n2={n2} < 3")
    if surface.kind is SurfaceKind.CYLINDER:
        h1 = 2 * np.pi / n1
        h2 = 2 * surface.L / n2
        th = np.arange(n1) * h1
        z = -surface.L + (np.arange(n2) + 0.5) * h2
        w = np.full(n1 * n2, R * h1 * h2)
        return Grid(surface, n1, n2, th, z, w)
    # sphere: theta = polar with half offset, phi periodic
    h1 = np.pi / n1
    h2 = 2 * np.pi / n2
    th = (np.arange(n1) + 0.5) * h1
    ph = np.arange(n2) * h2
    # exact cell integral of sin(theta), so the weights sum to 4 pi R^2 exactly
    wth = 2.0 * np.sin(h1 / 2) * np.sin(th)
    w = (R**2 * h2 * np.repeat(wth, n2))
    return Grid(surface, n1, n2, th, ph, w)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex operator over grid nodes (x2 spin block optional).

    The attached weights define the adjoint: A^dag = W^-1 A^H W with
    W = diag(weights) (tiled over the spin block).
    """

    entries: np.ndarray
    weights: np.ndarray
    spin_dim: int = 1
    label: str = ""

    def __post_init__(self):
        n = self.entries.shape[0]
        if self.entries.ndim != 2 or self.entries.shape[1] != n:
            raise ValueError(f"operator must be square, got {self.entries.shape}")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError(f"non-finite entries in operator {self.label!r}")
        if len(self.weights) * self.spin_dim != n:
            raise ValueError("weights length does not match operator dimension")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def full_weights(self) -> np.ndarray:
        if self.spin_dim == 1:
            return self.weights
        return np.tile(self.weights, self.spin_dim)


def weighted_inner(u: np.ndarray, v: np.ndarray, weights: np.ndarray) -> complex:
    return complex(np.sum(weights * np.conj(u) * v))


def weighted_norm(u: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sqrt(np.real(weighted_inner(u, u, weights))))


def weighted_adjoint(op: OperatorMatrix) -> OperatorMatrix:
    """W^-1 A^H W, computed entrywise as conj(A_kj) * w_k / w_j."""
    w = op.full_weights()
    ratio = w[None, :] / w[:, None]
    adj = np.conj(op.entries.T) * ratio
    return OperatorMatrix(adj, op.weights, op.spin_dim, f"adjoint({op.label})")


def hermiticity_residual(op: OperatorMatrix) -> float:
    """max |A - W^-1 A^H W|: zero iff A is self-adjoint under its measure."""
    return float(np.abs(op.entries - weighted_adjoint(op).entries).max())


def multiplication_operator(f, grid: Grid, label: str = "mult") -> OperatorMatrix:
    """Diagonal operator of samples f (flat or (n1, n2) shaped)."""
    vals = np.asarray(f, dtype=complex).ravel()
    if vals.size != grid.size:
        raise ValueError(f"sample count {vals.size} != grid size {grid.size}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite samples rejected")
    return OperatorMatrix(np.diag(vals), grid.weights, 1, label)


def _stencil_matrix(n: int, offsets, coefs, periodic: bool) -> np.ndarray:
    """Banded matrix; periodic wraparound or plain truncation (zero ghosts)."""
    A = np.zeros((n, n))
    for o, c in zip(offsets, coefs):
        for j in range(n):
            k = j + o
            if periodic:
                A[j, k % n] += c
            elif 0 <= k < n:
                A[j, k] += c
    return A


def _periodic_d1(n: int, h: float, order: int) -> np.ndarray:
    if order == 2:
        return _stencil_matrix(n, (-1, 1), (-0.5 / h, 0.5 / h), True)
    return _stencil_matrix(n, range(-2, 3), _D1_O4 / h, True)


def _periodic_d2(n: int, h: float, order: int) -> np.ndarray:
    if order == 2:
        return _stencil_matrix(n, (-1, 0, 1), np.array([1.0, -2.0, 1.0]) / h**2, True)
    return _stencil_matrix(n, range(-2, 3), _D2_O4 / h**2, True)


def _dirichlet_fold_d2(n: int, h: float) -> np.ndarray:
    """Second derivative on half-offset nodes with walls half a step outside.

    Ghost values are the odd reflection across the wall (u_ghost = -u_edge),
    which pins u = 0 exactly at the wall and keeps the matrix symmetric.
    """
    A = _stencil_matrix(n, (-1, 0, 1), np.array([1.0, -2.0, 1.0]) / h**2, False)
    A[0, 0] -= 1.0 / h**2
    A[-1, -1] -= 1.0 / h**2
    return A


def _dirichlet_d1(n: int, h: float) -> np.ndarray:
    # plain truncation keeps the matrix exactly skew-symmetric
    return _stencil_matrix(n, (-1, 1), (-0.5 / h, 0.5 / h), False)


def _sphere_polar_d1(n1: int, n2: int, h: float, parity: int = 1) -> np.ndarray:
    """Centered polar derivative with pole crossing (theta -> -theta, phi -> phi+pi).

    parity is +1 for scalars and -1 for tangential vector components, whose
    sign flips across the pole.  Falls back to one-sided rows when n2 is odd.
    """
    N = n1 * n2
    A = np.zeros((N, N))
    half = n2 // 2
    cross = 2 * half == n2

    def node(j, k):
        if j < 0:
            return (-1 - j) * n2 + (k + half) % n2, parity
        if j >= n1:
            return (2 * n1 - 1 - j) * n2 + (k + half) % n2, parity
        return j * n2 + k, 1

    c = 0.5 / h
    for j in range(n1):
        for k in range(n2):
            row = j * n2 + k
            if cross or 0 < j < n1 - 1:
                for o, cc in ((1, c), (-1, -c)):
                    col, sg = node(j + o, k)
                    A[row, col] += sg * cc
            elif j == 0:
                # one-sided 2nd order
                A[row, row] += -1.5 / h
                A[row, (j + 1) * n2 + k] += 2.0 / h
                A[row, (j + 2) * n2 + k] += -0.5 / h
            else:
                A[row, row] += 1.5 / h
                A[row, (j - 1) * n2 + k] += -2.0 / h
                A[row, (j - 2) * n2 + k] += 0.5 / h
    return A


def _kron_axis1(block: np.ndarray, n2: int) -> np.ndarray:
    return np.kron(block, np.eye(n2))


def _kron_axis2(block: np.ndarray, n1: int) -> np.ndarray:
    return np.kron(np.eye(n1), block)


def periodic_derivative(grid: Grid, axis: int, order: int = 2) -> OperatorMatrix:
    """First-derivative matrix along a grid axis.

    Periodic axes get centered wraparound stencils; the cylinder z axis gets
    the truncated centered stencil (exactly skew, consistent with functions
    vanishing at the walls); the sphere polar axis uses pole crossing.
    """
    if order not in (2, 4):
        raise ValueError("stencil order must be 2 or 4")
    kind = grid.surface.kind
    if axis == 0:
        if kind is SurfaceKind.SPHERE:
            if order != 2:
                raise ValueError("sphere polar derivative supports order 2 only")
            A = _sphere_polar_d1(grid.n1, grid.n2, grid.h1)
            return OperatorMatrix(A.astype(complex), grid.weights, 1, "d/dtheta[sphere]")
        D = _periodic_d1(grid.n1, grid.h1, order)
        A = D if kind is SurfaceKind.RING else _kron_axis1(D, grid.n2)
        return OperatorMatrix(A.astype(complex), grid.weights, 1, "d/dtheta")
    if axis == 1:
        if kind is SurfaceKind.RING:
            raise ValueError("ring has a single axis")
        if kind is SurfaceKind.CYLINDER:
            if order != 2:
                raise ValueError("z-axis derivative supports order 2 only")
            A = _kron_axis2(_dirichlet_d1(grid.n2, grid.h2), grid.n1)
            return OperatorMatrix(A.astype(complex), grid.weights, 1, "d/dz")
        D = _periodic_d1(grid.n2, grid.h2, order)
        return OperatorMatrix(_kron_axis2(D, grid.n1).astype(complex), grid.weights, 1, "d/dphi")
    raise ValueError(f"axis must be 0 or 1, got {axis}")


def periodic_second_derivative(grid: Grid, axis: int, order: int = 2) -> OperatorMatrix:
    """Second-derivative matrix along a grid axis (see periodic_derivative)."""
    if order not in (2, 4):
        raise ValueError("stencil order must be 2 or 4")
    kind = grid.surface.kind
    if axis == 0:
        if kind is SurfaceKind.SPHERE:
            raise ValueError(
                "the sphere polar second derivative is assembled in divergence "
                "form by the Hamiltonian builders"
            )
        D = _periodic_d2(grid.n1, grid.h1, order)
        A = D if kind is SurfaceKind.RING else _kron_axis1(D, grid.n2)
        return OperatorMatrix(A.astype(complex), grid.weights, 1, "d2/dtheta2")
    if axis == 1:
        if kind is SurfaceKind.RING:
            raise ValueError("ring has a single axis")
        if kind is SurfaceKind.CYLINDER:
            if order != 2:
                raise ValueError("z-axis second derivative supports order 2 only")
            A = _kron_axis2(_dirichlet_fold_d2(grid.n2, grid.h2), grid.n1)
            return OperatorMatrix(A.astype(complex), grid.weights, 1, "d2/dz2")
        D = _periodic_d2(grid.n2, grid.h2, order)
        return OperatorMatrix(_kron_axis2(D, grid.n1).astype(complex), grid.weights, 1, "d2/dphi2")
    raise ValueError(f"axis must be 0 or 1, got {axis}")
