"""Diagonalization, Hermiticity diagnostics, gauge-covariance checks, reference spectra."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .discretize import (
    Grid,
    OperatorMatrix,
    hermiticity_residual,
    weighted_adjoint,
    weighted_norm,
)
from .fields import GaugeFieldSpec, GaugeFunction, add_gauge, materialize
from .geometry import PhysicalConstants

HERMITIAN_TOL = 1e-10


@dataclass
class SpectrumReport:
    """Eigenvalues plus the diagnostics needed to trust them.

    Hermitian operators give real ascending eigenvalues; non-Hermitian input
    is reported as complex, sorted by real part then imaginary part.
    """

    eigenvalues: np.ndarray
    hermiticity_residual: float
    operator_label: str
    parameters: dict = dc_field(default_factory=dict)
    eigenvectors: np.ndarray | None = None

    @property
    def is_hermitian(self) -> bool:
        return bool(np.isrealobj(self.eigenvalues) or np.all(self.eigenvalues.imag == 0))

    def eigenvalue_pairs(self) -> list[tuple[float, float]]:
        ev = np.asarray(self.eigenvalues)
        return [(float(np.real(x)), float(np.imag(x))) for x in ev]


def spectrum(op: OperatorMatrix, k: int | None = None, want_vectors: bool = False,
             parameters: dict | None = None) -> SpectrumReport:
    """Lowest-k eigenpairs of an operator in its weighted inner product.

    Operators within HERMITIAN_TOL of self-adjoint are symmetrized as
    W^(1/2) H W^(-1/2) and solved with a self-adjoint eigensolver; anything
    else goes through the general complex solver.
    """
    n = op.dim
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    resid = hermiticity_residual(op)
    w = op.full_weights()
    sqw = np.sqrt(w)
    # absolute tolerance for O(1) operators, relative floor for stiff ones
    scale = float(np.abs(op.entries).max()) or 1.0
    try:
        if resid <= max(HERMITIAN_TOL, 1e-12 * scale):
            S = (sqw[:, None] * op.entries) / sqw[None, :]
            S = 0.5 * (S + S.conj().T)
            if np.iscomplexobj(S) and not S.imag.any():
                S = S.real  # real symmetric solver is several times faster
            if want_vectors:
                ev, vec = np.linalg.eigh(S)
                vec = vec.astype(complex) / sqw[:, None]
            else:
                ev = np.linalg.eigvalsh(S)
                vec = None
        elif want_vectors:
            ev, vec = np.linalg.eig(op.entries)
            order = np.lexsort((ev.imag, ev.real))
            ev = ev[order]
            vec = vec[:, order]
        else:
            ev = np.linalg.eigvals(op.entries)
            ev = ev[np.lexsort((ev.imag, ev.real))]
            vec = None
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed for operator {op.label!r}: {exc}") from exc
    ev = ev[:k]
    if vec is not None:
        vec = vec[:, :k]
    return SpectrumReport(ev, resid, op.label, parameters or {}, vec)


def antihermitian_part(op: OperatorMatrix) -> tuple[OperatorMatrix, float]:
    """(H - H^dag_W)/2 and its max-entry norm."""
    anti = 0.5 * (op.entries - weighted_adjoint(op).entries)
    norm = float(np.abs(anti).max())
    return OperatorMatrix(anti, op.weights, op.spin_dim, f"antihermitian({op.label})"), norm


def _phase_operator(lam: GaugeFunction, grid: Grid, c: PhysicalConstants,
                    spin_dim: int) -> np.ndarray:
    u = np.exp(1j * (c.charge / c.hbar) * lam.grid_values(grid).ravel())
    if spin_dim == 2:
        u = np.tile(u, 2)
    return u


def gauge_covariance_residual(field: GaugeFieldSpec, lam: GaugeFunction, builder,
                              psi: np.ndarray, grid: Grid,
                              c: PhysicalConstants = PhysicalConstants(),
                              exact: bool = True) -> float:
    """|| H(A + grad lam) U psi - U H(A) psi ||_W with U = diag(exp(i e lam / hbar)).

    exact=True shifts the field by attaching lam (per-link increments are the
    exact line integrals of the gradient), making the identity hold to
    round-off.  exact=False materializes A + grad(lam) as plain samples, and
    the residual is O(h^p) for smooth lam.
    """
    shifted = add_gauge(field, lam, grid)
    if not exact:
        shifted = materialize(shifted, grid)
    H0 = builder(field)
    H1 = builder(shifted)
    u = _phase_operator(lam, grid, c, H0.spin_dim)
    lhs = H1.entries @ (u * psi)
    rhs = u * (H0.entries @ psi)
    return weighted_norm(lhs - rhs, H0.full_weights())


def spectrum_gauge_invariance(field: GaugeFieldSpec, lam: GaugeFunction, builder,
                              k: int, grid: Grid, exact: bool = True) -> float:
    """max |E_i(A + grad lam) - E_i(A)| over the lowest k levels."""
    shifted = add_gauge(field, lam, grid)
    if not exact:
        shifted = materialize(shifted, grid)
    ev0 = spectrum(builder(field), k).eigenvalues
    ev1 = spectrum(builder(shifted), k).eigenvalues
    return float(np.abs(np.real(ev1) - np.real(ev0)).max())


def analytic_ring_spectrum(R: float, Phi: float, l_range,
                           c: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    """E_l = (hbar^2/2mR^2)(l - Phi/Phi0)^2 - hbar^2/(8mR^2), Phi0 = 2 pi hbar / e."""
    alpha = Phi / c.flux_quantum if Phi != 0 else 0.0
    ls = np.asarray(list(l_range), dtype=float)
    pref = c.hbar**2 / (2 * c.mass * R**2)
    return pref * (ls - alpha) ** 2 - c.hbar**2 / (8 * c.mass * R**2)


def analytic_cylinder_landau(R: float, B: float, l: int, k_z: float,
                             c: PhysicalConstants = PhysicalConstants()) -> float:
    """E = hbar^2 k_z^2/2m + (hbar l / R - e B R / 2)^2 / 2m - hbar^2/(8mR^2)."""
    return (c.hbar**2 * k_z**2 / (2 * c.mass)
            + (c.hbar * l / R - c.charge * B * R / 2) ** 2 / (2 * c.mass)
            - c.hbar**2 / (8 * c.mass * R**2))


def ring_symbol_spectrum(n: int, R: float, alpha: float,
                         c: PhysicalConstants = PhysicalConstants()) -> np.ndarray:
    """Exact eigenvalues of the covariant ring stencil: the discrete symbol.

    E_l = (hbar^2/m R^2 h^2)(1 - cos(h (l - alpha))) - hbar^2/(8 m R^2) over
    the n Fourier modes; useful as the sharp reference for grid spectra.
    """
    h = 2 * np.pi / n
    ls = np.arange(-(n // 2), n - n // 2, dtype=float)
    pref = c.hbar**2 / (c.mass * R**2 * h**2)
    return np.sort(pref * (1 - np.cos(h * (ls - alpha))) - c.hbar**2 / (8 * c.mass * R**2))
