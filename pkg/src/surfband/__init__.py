"""Hermitian, gauge-covariant surface Hamiltonians on rings, cylinders and spheres."""

from .geometry import (
    CurvatureData,
    PhysicalConstants,
    SurfaceKind,
    SurfaceSpec,
    cylinder,
    geometric_kinetic_energy,
    principal_curvatures,
    ring,
    sphere,
)
from .discretize import (
    Grid,
    OperatorMatrix,
    build_grid,
    hermiticity_residual,
    multiplication_operator,
    periodic_derivative,
    periodic_second_derivative,
    weighted_adjoint,
    weighted_inner,
    weighted_norm,
)
from .fields import (
    ABFlux,
    GaugeFieldSpec,
    GaugeFunction,
    Sampled,
    UniformAxial,
    add_gauge,
    eval_potential,
    load_sampled_csv,
    magnetic_field_of,
    materialize,
    surface_gradient,
    zero_field,
)
from .hamiltonians import (
    HamiltonianRequest,
    build_hamiltonian,
    free_cylinder,
    free_ring,
    free_sphere,
    hermitian_radial_momentum,
    magnetic_cylinder,
    magnetic_sphere,
    pragmatic_cylinder,
    zeeman_block,
)
from .analysis import (
    SpectrumReport,
    analytic_cylinder_landau,
    analytic_ring_spectrum,
    antihermitian_part,
    gauge_covariance_residual,
    ring_symbol_spectrum,
    spectrum,
    spectrum_gauge_invariance,
)
from .thinlayer import (
    ShellProblem,
    build_radial_operator,
    effective_surface_energy,
    gke_extrapolate,
    radial_spectrum,
    sweep_table,
)

__version__ = "0.1.0"
