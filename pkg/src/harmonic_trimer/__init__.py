"""S-state spectrum of three identical particles bound by harmonic springs with rest length R.

The Schrodinger equation is discretized on a Lagrange-Laguerre mesh in
perimetric coordinates; the package also provides the exact ``R = 0``
solutions, first-order perturbation theory and a two-parameter variational
estimate.
"""

from ._backend import BACKEND
from .approx import (
    PTExpansion,
    UnresolvedTrialError,
    VariationalParams,
    optimize_variational,
    potential_split,
    pt_ground_energy,
    trial_value,
    variational_energy,
)
from .exact import (
    JacobiLabel,
    RhoLabel,
    degeneracy,
    energy_level,
    enumerate_labels,
    jacobi_energy,
    psi0,
    psi1,
    split_count,
)
from .geometry import (
    Distances,
    GeneralizedParams,
    GeometryError,
    PerimetricPoint,
    SystemParams,
    distances_from_perimetric,
    perimetric_from_distances,
    potential,
    potential_generalized,
)
from .hamiltonian import AssembledOperator, BasisIndex, ResourceEnvelopeError, assemble
from .mesh import MeshSpec, QuadratureRule, gauss_laguerre_rule, lagrange_deriv_at_nodes, lagrange_fn, laguerre_value
from .spectrum import (
    ConvergenceError,
    LevelTable,
    NoMinimumError,
    SpectrumResult,
    convergence_study,
    default_scale,
    energy_scan,
    find_minimum,
    ground_energy,
    label_levels,
    lowest_eigenvalues,
    scale_energy,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AssembledOperator",
    "BasisIndex",
    "ConvergenceError",
    "Distances",
    "GeneralizedParams",
    "GeometryError",
    "JacobiLabel",
    "LevelTable",
    "MeshSpec",
    "NoMinimumError",
    "PTExpansion",
    "PerimetricPoint",
    "QuadratureRule",
    "ResourceEnvelopeError",
    "RhoLabel",
    "SpectrumResult",
    "SystemParams",
    "UnresolvedTrialError",
    "VariationalParams",
    "assemble",
    "convergence_study",
    "default_scale",
    "degeneracy",
    "distances_from_perimetric",
    "energy_level",
    "energy_scan",
    "enumerate_labels",
    "find_minimum",
    "gauss_laguerre_rule",
    "ground_energy",
    "jacobi_energy",
    "label_levels",
    "lagrange_deriv_at_nodes",
    "lagrange_fn",
    "laguerre_value",
    "lowest_eigenvalues",
    "optimize_variational",
    "perimetric_from_distances",
    "potential",
    "potential_generalized",
    "potential_split",
    "psi0",
    "psi1",
    "pt_ground_energy",
    "scale_energy",
    "solve",
    "split_count",
    "trial_value",
    "variational_energy",
]
