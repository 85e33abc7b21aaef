"""Radial TDSE solver for one-electron atoms in strong laser fields.

Exterior time scaling on a finite-element DVR basis with a stiffness-free
adaptive Lanczos propagator.  Atomic units throughout.
"""

__version__ = "0.1.0"

from .angular import AngularCoupling, coupling_table
from .grid import GridSpec, RadialGrid, build_grid, lobatto_rule
from .hamiltonian import (HamiltonianAssembly, StateVector, assemble,
                          field_free_block, velocity_gauge_terms)
from .observables import (DensitySnapshot, Spectrum, block_norms, density,
                          dipole_acceleration, hhg_spectrum, norm,
                          radial_function)
from .propagator import (KrylovWorkspace, StepReport, estimate_kmax,
                         kmax_scan, lanczos_step, step)
from .pulse import PulseSpec, envelope, field_and_potential
from .scaling import (ScalingSchedule, map_r_to_xi, map_xi_to_r,
                      phase_transform)
from .stiffness import (StiffnessFilter, build_filter, inner_blocks,
                        interaction_windows, patch, unpatch)

__all__ = [
    "AngularCoupling", "coupling_table",
    "GridSpec", "RadialGrid", "build_grid", "lobatto_rule",
    "HamiltonianAssembly", "StateVector", "assemble", "field_free_block",
    "velocity_gauge_terms",
    "DensitySnapshot", "Spectrum", "block_norms", "density",
    "dipole_acceleration", "hhg_spectrum", "norm", "radial_function",
    "KrylovWorkspace", "StepReport", "estimate_kmax", "kmax_scan",
    "lanczos_step", "step",
    "PulseSpec", "envelope", "field_and_potential",
    "ScalingSchedule", "map_r_to_xi", "map_xi_to_r", "phase_transform",
    "StiffnessFilter", "build_filter", "inner_blocks",
    "interaction_windows", "patch", "unpatch",
]
