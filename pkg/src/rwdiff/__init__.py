"""Relativistic diffusion on spatially flat Robertson-Walker space-times.

Simulators for the temporal, spherical and full diffusion, the invariant
law of tdot, coupling experiments and the estimators used to check the
long-time behaviour of sample paths.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .expansion import ExpansionModel
from .state import (
    SamplePath,
    SphericalState,
    TemporalState,
    UnitTangentState,
    pseudo_norm_defect,
    to_full,
    to_spherical,
)
from .measure import InvariantMeasure, bessel_k, make_measure
from .dynamics import (
    IntegratorConfig,
    NoiseSquareRoot,
    clock,
    geodesic_flow,
    noise_square_root,
    simulate_full_direct,
    simulate_full_factorized,
    simulate_spherical,
    simulate_temporal,
    sphere_step,
    step_temporal,
)
from .coupling import (
    CouplingReport,
    comparison_triple,
    mirror_coupling_experiment,
    reflection_matrix,
    reparametrize_by_t,
    shift_coupling_experiment,
)
from .statistics import (
    ErgodicEstimate,
    LimitPointEstimate,
    ergodic_average,
    estimate_x_infinity,
    occupation_ks,
    sphere_uniformity,
    two_sample_ks,
)
from .streams import map_paths, path_streams
