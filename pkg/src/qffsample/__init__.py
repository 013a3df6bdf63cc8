"""Statevector simulation of stationary-state preparation with fast-forwarded Szegedy walks."""

from .chain import (
    Graph,
    InterpolatedChain,
    MarkovChain,
    absorbing_mod,
    discriminant,
    from_edge_list,
    interpolate,
    metropolis_chain,
    random_walk_chain,
    to_edge_list,
)
from .errors import AlgorithmFailure, ParseError, QsampleError, ValidationError
from .families import FamilySpec, gen_family, parse_family
from .kernels import BACKEND
from .qff import QffPlan, chebyshev_weights, make_plan, qff_residual
from .reflect import apply_reflection, check_is_pi, reflection_params
from .sampler import (
    Pipeline,
    SamplerConfig,
    TrialReport,
    amplitude_amplify,
    apply_u_main,
    binary_search_pig,
    compare_with_pig,
    prepare_unknown,
    success_projection,
)
from .spectral import (
    chain_spectrum,
    classical_mixing_time,
    hitting_time_oracle,
    hitting_time_spectral,
    hitting_times_all,
    sym_eig,
)
from .walkspace import RegisterLayout, StateVector, init_state

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
