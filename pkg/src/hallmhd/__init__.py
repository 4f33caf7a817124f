"""Pseudo-spectral laboratory for incompressible Hall-MHD with fractional
magnetic diffusion on the periodic torus."""

__version__ = "0.1.0"

from .kernels import active_lane
from .lp import (
    LpLayout,
    SobolevSpec,
    build_layout,
    commutator_advection,
    commutator_cross,
    lp_block,
    lp_lowpass,
    sobolev_norm,
)
from .solver import (
    BlowUpError,
    InitialData,
    MhdState,
    SimConfig,
    Trajectory,
    compute_dt,
    initial_data,
    rhs,
    simulate,
    step,
)
from .spectral import (
    Grid,
    SpectralField,
    advect,
    cross,
    curl,
    dealias,
    fractional_laplacian,
    hall_term,
    inner_product,
    l2_norm,
    leray_project,
    linf_norm,
    lipschitz_norm,
    make_grid,
    recover_pressure,
    to_physical,
    to_spectral,
)
