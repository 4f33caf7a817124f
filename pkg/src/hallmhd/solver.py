"""Time integration of the incompressible Hall-MHD system on the torus.

    du/dt + u.grad u + grad P = b.grad b
    db/dt + u.grad b + curl((curl b) x b) + (-Laplace)^alpha b = b.grad u
    div u = div b = 0

The pressure is never stepped: a Leray projection eliminates it.  The
fractional diffusion is diagonal in Fourier space and handled exactly by an
integrating factor, so the classical RK4 stages only see the quadratic
terms.  One step of the b-equation reads

    b(t+dt) = E2 b + dt/6 (E2 N1 + 2 E1 (N2 + N3) + N4),
    E1 = exp(-|k|^(2 alpha) dt/2),  E2 = E1^2,

with the nonlinear stage values N_i evaluated on integrating-factor
transported states; the pure-decay limit is reproduced to rounding.  The
dissipation integral int ||(-Laplace)^(alpha/2) b||^2 dt is accumulated with
the same RK4 stages, keeping the discrete energy ledger fourth-order
consistent.

Blow-up policy: a non-finite coefficient aborts the run (BlowUpError); the
harness treats aborts as data.  Runs are bitwise reproducible from
config + seed on one platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .spectral import (
    Grid,
    MhdState,
    SpectralField,
    _curl_coeffs,
    _gradient_coeffs,
    _leray_coeffs,
    _phys_array,
    _spec_array,
    make_grid,
    random_band_field,
)

RECIPES = ("single_mode", "taylor_green", "orszag_tang_like", "random_band")


class BlowUpError(RuntimeError):
    """Raised when a trajectory develops non-finite coefficients."""

    def __init__(self, t: float):
        super().__init__(f"blow-up or instability at t={t:.6g}")
        self.t = t


@dataclass(frozen=True)
class InitialData:
    """Initial-data recipe: tag plus parameters plus seed."""

    recipe: str = "taylor_green"
    seed: int = 0
    u_amplitude: float = 1.0
    b_amplitude: float = 0.5
    kband: int = 8
    sigma_decay: float = 0.7
    k: tuple = (1, 0)
    b_k: tuple | None = None

    def __post_init__(self):
        if self.recipe not in RECIPES:
            raise ValueError(f"unknown recipe {self.recipe!r}, expected one of {RECIPES}")


@dataclass(frozen=True)
class SimConfig:
    """Validated simulation parameters."""

    dim: int = 2
    n: int = 64
    alpha: float = 1.0
    s: float = 2.5
    t_end: float = 0.5
    dt: float | str = "auto"
    dt_max: float = 0.01
    cfl_safety: float = 0.4
    snapshot_stride: int = 1
    dealiasing: str = "2/3"
    initial: InitialData = field(default_factory=InitialData)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or (self.n & (self.n - 1)):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if self.alpha < 1.0:
            raise ValueError(
                f"alpha must be >= 1 (the solver only covers the alpha >= 1 "
                f"magnetic-diffusion regime), got {self.alpha}"
            )
        if not self.s > 1.0 + self.dim / 2.0:
            raise ValueError(f"s must exceed 1+d/2 = {1 + self.dim / 2}, got {self.s}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.dt != "auto":
            if not (isinstance(self.dt, (int, float)) and self.dt > 0):
                raise ValueError(f"dt must be positive or 'auto', got {self.dt!r}")
        if not self.dt_max > 0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must be in (0, 1], got {self.cfl_safety}")
        if self.snapshot_stride < 1:
            raise ValueError(f"snapshot_stride must be >= 1, got {self.snapshot_stride}")
        if self.dealiasing != "2/3":
            raise ValueError(f"only the 2/3 dealiasing rule is supported, got {self.dealiasing!r}")

    def with_initial(self, **kw) -> "SimConfig":
        return replace(self, initial=replace(self.initial, **kw))


@dataclass
class Trajectory:
    """Snapshots at the configured stride plus per-step scalar diagnostics."""

    config: SimConfig
    grid: Grid
    dt: float
    times: np.ndarray
    diag: dict
    states: list
    state_steps: list

    def state_at_step(self, i: int) -> MhdState:
        return self.states[self.state_steps.index(i)]

    @property
    def final_state(self) -> MhdState:
        return self.states[-1]


# ============================================================
# Initial data
# ============================================================


def _unit_perp(k: np.ndarray) -> np.ndarray:
    """A unit vector orthogonal to k (3-vector), deterministic."""
    if np.linalg.norm(k) == 0:
        raise ValueError("single_mode wavevector must be nonzero")
    e = np.cross(np.array([0.0, 0.0, 1.0]), k)
    if np.linalg.norm(e) < 1e-12:
        e = np.cross(np.array([1.0, 0.0, 0.0]), k)
    return e / np.linalg.norm(e)


def _single_mode_fields(grid: Grid, init: InitialData):
    coords = grid.coordinates()
    ktup = tuple(init.k) + (0, 0, 0)
    kbtup = tuple(init.k if init.b_k is None else init.b_k) + (0, 0, 0)
    ku = np.zeros(3)
    ku[: grid.dim] = ktup[: grid.dim]
    kb = np.zeros(3)
    kb[: grid.dim] = kbtup[: grid.dim]
    phase_u = sum(ku[d] * coords[d] for d in range(grid.dim))
    phase_b = sum(kb[d] * coords[d] for d in range(grid.dim))
    eu = _unit_perp(ku)
    if grid.dim == 2:
        eb = np.array([0.0, 0.0, 1.0])  # out-of-plane keeps the Hall term alive
    else:
        eb = _unit_perp(kb)
    expand = (slice(None),) + (None,) * grid.dim
    u = init.u_amplitude * eu[expand] * np.sin(phase_u)[None]
    b = init.b_amplitude * eb[expand] * np.sin(phase_b)[None]
    return u, b


def _taylor_green_fields(grid: Grid, init: InitialData):
    coords = grid.coordinates()
    x, y = coords[0], coords[1]
    a, bmp = init.u_amplitude, init.b_amplitude
    if grid.dim == 2:
        u = np.stack([np.cos(x) * np.sin(y), -np.sin(x) * np.cos(y), np.zeros_like(x)])
        b = np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y), np.zeros_like(x)])
    else:
        z = coords[2]
        u = np.stack([
            np.sin(x) * np.cos(y) * np.cos(z),
            -np.cos(x) * np.sin(y) * np.cos(z),
            np.zeros_like(x),
        ])
        b = np.stack([
            np.cos(x) * np.sin(y) * np.cos(z),
            -np.sin(x) * np.cos(y) * np.cos(z),
            np.zeros_like(x),
        ])
    return a * u, bmp * b


def _orszag_tang_fields(grid: Grid, init: InitialData):
    coords = grid.coordinates()
    x, y = coords[0], coords[1]
    u = np.stack([-np.sin(y), np.sin(x), np.zeros_like(x)])
    b = np.stack([-np.sin(y), np.sin(2.0 * x), np.zeros_like(x)])
    return init.u_amplitude * u, init.b_amplitude * b


def initial_data(init: InitialData, grid: Grid) -> MhdState:
    """Divergence-free, dealiased, seed-reproducible initial state."""
    if init.recipe == "random_band":
        children = np.random.SeedSequence(init.seed).spawn(2)
        u = random_band_field(grid, init.kband, init.sigma_decay, children[0],
                              components=3, divergence_free=True)
        b = random_band_field(grid, init.kband, init.sigma_decay, children[1],
                              components=3, divergence_free=True)
        u_hat, b_hat = u.coeffs.copy(), b.coeffs.copy()
        # amplitude = root-mean-square magnitude, which is grid-independent
        # (unlike the collocation peak), so the same seed gives the same
        # continuum field on every resolution containing the band
        for arr, amp in ((u_hat, init.u_amplitude), (b_hat, init.b_amplitude)):
            rms = float(np.sqrt(np.sum(np.abs(arr) ** 2)))
            if rms > 0:
                arr *= amp / rms
    else:
        builder = {
            "single_mode": _single_mode_fields,
            "taylor_green": _taylor_green_fields,
            "orszag_tang_like": _orszag_tang_fields,
        }[init.recipe]
        u_phys, b_phys = builder(grid, init)
        u_hat = _spec_array(grid, u_phys)
        b_hat = _spec_array(grid, b_phys)
    mask = grid.dealias_mask
    u_hat = _leray_coeffs(grid, u_hat * mask)
    b_hat = _leray_coeffs(grid, b_hat * mask)
    return MhdState(SpectralField(grid, u_hat), SpectralField(grid, b_hat), 0.0)


# ============================================================
# Right-hand side
# ============================================================


def _rhs_hat(grid: Grid, u_hat: np.ndarray, b_hat: np.ndarray):
    """Quadratic terms of the evolution (diffusion excluded; it belongs to
    the integrating factor).  Returns (du_hat, db_hat), both dealiased,
    du projected, db a curl plus transport and divergence-free to rounding."""
    mask = grid.dealias_mask
    dim = grid.dim
    # one batched c2r transform for every collocation ingredient:
    # [u(3), b(3), grad u(dim*3), grad b(dim*3), curl b(3)]
    buf = np.empty((9 + 6 * dim,) + grid.shape, dtype=complex)
    np.multiply(u_hat, mask, out=buf[0:3])
    np.multiply(b_hat, mask, out=buf[3:6])
    gu = buf[6:6 + 3 * dim].reshape((dim, 3) + grid.shape)
    gb = buf[6 + 3 * dim:6 + 6 * dim].reshape((dim, 3) + grid.shape)
    np.multiply(1j * grid.k[:, None], buf[None, 0:3], out=gu)
    np.multiply(1j * grid.k[:, None], buf[None, 3:6], out=gb)
    buf[6 + 6 * dim:] = _curl_coeffs(grid, buf[3:6])
    phys = _phys_array(grid, buf)
    du_nl, db_adv, hall = kernels.rhs_products(
        phys[0:3], phys[3:6],
        phys[6:6 + 3 * dim].reshape((dim, 3) + grid.shape),
        phys[6 + 3 * dim:6 + 6 * dim].reshape((dim, 3) + grid.shape),
        phys[6 + 6 * dim:],
    )
    out = _spec_array(grid, np.concatenate([du_nl, db_adv, hall]))
    out *= mask
    du_hat = _leray_coeffs(grid, out[0:3])
    db_hat = out[3:6] - _curl_coeffs(grid, out[6:9])
    return du_hat, db_hat


def rhs(state: MhdState) -> tuple[SpectralField, SpectralField]:
    """Projected nonlinear right-hand side (du, db) at one state."""
    grid = state.u.grid
    du, db = _rhs_hat(grid, state.u.coeffs, state.b.coeffs)
    return SpectralField(grid, du), SpectralField(grid, db)


def _dissipation(grid: Grid, diff_mult: np.ndarray, b_hat: np.ndarray) -> float:
    return grid.norm_factor**2 * float(np.sum(diff_mult * np.abs(b_hat) ** 2))


def _step_arrays(grid, u, b, dt, e1, e2, diff_mult):
    """One integrating-factor RK4 step; returns (u', b', dissipation quadrature)."""
    n1u, n1b = _rhs_hat(grid, u, b)
    u2 = u + (0.5 * dt) * n1u
    b2 = e1 * (b + (0.5 * dt) * n1b)
    n2u, n2b = _rhs_hat(grid, u2, b2)
    u3 = u + (0.5 * dt) * n2u
    b3 = e1 * b + (0.5 * dt) * n2b
    n3u, n3b = _rhs_hat(grid, u3, b3)
    u4 = u + dt * n3u
    b4 = e2 * b + dt * (e1 * n3b)
    n4u, n4b = _rhs_hat(grid, u4, b4)
    u_new = u + (dt / 6.0) * ((n1u + n4u) + 2.0 * (n2u + n3u))
    b_new = e2 * b + (dt / 6.0) * (e2 * n1b + 2.0 * (e1 * (n2b + n3b)) + n4b)
    u_new = _leray_coeffs(grid, u_new)
    b_new = _leray_coeffs(grid, b_new)
    q_inc = (dt / 6.0) * (
        (_dissipation(grid, diff_mult, b) + _dissipation(grid, diff_mult, b4))
        + 2.0 * (_dissipation(grid, diff_mult, b2) + _dissipation(grid, diff_mult, b3))
    )
    return u_new, b_new, q_inc


def _diffusion_mult(grid: Grid, alpha: float) -> np.ndarray:
    mult = grid.k_sq**alpha
    mult[(0,) * grid.dim] = 0.0
    return mult


def step(state: MhdState, dt: float, alpha: float) -> MhdState:
    """Advance one step of size dt (re-projected, NaN-checked)."""
    grid = state.u.grid
    diff_mult = _diffusion_mult(grid, alpha)
    e1 = np.exp(-0.5 * dt * diff_mult)
    u, b, _ = _step_arrays(grid, state.u.coeffs, state.b.coeffs, dt, e1, e1 * e1, diff_mult)
    t_new = state.t + dt
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(b))):
        raise BlowUpError(t_new)
    return MhdState(SpectralField(grid, u), SpectralField(grid, b), t_new)


# ============================================================
# Step control
# ============================================================


def compute_dt(state: MhdState, config: SimConfig) -> float:
    """CFL bound: advective limits plus the whistler limit 1/(max|b| kmax^2).

    The Hall term is a second-order dispersive derivative, so its fastest
    wave speed grows like |b| k^2; the diffusion needs no limit (it is
    integrated exactly).
    """
    grid = state.u.grid
    h = 2.0 * np.pi / grid.n
    umax = float(np.max(np.sqrt(np.sum(_phys_array(grid, state.u.coeffs) ** 2, axis=0))))
    bmax = float(np.max(np.sqrt(np.sum(_phys_array(grid, state.b.coeffs) ** 2, axis=0))))
    limits = [config.dt_max]
    if umax > 0:
        limits.append(config.cfl_safety * h / umax)
    if bmax > 0:
        limits.append(config.cfl_safety * h / bmax)
        limits.append(config.cfl_safety / (bmax * grid.kmax**2))
    return min(limits)


# ============================================================
# Trajectory driver
# ============================================================

_DIAG_KEYS = (
    "t", "energy", "l2_u", "l2_b", "hs_u", "hs_b", "hsp1_u", "hsp1_b",
    "c01_u", "c01_b", "dissipation", "diss_integral", "div_u_rel", "div_b_rel",
)


def _c01_norm(grid: Grid, coeffs: np.ndarray) -> float:
    phys = _phys_array(grid, coeffs)
    sup = float(np.sqrt(np.max(np.sum(phys**2, axis=0))))
    gphys = _phys_array(grid, _gradient_coeffs(grid, coeffs).reshape((-1,) + grid.shape))
    gsup = float(np.sqrt(np.max(np.sum(gphys**2, axis=0))))
    return sup + gsup


def _c01_pair(grid: Grid, u_hat: np.ndarray, b_hat: np.ndarray):
    """C^{0,1} norms of u and b from one batched transform."""
    dim = grid.dim
    buf = np.empty((6 + 6 * dim,) + grid.shape, dtype=complex)
    buf[0:3] = u_hat
    buf[3:6] = b_hat
    gu = buf[6:6 + 3 * dim].reshape((dim, 3) + grid.shape)
    gb = buf[6 + 3 * dim:].reshape((dim, 3) + grid.shape)
    np.multiply(1j * grid.k[:, None], buf[None, 0:3], out=gu)
    np.multiply(1j * grid.k[:, None], buf[None, 3:6], out=gb)
    phys = _phys_array(grid, buf)
    sq = phys**2
    c01_u = math.sqrt(np.max(np.sum(sq[0:3], axis=0))) \
        + math.sqrt(np.max(np.sum(sq[6:6 + 3 * dim], axis=0)))
    c01_b = math.sqrt(np.max(np.sum(sq[3:6], axis=0))) \
        + math.sqrt(np.max(np.sum(sq[6 + 3 * dim:], axis=0)))
    return c01_u, c01_b


def _diag_row(grid, u_hat, b_hat, w_s, w_sp1, diff_mult, t, q):
    nf2 = grid.norm_factor**2
    uu = np.abs(u_hat) ** 2
    bb = np.abs(b_hat) ** 2
    l2u_sq = nf2 * float(np.sum(uu))
    l2b_sq = nf2 * float(np.sum(bb))
    c01_u, c01_b = _c01_pair(grid, u_hat, b_hat)
    row = {
        "t": t,
        "energy": 0.5 * (l2u_sq + l2b_sq),
        "l2_u": math.sqrt(l2u_sq),
        "l2_b": math.sqrt(l2b_sq),
        "hs_u": math.sqrt(nf2 * float(np.sum(w_s * uu))),
        "hs_b": math.sqrt(nf2 * float(np.sum(w_s * bb))),
        "hsp1_u": math.sqrt(nf2 * float(np.sum(w_sp1 * uu))),
        "hsp1_b": math.sqrt(nf2 * float(np.sum(w_sp1 * bb))),
        "c01_u": c01_u,
        "c01_b": c01_b,
        "dissipation": nf2 * float(np.sum(diff_mult * bb)),
        "diss_integral": q,
        "div_u_rel": _div_rel(grid, u_hat, math.sqrt(l2u_sq)),
        "div_b_rel": _div_rel(grid, b_hat, math.sqrt(l2b_sq)),
    }
    return row


def _div_rel(grid, c, norm):
    if norm == 0.0:
        return 0.0
    acc = grid.k[0] * c[0]
    for d in range(1, grid.dim):
        acc = acc + grid.k[d] * c[d]
    return float(np.max(np.abs(acc))) / norm


def simulate(config: SimConfig, dt_override: float | None = None,
             initial_state: MhdState | None = None) -> Trajectory:
    """Run to t_end (or abort on instability), emitting per-step diagnostics.

    dt is fixed for the whole run: the configured value, or the CFL bound of
    the initial state when dt='auto', then shrunk so an integer number of
    steps lands exactly on t_end.  dt_override short-circuits both (used for
    lockstep trajectory pairs).
    """
    grid = make_grid(config.dim, config.n)
    state0 = initial_state if initial_state is not None else initial_data(config.initial, grid)
    if dt_override is not None:
        dt_target = dt_override
    elif config.dt == "auto":
        dt_target = compute_dt(state0, config)
    else:
        dt_target = float(config.dt)
    nsteps = max(1, math.ceil(config.t_end / dt_target - 1e-12))
    dt = config.t_end / nsteps

    diff_mult = _diffusion_mult(grid, config.alpha)
    e1 = np.exp(-0.5 * dt * diff_mult)
    e2 = e1 * e1
    w_s = (1.0 + grid.k_sq) ** config.s
    w_sp1 = (1.0 + grid.k_sq) ** (config.s + 1.0)

    u = state0.u.coeffs.copy()
    b = state0.b.coeffs.copy()
    q = 0.0
    rows = [_diag_row(grid, u, b, w_s, w_sp1, diff_mult, 0.0, q)]
    states = [MhdState(SpectralField(grid, u.copy()), SpectralField(grid, b.copy()), 0.0)]
    state_steps = [0]

    for i in range(1, nsteps + 1):
        u, b, q_inc = _step_arrays(grid, u, b, dt, e1, e2, diff_mult)
        q += q_inc
        t = i * dt
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(b))):
            raise BlowUpError(t)
        rows.append(_diag_row(grid, u, b, w_s, w_sp1, diff_mult, t, q))
        if i % config.snapshot_stride == 0 or i == nsteps:
            states.append(MhdState(SpectralField(grid, u.copy()), SpectralField(grid, b.copy()), t))
            state_steps.append(i)

    diag = {k: np.array([r[k] for r in rows]) for k in _DIAG_KEYS}
    return Trajectory(
        config=config,
        grid=grid,
        dt=dt,
        times=diag["t"],
        diag=diag,
        states=states,
        state_steps=state_steps,
    )
