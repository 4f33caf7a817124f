"""Fourier-side representation of periodic fields and the calculus on them.

Everything lives on the torus [0, 2*pi)^d, d in {2, 3}, with integer
wavenumbers.  Coefficients follow the Fourier-series convention

    f(x) = sum_k c(k) exp(i k . x),

so the forward transform divides the FFT by n^d, and

    ||f||_L2 = (2*pi)^(d/2) * sqrt(sum_k |c(k)|^2).

Vector fields always carry 3 components.  On a 2-d grid the fields depend
on (x, y) only ("2.5-d"); the third component is kept because a purely
in-plane magnetic field would make the Hall nonlinearity leave the in-plane
subspace.

Quadratic products are formed in collocation space and truncated by the 2/3
rule (every mode with any |k_i| > n/3 is zeroed).  Inputs are truncated
before the product as well, which makes the retained coefficients of the
product alias-free and the L2 cancellation identities (skew symmetry of
advection, Hall orthogonality) hold to rounding.

Grids are immutable after construction and safe to share between workers;
field operations are pure (fresh output, inputs untouched).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from . import kernels

# ============================================================
# Grid
# ============================================================


class Grid:
    """Periodic grid metadata plus cached wavenumber tables.

    Attributes
    ----------
    dim : spatial dimension (2 or 3)
    n : collocation points per axis (power of two, >= 8)
    kmax : largest resolved integer wavenumber per axis (n // 2)
    k : (dim, *shape) integer wavenumber meshes (float64)
    k_sq : |k|^2 mesh
    dealias_mask : boolean mesh, True where every |k_i| <= n/3
    """

    def __init__(self, dim: int, n: int):
        if dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {dim}")
        if n < 8:
            raise ValueError(f"n must be >= 8, got {n}")
        if n & (n - 1):
            raise ValueError(f"n not a power of two: {n}")
        self.dim = dim
        self.n = n
        self.kmax = n // 2
        self.shape = (n,) * dim
        self.npoints = n**dim
        self.cell_volume = (2.0 * np.pi / n) ** dim
        self.norm_factor = (2.0 * np.pi) ** (dim / 2.0)
        k1 = np.fft.fftfreq(n, 1.0 / n)  # integers 0..n/2-1, -n/2..-1
        self.k = np.stack(np.meshgrid(*(k1,) * dim, indexing="ij"))
        self.k_sq = np.sum(self.k**2, axis=0)
        self.inv_k_sq = np.zeros_like(self.k_sq)
        nz = self.k_sq > 0
        self.inv_k_sq[nz] = 1.0 / self.k_sq[nz]
        self.dealias_mask = np.all(np.abs(self.k) <= n / 3.0, axis=0)
        self._axes = tuple(range(-dim, 0))
        for arr in (self.k, self.k_sq, self.inv_k_sq, self.dealias_mask):
            arr.flags.writeable = False

    def __eq__(self, other):
        return isinstance(other, Grid) and (self.dim, self.n) == (other.dim, other.n)

    def __hash__(self):
        return hash((self.dim, self.n))

    def __repr__(self):
        return f"Grid(dim={self.dim}, n={self.n})"

    def coordinates(self):
        """Collocation coordinate meshes, each shaped like the grid."""
        x1 = np.arange(self.n) * (2.0 * np.pi / self.n)
        return np.meshgrid(*(x1,) * self.dim, indexing="ij")


def make_grid(dim: int, n: int) -> Grid:
    return Grid(dim, n)


# ============================================================
# Fields
# ============================================================


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A field as complex Fourier coefficients, shape (components, *grid.shape)."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape[1:] != self.grid.shape or self.coeffs.shape[0] not in (1, 3):
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid}"
            )
        self.coeffs.flags.writeable = False

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]


@dataclass(frozen=True, eq=False)
class MhdState:
    """Velocity and magnetic field at one time instant."""

    u: SpectralField
    b: SpectralField
    t: float


def _as_component_array(grid: Grid, samples: np.ndarray) -> np.ndarray:
    if samples.shape == grid.shape:
        return samples[None]
    if samples.ndim == grid.dim + 1 and samples.shape[1:] == grid.shape:
        return samples
    raise ValueError(f"sample shape {samples.shape} does not match grid {grid}")


def to_spectral(grid: Grid, samples: np.ndarray) -> SpectralField:
    """Forward transform of real collocation samples, (*shape) or (c, *shape)."""
    arr = _as_component_array(grid, np.asarray(samples, dtype=float))
    return SpectralField(grid, _spec_array(grid, arr))


def to_physical(f: SpectralField, n_out: int | None = None) -> np.ndarray:
    """Collocation values of f; n_out > n evaluates on an oversampled grid.

    Scalars come back as (*shape), vectors as (3, *shape).
    """
    if n_out is not None and n_out != f.grid.n:
        f = regrid(f, n_out)
    phys = _phys_array(f.grid, f.coeffs)
    return phys[0] if phys.shape[0] == 1 else phys


def _phys_array(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    # real fields only: the c2r transform reads the non-negative half
    # spectrum along the last axis and imposes conjugate symmetry
    half = coeffs[..., : grid.n // 2 + 1]
    out = _fft.irfftn(half, s=grid.shape, axes=grid._axes)
    out *= grid.npoints
    return out


def _spec_array(grid: Grid, samples: np.ndarray) -> np.ndarray:
    out = _fft.fftn(samples, axes=grid._axes)
    out *= 1.0 / grid.npoints
    return out


def regrid(f: SpectralField, n_out: int) -> SpectralField:
    """Embed (or truncate) coefficients onto an n_out grid, matching modes by k.

    Truncation silently drops modes beyond the target's resolution, so only
    use it on fields already band-limited below n_out/2.
    """
    grid = f.grid
    new = Grid(grid.dim, n_out)
    src = np.fft.fftshift(f.coeffs, axes=grid._axes)
    dst = np.zeros((f.components,) + new.shape, dtype=complex)
    dstv = np.fft.fftshift(dst, axes=grid._axes)
    if n_out >= grid.n:
        off = (n_out - grid.n) // 2
        sl = (slice(None),) + (slice(off, off + grid.n),) * grid.dim
        dstv[sl] = src
    else:
        off = (grid.n - n_out) // 2
        sl = (slice(None),) + (slice(off, off + n_out),) * grid.dim
        dstv = src[sl]
    return SpectralField(new, np.ascontiguousarray(np.fft.ifftshift(dstv, axes=grid._axes)))


# ============================================================
# Multiplier operations
# ============================================================


def dealias(f: SpectralField) -> SpectralField:
    """2/3-rule truncation: zero every mode with any |k_i| > n/3. Idempotent."""
    return SpectralField(f.grid, f.coeffs * f.grid.dealias_mask)


def fractional_laplacian(f: SpectralField, alpha: float) -> SpectralField:
    """(-Laplace)^alpha via the multiplier |k|^(2*alpha); the mean maps to 0."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    grid = f.grid
    mult = grid.k_sq**alpha
    mult[(0,) * grid.dim] = 0.0
    return SpectralField(grid, f.coeffs * mult)


def derivative(f: SpectralField, axis: int) -> SpectralField:
    return SpectralField(f.grid, 1j * f.grid.k[axis] * f.coeffs)


def _gradient_coeffs(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    # (dim, ncomp, *shape): i * k_d * c_comp
    return 1j * grid.k[:, None] * coeffs[None]


def divergence(v: SpectralField) -> SpectralField:
    grid = v.grid
    div = np.zeros((1,) + grid.shape, dtype=complex)
    for d in range(grid.dim):
        div[0] += 1j * grid.k[d] * v.coeffs[d]
    return SpectralField(grid, div)


def divergence_max(v: SpectralField) -> float:
    """max_k |k . v_hat(k)|, the discrete divergence-free defect."""
    grid = v.grid
    acc = grid.k[0] * v.coeffs[0]
    for d in range(1, grid.dim):
        acc = acc + grid.k[d] * v.coeffs[d]
    return float(np.max(np.abs(acc)))


def _curl_coeffs(grid: Grid, c: np.ndarray) -> np.ndarray:
    kx, ky = grid.k[0], grid.k[1]
    kz = grid.k[2] if grid.dim == 3 else 0.0
    out = np.empty_like(c)
    out[0] = 1j * (ky * c[2] - kz * c[1])
    out[1] = 1j * (kz * c[0] - kx * c[2])
    out[2] = 1j * (kx * c[1] - ky * c[0])
    return out


def curl(v: SpectralField) -> SpectralField:
    if v.components != 3:
        raise ValueError("curl requires a 3-component field")
    return SpectralField(v.grid, _curl_coeffs(v.grid, v.coeffs))


def _leray_coeffs(grid: Grid, c: np.ndarray) -> np.ndarray:
    dot = grid.k[0] * c[0]
    for d in range(1, grid.dim):
        dot = dot + grid.k[d] * c[d]
    corr = dot * grid.inv_k_sq
    out = c.copy()
    for d in range(grid.dim):
        out[d] -= grid.k[d] * corr
    return out


def leray_project(v: SpectralField) -> SpectralField:
    """Orthogonal projection onto divergence-free fields (idempotent)."""
    if v.components != 3:
        raise ValueError("leray_project requires a 3-component field")
    return SpectralField(v.grid, _leray_coeffs(v.grid, v.coeffs))


# ============================================================
# Quadratic (collocation-space) operations
# ============================================================


def _advect_coeffs(grid: Grid, v: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Coefficients of v . grad f with 2/3 truncation on inputs and output."""
    mask = grid.dealias_mask
    vd = v[: grid.dim] * mask
    fd = f * mask
    v_phys = _phys_array(grid, vd)
    grad_phys = _phys_array(grid, _gradient_coeffs(grid, fd))
    prod = kernels.dot_grad(v_phys, grad_phys)
    return _spec_array(grid, prod) * mask


def advect(v: SpectralField, f: SpectralField) -> SpectralField:
    """v . grad f, products formed in collocation space, dealiased."""
    if v.components != 3:
        raise ValueError("advecting velocity must have 3 components")
    return SpectralField(f.grid, _advect_coeffs(f.grid, v.coeffs, f.coeffs))


def _cross_coeffs(grid: Grid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    mask = grid.dealias_mask
    a_phys = _phys_array(grid, a * mask)
    b_phys = _phys_array(grid, b * mask)
    return _spec_array(grid, kernels.cross3(a_phys, b_phys)) * mask


def cross(a: SpectralField, b: SpectralField) -> SpectralField:
    """Pointwise a x b, dealiased."""
    if a.components != 3 or b.components != 3:
        raise ValueError("cross requires 3-component fields")
    return SpectralField(a.grid, _cross_coeffs(a.grid, a.coeffs, b.coeffs))


def pointwise_multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise scalar product fg, dealiased."""
    grid = f.grid
    mask = grid.dealias_mask
    prod = _phys_array(grid, f.coeffs * mask) * _phys_array(grid, g.coeffs * mask)
    return SpectralField(grid, _spec_array(grid, prod) * mask)


def _hall_coeffs(grid: Grid, b: np.ndarray) -> np.ndarray:
    bd = b * grid.dealias_mask
    c = _curl_coeffs(grid, bd)
    e = _cross_coeffs(grid, c, bd)
    return _curl_coeffs(grid, e)


def hall_term(b: SpectralField) -> SpectralField:
    """curl((curl b) x b).  A curl, hence divergence-free to rounding, and
    L2-orthogonal to b (the cross product is pointwise orthogonal to curl b).
    """
    if b.components != 3:
        raise ValueError("hall_term requires a 3-component field")
    return SpectralField(b.grid, _hall_coeffs(b.grid, b.coeffs))


def recover_pressure(state: MhdState) -> SpectralField:
    """Pressure from the momentum balance, convention

        P_hat(k) = i k . F[u.grad u - b.grad b](k) / |k|^2,   P_hat(0) = 0,

    obtained by taking the divergence of the momentum equation.
    """
    grid = state.u.grid
    nhat = _advect_coeffs(grid, state.u.coeffs, state.u.coeffs) - _advect_coeffs(
        grid, state.b.coeffs, state.b.coeffs
    )
    dot = grid.k[0] * nhat[0]
    for d in range(1, grid.dim):
        dot = dot + grid.k[d] * nhat[d]
    return SpectralField(grid, (1j * dot * grid.inv_k_sq)[None])


# ============================================================
# Norms and inner products
# ============================================================


def l2_norm(f: SpectralField) -> float:
    return f.grid.norm_factor * float(np.linalg.norm(f.coeffs))


def inner_product(f: SpectralField, g: SpectralField) -> float:
    """L2 pairing integral(f . g) dx of two real fields."""
    plancherel = np.vdot(g.coeffs, f.coeffs).real
    return f.grid.norm_factor**2 * float(plancherel)


def linf_norm(f: SpectralField, n_out: int | None = None) -> float:
    """Grid maximum of the pointwise Euclidean magnitude."""
    phys = to_physical(f, n_out)
    if f.components == 1:
        return float(np.max(np.abs(phys)))
    return float(np.sqrt(np.max(np.sum(phys**2, axis=0))))


def grad_linf_norm(f: SpectralField, n_out: int | None = None) -> float:
    """Grid maximum of the Frobenius magnitude of the gradient."""
    grid = f.grid
    gf = _gradient_coeffs(grid, f.coeffs).reshape((grid.dim * f.components,) + grid.shape)
    if n_out is not None and n_out != grid.n:
        new = Grid(grid.dim, n_out)
        stacked = [
            regrid(SpectralField(grid, gf[i][None]), n_out).coeffs[0]
            for i in range(gf.shape[0])
        ]
        phys = _phys_array(new, np.stack(stacked))
    else:
        phys = _phys_array(grid, gf)
    return float(np.sqrt(np.max(np.sum(phys**2, axis=0))))


def lipschitz_norm(f: SpectralField, n_out: int | None = None) -> float:
    """C^{0,1} norm: ||f||_Linf + ||grad f||_Linf, both as grid maxima.

    Band-limited fields are evaluated exactly at the collocation points; the
    residual max-location error can be quantified by passing an oversampled
    n_out.
    """
    return linf_norm(f, n_out) + grad_linf_norm(f, n_out)


def parseval_ratio(grid: Grid, samples: np.ndarray) -> float:
    """Grid-average of |samples|^2 divided by sum |coeff|^2 (should be 1)."""
    arr = _as_component_array(grid, np.asarray(samples, dtype=float))
    phys_sq = float(np.sum(arr**2)) / grid.npoints
    coeffs = _spec_array(grid, arr)
    spec_sq = float(np.sum(np.abs(coeffs) ** 2))
    return phys_sq / spec_sq


# ============================================================
# Seeded band-limited fields
# ============================================================


def random_band_field(
    grid: Grid,
    kband: int,
    sigma_decay: float,
    seed,
    components: int = 3,
    divergence_free: bool = False,
) -> SpectralField:
    """Seeded random field with spectrum exp(-sigma_decay * |k|) on |k_i| <= kband.

    The draw order is independent of the grid size, so the same seed yields
    the same continuum field on every resolution that contains the band.
    """
    if kband > grid.kmax - 1:
        raise ValueError(f"kband {kband} does not fit on grid {grid}")
    rng = np.random.default_rng(seed)
    dim = grid.dim
    coeffs = np.zeros((components,) + grid.shape, dtype=complex)
    rng_vals = rng.normal(size=(2 * kband + 1,) * dim + (components, 2))
    it = np.ndindex(*(2 * kband + 1,) * dim)
    for idx in it:
        kvec = tuple(i - kband for i in idx)
        if all(c == 0 for c in kvec):
            continue
        kmag = np.sqrt(sum(c * c for c in kvec))
        env = np.exp(-sigma_decay * kmag)
        raw = rng_vals[idx]
        pos = tuple(c % grid.n for c in kvec)
        coeffs[(slice(None),) + pos] = env * (raw[:, 0] + 1j * raw[:, 1])
    # enforce conjugate symmetry so the field is real
    sym = np.empty_like(coeffs)
    for c in range(components):
        flipped = _reflect_conj(coeffs[c])
        sym[c] = 0.5 * (coeffs[c] + flipped)
    sym *= grid.dealias_mask
    f = SpectralField(grid, sym)
    if divergence_free:
        if components != 3:
            raise ValueError("divergence_free needs a 3-component field")
        f = leray_project(f)
    return f


def _reflect_conj(c: np.ndarray) -> np.ndarray:
    """conj(c(-k)) on the wavenumber lattice."""
    out = np.conj(c)
    for ax in range(c.ndim):
        out = np.flip(np.roll(out, -1, axis=ax), axis=ax)
    return out
