"""Dyadic frequency decomposition, block Sobolev norms, and commutators.

The low-pass profile chi is a smooth radial bump built from the exp(-1/x)
mollifier: identically 1 for |xi| <= 3/4 and supported in |xi| <= 4/3.  With
phi(xi) = chi(xi/2) - chi(xi) the band masks are supported in the annulus

    3/4 * 2^j <= |xi| <= 8/3 * 2^j,

and chi(xi) + sum_{q>=0} phi(2^-q xi) telescopes to 1 on every resolved
mode.  Blocks D_j and low-passes S_j are plain multiplier operators, so the
layout arrays are immutable and shell loops may run concurrently.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .reports import InequalityReport
from .spectral import (
    Grid,
    SpectralField,
    advect,
    cross,
    linf_norm,
    pointwise_multiply,
    random_band_field,
    _gradient_coeffs,
    _phys_array,
)

RING_LOWER = 0.75
RING_UPPER = 8.0 / 3.0
CHI_PLATEAU = 0.75
CHI_SUPPORT = 4.0 / 3.0


def chi_profile(r: np.ndarray) -> np.ndarray:
    """Radial low-pass: 1 on r <= 3/4, 0 on r >= 4/3, smooth in between."""
    r = np.asarray(r, dtype=float)
    t = (CHI_SUPPORT - r) / (CHI_SUPPORT - CHI_PLATEAU)  # 1 at plateau edge, 0 at support edge
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        bsupp = 1.0 - t
        c = np.where(bsupp > 0.0, np.exp(-1.0 / np.maximum(bsupp, 1e-300)), 0.0)
        trans = a / (a + c)
    out = np.where(r <= CHI_PLATEAU, 1.0, np.where(r >= CHI_SUPPORT, 0.0, trans))
    return out


class LpLayout:
    """Precomputed dyadic multiplier masks for one grid.

    chi_masks[j] = chi(2^-j xi) for j = 0..jmax+1 (the S_j multipliers);
    phi_masks[j] = chi(2^-(j+1) xi) - chi(2^-j xi) for j = 0..jmax.
    Shell -1 uses chi_masks[0].  Shells whose annulus lies beyond the
    resolved ball have identically zero masks and are reported inactive.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.jmin = -1
        self.jmax = int(np.ceil(np.log2(grid.kmax))) + 2
        radius = np.sqrt(grid.k_sq)
        self.chi_masks = [chi_profile(radius / 2.0**j) for j in range(self.jmax + 2)]
        self.phi_masks = [
            self.chi_masks[j + 1] - self.chi_masks[j] for j in range(self.jmax + 1)
        ]
        for m in self.chi_masks + self.phi_masks:
            m.flags.writeable = False
        self.active_shells = [-1] + [
            j for j in range(self.jmax + 1) if np.any(self.phi_masks[j] != 0.0)
        ]

    def block_mask(self, j: int) -> np.ndarray:
        if j == -1:
            return self.chi_masks[0]
        if 0 <= j <= self.jmax:
            return self.phi_masks[j]
        raise ValueError(f"shell index {j} outside [-1, {self.jmax}]")

    def lowpass_mask(self, j: int) -> np.ndarray:
        if j == -1:
            return np.zeros(self.grid.shape)
        if 0 <= j <= self.jmax + 1:
            return self.chi_masks[j]
        raise ValueError(f"low-pass index {j} outside [-1, {self.jmax + 1}]")

    def partition_defect(self) -> float:
        """max |1 - (chi + sum_j phi_j)| over the dealiased ball."""
        total = self.chi_masks[0].copy()
        for j in range(self.jmax + 1):
            total += self.phi_masks[j]
        ball = self.grid.dealias_mask
        return float(np.max(np.abs(total[ball] - 1.0)))


@functools.lru_cache(maxsize=16)
def _layout_cache(dim: int, n: int) -> LpLayout:
    return LpLayout(Grid(dim, n))


def build_layout(grid: Grid) -> LpLayout:
    return _layout_cache(grid.dim, grid.n)


def lp_block(f: SpectralField, j: int, layout: LpLayout | None = None) -> SpectralField:
    """Dyadic block D_j f."""
    layout = layout or build_layout(f.grid)
    return SpectralField(f.grid, f.coeffs * layout.block_mask(j))


def lp_lowpass(f: SpectralField, j: int, layout: LpLayout | None = None) -> SpectralField:
    """Cumulative low pass S_j f = sum_{q < j} D_q f."""
    layout = layout or build_layout(f.grid)
    return SpectralField(f.grid, f.coeffs * layout.lowpass_mask(j))


# ============================================================
# Sobolev norms
# ============================================================


@dataclass(frozen=True)
class SobolevSpec:
    s: float
    style: str = "weight"

    def __post_init__(self):
        if self.style not in ("weight", "blocks"):
            raise ValueError(f"unknown norm style {self.style!r}")


def _hs_norm_coeffs(grid: Grid, coeffs: np.ndarray, s: float) -> float:
    w = (1.0 + grid.k_sq) ** s
    total = float(np.sum(w * np.abs(coeffs) ** 2))
    return grid.norm_factor * np.sqrt(total)


def _blocks_norm_coeffs(grid: Grid, coeffs: np.ndarray, s: float, layout: LpLayout) -> float:
    total = 0.0
    for j in layout.active_shells:
        mask = layout.block_mask(j)
        block_sq = float(np.sum(np.abs(mask * coeffs) ** 2))
        total += 4.0 ** (j * s) * block_sq
    return grid.norm_factor * np.sqrt(total)


def sobolev_norm(f: SpectralField, spec: SobolevSpec | float,
                 layout: LpLayout | None = None) -> float:
    """H^s norm, either (1+|k|^2)^(s/2) weighting or the dyadic block sum."""
    if not isinstance(spec, SobolevSpec):
        spec = SobolevSpec(float(spec))
    if spec.style == "weight":
        return _hs_norm_coeffs(f.grid, f.coeffs, spec.s)
    return _blocks_norm_coeffs(f.grid, f.coeffs, spec.s, layout or build_layout(f.grid))


def hs_norm(f: SpectralField, s: float) -> float:
    return _hs_norm_coeffs(f.grid, f.coeffs, s)


def _grad_stack(grid: Grid, f: SpectralField) -> np.ndarray:
    g = _gradient_coeffs(grid, f.coeffs)
    return g.reshape((grid.dim * f.components,) + grid.shape)


def _grad_hs(f: SpectralField, s: float) -> float:
    return _hs_norm_coeffs(f.grid, _grad_stack(f.grid, f), s)


def _grad_linf(f: SpectralField) -> float:
    phys = _phys_array(f.grid, _grad_stack(f.grid, f))
    return float(np.sqrt(np.max(np.sum(phys**2, axis=0))))


# ============================================================
# Commutators
# ============================================================


def commutator_advection(v: SpectralField, f: SpectralField, j: int,
                         layout: LpLayout | None = None) -> SpectralField:
    """R_j = D_j(v . grad f) - v . grad(D_j f), the exact discrete difference."""
    layout = layout or build_layout(f.grid)
    first = lp_block(advect(v, f), j, layout)
    second = advect(v, lp_block(f, j, layout))
    return SpectralField(f.grid, first.coeffs - second.coeffs)


def commutator_cross(b: SpectralField, g: SpectralField, j: int,
                     layout: LpLayout | None = None) -> SpectralField:
    """[D_j, b x] g = D_j(b x g) - b x (D_j g)."""
    layout = layout or build_layout(g.grid)
    first = lp_block(cross(b, g), j, layout)
    second = cross(b, lp_block(g, j, layout))
    return SpectralField(g.grid, first.coeffs - second.coeffs)


def advection_commutator_series(v: SpectralField, f: SpectralField,
                                layout: LpLayout | None = None) -> dict:
    """R_j for every shell, reusing the shared v . grad f evaluation."""
    layout = layout or build_layout(f.grid)
    vf = advect(v, f)
    out = {}
    for j in layout.active_shells:
        first = vf.coeffs * layout.block_mask(j)
        second = advect(v, lp_block(f, j, layout)).coeffs
        out[j] = SpectralField(f.grid, first - second)
    return out


# ============================================================
# Inequality verifiers (ratio = LHS / RHS-without-constant)
# ============================================================


def verify_product_estimate(f: SpectralField, g: SpectralField, s: float,
                            headroom: float = float("inf")) -> InequalityReport:
    """Ratio check of ||fg||_Hs against ||f||_Linf ||g||_Hs + ||f||_Hs ||g||_Linf."""
    lhs = hs_norm(pointwise_multiply(f, g), s)
    rhs = linf_norm(f) * hs_norm(g, s) + hs_norm(f, s) * linf_norm(g)
    ratio = 0.0 if lhs == 0.0 else lhs / rhs
    return InequalityReport(
        name="product_hs",
        samples=[0],
        lhs_series=[lhs],
        rhs_series=[rhs],
        fitted_constant=ratio,
        headroom=headroom,
        metadata={"d": f.grid.dim, "n": f.grid.n, "s": s},
    )


_COMMUTATOR_CASES = ("low", "critical", "high", "positive")


def _commutator_rhs(v: SpectralField, f: SpectralField, sigma: float, case: str) -> float:
    d = v.grid.dim
    crit = 1.0 + d / 2.0
    if case == "low":
        if not sigma < crit:
            raise ValueError(f"case 'low' needs sigma < {crit}, got {sigma}")
        grad_norm = max(_grad_hs(v, d / 2.0), _grad_linf(v))
        return grad_norm * hs_norm(f, sigma)
    if case == "critical":
        if abs(sigma - crit) > 1e-9:
            raise ValueError(f"case 'critical' needs sigma = {crit}, got {sigma}")
        return _grad_hs(v, d / 2.0 + 1.0) * hs_norm(f, sigma)
    if case == "high":
        if not sigma > crit:
            raise ValueError(f"case 'high' needs sigma > {crit}, got {sigma}")
        return _grad_hs(v, sigma - 1.0) * hs_norm(f, sigma)
    if case == "positive":
        if not sigma > 0:
            raise ValueError(f"case 'positive' needs sigma > 0, got {sigma}")
        return _grad_linf(v) * hs_norm(f, sigma) + _grad_linf(f) * _grad_hs(v, sigma - 1.0)
    raise ValueError(f"unknown case {case!r}, expected one of {_COMMUTATOR_CASES}")


def commutator_lhs(v: SpectralField, f: SpectralField, sigma: float,
                   layout: LpLayout | None = None) -> float:
    """l2-over-shells norm (sum_j (2^(j sigma) ||R_j||_L2)^2)^(1/2)."""
    layout = layout or build_layout(f.grid)
    series = advection_commutator_series(v, f, layout)
    total = 0.0
    for j, rj in series.items():
        l2 = f.grid.norm_factor * float(np.linalg.norm(rj.coeffs))
        total += (2.0 ** (j * sigma) * l2) ** 2
    return float(np.sqrt(total))


def verify_commutator_estimate(v: SpectralField, f: SpectralField, sigma: float,
                               case: str, headroom: float = float("inf"),
                               layout: LpLayout | None = None) -> InequalityReport:
    """Ratio check of the advection-commutator bound for one (v, f) pair."""
    rhs = _commutator_rhs(v, f, sigma, case)
    lhs = commutator_lhs(v, f, sigma, layout)
    ratio = 0.0 if lhs == 0.0 else lhs / rhs
    return InequalityReport(
        name=f"commutator_{case}",
        samples=[0],
        lhs_series=[lhs],
        rhs_series=[rhs],
        fitted_constant=ratio,
        headroom=headroom,
        metadata={"d": v.grid.dim, "n": v.grid.n, "sigma": sigma, "case": case},
    )


def sweep_product_estimate(grid: Grid, s: float, n_seeds: int, kband: int = 16,
                           sigma_decay: float = 0.4, seed0: int = 1000,
                           headroom: float = float("inf")) -> InequalityReport:
    """Seeded sweep of the product estimate; fitted C = 1.1 * max ratio."""
    samples, lhs_s, rhs_s = [], [], []
    for i in range(n_seeds):
        f = random_band_field(grid, kband, sigma_decay, seed0 + 2 * i, components=1)
        g = random_band_field(grid, kband, sigma_decay, seed0 + 2 * i + 1, components=1)
        rep = verify_product_estimate(f, g, s)
        samples.append(i)
        lhs_s.append(rep.lhs_series[0])
        rhs_s.append(rep.rhs_series[0])
    ratios = [l / r for l, r in zip(lhs_s, rhs_s)]
    return InequalityReport(
        name="product_hs_sweep",
        samples=samples,
        lhs_series=lhs_s,
        rhs_series=rhs_s,
        fitted_constant=1.1 * max(ratios),
        headroom=headroom,
        metadata={"d": grid.dim, "n": grid.n, "s": s, "seeds": n_seeds,
                  "kband": kband, "sigma_decay": sigma_decay, "seed0": seed0},
    )


def sweep_commutator_estimate(grid: Grid, sigma: float, case: str, n_seeds: int,
                              kband: int = 16, sigma_decay: float = 0.4,
                              seed0: int = 2000,
                              headroom: float = float("inf")) -> InequalityReport:
    """Seeded sweep of the commutator bound for one sigma-case."""
    layout = build_layout(grid)
    samples, lhs_s, rhs_s = [], [], []
    for i in range(n_seeds):
        v = random_band_field(grid, kband, sigma_decay, seed0 + 2 * i,
                              components=3, divergence_free=True)
        f = random_band_field(grid, kband, sigma_decay, seed0 + 2 * i + 1, components=1)
        rhs = _commutator_rhs(v, f, sigma, case)
        lhs = commutator_lhs(v, f, sigma, layout)
        samples.append(i)
        lhs_s.append(lhs)
        rhs_s.append(rhs)
    ratios = [l / r for l, r in zip(lhs_s, rhs_s)]
    return InequalityReport(
        name=f"commutator_{case}_sweep",
        samples=samples,
        lhs_series=lhs_s,
        rhs_series=rhs_s,
        fitted_constant=1.1 * max(ratios),
        headroom=headroom,
        metadata={"d": grid.dim, "n": grid.n, "sigma": sigma, "case": case,
                  "seeds": n_seeds, "kband": kband, "sigma_decay": sigma_decay,
                  "seed0": seed0},
    )
