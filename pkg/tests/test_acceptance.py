"""Acceptance suite: every exit criterion at its stated tolerance.

Each criterion prints one PASS line when it completes (visible with
pytest -s or in the captured output of a failing run).  Desk scale
throughout: d=2 (2.5-d fields), n in {64, 128}, T <= 0.5, alpha in
{1, 1.25}, s = 2.5.
"""

import math

import numpy as np
import pytest

import hallmhd.harness as hh
from hallmhd.lp import (
    RING_LOWER,
    RING_UPPER,
    SobolevSpec,
    build_layout,
    lp_block,
    sobolev_norm,
    sweep_commutator_estimate,
    sweep_product_estimate,
)
from hallmhd.snapshots import read_snapshot, write_snapshot
from hallmhd.solver import InitialData, SimConfig, initial_data, simulate
from hallmhd.spectral import (
    MhdState,
    SpectralField,
    curl,
    dealias,
    fractional_laplacian,
    hall_term,
    inner_product,
    l2_norm,
    leray_project,
    make_grid,
    parseval_ratio,
    random_band_field,
)

S = 2.5

# the data family used by the Gronwall and budget suites: energetic enough
# that the H^s norms genuinely grow on [0, 0.5] (the growth bounds are
# vacuous on purely decaying trajectories), band-rich enough to self-average
# across seeds
GRONWALL_INIT = dict(recipe="random_band", u_amplitude=0.75, b_amplitude=0.11,
                     kband=7, sigma_decay=0.25)
PERTURB = dict(kband=3, sigma_decay=0.3)


def _ok(name: str):
    print(f"ACCEPTANCE {name}: PASS")


def _gronwall_cfg(seed: int, n: int = 64, t_end: float = 0.5) -> SimConfig:
    return SimConfig(dim=2, n=n, alpha=1.0, s=S, t_end=t_end, dt="auto",
                     snapshot_stride=10**9,
                     initial=InitialData(seed=seed, **GRONWALL_INIT))


# ============================================================
# 1. Spectral-core oracle suite (< 10 s)
# ============================================================


def test_criterion_1_spectral_core():
    g = make_grid(2, 64)
    x, y = g.coordinates()

    samples = np.cos(x) + 0.3 * np.sin(2 * y) + 0.05 * np.cos(3 * x + 5 * y)
    assert abs(parseval_ratio(g, samples) - 1.0) <= 1e-12

    v = random_band_field(g, 12, 0.3, seed=101, components=3)
    pv = leray_project(v)
    ppv = leray_project(pv)
    assert np.max(np.abs(ppv.coeffs - pv.coeffs)) <= 1e-14 * np.max(np.abs(pv.coeffs))
    rem = SpectralField(g, v.coeffs - pv.coeffs)
    assert abs(inner_product(rem, pv)) <= 1e-12 * l2_norm(v) ** 2

    for kmode, alpha, factor in (((1, 0), 1.0, 1.0), ((2, 0), 1.5, 8.0)):
        coeffs = np.zeros((1,) + g.shape, dtype=complex)
        coeffs[0, kmode[0], kmode[1]] = 0.5
        coeffs[0, -kmode[0], -kmode[1]] = 0.5
        mode = SpectralField(g, coeffs)
        out = fractional_laplacian(mode, alpha)
        assert np.max(np.abs(out.coeffs - factor * coeffs)) <= 1e-12 * factor

    b = dealias(random_band_field(g, 12, 0.3, seed=102, components=3,
                                  divergence_free=True))
    h = hall_term(b)
    assert abs(inner_product(h, b)) <= 1e-10 * l2_norm(h) * l2_norm(b)
    _ok("1 spectral-core oracles")


# ============================================================
# 2. Littlewood-Paley suite (< 30 s)
# ============================================================


def test_criterion_2_lp_suite():
    g = make_grid(2, 64)
    layout = build_layout(g)
    assert layout.partition_defect() <= 1e-12

    f = random_band_field(g, 18, 0.1, seed=103, components=1)
    for j in layout.active_shells:
        for jp in layout.active_shells:
            if abs(j - jp) >= 2:
                twice = lp_block(lp_block(f, j, layout), jp, layout)
                assert np.max(np.abs(twice.coeffs)) <= 1e-13

    radius = np.sqrt(g.k_sq)
    for j in layout.active_shells:
        if j < 0:
            continue
        block = lp_block(f, j, layout)
        norm = l2_norm(block)
        if norm < 1e-12:
            continue
        grad = g.norm_factor * math.sqrt(float(np.sum(g.k_sq * np.abs(block.coeffs) ** 2)))
        assert RING_LOWER * 2.0**j <= grad / norm <= RING_UPPER * 2.0**j

    for alpha in (1.0, 1.25):
        c0 = RING_LOWER ** (2.0 * alpha)
        for j in layout.active_shells:
            if j < 0:
                continue
            supp = layout.phi_masks[j] > 0
            mask_min = float((g.k_sq[supp] ** alpha / 4.0 ** (j * alpha)).min())
            assert mask_min >= c0 - 1e-12
            block = lp_block(f, j, layout)
            num = inner_product(fractional_laplacian(block, alpha), block)
            den = l2_norm(block) ** 2
            if den > 1e-20:
                assert num >= (c0 - 1e-12) * 4.0 ** (j * alpha) * den

    ratios = []
    for seed in range(50):
        h = random_band_field(g, 16, 0.3, seed=5000 + seed, components=1)
        ratios.append(sobolev_norm(h, SobolevSpec(S, "blocks"), layout)
                      / sobolev_norm(h, SobolevSpec(S, "weight"), layout))
    ratios = np.array(ratios)
    assert np.all((ratios > 0.25) & (ratios < 4.0))
    assert ratios.max() / ratios.min() < 1.5
    _ok("2 littlewood-paley suite")


# ============================================================
# 3. Solver physics suite (< 5 min)
# ============================================================


def test_criterion_3_energy_law_and_divergence():
    cfg = SimConfig(dim=2, n=64, alpha=1.0, s=S, t_end=0.5, dt="auto",
                    snapshot_stride=10**9,
                    initial=InitialData(recipe="random_band", seed=11,
                                        u_amplitude=0.5, b_amplitude=0.2))
    tr = simulate(cfg)
    e, q = tr.diag["energy"], tr.diag["diss_integral"]
    assert np.max(np.abs(e + q - e[0])) <= 1e-6 * e[0]
    assert tr.diag["div_u_rel"].max() <= 1e-10
    assert tr.diag["div_b_rel"].max() <= 1e-10
    _ok("3a energy law + divergence drift")


def test_criterion_3_euler_reduction():
    cfg = SimConfig(dim=2, n=64, alpha=1.0, s=S, t_end=1.0, dt=2e-3,
                    snapshot_stride=25,
                    initial=InitialData(recipe="orszag_tang_like",
                                        u_amplitude=1.0, b_amplitude=0.0))
    tr = simulate(cfg)
    e = tr.diag["energy"]
    assert np.max(np.abs(e - e[0])) <= 1e-7 * e[0]
    enstrophy = [l2_norm(curl(st.u)) ** 2 for st in tr.states]
    z0 = enstrophy[0]
    assert max(abs(z - z0) for z in enstrophy) <= 1e-7 * z0
    _ok("3b euler reduction conserves energy + enstrophy")


def test_criterion_3_linearized_decay():
    g = make_grid(2, 64)
    alpha = 1.25
    rate_exact = 5.0**alpha  # k = (2, 1)
    errs = {}
    for amp in (1e-3, 1e-5):
        st = initial_data(InitialData(recipe="single_mode", u_amplitude=0.0,
                                      b_amplitude=amp, k=(2, 1)), g)
        cfg = SimConfig(dim=2, n=64, alpha=alpha, s=S, t_end=0.02, dt=1e-3,
                        snapshot_stride=10**9)
        tr = simulate(cfg, initial_state=st)
        c0 = st.b.coeffs[2, 2, 1]
        c1 = tr.final_state.b.coeffs[2, 2, 1]
        rate = -math.log(abs(c1 / c0)) / cfg.t_end
        errs[amp] = abs(rate / rate_exact - 1.0)
    assert errs[1e-3] <= 1e-2
    assert errs[1e-5] <= 1e-4
    _ok("3c linearized decay rate |k|^2a, error O(|b0|)")


def test_criterion_3_temporal_order():
    init = InitialData(recipe="random_band", seed=13, u_amplitude=0.6,
                       b_amplitude=0.15, kband=5, sigma_decay=0.4)
    finals = []
    for dt in (4e-3, 2e-3, 1e-3):
        cfg = SimConfig(dim=2, n=64, alpha=1.0, s=S, t_end=0.08, dt=dt,
                        snapshot_stride=10**9, initial=init)
        tr = simulate(cfg)
        finals.append(np.concatenate([tr.final_state.u.coeffs.ravel(),
                                      tr.final_state.b.coeffs.ravel()]))
    order = math.log2(np.linalg.norm(finals[0] - finals[1])
                      / np.linalg.norm(finals[1] - finals[2]))
    assert order >= 3.5
    _ok(f"3d temporal self-convergence order {order:.2f} >= 3.5")


# ============================================================
# 4. Budget-identity suite (< 5 min)
# ============================================================


def test_criterion_4_budget_identities():
    shells = (0, 2, 3)
    seeds = (4, 5, 6)
    worst_order = float("inf")
    for seed in seeds:
        init = InitialData(seed=seed, **GRONWALL_INIT)
        residuals = {}
        for dt in (1e-3, 5e-4):
            cfg = SimConfig(dim=2, n=64, alpha=1.0, s=S, t_end=0.048, dt=dt,
                            snapshot_stride=1, initial=init)
            tr = simulate(cfg)
            for j in shells:
                res, _, scale = hh.energy_budget_residual(tr, j)
                residuals[(dt, j)] = (res.max(), scale)
        for j in shells:
            coarse, scale = residuals[(1e-3, j)]
            fine, _ = residuals[(5e-4, j)]
            if coarse <= 1e-9 * scale:   # already at the rounding floor
                continue
            order = math.log2(coarse / fine)
            worst_order = min(worst_order, order)
            assert order >= 3.2, (seed, j, order)
    _ok(f"4a I-term budgets are O(dt^4): worst order {worst_order:.2f}")

    worst_order = float("inf")
    g = make_grid(2, 64)
    w_u, w_b = hh.perturbation_pair(g, S, seed=314, **PERTURB)
    for seed in seeds:
        init = InitialData(seed=seed, **GRONWALL_INIT)
        st1 = initial_data(init, g)
        st2 = MhdState(SpectralField(g, st1.u.coeffs + 1e-2 * w_u.coeffs),
                       SpectralField(g, st1.b.coeffs + 1e-2 * w_b.coeffs), 0.0)
        residuals = {}
        for dt in (1e-3, 5e-4):
            cfg = SimConfig(dim=2, n=64, alpha=1.0, s=S, t_end=0.048, dt=dt,
                            snapshot_stride=1, initial=init)
            tr1 = simulate(cfg, initial_state=st1)
            tr2 = simulate(cfg, initial_state=st2)
            for j in shells:
                res, _, scale = hh.difference_budget_residual(tr1, tr2, j)
                residuals[(dt, j)] = (res.max(), scale)
        for j in shells:
            coarse, scale = residuals[(1e-3, j)]
            fine, _ = residuals[(5e-4, j)]
            if coarse <= 1e-9 * scale:   # already at the rounding floor
                continue
            order = math.log2(coarse / fine)
            worst_order = min(worst_order, order)
            assert order >= 3.2, (seed, j, order)
    _ok(f"4b J-term budgets are O(dt^4): worst order {worst_order:.2f}")


# ============================================================
# 5. Estimate sweeps (< 3 min)
# ============================================================


def test_criterion_5_estimate_sweeps():
    cases = {"low": S - 1.0, "critical": 2.0, "high": S, "positive": S - 1.0}
    maxima = {}
    for n in (64, 128):
        g = make_grid(2, n)
        rep = sweep_product_estimate(g, S, 50, kband=16, sigma_decay=0.4)
        assert math.isfinite(rep.fitted_constant)
        maxima[("product", n)] = max(rep.ratios)
        for case, sigma in cases.items():
            rep = sweep_commutator_estimate(g, sigma, case, 50, kband=16,
                                            sigma_decay=0.4)
            assert math.isfinite(rep.fitted_constant)
            maxima[(case, n)] = max(rep.ratios)
    for key in ("product", *cases):
        r64, r128 = maxima[(key, 64)], maxima[(key, 128)]
        drift = abs(r128 / r64 - 1.0)
        assert drift <= 0.20, (key, r64, r128)
    _ok("5 estimate sweep maxima finite, move <= 20% from n=64 to n=128")


# ============================================================
# 6. Gronwall suites (< 15 min)
# ============================================================


@pytest.fixture(scope="module")
def gronwall_runs():
    g = make_grid(2, 64)
    w_u, w_b = hh.perturbation_pair(g, S, seed=777, **PERTURB)
    out = {"apriori": [], "d1": [], "d2": []}
    for seed in range(1, 11):
        cfg = _gronwall_cfg(seed)
        st1 = initial_data(cfg.initial, g)
        tr = simulate(cfg, initial_state=st1)
        out["apriori"].append(hh.verify_apriori_bound(tr).fitted_constant)
        st2 = MhdState(SpectralField(g, st1.u.coeffs + 1e-3 * w_u.coeffs),
                       SpectralField(g, st1.b.coeffs + 1e-3 * w_b.coeffs), 0.0)
        tr1, tr2, delta = hh.run_lockstep_pair(cfg, cfg, initial_states=(st1, st2))
        r1, r2 = hh.verify_difference_bounds(tr1, tr2, delta=delta)
        out["d1"].append(r1.fitted_constant)
        out["d2"].append(r2.fitted_constant)
    return out


def test_criterion_6_seed_stability(gronwall_runs):
    for name, values in gronwall_runs.items():
        arr = np.array(values)
        assert np.all(np.isfinite(arr)) and np.all(arr > 0), (name, values)
        spread = arr.max() / arr.min()
        assert spread <= 2.0, (name, spread)
    _ok("6a fitted constants stable within factor 2 across 10 seeds")


def test_criterion_6_resolution_stability(gronwall_runs):
    for seed in (1, 2):
        idx = seed - 1
        g = make_grid(2, 128)
        cfg = _gronwall_cfg(seed, n=128)
        st1 = initial_data(cfg.initial, g)
        tr = simulate(cfg, initial_state=st1)
        c_ap = hh.verify_apriori_bound(tr).fitted_constant
        w_u, w_b = hh.perturbation_pair(g, S, seed=777, **PERTURB)
        st2 = MhdState(SpectralField(g, st1.u.coeffs + 1e-3 * w_u.coeffs),
                       SpectralField(g, st1.b.coeffs + 1e-3 * w_b.coeffs), 0.0)
        tr1, tr2, delta = hh.run_lockstep_pair(cfg, cfg, initial_states=(st1, st2))
        r1, r2 = hh.verify_difference_bounds(tr1, tr2, delta=delta)
        for name, c128 in (("apriori", c_ap), ("d1", r1.fitted_constant),
                           ("d2", r2.fitted_constant)):
            c64 = gronwall_runs[name][idx]
            ratio = max(c128, c64) / min(c128, c64)
            assert ratio <= 2.0, (name, seed, c64, c128)
    _ok("6b fitted constants stable within factor 2 from n=64 to n=128")


@pytest.fixture(scope="module")
def dependence_report():
    cfg = SimConfig(dim=2, n=64, alpha=1.0, s=S, t_end=0.25, dt="auto",
                    snapshot_stride=10**9,
                    initial=InitialData(recipe="random_band", seed=21,
                                        u_amplitude=0.5, b_amplitude=0.15,
                                        kband=20, sigma_decay=0.55))
    return hh.continuous_dependence_experiment(cfg, [1e-2, 1e-3, 1e-4],
                                               [2, 3, 4, 5], perturb_seed=777)


def test_criterion_6_perturbation_slope(dependence_report):
    rep = dependence_report
    assert abs(rep.slope_hsm1 - 1.0) <= 0.2
    _ok(f"6c H^(s-1) perturbation slope {rep.slope_hsm1:.4f} = 1 +- 0.2")


# ============================================================
# 7. Desk-scale continuous dependence (< 20 min)
# ============================================================


def test_criterion_7_dependence(dependence_report):
    rep = dependence_report
    assert not any(rep.aborted)
    sup = rep.sup_errors_hs
    assert sup[0] > sup[1] > sup[2] > 0.0
    tails = [row["tail_u_hs"] + row["tail_b_hs"] for row in rep.tails]
    assert all(tails[i] > tails[i + 1] for i in range(len(tails) - 1))
    assert math.isfinite(rep.fitted_constant) and rep.fitted_constant > 0
    for i, eps in enumerate(rep.eps_list):
        jbest = rep.best_j[repr(eps)]
        row = next(r for r in rep.combined
                   if r["eps"] == eps and r["j"] == jbest)
        assert row["measured_sq"] <= rep.fitted_constant * row["bound"] * (1 + 1e-12)
    _ok("7 sup errors decrease along eps, tails decrease in j, "
        "error dominated by fitted-C x combined bound")


def test_criterion_7_uniform_family_bound():
    trajs = []
    g = make_grid(2, 64)
    base_cfg = _gronwall_cfg(3, t_end=0.25)
    base = initial_data(base_cfg.initial, g)
    w_u, w_b = hh.perturbation_pair(g, S, seed=777, **PERTURB)
    for nexp in range(0, 9):
        eps = 2.0**-nexp
        st = MhdState(SpectralField(g, base.u.coeffs + eps * 0.05 * w_u.coeffs),
                      SpectralField(g, base.b.coeffs + eps * 0.05 * w_b.coeffs), 0.0)
        trajs.append(simulate(base_cfg, initial_state=st))
    rep = hh.uniform_bound_check(trajs)
    assert math.isfinite(rep.fitted_constant)
    assert max(rep.ratios) <= rep.fitted_constant * (1 + 1e-12)
    _ok(f"7b one fitted constant {rep.fitted_constant:.3f} covers the "
        "2^-n family")


def test_criterion_7_mollified_growth():
    cfg = SimConfig(dim=2, n=64, alpha=1.0, s=S, t_end=0.1, dt="auto",
                    snapshot_stride=10**9,
                    initial=InitialData(recipe="random_band", seed=21,
                                        u_amplitude=0.5, b_amplitude=0.15,
                                        kband=20, sigma_decay=0.55))
    rep = hh.verify_mollified_growth(cfg, [2, 3, 4])
    assert math.isfinite(rep.fitted_constant)
    growth = rep.metadata["data_growth_over_4j"]
    assert all(math.isfinite(v) for v in growth)
    assert max(growth) <= 10.0 * max(min(growth), 1e-30)
    _ok("7c H^(s+1) persistence of low-passed data, growth <= C 4^j")


# ============================================================
# 8. Reproducibility (bitwise)
# ============================================================


def test_criterion_8_reproducibility(tmp_path):
    cfg = _gronwall_cfg(5, t_end=0.05)
    tr1 = simulate(cfg)
    tr2 = simulate(cfg)
    np.testing.assert_array_equal(tr1.final_state.u.coeffs, tr2.final_state.u.coeffs)
    np.testing.assert_array_equal(tr1.final_state.b.coeffs, tr2.final_state.b.coeffs)
    for key in tr1.diag:
        np.testing.assert_array_equal(tr1.diag[key], tr2.diag[key])

    rep1 = hh.verify_apriori_bound(tr1)
    rep2 = hh.verify_apriori_bound(tr2)
    assert rep1.to_json_dict() == rep2.to_json_dict()

    path = str(tmp_path / "state.hmhd")
    write_snapshot(path, tr1.final_state, cfg.alpha, cfg.s)
    state, meta = read_snapshot(path)
    path2 = str(tmp_path / "state2.hmhd")
    write_snapshot(path2, state, **meta)
    assert open(path, "rb").read() == open(path2, "rb").read()

    small = SimConfig(dim=2, n=32, alpha=1.0, s=S, t_end=0.04, dt="auto",
                      snapshot_stride=10**9,
                      initial=InitialData(recipe="random_band", seed=9,
                                          u_amplitude=0.4, b_amplitude=0.1,
                                          kband=6, sigma_decay=0.5))
    repa = hh.continuous_dependence_experiment(small, [1e-2, 1e-3], [1, 2],
                                               perturb_seed=5)
    repb = hh.continuous_dependence_experiment(small, [1e-2, 1e-3], [1, 2],
                                               perturb_seed=5)
    assert repa.to_json_dict() == repb.to_json_dict()
    _ok("8 bit-identical trajectories, reports, and snapshot round trips")
