"""Command-line surface.

Subcommands map 1:1 onto solver/harness operations:

    simulate      run one trajectory, write snapshots + diagnostics
    lp-analyze    dyadic-layout diagnostics (partition, Bernstein, coercivity)
    verify-lemmas seeded sweeps of the product/commutator estimates
    energy-check  dyadic energy budget terms + growth-bound report
    diff-check    lockstep pair, difference-bound reports
    cont-dep      continuous-dependence experiment report
    report        render JSON reports as tables + plot-ready CSV

Exit codes: 0 success, 2 usage/validation, 3 instability abort,
4 inequality-suite failure.  Every output directory receives a manifest
(written last, so its presence marks a completed run) with content hashes
of all emitted files.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import platform
import sys
import time

import numpy as np

from . import __version__, harness, lp
from .config import ConfigError, canonical_text, load_config
from .kernels import active_lane
from .reports import (
    DEPENDENCE_SCHEMA,
    INEQUALITY_SCHEMA,
    atomic_write_text,
    load_report,
)
from .snapshots import write_snapshot
from .solver import BlowUpError, simulate
from .spectral import make_grid

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNSTABLE = 3
EXIT_SUITE_FAILED = 4


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(x) -> str:
    return format(float(x), ".17g")


class _Run:
    """Tracks emitted files and writes the manifest last."""

    def __init__(self, outdir: str, command: str, config_text: str | None = None):
        self.outdir = outdir
        self.command = command
        self.config_text = config_text
        self.t0 = time.time()
        os.makedirs(outdir, exist_ok=True)
        self.files: list[str] = []

    def path(self, name: str) -> str:
        self.files.append(name)
        return os.path.join(self.outdir, name)

    def finish(self) -> None:
        manifest = {
            "schema": "hallmhd.manifest/1",
            "version": __version__,
            "command": self.command,
            "config_text": self.config_text,
            "config_hash": (
                hashlib.sha256(self.config_text.encode()).hexdigest()
                if self.config_text
                else None
            ),
            "platform": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "machine": platform.machine(),
                "system": platform.system(),
                "kernel_lane": active_lane(),
            },
            "files": {name: _sha256(os.path.join(self.outdir, name)) for name in self.files},
            "wall_s": time.time() - self.t0,
        }
        atomic_write_text(os.path.join(self.outdir, "manifest.json"),
                          json.dumps(manifest, indent=2))


def _write_diag_csv(path: str, diag: dict) -> None:
    keys = list(diag)
    rows = len(diag[keys[0]])
    lines = [",".join(keys)]
    for i in range(rows):
        lines.append(",".join(_fmt(diag[k][i]) for k in keys))
    atomic_write_text(path, "\n".join(lines) + "\n")


# ============================================================
# Subcommands
# ============================================================


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.set)
    run = _Run(args.out, "simulate", canonical_text(cfg))
    traj = simulate(cfg)
    for st, step_idx in zip(traj.states, traj.state_steps):
        write_snapshot(run.path(f"snap_{step_idx:06d}.hmhd"), st, cfg.alpha, cfg.s)
    _write_diag_csv(run.path("diagnostics.csv"), traj.diag)
    run.finish()
    print(f"simulate: {len(traj.times) - 1} steps, dt={traj.dt:.6g}, "
          f"{len(traj.states)} snapshots -> {args.out}")
    return EXIT_OK


def _cmd_lp_analyze(args) -> int:
    grid = make_grid(args.dim, args.n)
    layout = lp.build_layout(grid)
    run = _Run(args.out, "lp-analyze")
    radius = np.sqrt(grid.k_sq)
    shells = []
    for j in layout.active_shells:
        mask = layout.block_mask(j)
        supp = mask > 0
        rmin = float(radius[supp].min()) if supp.any() else math.nan
        rmax = float(radius[supp].max()) if supp.any() else math.nan
        row = {
            "j": j,
            "modes": int(np.count_nonzero(supp)),
            "support_min": rmin,
            "support_max": rmax,
        }
        if j >= 0:
            row["bernstein_lo"] = lp.RING_LOWER * 2.0**j
            row["bernstein_hi"] = lp.RING_UPPER * 2.0**j
            mult = grid.k_sq**args.alpha
            ratios = mult[supp] / (4.0 ** (j * args.alpha))
            row["coercivity_measured"] = float(ratios.min())
            row["coercivity_c0"] = lp.RING_LOWER ** (2.0 * args.alpha)
        shells.append(row)
    payload = {
        "schema": "hallmhd.lp_layout/1",
        "dim": grid.dim,
        "n": grid.n,
        "alpha": args.alpha,
        "jmax": layout.jmax,
        "partition_defect": layout.partition_defect(),
        "shells": shells,
    }
    atomic_write_text(run.path("lp_layout.json"), json.dumps(payload, indent=2))
    keys = ["j", "modes", "support_min", "support_max", "bernstein_lo",
            "bernstein_hi", "coercivity_measured", "coercivity_c0"]
    lines = [",".join(keys)]
    for row in shells:
        lines.append(",".join(str(row.get(k, "")) for k in keys))
    atomic_write_text(run.path("lp_layout.csv"), "\n".join(lines) + "\n")
    run.finish()
    print(f"lp-analyze: jmax={layout.jmax}, partition defect "
          f"{payload['partition_defect']:.3e} -> {args.out}")
    return EXIT_OK


def _default_sigmas(s: float, d: int) -> dict:
    return {
        "low": s - 1.0,
        "critical": 1.0 + d / 2.0,
        "high": s,
        "positive": s - 1.0,
    }


def _cmd_verify_lemmas(args) -> int:
    grid = make_grid(args.dim, args.n)
    run = _Run(args.out, "verify-lemmas")
    reports = []
    if args.suite in ("product", "both"):
        reports.append(lp.sweep_product_estimate(
            grid, args.s, args.seeds, kband=args.kband,
            sigma_decay=args.sigma_decay, headroom=args.headroom))
    if args.suite in ("commutator", "both"):
        for case, sigma in _default_sigmas(args.s, args.dim).items():
            reports.append(lp.sweep_commutator_estimate(
                grid, sigma, case, args.seeds, kband=args.kband,
                sigma_decay=args.sigma_decay, headroom=args.headroom))
    failed = False
    for rep in reports:
        rep.write_json(run.path(f"{rep.name}.json"))
        rep.write_csv(run.path(f"{rep.name}.csv"))
        ok = rep.passed and math.isfinite(rep.fitted_constant)
        failed = failed or not ok
        print(f"{rep.name}: max ratio {max(rep.ratios):.6g}, "
              f"fitted C {rep.fitted_constant:.6g} [{'ok' if ok else 'FAIL'}]")
    run.finish()
    return EXIT_SUITE_FAILED if failed else EXIT_OK


def _cmd_energy_check(args) -> int:
    cfg = load_config(args.config, args.set)
    if cfg.snapshot_stride != 1:
        cfg = dataclasses.replace(cfg, snapshot_stride=1)
    run = _Run(args.out, "energy-check", canonical_text(cfg))
    traj = simulate(cfg)
    layout = lp.build_layout(traj.grid)
    failed = False
    for j in args.j:
        terms = harness.energy_terms(traj, j, layout)
        residual, _, _ = harness.budget_residual(
            terms["times"], terms["block_energy"], terms["block_dissipation"],
            terms["I1"] + terms["I2"] + terms["I3"] + terms["I4"] + terms["I5"],
            traj.dt)
        keys = ["times", "block_energy", "block_dissipation", "I1", "I2", "I3", "I4", "I5"]
        _write_diag_csv(run.path(f"energy_terms_j{j}.csv"), {k: terms[k] for k in keys})
        print(f"shell j={j}: max budget residual {residual.max():.3e}")
    rep = harness.verify_apriori_bound(traj, headroom=args.headroom)
    rep.write_json(run.path("apriori_hs_growth.json"))
    rep.write_csv(run.path("apriori_hs_growth.csv"))
    ok = rep.passed and math.isfinite(rep.fitted_constant)
    failed = failed or not ok
    print(f"apriori growth: fitted C {rep.fitted_constant:.6g} [{'ok' if ok else 'FAIL'}]")
    run.finish()
    return EXIT_SUITE_FAILED if failed else EXIT_OK


def _cmd_diff_check(args) -> int:
    cfg = load_config(args.config, args.set)
    run = _Run(args.out, "diff-check", canonical_text(cfg))
    grid = make_grid(cfg.dim, cfg.n)
    from .solver import initial_data
    from .spectral import MhdState, SpectralField

    st1 = initial_data(cfg.initial, grid)
    w_u, w_b = harness.perturbation_pair(grid, cfg.s, args.perturb_seed,
                                         kband=args.perturb_kband,
                                         sigma_decay=args.perturb_sigma)
    st2 = MhdState(
        SpectralField(grid, st1.u.coeffs + args.eps * w_u.coeffs),
        SpectralField(grid, st1.b.coeffs + args.eps * w_b.coeffs),
        0.0,
    )
    tr1, tr2, delta = harness.run_lockstep_pair(cfg, cfg, initial_states=(st1, st2))
    rep1, rep2 = harness.verify_difference_bounds(tr1, tr2, delta=delta,
                                                  headroom=args.headroom)
    failed = False
    for rep in (rep1, rep2):
        rep.write_json(run.path(f"{rep.name}.json"))
        rep.write_csv(run.path(f"{rep.name}.csv"))
        ok = rep.passed and math.isfinite(rep.fitted_constant)
        failed = failed or not ok
        print(f"{rep.name}: fitted C {rep.fitted_constant:.6g} [{'ok' if ok else 'FAIL'}]")
    _write_diag_csv(run.path("delta_norms.csv"),
                    {"t": delta.times, "delta_hs_sq": delta.hs_sq,
                     "delta_hsm1_sq": delta.hsm1_sq})
    run.finish()
    return EXIT_SUITE_FAILED if failed else EXIT_OK


def _cmd_cont_dep(args) -> int:
    cfg = load_config(args.config, args.set)
    run = _Run(args.out, "cont-dep", canonical_text(cfg))
    rep = harness.continuous_dependence_experiment(
        cfg, args.eps, args.j, perturb_seed=args.perturb_seed)
    rep.write_json(run.path("dependence.json"))
    rep.write_csv(run.path("dependence.csv"))
    run.finish()
    print(f"cont-dep: T={rep.t_end:.6g}, slopes Hs {rep.slope_hs:.3f} / "
          f"Hs-1 {rep.slope_hsm1:.3f}, fitted C {rep.fitted_constant:.6g}")
    return EXIT_OK


def _cmd_report(args) -> int:
    count = 0
    for name in sorted(os.listdir(args.indir)):
        if not name.endswith(".json"):
            continue
        path = os.path.join(args.indir, name)
        try:
            with open(path) as fh:
                schema = json.load(fh).get("schema")
        except (json.JSONDecodeError, OSError):
            continue
        if schema not in (INEQUALITY_SCHEMA, DEPENDENCE_SCHEMA):
            continue
        rep = load_report(path)
        count += 1
        csv_path = path[:-5] + ".csv"
        if not os.path.exists(csv_path) or args.force:
            rep.write_csv(csv_path)
        print(f"== {name}")
        if schema == INEQUALITY_SCHEMA:
            print(f"   {rep.name}: {len(rep.samples)} samples, "
                  f"fitted C = {rep.fitted_constant:.6g}, "
                  f"max ratio = {max(rep.ratios) if rep.ratios else 0:.6g}, "
                  f"passed = {rep.passed}")
        else:
            print(f"   dependence: T = {rep.t_end:.6g}, fitted C = {rep.fitted_constant:.6g}")
            print(f"   {'eps':>12} {'sup err Hs':>14} {'sup err Hs-1':>14} {'best j':>7}")
            for eps, ehs, ehsm1 in zip(rep.eps_list, rep.sup_errors_hs, rep.sup_errors_hsm1):
                print(f"   {eps:12.3e} {ehs:14.6e} {ehsm1:14.6e} "
                      f"{rep.best_j[repr(eps)]:>7}")
    print(f"report: rendered {count} report(s) from {args.indir}")
    return EXIT_OK


# ============================================================
# Parser
# ============================================================


def _float_list(text: str) -> list:
    return [float(p) for p in text.split(",") if p]


def _int_list(text: str) -> list:
    return [int(p) for p in text.split(",") if p]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hallmhd", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_config_opts(sp):
        sp.add_argument("--config", required=True, help="config file path")
        sp.add_argument("--set", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="override a config key")
        sp.add_argument("--out", required=True, help="output directory")

    sp = sub.add_parser("simulate", help="run one trajectory")
    add_config_opts(sp)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("lp-analyze", help="dyadic layout diagnostics")
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_lp_analyze)

    sp = sub.add_parser("verify-lemmas", help="product/commutator estimate sweeps")
    sp.add_argument("--suite", choices=("product", "commutator", "both"), default="both")
    sp.add_argument("--seeds", type=int, default=50)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--n", type=int, default=64)
    sp.add_argument("--s", type=float, default=2.5)
    sp.add_argument("--kband", type=int, default=16)
    sp.add_argument("--sigma-decay", type=float, default=0.4)
    sp.add_argument("--headroom", type=float, default=float("inf"))
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_verify_lemmas)

    sp = sub.add_parser("energy-check", help="dyadic energy budget + growth bound")
    add_config_opts(sp)
    sp.add_argument("--j", type=_int_list, default=[0, 2, 4],
                    help="comma-separated shell indices")
    sp.add_argument("--headroom", type=float, default=float("inf"))
    sp.set_defaults(func=_cmd_energy_check)

    sp = sub.add_parser("diff-check", help="difference-bound reports for a pair")
    add_config_opts(sp)
    sp.add_argument("--eps", type=float, default=1e-3)
    sp.add_argument("--perturb-seed", type=int, default=777)
    sp.add_argument("--perturb-kband", type=int, default=3)
    sp.add_argument("--perturb-sigma", type=float, default=0.3)
    sp.add_argument("--headroom", type=float, default=float("inf"))
    sp.set_defaults(func=_cmd_diff_check)

    sp = sub.add_parser("cont-dep", help="continuous-dependence experiment")
    add_config_opts(sp)
    sp.add_argument("--eps", type=_float_list, default=[1e-2, 1e-3, 1e-4],
                    help="comma-separated perturbation amplitudes")
    sp.add_argument("--j", type=_int_list, default=[2, 3, 4, 5],
                    help="comma-separated low-pass indices")
    sp.add_argument("--perturb-seed", type=int, default=777)
    sp.set_defaults(func=_cmd_cont_dep)

    sp = sub.add_parser("report", help="render JSON reports")
    sp.add_argument("--in", dest="indir", required=True)
    sp.add_argument("--force", action="store_true", help="rewrite CSVs")
    sp.set_defaults(func=_cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BlowUpError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
