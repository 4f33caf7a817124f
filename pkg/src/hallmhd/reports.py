"""Report records for inequality checks and the dependence experiment.

Reports serialize to JSON (schema-tagged) and to flat CSV, one row per
sample (time sample, seed, or (eps, j) cell).  All floats survive a
write/read round trip exactly: CSV uses 17 significant digits and JSON uses
shortest round-trip representation.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

INEQUALITY_SCHEMA = "hallmhd.inequality/1"
DEPENDENCE_SCHEMA = "hallmhd.dependence/1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_float(x: float):
    """Non-finite floats become strings; strict JSON has no Infinity/NaN."""
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _from_json_float(x) -> float:
    return float(x)


def atomic_write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


@dataclass
class InequalityReport:
    """Left/right series of one target inequality plus the fitted constant.

    ``fitted_constant`` is the smallest C with lhs <= C * rhs at every
    sample (for sweep reports: the max observed ratio plus 10% headroom).
    ``passed`` is fitted_constant <= headroom.
    """

    name: str
    samples: list = field(default_factory=list)
    lhs_series: list = field(default_factory=list)
    rhs_series: list = field(default_factory=list)
    fitted_constant: float = 0.0
    headroom: float = float("inf")
    passed: bool = True
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.samples) == len(self.lhs_series) == len(self.rhs_series)):
            raise ValueError("samples, lhs_series and rhs_series must align")
        if self.fitted_constant < 0:
            raise ValueError("fitted_constant must be >= 0")
        self.passed = bool(self.fitted_constant <= self.headroom)

    @property
    def ratios(self) -> list:
        out = []
        for lhs, rhs in zip(self.lhs_series, self.rhs_series):
            if lhs == 0.0:
                out.append(0.0)
            elif rhs == 0.0:
                out.append(float("inf"))
            else:
                out.append(lhs / rhs)
        return out

    def to_json_dict(self) -> dict:
        return {
            "schema": INEQUALITY_SCHEMA,
            "name": self.name,
            "samples": list(self.samples),
            "lhs_series": list(self.lhs_series),
            "rhs_series": list(self.rhs_series),
            "fitted_constant": _json_float(self.fitted_constant),
            "headroom": _json_float(self.headroom),
            "passed": self.passed,
            "metadata": self.metadata,
        }

    def write_json(self, path: str) -> None:
        atomic_write_text(path, json.dumps(self.to_json_dict(), indent=2))

    def write_csv(self, path: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sample", "lhs", "rhs", "ratio"])
            for s, lhs, rhs, r in zip(
                self.samples, self.lhs_series, self.rhs_series, self.ratios
            ):
                w.writerow([s, _fmt(lhs), _fmt(rhs), _fmt(r)])
        os.replace(tmp, path)

    @classmethod
    def from_json_dict(cls, d: dict) -> "InequalityReport":
        if d.get("schema") != INEQUALITY_SCHEMA:
            raise ValueError(f"not an inequality report: {d.get('schema')!r}")
        return cls(
            name=d["name"],
            samples=d["samples"],
            lhs_series=d["lhs_series"],
            rhs_series=d["rhs_series"],
            fitted_constant=_from_json_float(d["fitted_constant"]),
            headroom=_from_json_float(d["headroom"]),
            metadata=d.get("metadata", {}),
        )


@dataclass
class DependenceReport:
    """Continuous-dependence experiment record.

    One row per perturbation amplitude (sup errors over [0, T]), one row per
    low-pass index j (spectral tails of the data), and one row per (eps, j)
    cell (triangle pieces and the combined bound).
    """

    eps_list: list
    sup_errors_hs: list
    sup_errors_hsm1: list
    slope_hs: float
    slope_hsm1: float
    tails: list            # rows: {j, tail_u_hs, tail_b_hs, tail_u_hsm1, tail_b_hsm1}
    combined: list         # rows: {eps, j, bound, measured_sq, piece_*}
    best_j: dict           # eps (as str) -> j minimizing the bound
    fitted_constant: float
    t_end: float
    aborted: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(b >= a for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        if not self.aborted:
            self.aborted = [False] * len(self.eps_list)

    def to_json_dict(self) -> dict:
        return {
            "schema": DEPENDENCE_SCHEMA,
            "eps_list": list(self.eps_list),
            "sup_errors_hs": list(self.sup_errors_hs),
            "sup_errors_hsm1": list(self.sup_errors_hsm1),
            "slope_hs": self.slope_hs,
            "slope_hsm1": self.slope_hsm1,
            "tails": self.tails,
            "combined": self.combined,
            "best_j": self.best_j,
            "fitted_constant": _json_float(self.fitted_constant),
            "t_end": self.t_end,
            "aborted": list(self.aborted),
            "metadata": self.metadata,
        }

    def write_json(self, path: str) -> None:
        atomic_write_text(path, json.dumps(self.to_json_dict(), indent=2))

    def write_csv(self, path: str) -> None:
        """Long-format CSV: kind in {eps, tail, combined}."""
        tmp = path + ".tmp"
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "eps", "j", "value_a", "value_b", "value_c", "value_d"])
            for eps, ehs, ehsm1, ab in zip(
                self.eps_list, self.sup_errors_hs, self.sup_errors_hsm1, self.aborted
            ):
                w.writerow(["eps", _fmt(eps), "", _fmt(ehs), _fmt(ehsm1), int(ab), ""])
            for row in self.tails:
                w.writerow([
                    "tail", "", row["j"], _fmt(row["tail_u_hs"]), _fmt(row["tail_b_hs"]),
                    _fmt(row["tail_u_hsm1"]), _fmt(row["tail_b_hsm1"]),
                ])
            for row in self.combined:
                w.writerow([
                    "combined", _fmt(row["eps"]), row["j"], _fmt(row["bound"]),
                    _fmt(row["measured_sq"]), _fmt(row["piece_moll_pair"]),
                    _fmt(row["piece_moll_base"]),
                ])
        os.replace(tmp, path)

    @classmethod
    def from_json_dict(cls, d: dict) -> "DependenceReport":
        if d.get("schema") != DEPENDENCE_SCHEMA:
            raise ValueError(f"not a dependence report: {d.get('schema')!r}")
        return cls(
            eps_list=d["eps_list"],
            sup_errors_hs=d["sup_errors_hs"],
            sup_errors_hsm1=d["sup_errors_hsm1"],
            slope_hs=d["slope_hs"],
            slope_hsm1=d["slope_hsm1"],
            tails=d["tails"],
            combined=d["combined"],
            best_j=d["best_j"],
            fitted_constant=_from_json_float(d["fitted_constant"]),
            t_end=d["t_end"],
            aborted=d["aborted"],
            metadata=d.get("metadata", {}),
        )


def load_report(path: str):
    with open(path) as fh:
        d = json.load(fh)
    schema = d.get("schema")
    if schema == INEQUALITY_SCHEMA:
        return InequalityReport.from_json_dict(d)
    if schema == DEPENDENCE_SCHEMA:
        return DependenceReport.from_json_dict(d)
    raise ValueError(f"unknown report schema {schema!r} in {path}")
