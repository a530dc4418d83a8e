"""Configuration energies, quasi-Fekete checks and equidistribution rates.

The central quantity is the pair-energy sum  sum over x != y of Phi(x, y)
for the Hsia kernel Phi of the good potential.  Periodic configurations keep
this sum within +-C N log N, and their averages against Lipschitz
observables approach the equilibrium integral at rate (n / d^n)^(1/2).
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynatomic import Configuration, dynatomic_degree, periodic_points
from .equilibrium import (EnergyBoundInputs, MeasureSampler, Observable,
                          discrepancy_bound, get_observable, integrate,
                          sample_mu)
from .geometry import RationalMapLift, lift_array, spherical_dist_matrix
from .potential import GreenEvaluator, holder_seminorm_estimate


def thread_budget() -> int:
    env = os.environ.get("FEKETE_DYN_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return min(8, os.cpu_count() or 1)


@dataclass
class EnergyReport:
    """Summary of the pair-energy structure of one configuration."""

    config_size: int
    pair_energy_sum: float
    quasi_fekete_constant: float
    baker_ratio: float
    min_pair_distance: float
    flags: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "config_size": self.config_size,
            "pair_energy_sum": self.pair_energy_sum,
            "quasi_fekete_constant": self.quasi_fekete_constant,
            "baker_ratio": self.baker_ratio,
            "min_pair_distance": self.min_pair_distance,
            "flags": list(self.flags),
        }


def config_energy(ev: GreenEvaluator, config: Configuration) -> EnergyReport:
    """Multiplicity-weighted ordered pair-energy sum and derived ratios."""
    N = config.size
    if N < 2:
        raise ValueError("need at least two points (with multiplicity)")
    from .potential import hsia_matrix
    Z = lift_array(config.points)
    mult = np.asarray(config.multiplicities, dtype=float)
    Phi = hsia_matrix(ev, Z)
    D = spherical_dist_matrix(Z, Z)
    np.fill_diagonal(D, np.inf)
    mind = float(D.min()) if len(config.points) > 1 else math.inf
    flags = list(config.flags)
    if np.any(mult > 1):
        # a repeated point contributes Phi(x, x) = -inf to the ordered sum
        if "coincident_points" not in flags:
            flags.append("coincident_points")
        total = -math.inf
        mind = 0.0
    else:
        off = ~np.eye(len(config.points), dtype=bool)
        total = float(np.sum((mult[:, None] * mult[None, :] * Phi)[off]))
    nlogn = N * math.log(N)
    ratio = total / nlogn if nlogn > 0 else math.nan
    return EnergyReport(
        config_size=N,
        pair_energy_sum=total,
        quasi_fekete_constant=max(0.0, -ratio) if math.isfinite(ratio) else math.inf,
        baker_ratio=ratio,
        min_pair_distance=mind,
        flags=flags)


def check_quasi_fekete(report: EnergyReport, C: float) -> bool:
    N = report.config_size
    return report.pair_energy_sum >= -C * N * math.log(N)


def baker_check(ev: GreenEvaluator, config: Configuration) -> dict:
    """Pair-energy sum against the N log N shape of the height bound."""
    rep = config_energy(ev, config)
    N = rep.config_size
    return {"lhs": rep.pair_energy_sum,
            "rhs_shape": N * math.log(N),
            "ratio": rep.baker_ratio}


@dataclass
class SamplerConfig:
    """Monte-Carlo settings shared by the rate experiments."""

    seed: int = 0
    samples: int = 20000
    burn_in: int = 60
    alpha: float = 1.0
    holder_samples: int = 4000
    normalization: str = "dn"      # "dn" (= #roots) or "dpow" (= d^n)


@dataclass
class RateRow:
    """One period's worth of discrepancy data for one observable."""

    n: int
    d_n: int
    observable: str
    discrepancy: float
    mc_stderr: float
    bound_theorem_A: float
    bound_prop: float
    ratio: float
    energy: float
    quasi_C: float
    flags: list = field(default_factory=list)

    def as_csv_row(self) -> list:
        return [self.n, self.d_n, self.observable,
                repr(self.discrepancy), repr(self.mc_stderr),
                repr(self.bound_theorem_A), repr(self.bound_prop),
                repr(self.ratio), repr(self.energy), repr(self.quasi_C)]


CSV_COLUMNS = ["n", "d_n", "observable", "discrepancy", "stderr",
               "bound_A", "bound_prop", "ratio", "energy", "quasi_C"]


def _config_average(config: Configuration, obs: Observable,
                    normalization: str) -> float:
    vals = np.asarray(obs(config.points), dtype=float)
    mult = np.asarray(config.multiplicities, dtype=float)
    total = float(np.sum(vals * mult))
    if normalization == "dpow":
        # the root count d_n can sit below d^n; both normalizations reported
        raise ValueError("dpow normalization needs the map degree; "
                         "use discrepancy()")
    return total / config.size


def discrepancy(F: RationalMapLift, n: int, obs: Observable,
                cfg: SamplerConfig, ev: GreenEvaluator | None = None,
                mu_samples=None, holder: float | None = None,
                periodic=None) -> RateRow:
    """Average of an observable over Per_n minus its equilibrium integral."""
    ev = GreenEvaluator.make(F) if ev is None else ev
    per = periodic_points(F, n, tol=1e-12) if periodic is None else periodic
    if mu_samples is None:
        sampler = MeasureSampler(map=F, burn_in=cfg.burn_in,
                                 seed=cfg.seed + 7919 * n)
        mu_samples = sample_mu(sampler, cfg.samples)
    mu_est, stderr = integrate(obs, mu_samples)

    vals = np.asarray(obs(per.points), dtype=float)
    mult = np.asarray(per.multiplicities, dtype=float)
    d = F.degree
    denom = float(d ** n) if cfg.normalization == "dpow" else float(per.size)
    per_avg = float(np.sum(vals * mult)) / denom
    disc = abs(per_avg - mu_est)

    bound_a = math.sqrt(n / d ** n)
    energy = config_energy(ev, per)
    if n >= 2 and math.isfinite(energy.pair_energy_sum):
        h = (holder_seminorm_estimate(ev, cfg.alpha, cfg.holder_samples,
                                      cfg.seed)
             if holder is None else holder)
        inputs = EnergyBoundInputs(n=per.size,
                                   pair_energy_sum=energy.pair_energy_sum,
                                   alpha=cfg.alpha, holder_seminorm=h)
        bound_p = discrepancy_bound(inputs, obs.lip)
    else:
        bound_p = math.inf
    return RateRow(n=n, d_n=dynatomic_degree(d, n), observable=obs.name,
                   discrepancy=disc, mc_stderr=stderr,
                   bound_theorem_A=bound_a, bound_prop=bound_p,
                   ratio=disc / bound_a, energy=energy.pair_energy_sum,
                   quasi_C=energy.quasi_fekete_constant,
                   flags=list(per.flags))


@dataclass
class RateTable:
    rows: list
    fitted_C: dict            # observable name -> geometric-mean constant
    max_ratio: float
    failures: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in sorted(self.rows, key=lambda r: (r.n, r.observable)):
            w.writerow(row.as_csv_row())
        return buf.getvalue()


def rate_table(F: RationalMapLift, n_max: int, observables: list,
               cfg: SamplerConfig, ev: GreenEvaluator | None = None) -> RateTable:
    """Rows for n = 1..n_max; constants fitted on the n >= 3 rows."""
    ev = GreenEvaluator.make(F) if ev is None else ev
    obs_list = [get_observable(o, ev) if isinstance(o, str) else o
                for o in observables]
    holder = holder_seminorm_estimate(ev, cfg.alpha, cfg.holder_samples,
                                      cfg.seed)

    def one_period(n: int):
        # per-row derived seed keeps rows independent and deterministic
        sampler = MeasureSampler(map=F, burn_in=cfg.burn_in,
                                 seed=cfg.seed + 7919 * n)
        mu_samples = sample_mu(sampler, cfg.samples)
        per = periodic_points(F, n, tol=1e-12)
        return [discrepancy(F, n, obs, cfg, ev=ev, mu_samples=mu_samples,
                            holder=holder, periodic=per)
                for obs in obs_list]

    rows, failures = [], []
    with ThreadPoolExecutor(max_workers=thread_budget()) as pool:
        futures = {pool.submit(one_period, n): n for n in range(1, n_max + 1)}
        for fut, n in futures.items():
            try:
                rows.extend(fut.result())
            except Exception as exc:     # partial-row reporting by contract
                failures.append({"n": n, "error": f"{type(exc).__name__}: {exc}"})

    fitted = {}
    for obs in obs_list:
        logs = [math.log(r.discrepancy / r.bound_theorem_A)
                for r in rows
                if r.observable == obs.name and r.n >= 3 and r.discrepancy > 0]
        fitted[obs.name] = math.exp(sum(logs) / len(logs)) if logs else 0.0
    ratios = [r.ratio for r in rows if r.n >= 3 and math.isfinite(r.ratio)]
    return RateTable(rows=rows, fitted_C=fitted,
                     max_ratio=max(ratios) if ratios else math.nan,
                     failures=failures)
