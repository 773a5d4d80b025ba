"""
Consistency sweeps shared by the command-line self check and the acceptance
test suite: closed-form observables against the brute-force Fock oracle, and
photon-counting estimators against seeded samplers with known statistics.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import fock, model, stats

ORACLE_SWEEP_SEED = 20260810
CALIBRATION_BASE_SEED = 424200


@dataclass
class SweepPoint:
    params: model.ModelParams
    rel_err: dict[str, float]
    cutoffs: tuple[int, int]
    leakage: float

    @property
    def worst(self) -> float:
        return max(self.rel_err.values())


@dataclass
class SweepResult:
    points: list[SweepPoint] = field(default_factory=list)
    runtime_s: float = 0.0

    @property
    def max_rel_err(self) -> float:
        return max(p.worst for p in self.points)

    @property
    def max_leakage(self) -> float:
        return max(p.leakage for p in self.points)

    def ok(self, tol: float = 1e-6) -> bool:
        return self.max_rel_err < tol


def _rel_err(a: complex, b: complex) -> float:
    scale = max(abs(a), abs(b))
    if scale < 1e-15:
        return 0.0
    return abs(a - b) / scale


def draw_sweep_params(
    n_points: int,
    seed: int = ORACLE_SWEEP_SEED,
    r_max: float = 2.0,
    gamma_t_range: tuple[float, float] = (0.05, 1.2),
) -> list[model.ModelParams]:
    """Seeded uniform draws over the oracle-validated parameter region."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_points):
        out.append(
            model.ModelParams.from_values(
                r=rng.uniform(0.0, r_max),
                phi=rng.uniform(-np.pi, np.pi),
                amp1=rng.uniform(0.0, 1.0),
                theta1=rng.uniform(-np.pi, np.pi),
                amp2=rng.uniform(0.0, 1.0),
                theta2=rng.uniform(-np.pi, np.pi),
                gamma_t=rng.uniform(*gamma_t_range),
            )
        )
    return out


def oracle_sweep(
    n_points: int = 200,
    seed: int = ORACLE_SWEEP_SEED,
    r_max: float = 2.0,
    target_leakage: float = 1e-8,
    max_total_dim: int = 3_000_000,
) -> SweepResult:
    """Compare analytic and Fock-oracle observables over a seeded sweep."""
    result = SweepResult()
    start = time.monotonic()
    for params in draw_sweep_params(n_points, seed=seed, r_max=r_max):
        obs = model.observables(params)
        oracle = fock.oracle_observables(
            params, target_leakage=target_leakage, max_total_dim=max_total_dim
        )
        rel = {
            "mean_n": _rel_err(obs.mean_n, oracle["mean_n"]),
            "var_x": _rel_err(obs.var_x, oracle["var_x"]),
            "var_p": _rel_err(obs.var_p, oracle["var_p"]),
            "a_sq": _rel_err(obs.a_sq, oracle["a_sq"]),
        }
        result.points.append(
            SweepPoint(
                params=params,
                rel_err=rel,
                cutoffs=(oracle["cutoff0"], oracle["cutoff_sb"]),
                leakage=max(oracle["leak0"], oracle["leak_sb"]),
            )
        )
    result.runtime_s = time.monotonic() - start
    return result


@dataclass
class CalibrationResult:
    label: str
    target: float
    covered: int
    n_seeds: int
    estimates: list[stats.G2Estimate]

    def ok(self, min_covered: int = 28) -> bool:
        return self.covered >= min_covered


def _calibration_samplers() -> dict[str, tuple[float, object]]:
    sv_r = float(np.arcsinh(np.sqrt(5.0)))  # <n> = 5 per mode
    return {
        "poisson": (1.0, lambda n, s: stats.sample_poisson(50.0, n, s)),
        "thermal": (2.0, lambda n, s: stats.sample_thermal(20.0, n, s)),
        "squeezed": (
            3.2,
            lambda n, s: stats.sample_squeezed_vacuum_counts(sv_r, 1, n, s),
        ),
    }


def estimator_calibration(
    n_seeds: int = 30,
    n_shots: int = 100_000,
    n_blocks: int = 20,
    base_seed: int = CALIBRATION_BASE_SEED,
) -> list[CalibrationResult]:
    """Pooled block g2 against the analytic value, over seeded repetitions.

    A repetition counts as covered when the target lies within three
    block-derived standard errors of the pooled estimate.
    """
    results = []
    for label, (target, sampler) in _calibration_samplers().items():
        covered = 0
        estimates = []
        for i in range(n_seeds):
            series = sampler(n_shots, base_seed + i)
            _, pooled = stats.block_g2(series, n_blocks)
            estimates.append(pooled)
            if abs(pooled.value - target) <= 3.0 * pooled.stderr:
                covered += 1
        results.append(
            CalibrationResult(
                label=label,
                target=target,
                covered=covered,
                n_seeds=n_seeds,
                estimates=estimates,
            )
        )
    return results
