"""
Photon-counting estimators and seeded Monte Carlo samplers.

The single-detector second-order correlation is estimated as
g2 = <n^2>/<n>^2 - 1/<n> over shot-resolved counts, with uncertainties from
the scatter of contiguous blocks.  Samplers cover Poisson, thermal and
squeezed-vacuum counting statistics plus the Gamma bright limit used for
macroscopic squeezed-vacuum pulse energies; all of them are pure functions
of (parameters, seed).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .fock import squeezed_photon_distribution


@dataclass(frozen=True)
class ShotSeries:
    """Per-shot nonnegative values (photons/shot or pulse energy)."""

    values: np.ndarray
    label: str = ""
    seed: int | None = None

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("a shot series needs at least 2 scalar shots")
        if np.any(vals < 0):
            raise ValueError("shot values must be nonnegative")

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class G2Estimate:
    value: float
    stderr: float
    n_shots: int
    n_blocks: int

    def __post_init__(self) -> None:
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "n_shots": self.n_shots,
            "n_blocks": self.n_blocks,
        }


def _values(series) -> np.ndarray:
    return series.values if isinstance(series, ShotSeries) else np.asarray(series, float)


def g2_single_detector(series) -> float:
    """g2(0) = <n^2>/<n>^2 - 1/<n> with sample means over shots."""
    vals = _values(series)
    mean = vals.mean()
    if mean <= 0.0:
        raise ValueError("g2 undefined for a zero-mean series")
    return float((vals**2).mean() / mean**2 - 1.0 / mean)


def block_g2(series, n_blocks: int = 20) -> tuple[np.ndarray, G2Estimate]:
    """Per-block g2 over contiguous equal blocks plus the pooled estimate.

    The tail remainder is dropped.  Blocks with zero mean are reported as NaN
    (missing) and excluded from the pooled value, whose stderr is the sample
    standard deviation of the valid blocks over sqrt(n_valid).
    """
    vals = _values(series)
    if n_blocks < 2:
        raise ValueError("need at least 2 blocks for a scatter-based error")
    block_size = vals.size // n_blocks
    if block_size < 1 or vals.size < 2 * n_blocks:
        raise ValueError(f"{vals.size} shots cannot fill {n_blocks} blocks")
    chunks = vals[: block_size * n_blocks].reshape(n_blocks, block_size)
    per_block = np.full(n_blocks, np.nan)
    for i, chunk in enumerate(chunks):
        mean = chunk.mean()
        if mean > 0.0:
            per_block[i] = (chunk**2).mean() / mean**2 - 1.0 / mean
    valid = per_block[~np.isnan(per_block)]
    if valid.size < 2:
        raise ValueError("fewer than 2 blocks have nonzero mean")
    pooled = G2Estimate(
        value=float(valid.mean()),
        stderr=float(valid.std(ddof=1) / math.sqrt(valid.size)),
        n_shots=int(block_size * valid.size),
        n_blocks=int(valid.size),
    )
    return per_block, pooled


def spawn_seeds(master: int, n: int) -> list[np.random.SeedSequence]:
    """Deterministic child seeds so parallel chunks are worker-count safe."""
    return np.random.SeedSequence(master).spawn(n)


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_poisson(mean: float, n_shots: int, seed) -> ShotSeries:
    """Coherent-light counting statistics."""
    if mean < 0:
        raise ValueError("mean must be >= 0")
    vals = _rng(seed).poisson(mean, size=n_shots).astype(float)
    return ShotSeries(values=vals, label="poisson", seed=_seed_int(seed))


def sample_thermal(mean: float, n_shots: int, seed) -> ShotSeries:
    """Single-mode thermal (Bose-Einstein) counting statistics, g2 = 2."""
    if mean <= 0:
        raise ValueError("mean must be > 0")
    # numpy geometric is supported on {1, 2, ...}
    vals = _rng(seed).geometric(1.0 / (1.0 + mean), size=n_shots) - 1.0
    return ShotSeries(values=vals.astype(float), label="thermal", seed=_seed_int(seed))


def sample_squeezed_vacuum_counts(
    r: float, modes: int, n_shots: int, seed
) -> ShotSeries:
    """Counts from `modes` independent squeezed-vacuum modes per shot.

    Each draw inverts the exact even-photon-number table (truncated below
    1e-12 leakage), so a single mode only ever produces even counts and
    g2 -> 3 + 1/sinh^2(r); summing modes pulls g2 toward 1 + 2/modes.
    """
    if r <= 0:
        raise ValueError("squeezing magnitude must be > 0")
    if modes < 1:
        raise ValueError("need at least one mode")
    values, probs = squeezed_photon_distribution(r, max_leakage=1e-12)
    cdf = np.cumsum(probs)
    cdf[-1] = max(cdf[-1], 1.0)  # guard the 1e-12 tail
    u = _rng(seed).random(size=(n_shots, modes))
    idx = np.searchsorted(cdf, u, side="right")
    vals = values[idx].sum(axis=1).astype(float)
    return ShotSeries(values=vals, label=f"squeezed_x{modes}", seed=_seed_int(seed))


def sample_bright_sv_energy(
    mean: float, modes: float, n_shots: int, seed
) -> ShotSeries:
    """Pulse energies of bright multimode squeezed vacuum (Gamma bright limit).

    Each mode contributes a chi-squared-with-one-degree energy, so `modes`
    need not be an integer: E ~ Gamma(k = modes/2) with g2 = 1 + 2/modes.
    Cross-checked against the exact discrete sampler at integer mode counts.
    """
    if mean <= 0 or modes <= 0:
        raise ValueError("mean and modes must be > 0")
    shape = modes / 2.0
    vals = _rng(seed).gamma(shape, scale=mean / shape, size=n_shots)
    return ShotSeries(values=vals, label=f"bsv_K{modes:g}", seed=_seed_int(seed))


def _seed_int(seed) -> int | None:
    return seed if isinstance(seed, int) else None


def effective_mode_count(g2: float, n_per_mode: float = math.inf) -> float:
    """Number of independent squeezed modes compatible with a measured g2.

    Inverts g2 = 1 + (2 + 1/n_per_mode)/K; the default bright limit drops
    the 1/n term.
    """
    if g2 <= 1.0:
        raise ValueError("multimode squeezed vacuum requires g2 > 1")
    excess = 2.0 if math.isinf(n_per_mode) else 2.0 + 1.0 / n_per_mode
    return excess / (g2 - 1.0)


def histogram(series, bins: int | float = 50) -> tuple[np.ndarray, np.ndarray]:
    """Left-closed right-open histogram covering every shot.

    bins: an integer bin count over the data range, or a float bin width
    anchored at integer multiples of the width.
    """
    vals = _values(series)
    lo, hi = float(vals.min()), float(vals.max())
    if isinstance(bins, (int, np.integer)):
        if bins < 1:
            raise ValueError("need at least one bin")
        if hi == lo:
            edges = np.array([lo, lo + 1.0])
        else:
            # stretch the top edge one ulp so the max lands inside
            edges = np.linspace(lo, np.nextafter(hi, np.inf), int(bins) + 1)
    else:
        width = float(bins)
        if width <= 0:
            raise ValueError("bin width must be > 0")
        first = math.floor(lo / width)
        last = math.floor(hi / width) + 1
        edges = width * np.arange(first, last + 1)
    counts = np.zeros(edges.size - 1, dtype=int)
    idx = np.searchsorted(edges, vals, side="right") - 1
    np.add.at(counts, idx, 1)
    return edges, counts


def histogram_to_csv(edges: np.ndarray, counts: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for left, right, count in zip(edges[:-1], edges[1:], counts):
            writer.writerow([repr(float(left)), repr(float(right)), int(count)])
