"""
Shot-resolved data pipeline: CSV ingestion, detector calibration,
pump-band post-selection, per-channel statistics reports, and a synthetic
experiment generator with the same phenomenology as the real acquisition
(coherent pump monitor, heavy-tailed squeezed-vacuum monitor, a sideband
channel transduced from the squeezed energy, harmonic channels driven by
the pump alone).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import serialize
from .stats import (
    G2Estimate,
    ShotSeries,
    block_g2,
    histogram,
    sample_bright_sv_energy,
)

ELECTRON_CHARGE = 1.602176634e-19  # C

CSV_COLUMNS = ("shot_id", "pmt_adu", "bsv_monitor", "mir_monitor")


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class DetectorCalibration:
    """Boxcar-integrated PMT chain converting ADU to photons per shot."""

    adc_range_volts: float = 20.0
    adc_levels: int = 4096
    boxcar_sens: float = 0.02  # V_in / V_out
    input_impedance_ohms: float = 1.0e6
    pmt_gain: float = 1.0e7
    rep_rate_hz: float = 1.0e3
    quantum_efficiency: float = 0.5

    def __post_init__(self) -> None:
        for name in (
            "adc_range_volts",
            "adc_levels",
            "boxcar_sens",
            "input_impedance_ohms",
            "pmt_gain",
            "rep_rate_hz",
            "quantum_efficiency",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.quantum_efficiency > 1.0:
            raise ValueError("quantum_efficiency must lie in (0, 1]")

    @property
    def photons_per_adu(self) -> float:
        volts_per_adu = self.adc_range_volts / self.adc_levels
        charge_divisor = (
            self.input_impedance_ohms
            * ELECTRON_CHARGE
            * self.pmt_gain
            * self.rep_rate_hz
        )
        return volts_per_adu * self.boxcar_sens / charge_divisor / self.quantum_efficiency


def adu_to_photons(adu, cal: DetectorCalibration):
    """Average photons per shot from a boxcar ADU reading (linear map)."""
    return adu * cal.photons_per_adu


def photons_to_adu(photons, cal: DetectorCalibration):
    return photons / cal.photons_per_adu


@dataclass(frozen=True)
class ShotTable:
    """Simultaneous per-shot records of the three acquisition channels."""

    shot_id: np.ndarray
    pmt_adu: np.ndarray
    bsv_monitor: np.ndarray
    mir_monitor: np.ndarray
    pmt_photons: np.ndarray | None = None  # filled by calibrate()
    selected: np.ndarray | None = None  # filled by postselect_pump_band()
    n_malformed: int = 0

    def __post_init__(self) -> None:
        n = self.shot_id.size
        for name in ("pmt_adu", "bsv_monitor", "mir_monitor"):
            if getattr(self, name).size != n:
                raise ValueError("column lengths differ")
        if n > 1 and not np.all(np.diff(self.shot_id) > 0):
            raise PipelineError("shot_id must be strictly increasing")

    def __len__(self) -> int:
        return int(self.shot_id.size)

    def used_mask(self) -> np.ndarray:
        if self.selected is None:
            return np.ones(len(self), dtype=bool)
        return self.selected


def ingest_shots(path) -> ShotTable:
    """Parse a shot CSV, skipping (and counting) malformed rows.

    Missing columns are fatal; so is a malformed fraction above 1% (a single
    bad row is always tolerated).  The header must contain
    shot_id,pmt_adu,bsv_monitor,mir_monitor.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PipelineError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise PipelineError(f"{path}: missing columns: {', '.join(missing)}")
        idx = [header.index(c) for c in CSV_COLUMNS]

        rows = []
        n_malformed = 0
        for raw in reader:
            if not raw:
                continue
            try:
                vals = [float(raw[i]) for i in idx]
            except (ValueError, IndexError):
                n_malformed += 1
                continue
            if any(math.isnan(v) or math.isinf(v) for v in vals):
                n_malformed += 1
                continue
            rows.append(vals)

    n_data = len(rows) + n_malformed
    if len(rows) < 2:
        raise PipelineError(f"{path}: needs at least 2 well-formed rows")
    if n_malformed > 1 and n_malformed / n_data > 0.01:
        raise PipelineError(
            f"{path}: {n_malformed}/{n_data} malformed rows exceeds the 1% budget"
        )
    arr = np.asarray(rows, dtype=float)
    return ShotTable(
        shot_id=arr[:, 0].astype(np.int64),
        pmt_adu=arr[:, 1],
        bsv_monitor=arr[:, 2],
        mir_monitor=arr[:, 3],
        n_malformed=n_malformed,
    )


def write_shots_csv(table: ShotTable, path) -> None:
    """Emit the canonical CSV schema with round-trip-exact floats."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for sid, adu, bsv, mir in zip(
            table.shot_id, table.pmt_adu, table.bsv_monitor, table.mir_monitor
        ):
            writer.writerow(
                [
                    int(sid),
                    serialize.format_float(adu),
                    serialize.format_float(bsv),
                    serialize.format_float(mir),
                ]
            )


def calibrate(table: ShotTable, cal: DetectorCalibration) -> ShotTable:
    """Attach the derived photons column."""
    return replace(table, pmt_photons=adu_to_photons(table.pmt_adu, cal))


def postselect_pump_band(table: ShotTable, band_fraction: float = 0.2) -> ShotTable:
    """Flag shots whose pump monitor sits within +-band_fraction standard
    deviations of the mean.  Rows are flagged, never deleted, and the band is
    always computed from the full table, so re-application is idempotent."""
    if band_fraction < 0:
        raise ValueError("band_fraction must be >= 0")
    mir = table.mir_monitor
    mean = mir.mean()
    std = mir.std()
    selected = np.abs(mir - mean) <= band_fraction * std
    if not selected.any():
        raise PipelineError(
            f"post-selection band +-{band_fraction} sigma around {mean:.6g} "
            f"(sigma={std:.6g}) keeps no shots"
        )
    return replace(table, selected=selected)


@dataclass(frozen=True)
class ChannelReport:
    label: str
    mean_photons: float
    g2: G2Estimate
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    n_shots_used: int

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "mean_photons": self.mean_photons,
            "g2": self.g2.to_json_dict(),
            "histogram": {
                "edges": self.hist_edges,
                "counts": self.hist_counts.astype(int),
            },
            "n_shots_used": self.n_shots_used,
        }


def channel_report(
    table: ShotTable,
    channel: str,
    cal: DetectorCalibration,
    n_blocks: int = 20,
    bins: int = 60,
) -> ChannelReport:
    """Mean, block g2 and histogram of one channel over the flagged shots.

    The PMT channel is calibrated to photons per shot; the monitor channels
    stay in their recorded (arbitrary) units.
    """
    mask = table.used_mask()
    if not mask.any():
        raise PipelineError("no shots flagged for analysis")
    if channel == "pmt":
        values = adu_to_photons(table.pmt_adu[mask], cal)
    elif channel == "bsv":
        values = table.bsv_monitor[mask]
    elif channel == "mir":
        values = table.mir_monitor[mask]
    else:
        raise ValueError(f"unknown channel {channel!r}")
    series = ShotSeries(values=values, label=channel)
    _, pooled = block_g2(series, n_blocks)
    edges, counts = histogram(series, bins)
    return ChannelReport(
        label=channel,
        mean_photons=float(values.mean()),
        g2=pooled,
        hist_edges=edges,
        hist_counts=counts,
        n_shots_used=int(mask.sum()),
    )


@dataclass(frozen=True)
class SimulatorConfig:
    """Synthetic acquisition: all rates in photons/shot, monitors in volts
    through affine (gain, offset) maps."""

    n_shots: int = 30_000
    seed: int = 12345
    pump_mean: float = 1000.0
    pump_jitter: float = 0.05
    pump_tail_fraction: float = 0.02
    pump_tail_scale: float = 0.7
    bsv_mean_photons: float = 5.0e10
    bsv_modes: float = 1.6
    sideband_efficiency: float = 2.0e-10
    harmonic_means: tuple[float, ...] = (200.0,)
    harmonic_pump_exponent: float = 5.0
    pmt_source: str = "sideband"  # or "harmonic"
    harmonic_index: int = 0
    bsv_monitor_gain: float = 2.0e-8
    bsv_monitor_offset: float = 0.0
    mir_monitor_gain: float = 1.0
    mir_monitor_offset: float = 0.0

    def __post_init__(self) -> None:
        if self.n_shots < 2:
            raise ValueError("n_shots must be >= 2")
        if self.pmt_source not in ("sideband", "harmonic"):
            raise ValueError("pmt_source must be 'sideband' or 'harmonic'")
        if not 0 <= self.harmonic_index < len(self.harmonic_means):
            raise ValueError("harmonic_index out of range")
        if self.bsv_monitor_gain == 0 or self.mir_monitor_gain == 0:
            raise ValueError("monitor maps must be invertible (gain != 0)")


@dataclass(frozen=True)
class SimulatedShots:
    """Simulator output: the canonical table plus the hidden truth columns."""

    table: ShotTable
    pump_energy: np.ndarray
    bsv_energy: np.ndarray
    sideband_counts: np.ndarray
    harmonic_counts: np.ndarray = field(repr=False)


def simulate_experiment(
    cfg: SimulatorConfig, cal: DetectorCalibration | None = None
) -> SimulatedShots:
    """Draw a synthetic shot table.

    Per shot: pump energy with Gaussian jitter (plus an optional low-energy
    contaminant for post-selection to remove), squeezed-vacuum energy from
    the Gamma bright limit, sideband counts Poisson-transduced from the
    squeezed energy, and harmonic counts Poisson-driven by the pump alone.
    Channel draws use independently spawned child seeds, so the statistics
    are independent of evaluation order.
    """
    cal = cal or DetectorCalibration()
    n = cfg.n_shots
    seeds = np.random.SeedSequence(cfg.seed).spawn(4 + len(cfg.harmonic_means))
    rng_pump = np.random.Generator(np.random.PCG64(seeds[0]))
    rng_tail = np.random.Generator(np.random.PCG64(seeds[1]))
    rng_side = np.random.Generator(np.random.PCG64(seeds[2]))

    pump = cfg.pump_mean * (1.0 + cfg.pump_jitter * rng_pump.standard_normal(n))
    pump = np.maximum(pump, 1e-12 * cfg.pump_mean)
    if cfg.pump_tail_fraction > 0:
        tail = rng_tail.random(n) < cfg.pump_tail_fraction
        pump = np.where(tail, pump * cfg.pump_tail_scale, pump)

    bsv = sample_bright_sv_energy(
        cfg.bsv_mean_photons, cfg.bsv_modes, n, seeds[3]
    ).values
    sideband = rng_side.poisson(cfg.sideband_efficiency * bsv).astype(float)

    scaling = (pump / cfg.pump_mean) ** cfg.harmonic_pump_exponent
    harmonics = np.empty((len(cfg.harmonic_means), n))
    for k, mean in enumerate(cfg.harmonic_means):
        rng_h = np.random.Generator(np.random.PCG64(seeds[4 + k]))
        harmonics[k] = rng_h.poisson(mean * scaling).astype(float)

    if cfg.pmt_source == "sideband":
        pmt_counts = sideband
    else:
        pmt_counts = harmonics[cfg.harmonic_index]

    table = ShotTable(
        shot_id=np.arange(n, dtype=np.int64),
        pmt_adu=photons_to_adu(pmt_counts, cal),
        bsv_monitor=cfg.bsv_monitor_gain * bsv + cfg.bsv_monitor_offset,
        mir_monitor=cfg.mir_monitor_gain * pump + cfg.mir_monitor_offset,
    )
    return SimulatedShots(
        table=table,
        pump_energy=pump,
        bsv_energy=bsv,
        sideband_counts=sideband,
        harmonic_counts=harmonics,
    )


def analyze_table(
    table: ShotTable,
    cal: DetectorCalibration,
    n_blocks: int = 20,
    band_fraction: float = 0.2,
    postselect: bool = True,
    bins: int = 60,
) -> dict[str, ChannelReport]:
    """Full analysis pass: optional pump-band post-selection, then one report
    per channel."""
    work = postselect_pump_band(table, band_fraction) if postselect else table
    return {
        channel: channel_report(work, channel, cal, n_blocks=n_blocks, bins=bins)
        for channel in ("pmt", "bsv", "mir")
    }
