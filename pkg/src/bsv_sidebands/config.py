"""
Flat key=value run configuration.

One text format feeds every subcommand: `key = value` lines, '#' comments,
SI units throughout (radians, volts, ohms, hertz; photon numbers are
dimensionless).  Every run writes its fully resolved configuration next to
its outputs so results can be reproduced byte-for-byte.
"""

from __future__ import annotations

from pathlib import Path

from .model import ModelParams
from .pipeline import DetectorCalibration, SimulatorConfig
from .serialize import format_float

# every known key with its default; grouped by the consumer
DEFAULTS: dict[str, object] = {
    # analytic model
    "squeeze_r": 13.357729566475987,  # asinh(sqrt(1e11)): bright-perturbation regime
    "squeeze_phi": 0.0,
    "eps1_amp": 1.0,
    "eps1_theta": 0.0,
    "eps2_amp": 1.0,
    "eps2_theta": 0.0,
    "gamma_t": 7.853981633974483e-06,  # pi / 4e5: weak-conversion regime
    # detector calibration
    "adc_range_volts": 20.0,
    "adc_levels": 4096,
    "boxcar_sens": 0.02,
    "input_impedance_ohms": 1.0e6,
    "pmt_gain": 1.0e7,
    "rep_rate_hz": 1.0e3,
    "quantum_efficiency": 0.5,
    # simulator
    "n_shots": 30000,
    "seed": 12345,
    "pump_mean": 1000.0,
    "pump_jitter": 0.05,
    "pump_tail_fraction": 0.02,
    "pump_tail_scale": 0.7,
    "bsv_mean_photons": 5.0e10,
    "bsv_modes": 1.6,
    "sideband_efficiency": 2.0e-10,
    "harmonic_means": "200.0",
    "harmonic_pump_exponent": 5.0,
    "pmt_source": "sideband",
    "harmonic_index": 0,
    "bsv_monitor_gain": 2.0e-8,
    "bsv_monitor_offset": 0.0,
    "mir_monitor_gain": 1.0,
    "mir_monitor_offset": 0.0,
    # scan grid
    "phi_min": -3.141592653589793,
    "phi_max": 3.141592653589793,
    "phi_points": 201,
    "dtheta_min": -3.141592653589793,
    "dtheta_max": 3.141592653589793,
    "dtheta_points": 201,
    # analysis
    "n_blocks": 20,
    "band_fraction": 0.2,
    "postselect": True,
    "hist_bins": 60,
}


class ConfigError(ValueError):
    pass


def parse_kv_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config(path: str | Path | None) -> dict[str, str]:
    if path is None:
        return {}
    path = Path(path)
    return parse_kv_text(path.read_text(), source=str(path))


def _get(cfg: dict[str, str], key: str):
    return cfg.get(key, DEFAULTS[key])


def get_float(cfg: dict[str, str], key: str) -> float:
    try:
        return float(_get(cfg, key))
    except ValueError:
        raise ConfigError(f"key {key!r}: expected a number, got {_get(cfg, key)!r}")


def get_int(cfg: dict[str, str], key: str) -> int:
    try:
        return int(float(_get(cfg, key)))
    except ValueError:
        raise ConfigError(f"key {key!r}: expected an integer, got {_get(cfg, key)!r}")


def get_str(cfg: dict[str, str], key: str) -> str:
    return str(_get(cfg, key))


def get_bool(cfg: dict[str, str], key: str) -> bool:
    val = _get(cfg, key)
    if isinstance(val, bool):
        return val
    text = str(val).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {val!r}")


def get_float_list(cfg: dict[str, str], key: str) -> tuple[float, ...]:
    raw = str(_get(cfg, key))
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"key {key!r}: expected comma-separated numbers, got {raw!r}")


def model_params_from(cfg: dict[str, str]) -> ModelParams:
    return ModelParams.from_values(
        r=get_float(cfg, "squeeze_r"),
        phi=get_float(cfg, "squeeze_phi"),
        amp1=get_float(cfg, "eps1_amp"),
        theta1=get_float(cfg, "eps1_theta"),
        amp2=get_float(cfg, "eps2_amp"),
        theta2=get_float(cfg, "eps2_theta"),
        gamma_t=get_float(cfg, "gamma_t"),
    )


def calibration_from(cfg: dict[str, str]) -> DetectorCalibration:
    return DetectorCalibration(
        adc_range_volts=get_float(cfg, "adc_range_volts"),
        adc_levels=get_int(cfg, "adc_levels"),
        boxcar_sens=get_float(cfg, "boxcar_sens"),
        input_impedance_ohms=get_float(cfg, "input_impedance_ohms"),
        pmt_gain=get_float(cfg, "pmt_gain"),
        rep_rate_hz=get_float(cfg, "rep_rate_hz"),
        quantum_efficiency=get_float(cfg, "quantum_efficiency"),
    )


def simulator_from(cfg: dict[str, str], seed: int | None = None) -> SimulatorConfig:
    return SimulatorConfig(
        n_shots=get_int(cfg, "n_shots"),
        seed=get_int(cfg, "seed") if seed is None else seed,
        pump_mean=get_float(cfg, "pump_mean"),
        pump_jitter=get_float(cfg, "pump_jitter"),
        pump_tail_fraction=get_float(cfg, "pump_tail_fraction"),
        pump_tail_scale=get_float(cfg, "pump_tail_scale"),
        bsv_mean_photons=get_float(cfg, "bsv_mean_photons"),
        bsv_modes=get_float(cfg, "bsv_modes"),
        sideband_efficiency=get_float(cfg, "sideband_efficiency"),
        harmonic_means=get_float_list(cfg, "harmonic_means"),
        harmonic_pump_exponent=get_float(cfg, "harmonic_pump_exponent"),
        pmt_source=get_str(cfg, "pmt_source"),
        harmonic_index=get_int(cfg, "harmonic_index"),
        bsv_monitor_gain=get_float(cfg, "bsv_monitor_gain"),
        bsv_monitor_offset=get_float(cfg, "bsv_monitor_offset"),
        mir_monitor_gain=get_float(cfg, "mir_monitor_gain"),
        mir_monitor_offset=get_float(cfg, "mir_monitor_offset"),
    )


def grid_axes_from(cfg: dict[str, str]):
    import numpy as np

    phi_points = get_int(cfg, "phi_points")
    dtheta_points = get_int(cfg, "dtheta_points")
    phi_lo, phi_hi = get_float(cfg, "phi_min"), get_float(cfg, "phi_max")
    dt_lo, dt_hi = get_float(cfg, "dtheta_min"), get_float(cfg, "dtheta_max")
    if phi_points < 1 or dtheta_points < 1:
        raise ConfigError("grid needs at least one point per axis")
    if (phi_points > 1 and phi_hi <= phi_lo) or (dtheta_points > 1 and dt_hi <= dt_lo):
        raise ConfigError("grid axis bounds must satisfy min < max")
    return (
        np.linspace(phi_lo, phi_hi, phi_points),
        np.linspace(dt_lo, dt_hi, dtheta_points),
    )


def resolve(cfg: dict[str, str]) -> dict[str, str]:
    """Full key set with every value in canonical text form."""
    out = {}
    for key, default in DEFAULTS.items():
        raw = cfg.get(key, default)
        if isinstance(raw, bool):
            text = "true" if raw else "false"
        elif isinstance(raw, float):
            text = format_float(raw)
        else:
            text = str(raw)
        out[key] = text
    return out


def resolved_text(cfg: dict[str, str]) -> str:
    lines = [f"{key} = {value}" for key, value in sorted(resolve(cfg).items())]
    return "\n".join(lines) + "\n"


def write_resolved(cfg: dict[str, str], outdir: str | Path) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "resolved_config.cfg"
    path.write_text(resolved_text(cfg))
    return path
