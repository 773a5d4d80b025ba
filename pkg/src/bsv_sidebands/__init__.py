"""
Quantum-optical model and statistics toolkit for harmonic sidebands
perturbed by bright squeezed vacuum: closed-form Gaussian observables, a
truncated-Fock-space oracle, photon-counting estimators and samplers, a
shot-data pipeline with a synthetic experiment generator, and phase-map
scans with state classification.
"""

from .fock import (
    FockStateVec,
    TwoModeGenerator,
    build_generator,
    converge_cutoff,
    expectation,
    oracle_observables,
    propagate,
    squeezed_photon_distribution,
    squeezed_vacuum_vector,
)
from .model import (
    CouplingSet,
    HarmonicField,
    ModelParams,
    SidebandObservables,
    SqueezeParams,
    conversion_efficiency,
    derive_couplings,
    observables,
    quadrature_variances,
    sideband_mean_photons,
    sideband_moments,
)
from .pipeline import (
    ChannelReport,
    DetectorCalibration,
    ShotTable,
    SimulatorConfig,
    adu_to_photons,
    analyze_table,
    channel_report,
    ingest_shots,
    photons_to_adu,
    postselect_pump_band,
    simulate_experiment,
    write_shots_csv,
)
from .scan import (
    LineCut,
    MapGrid,
    SqueezingSeries,
    StateLabel,
    classify_state,
    line_cut,
    phase_map,
    squeezing_case,
)
from .stats import (
    G2Estimate,
    ShotSeries,
    block_g2,
    effective_mode_count,
    g2_single_detector,
    histogram,
    sample_bright_sv_energy,
    sample_poisson,
    sample_squeezed_vacuum_counts,
    sample_thermal,
)

__version__ = "0.1.0"
