"""Stochastic simulator and analysis toolkit for gated photon-coincidence counting.

The package simulates a heralded single-photon source alongside classical
reference sources (coherent, thermal, semiclassical wave), pushes the photons
through imperfect detectors, counts singles and coincidences in gated
windows, and estimates the normalized coincidence ratio alpha with its
uncertainty.  Closed-form expectations for every source model make the
simulated results checkable end to end.
"""

from .detectors import DetectorConfig, detect
from .errors import CoincSimError, ConfigError, DataFormatError, UndefinedEstimateError
from .estimators import (
    AlphaEstimate,
    OracleParams,
    alpha_estimate,
    expected_alpha_classical_wave,
    expected_alpha_independent,
    expected_alpha_pdc,
    expected_alpha_thermal_shared,
    sigma_separation,
    weighted_mean,
)
from .events import (
    Channel,
    Event,
    EventStream,
    SeedSpec,
    derive_seed,
    merge_streams,
    validate_stream,
)
from .gating import (
    CountSummary,
    Gate,
    GateList,
    GatePolicy,
    Histogram,
    count_gates,
    make_gates_from_trigger,
    make_gates_periodic,
    time_difference_histogram,
)
from .scenario import (
    PointResult,
    ScenarioConfig,
    ScenarioResult,
    SourceKind,
    default_detector,
    emit_results_csv,
    oracle_per_point,
    parse_config,
    run_scenario,
    serialize_config,
)
from .sources import (
    Arm,
    ArrivalStream,
    ClassicalWaveConfig,
    CoherentSourceConfig,
    IntensityLaw,
    PdcSourceConfig,
    ThermalMode,
    ThermalSourceConfig,
    gen_classical_wave_gates,
    gen_pdc_pairs,
    gen_poisson_arrivals,
    gen_thermal_arrivals,
    project_idler_path,
)
from .timetags import TimetagFormat, parse_timetag_file, write_timetag_file

__version__ = "0.1.0"
