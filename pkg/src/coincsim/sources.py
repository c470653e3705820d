"""Photon-arrival models for the light sources being compared.

Four source models are implemented:

* ``pdc``: a parametric-downconversion pair source.  Signal photons go to the
  heralding arm; each idler is later projected onto exactly one of two output
  paths of a polarization splitter (:func:`project_idler_path`).  Because a
  single photon takes one path or the other, true coincidences between the two
  paths vanish and only accidentals remain.
* ``coherent``: two independent Poisson beams, one per splitter output.  The
  intensity carries no memory, so gated counting on the two outputs factorizes
  exactly.
* ``thermal``: either two independent arms (same second-order statistics as
  coherent under gated counting) or a single chaotic mode shared by both
  splitter outputs.  The shared mode is modelled as a doubly stochastic
  Poisson process whose intensity is resampled from an exponential law every
  coherence time, which bunches both outputs together and pushes the measured
  correlation above the factorized value.
* ``classical_wave``: a semiclassical per-gate intensity model in which each
  gate carries an intensity draw I and the two detectors fire independently
  with probabilities q*I and (1-q)*I.  For any intensity distribution this
  model obeys <I^2> >= <I>^2, i.e. its normalized coincidence ratio cannot
  drop below one; it is the classical benchmark the pair source is compared
  against.

Arrival streams produced here are "physical photons at detector inputs":
no efficiency, dark counts or electronics are applied yet (see
``coincsim.detectors``).

Homogeneous Poisson streams are generated by drawing the total count
N ~ Poisson(rate * duration) and then placing N points uniformly on the
observation interval, which is distributionally identical to accumulating
exponential waiting times but vectorizes cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .errors import ConfigError
from .events import derive_seed

__all__ = [
    "Arm",
    "ArrivalStream",
    "ClassicalWaveConfig",
    "CoherentSourceConfig",
    "IntensityLaw",
    "PdcSourceConfig",
    "ThermalMode",
    "ThermalSourceConfig",
    "gen_classical_wave_gates",
    "gen_pdc_pairs",
    "gen_poisson_arrivals",
    "gen_thermal_arrivals",
    "project_idler_path",
]


class Arm(IntEnum):
    """Physical arm labels for raw (pre-detector) arrivals."""

    TRIGGER_ARM = 0
    IDLER_PATH1 = 1
    IDLER_PATH2 = 2
    BEAM1 = 3
    BEAM2 = 4
    IDLER_UNDECIDED = 5  # idler before the splitter has assigned a path


@dataclass(frozen=True, eq=False)
class ArrivalStream:
    """Photon arrivals at an optical plane, canonically ordered like events."""

    duration_ps: int
    times: np.ndarray
    arms: np.ndarray

    def __post_init__(self) -> None:
        if self.duration_ps <= 0:
            raise ValueError("duration_ps must be positive")
        t = np.asarray(self.times, dtype=np.int64)
        a = np.asarray(self.arms, dtype=np.uint8)
        if t.ndim != 1 or a.shape != t.shape:
            raise ValueError("times and arms must be parallel 1-d arrays")
        t.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "arms", a)

    def __len__(self) -> int:
        return len(self.times)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ArrivalStream):
            return NotImplemented
        return (
            self.duration_ps == other.duration_ps
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.arms, other.arms)
        )

    def select_arm(self, arm: Arm) -> "ArrivalStream":
        mask = self.arms == np.uint8(int(arm))
        return ArrivalStream(self.duration_ps, self.times[mask], self.arms[mask])


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


@dataclass(frozen=True)
class PdcSourceConfig:
    """Pair source: simultaneous signal/idler pairs at ``pair_rate_hz``.

    ``pair_jitter_ps`` is the sigma of a Gaussian spread applied to the idler
    arrival relative to its signal partner (0 = perfectly simultaneous).
    """

    pair_rate_hz: float
    pair_jitter_ps: float = 0.0

    def __post_init__(self) -> None:
        _require(self.pair_rate_hz >= 0, "source.pair_rate_hz must be >= 0")
        _require(np.isfinite(self.pair_rate_hz), "source.pair_rate_hz must be finite")
        _require(self.pair_jitter_ps >= 0, "source.pair_jitter_ps must be >= 0")


@dataclass(frozen=True)
class CoherentSourceConfig:
    """Two independent Poisson beams of ``mean_rate_hz`` each."""

    mean_rate_hz: float

    def __post_init__(self) -> None:
        _require(self.mean_rate_hz >= 0, "source.mean_rate_hz must be >= 0")
        _require(np.isfinite(self.mean_rate_hz), "source.mean_rate_hz must be finite")


class ThermalMode(Enum):
    INDEPENDENT_ARMS = "independent_arms"
    SHARED_SINGLE_MODE = "shared_single_mode"


@dataclass(frozen=True)
class ThermalSourceConfig:
    """Thermal light on two arms.

    In ``INDEPENDENT_ARMS`` mode each arm is an unrelated Poisson process of
    ``mean_rate_hz`` (per arm).  In ``SHARED_SINGLE_MODE`` a single chaotic
    mode of total rate ``mean_rate_hz`` is divided between the arms by
    ``splitting_ratio``, and its instantaneous intensity is redrawn from an
    exponential distribution every ``coherence_time_ps``.
    """

    mean_rate_hz: float
    mode: ThermalMode = ThermalMode.INDEPENDENT_ARMS
    coherence_time_ps: int = 0
    splitting_ratio: float = 0.5

    def __post_init__(self) -> None:
        _require(self.mean_rate_hz >= 0, "source.mean_rate_hz must be >= 0")
        _require(np.isfinite(self.mean_rate_hz), "source.mean_rate_hz must be finite")
        if self.mode is ThermalMode.SHARED_SINGLE_MODE:
            _require(
                0.0 <= self.splitting_ratio <= 1.0,
                "source.splitting_ratio must be in [0, 1]",
            )
            _require(
                self.coherence_time_ps > 0,
                "source.coherence_time_ps must be > 0 for shared_single_mode",
            )
        else:
            _require(
                self.splitting_ratio == 0.5,
                "source.splitting_ratio only applies to shared_single_mode",
            )


class IntensityLaw(Enum):
    CONSTANT = "constant"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class ClassicalWaveConfig:
    """Per-gate semiclassical intensity model.

    The source heralds trials at ``herald_rate_hz``; each heralded gate draws
    an intensity I from ``intensity_law`` with mean
    ``per_gate_intensity_mean``, and the detectors fire with probabilities
    q*I and (1-q)*I where q = ``splitting_ratio``.  The mean is capped at 0.1
    so the probabilities stay in the linear (rate-proportional) regime of the
    detectors; draws are additionally clipped at I = 1 so probabilities stay
    valid for heavy-tailed laws.
    """

    herald_rate_hz: float
    per_gate_intensity_mean: float
    intensity_law: IntensityLaw = IntensityLaw.CONSTANT
    splitting_ratio: float = 0.5

    def __post_init__(self) -> None:
        _require(
            self.herald_rate_hz > 0 and np.isfinite(self.herald_rate_hz),
            "source.herald_rate_hz must be finite and > 0",
        )
        _require(
            self.per_gate_intensity_mean > 0,
            "source.per_gate_intensity_mean must be > 0",
        )
        _require(
            self.per_gate_intensity_mean <= 0.1,
            "source.per_gate_intensity_mean must be <= 0.1 to stay in the "
            "linear detection regime",
        )
        _require(
            0.0 < self.splitting_ratio < 1.0,
            "source.splitting_ratio must be strictly between 0 and 1",
        )


def _poisson_times(rng: np.random.Generator, rate_hz: float, duration_ps: int) -> np.ndarray:
    """Sorted arrival times of a homogeneous Poisson process."""
    mean = rate_hz * duration_ps * 1e-12
    n = int(rng.poisson(mean)) if mean > 0 else 0
    if n == 0:
        return np.empty(0, dtype=np.int64)
    t = rng.integers(0, duration_ps, size=n, dtype=np.int64)
    t.sort()
    return t


def gen_poisson_arrivals(
    rate_hz: float, duration_ps: int, arm: Arm, seed: int
) -> ArrivalStream:
    """Homogeneous Poisson arrivals on a single arm."""
    if duration_ps <= 0:
        raise ConfigError("duration_ps must be positive")
    if rate_hz < 0:
        raise ConfigError("rate_hz must be >= 0")
    rng = np.random.default_rng(seed)
    t = _poisson_times(rng, rate_hz, duration_ps)
    return ArrivalStream(duration_ps, t, np.full(len(t), int(arm), dtype=np.uint8))


def gen_pdc_pairs(
    config: PdcSourceConfig, duration_ps: int, seed: int
) -> tuple[ArrivalStream, ArrivalStream]:
    """Generate paired arrivals: (trigger arm, undecided idler arm).

    Pair creation times are Poisson at ``pair_rate_hz``.  The trigger stream
    holds the signal photons; the idler stream holds one partner per signal,
    offset by a rounded Gaussian jitter draw when ``pair_jitter_ps > 0``
    (clamped into the observation interval, then re-sorted).
    """
    if duration_ps <= 0:
        raise ConfigError("duration_ps must be positive")
    rng = np.random.default_rng(derive_seed(seed, "pair-times"))
    t_sig = _poisson_times(rng, config.pair_rate_hz, duration_ps)
    if config.pair_jitter_ps > 0 and len(t_sig):
        jit_rng = np.random.default_rng(derive_seed(seed, "pair-jitter"))
        offsets = np.rint(jit_rng.normal(0.0, config.pair_jitter_ps, size=len(t_sig)))
        t_idl = np.clip(t_sig + offsets.astype(np.int64), 0, duration_ps - 1)
        t_idl.sort()
    else:
        t_idl = t_sig.copy()
    trigger = ArrivalStream(
        duration_ps, t_sig, np.full(len(t_sig), int(Arm.TRIGGER_ARM), dtype=np.uint8)
    )
    idler = ArrivalStream(
        duration_ps, t_idl, np.full(len(t_idl), int(Arm.IDLER_UNDECIDED), dtype=np.uint8)
    )
    return trigger, idler


def project_idler_path(
    idler: ArrivalStream, seed: int, path1_fraction: float = 0.5
) -> ArrivalStream:
    """Assign each undecided idler photon to exactly one splitter output.

    This is where the single-photon character enters the simulation: a photon
    appears on path 1 (with probability ``path1_fraction``) or on path 2, and
    never on both.  The output stream keeps every timestamp; only the arm
    labels change.
    """
    if not 0.0 <= path1_fraction <= 1.0:
        raise ConfigError("path1_fraction must be in [0, 1]")
    rng = np.random.default_rng(seed)
    n = len(idler)
    take1 = rng.random(n) < path1_fraction
    arms = np.where(take1, np.uint8(Arm.IDLER_PATH1), np.uint8(Arm.IDLER_PATH2))
    times = idler.times
    # Re-canonicalize only if equal timestamps exist; path labels may otherwise
    # break the tie order.
    if n > 1 and np.any(np.diff(times) == 0):
        order = np.lexsort((arms, times))
        times = times[order]
        arms = arms[order]
    return ArrivalStream(idler.duration_ps, times, arms)


def gen_thermal_arrivals(
    config: ThermalSourceConfig, duration_ps: int, seed: int
) -> ArrivalStream:
    """Thermal arrivals on BEAM1/BEAM2 as one merged stream.

    INDEPENDENT_ARMS draws two unrelated Poisson processes.  In
    SHARED_SINGLE_MODE the interval is tiled with blocks of length
    ``coherence_time_ps`` (last block truncated); one exponential intensity
    draw per block scales the rate of *both* arms, and conditional on the
    intensity profile the two arms are independent Poisson processes.  The
    common intensity is what correlates the arms.
    """
    if duration_ps <= 0:
        raise ConfigError("duration_ps must be positive")
    q = config.splitting_ratio
    if config.mode is ThermalMode.INDEPENDENT_ARMS:
        # Factorized case: each arm is its own Poisson process at the per-arm rate.
        t1 = _poisson_times(
            np.random.default_rng(derive_seed(seed, "beam1")),
            config.mean_rate_hz,
            duration_ps,
        )
        t2 = _poisson_times(
            np.random.default_rng(derive_seed(seed, "beam2")),
            config.mean_rate_hz,
            duration_ps,
        )
    else:
        tau = int(config.coherence_time_ps)
        n_blocks = -(-duration_ps // tau)  # ceil division
        starts = np.arange(n_blocks, dtype=np.int64) * tau
        lengths = np.full(n_blocks, tau, dtype=np.int64)
        lengths[-1] = duration_ps - starts[-1]
        int_rng = np.random.default_rng(derive_seed(seed, "intensity"))
        intensity = int_rng.standard_exponential(n_blocks)  # mean 1
        block_mean = intensity * (lengths * 1e-12) * config.mean_rate_hz
        t1 = _blocked_poisson(
            np.random.default_rng(derive_seed(seed, "beam1")),
            starts,
            lengths,
            block_mean * q,
        )
        t2 = _blocked_poisson(
            np.random.default_rng(derive_seed(seed, "beam2")),
            starts,
            lengths,
            block_mean * (1.0 - q),
        )
    times = np.concatenate([t1, t2])
    arms = np.concatenate(
        [
            np.full(len(t1), int(Arm.BEAM1), dtype=np.uint8),
            np.full(len(t2), int(Arm.BEAM2), dtype=np.uint8),
        ]
    )
    order = np.lexsort((arms, times))
    return ArrivalStream(duration_ps, times[order], arms[order])


def _blocked_poisson(
    rng: np.random.Generator,
    starts: np.ndarray,
    lengths: np.ndarray,
    block_mean: np.ndarray,
) -> np.ndarray:
    """Poisson arrivals with a piecewise-constant intensity over blocks."""
    counts = rng.poisson(block_mean)
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    base = np.repeat(starts, counts)
    span = np.repeat(lengths, counts)
    t = base + np.floor(rng.random(total) * span).astype(np.int64)
    t.sort()
    return t


def gen_classical_wave_gates(
    config: ClassicalWaveConfig, n_gates: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-gate firing probabilities (p1, p2) under the wave model.

    Draws one intensity per gate, clips it at 1, and splits it by the
    splitting ratio.  Probabilities satisfy p1 + p2 <= 1 elementwise.
    """
    if n_gates < 0:
        raise ConfigError("n_gates must be >= 0")
    rng = np.random.default_rng(seed)
    if config.intensity_law is IntensityLaw.CONSTANT:
        intensity = np.full(n_gates, config.per_gate_intensity_mean)
    else:
        intensity = rng.standard_exponential(n_gates) * config.per_gate_intensity_mean
    np.minimum(intensity, 1.0, out=intensity)
    q = config.splitting_ratio
    return q * intensity, (1.0 - q) * intensity
