"""Anticorrelation statistics and closed-form model predictions.

The headline quantity is the normalized gated coincidence ratio

    alpha = Nc * N / (N1 * N2)

built from binary per-gate counts: N gates, N1/N2 gates with a count on each
output channel, Nc gates with counts on both.  N1/N and N2/N estimate the
per-gate firing probabilities, so alpha estimates
P(both fire) / (P(1 fires) * P(2 fires)).  Any classical intensity model
gives alpha >= 1 (Cauchy-Schwarz on the intensity distribution); a source
that delivers at most one photon per gate drives alpha far below 1, with
only accidentals (dark counts, stray light, double pairs) keeping it above
zero.

Uncertainty model
-----------------
N is treated as fixed by the acquisition, N1 and N2 as Poisson-dominated
counts, and Nc as a small Poisson count floored at one observed event:

    sigma^2 = (N / (N1*N2))^2 * max(Nc, 1) + alpha^2 * (1/N1 + 1/N2)

The cross-covariance between Nc and N1/N2 is neglected, which is accurate in
the accidental-dominated regime where Nc << N1, N2.

Model predictions
-----------------
Exact per-gate expectations are provided for each source model so simulated
estimates can be checked without re-deriving them from counts:

* pair source with accidentals: with per-gate heralded-partner detection
  probabilities t1, t2 and independent per-gate accidental means a1, a2
  (accidentals Poisson, so a window fires with probability 1 - exp(-a)):

      A_i = 1 - exp(-a_i)
      P1  = s * (t1 + (1 - t1) * A1) + (1 - s) * A1
      P2  = (1 - s) * (t2 + (1 - t2) * A2) + s * A2
      Pc  = s * (t1 + (1 - t1) * A1) * A2 + (1 - s) * A1 * (t2 + (1 - t2) * A2)
      alpha = Pc / (P1 * P2)

  where s is the probability the heralded photon takes path 1.  The partner
  lands on exactly one path, and the accidental processes on the two paths
  are independent of it and of each other, so these mixtures are exact.
* independent beams: the per-gate indicator variables factorize, alpha = 1
  identically, at every rate.
* shared-mode chaotic light (intensity redrawn every coherence time tau,
  exponential law, counted in windows of length W in the linear regime):

      alpha = 1 + E[ sum_k L_k^2 ] / W^2

  where L_k are the overlaps of the window with the intensity blocks it
  straddles, averaged over the window's position relative to the block grid.
  For W <= tau the closed form is alpha = 2 - (W / tau) / 3; for W >> tau
  block fluctuations average out and alpha -> 1; for W << tau alpha -> 2.
* per-gate wave model: alpha = <I^2> / <I>^2 of the per-gate intensity law
  (1 for a constant intensity, 2 for an exponential one), in the linear
  regime where firing probabilities are proportional to I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import UndefinedEstimateError
from .gating import CountSummary
from .sources import ClassicalWaveConfig, IntensityLaw

__all__ = [
    "AlphaEstimate",
    "OracleParams",
    "alpha_estimate",
    "expected_alpha_classical_wave",
    "expected_alpha_independent",
    "expected_alpha_pdc",
    "expected_alpha_thermal_shared",
    "sigma_separation",
    "weighted_mean",
]


@dataclass(frozen=True)
class AlphaEstimate:
    alpha: float
    sigma: float
    counts: CountSummary | None = None


def alpha_estimate(counts: CountSummary) -> AlphaEstimate:
    """Point estimate and uncertainty of alpha from one set of counts."""
    n, n1, n2, nc = counts.n_gates, counts.n1, counts.n2, counts.nc
    if n == 0 or n1 == 0 or n2 == 0:
        raise UndefinedEstimateError(
            f"alpha undefined for counts N={n}, N1={n1}, N2={n2}: "
            "every denominator count must be positive"
        )
    alpha = nc * n / (n1 * n2)
    scale = n / (n1 * n2)
    var = scale * scale * max(nc, 1) + alpha * alpha * (1.0 / n1 + 1.0 / n2)
    return AlphaEstimate(alpha=alpha, sigma=math.sqrt(var), counts=counts)


def weighted_mean(estimates: Sequence[AlphaEstimate] | Iterable[AlphaEstimate]) -> AlphaEstimate:
    """Inverse-variance weighted combination of independent estimates.

    The combined sigma is 1 / sqrt(sum of weights).  Count summaries are
    summed through when every input carries one.
    """
    ests = list(estimates)
    if not ests:
        raise UndefinedEstimateError("weighted_mean needs at least one estimate")
    for e in ests:
        if not (e.sigma > 0) or not math.isfinite(e.sigma):
            raise UndefinedEstimateError(
                f"weighted_mean needs positive finite sigmas, got {e.sigma!r}"
            )
    w = np.array([1.0 / (e.sigma * e.sigma) for e in ests])
    a = np.array([e.alpha for e in ests])
    total_w = w.sum()
    counts: CountSummary | None = None
    if all(e.counts is not None for e in ests):
        counts = ests[0].counts
        for e in ests[1:]:
            counts = counts + e.counts
    return AlphaEstimate(
        alpha=float((w * a).sum() / total_w),
        sigma=float(1.0 / math.sqrt(total_w)),
        counts=counts,
    )


def sigma_separation(estimate: AlphaEstimate, reference: float) -> float:
    """|alpha - reference| in units of the estimate's sigma."""
    if not (estimate.sigma > 0) or not math.isfinite(estimate.sigma):
        raise UndefinedEstimateError("sigma_separation needs a positive finite sigma")
    return abs(estimate.alpha - reference) / estimate.sigma


@dataclass(frozen=True)
class OracleParams:
    """Per-gate parameters of the pair-source prediction.

    t1/t2: probability that the heralded partner photon, having taken the
    corresponding path, is detected inside the gate.  a1/a2: mean accidental
    events (dark counts plus unrelated photons) per gate on each channel.
    path1_fraction: probability the partner takes path 1.
    """

    t1: float
    t2: float
    a1: float
    a2: float
    path1_fraction: float = 0.5

    def __post_init__(self) -> None:
        for name in ("t1", "t2", "path1_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        for name in ("a1", "a2"):
            v = getattr(self, name)
            if v < 0 or not math.isfinite(v):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


def expected_alpha_pdc(params: OracleParams) -> float:
    """Exact per-gate alpha of the pair source with independent accidentals."""
    s = params.path1_fraction
    acc1 = -math.expm1(-params.a1)  # 1 - exp(-a1)
    acc2 = -math.expm1(-params.a2)
    hit1 = params.t1 + (1.0 - params.t1) * acc1  # channel 1 fires, partner on path 1
    hit2 = params.t2 + (1.0 - params.t2) * acc2
    p1 = s * hit1 + (1.0 - s) * acc1
    p2 = (1.0 - s) * hit2 + s * acc2
    pc = s * hit1 * acc2 + (1.0 - s) * acc1 * hit2
    if p1 == 0.0 or p2 == 0.0:
        raise UndefinedEstimateError(
            "expected alpha undefined: a channel has zero firing probability"
        )
    return pc / (p1 * p2)


def expected_alpha_independent() -> float:
    """Two independent beams gate-count independently: alpha is exactly 1."""
    return 1.0


def expected_alpha_thermal_shared(
    window_ps: int, coherence_time_ps: int, n_grid: int = 200001
) -> float:
    """alpha for shared-mode chaotic light counted in windows of length W.

    Evaluates 1 + E_u[ sum_k L_k(u)^2 ] / W^2 by midpoint quadrature over the
    window offset u in [0, tau): a window starting at offset u overlaps the
    first block by min(tau - u, W), then some number of full blocks, then a
    remainder.  Exponential intensities with mean 1 have E[I^2] = 2, which is
    where the excess over 1 comes from.  Agrees with the closed form
    2 - (W/tau)/3 for W <= tau.
    """
    if window_ps <= 0 or coherence_time_ps <= 0:
        raise UndefinedEstimateError("window and coherence time must be positive")
    w = float(window_ps)
    tau = float(coherence_time_ps)
    u = (np.arange(n_grid) + 0.5) * (tau / n_grid)
    first = np.minimum(tau - u, w)
    rest = w - first
    n_full = np.floor(rest / tau)
    tail = rest - n_full * tau
    sum_sq = first * first + n_full * tau * tau + tail * tail
    return 1.0 + float(sum_sq.mean()) / (w * w)


def expected_alpha_classical_wave(config: ClassicalWaveConfig) -> float:
    """alpha = <I^2>/<I>^2 for the per-gate intensity law, linear regime."""
    if config.intensity_law is IntensityLaw.CONSTANT:
        return 1.0
    if config.intensity_law is IntensityLaw.EXPONENTIAL:
        return 2.0
    raise UndefinedEstimateError(f"no prediction for intensity law {config.intensity_law!r}")
