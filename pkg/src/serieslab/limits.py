"""Numeric liminf/limsup estimation along an index schedule.

Estimates come from the trailing window of the schedule. When requested, the
window is extrapolated with an affine model in ``x = 1/ln(lambda*n)``, the
leading error term of the ratio functionals used throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .expr import DomainError
from .sequences import IndexSchedule

FIT_TOLERANCE = 1e-2  # accepted residual, as a fraction of the window range
RAW_BAND_FLOOR = 1e-9
FIT_BAND_FLOOR = 1e-12
DRIFT_FACTOR = 5.0
UNMODELLED_DRIFT_RATIO = 1e-3  # unmodelled drift this large relative to the gap voids the estimate
TIGHT_BAND = 1e-2  # pinned-at-threshold width, relative to max(1, |threshold|)


@dataclass(frozen=True)
class LimitEstimate:
    liminf_hat: float
    limsup_hat: float
    band: float
    samples_used: int
    extrapolated: bool = False
    drift: float = 0.0  # change of the functional over the last half of the schedule
    unbounded: bool = False
    # extrapolation was requested, the model did not fit, and the window is
    # strictly monotone: the functional is still moving in an unmodelled way
    unmodelled_trend: bool = False
    # raw window extrema, kept when the estimate itself is extrapolated
    window_min: float | None = None
    window_max: float | None = None

    def __post_init__(self):
        if not self.band >= 0:
            raise ValueError("band must be nonnegative")
        if self.window_min is None:
            object.__setattr__(self, "window_min", self.liminf_hat)
        if self.window_max is None:
            object.__setattr__(self, "window_max", self.limsup_hat)

    @property
    def center(self) -> float:
        return 0.5 * (self.liminf_hat + self.limsup_hat)

    def to_json(self) -> dict:
        return {
            "liminf": self.liminf_hat,
            "limsup": self.limsup_hat,
            "band": self.band,
            "samples_used": self.samples_used,
            "extrapolated": self.extrapolated,
            "drift": self.drift,
            "unbounded": self.unbounded,
            "unmodelled_trend": self.unmodelled_trend,
            "window_min": self.window_min,
            "window_max": self.window_max,
        }


@dataclass(frozen=True)
class Trichotomy:
    variant: str  # "Above" | "Below" | "Straddles"
    margin: float
    band: float  # effective half-width used, after drift widening
    finite_band: float = 0.0  # the drift-widened band before any unmodelled-trend escalation

    @property
    def above(self) -> bool:
        return self.variant == "Above"

    @property
    def below(self) -> bool:
        return self.variant == "Below"


class LimitEvaluationError(DomainError):
    pass


def _affine_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares ``y = c + s*x``; returns (intercept, slope, max |residual|)."""
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    denom = float(dx @ dx)
    slope = float(dx @ (y - ym)) / denom if denom > 0 else 0.0
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    return intercept, slope, float(np.max(np.abs(resid)))


def _quadratic_intercept(x: np.ndarray, y: np.ndarray) -> float:
    scale = float(np.max(np.abs(x))) or 1.0
    coef = np.polyfit(x / scale, y, 2)
    return float(coef[-1])


def _strictly_monotone(v: np.ndarray) -> bool:
    d = np.diff(v)
    return bool(np.all(d > 0) or np.all(d < 0))


def estimate_limits(
    f: Callable[[int], float],
    schedule: IndexSchedule,
    extrapolate: bool = False,
    lambda_scale: float = 1.0,
) -> LimitEstimate:
    """Estimate ``(liminf, limsup)`` of ``f(n)`` along ``schedule``.

    Raw estimates are the window extrema with band ``spread/2 + 1e-9``. A
    window that is strictly monotone and grows at least fourfold in magnitude
    is reported as unbounded (both estimates ``±inf``). With ``extrapolate``,
    an affine fit in ``1/ln(lambda*n)`` whose residual stays below 1% of the
    window range replaces both extrema by its intercept; the band is then the
    larger of the fit residual and the shift a quadratic term would cause.
    """
    if not lambda_scale > 0:
        raise ValueError("lambda_scale must be positive")
    indices = schedule.indices
    values = []
    for n in indices:
        try:
            v = float(f(n))
        except DomainError as exc:
            raise LimitEvaluationError(f"functional failed: {exc.message}", n) from None
        if math.isnan(v):
            raise LimitEvaluationError("functional is NaN", n)
        values.append(v)
    values_arr = np.array(values)
    w = values_arr[-schedule.window :]
    mid = values_arr[len(values_arr) // 2]
    drift = values[-1] - float(mid)
    drift = drift if math.isfinite(drift) else 0.0
    lo, hi = float(w.min()), float(w.max())
    if not (math.isfinite(lo) and math.isfinite(hi)):
        # overflowed samples: a window of one infinite sign is unbounded,
        # anything else carries no usable band
        if lo == hi:
            return LimitEstimate(lo, hi, 0.0, len(w), False, 0.0, unbounded=True)
        return LimitEstimate(lo, hi, math.inf, len(w), False, 0.0)

    if (
        _strictly_monotone(w)
        and np.sign(w[0]) == np.sign(w[-1])
        and abs(w[-1]) >= 4 * abs(w[0])
        and abs(w[-1]) > 1
    ):
        inf = math.copysign(math.inf, w[-1])
        return LimitEstimate(inf, inf, 0.0, len(w), False, 0.0, unbounded=True)

    raw = LimitEstimate(lo, hi, (hi - lo) * 0.5 + RAW_BAND_FLOOR, len(w), False, drift)
    if not extrapolate or hi == lo or not all(map(math.isfinite, w)):
        return raw

    tail = np.array(schedule.tail, dtype=float)
    x = 1.0 / np.log(lambda_scale * tail)
    if np.any(x <= 0):
        return raw
    intercept, _, resid = _affine_fit(x, w)
    if resid > FIT_TOLERANCE * (hi - lo):
        return replace(raw, unmodelled_trend=_strictly_monotone(w))
    bias = abs(_quadratic_intercept(x, w) - intercept)
    band = max(resid, bias) + FIT_BAND_FLOOR
    return LimitEstimate(intercept, intercept, band, len(w), True, drift, window_min=lo, window_max=hi)


def classify(est: LimitEstimate, threshold: float, side: str = "use_liminf") -> Trichotomy:
    """Place an estimate relative to ``threshold``.

    Above iff ``liminf - band > threshold``; Below iff ``limsup + band <
    threshold``; Straddles otherwise. If the functional is still drifting
    toward the threshold by more than the window spreads, the band is widened to ``5*|drift|`` first: a
    window that keeps moving gives no evidence about where it stops. If that
    movement is also one the extrapolation model could not fit and is not
    negligible against the gap to the threshold, nothing bounds how far it
    goes and the estimate always straddles.
    An extrapolated estimate cannot land on the side of the threshold that
    the raw window never reached. ``side`` picks which estimate the reported margin is measured from.
    """
    if side not in ("use_liminf", "use_limsup"):
        raise ValueError(f"unknown side {side!r}")
    band = finite_band = est.band
    if est.drift and not est.unbounded:
        toward = (est.center > threshold and est.drift < 0) or (
            est.center < threshold and est.drift > 0
        )
        # an oscillating window moves less over the schedule than it spreads
        toward = toward and abs(est.drift) > est.window_max - est.window_min
        if toward:
            band = finite_band = max(band, DRIFT_FACTOR * abs(est.drift))
            if est.unmodelled_trend and abs(est.drift) > UNMODELLED_DRIFT_RATIO * abs(est.center - threshold):
                band = math.inf
    lo = est.liminf_hat - band
    hi = est.limsup_hat + band
    # extrapolation may sharpen a decision but never flip the side on which
    # the whole sampled window lies
    if lo > threshold and est.window_max > threshold:
        variant = "Above"
    elif hi < threshold and est.window_min < threshold:
        variant = "Below"
    else:
        variant = "Straddles"
    ref = lo if side == "use_liminf" else hi
    margin = ref - threshold if math.isfinite(ref) else ref
    return Trichotomy(variant, margin, band, finite_band)


def pinned(est: LimitEstimate, threshold: float, tri: Trichotomy | None = None) -> bool:
    """True when the whole uncertainty interval is a tight bracket around
    ``threshold``: the estimate sits numerically at the boundary."""
    tri = tri or classify(est, threshold)
    if tri.variant != "Straddles" or est.unbounded:
        return False
    b = tri.finite_band
    if not est.liminf_hat - b <= threshold <= est.limsup_hat + b:
        return False
    width = (est.limsup_hat - est.liminf_hat) + 2 * b
    return width <= TIGHT_BAND * max(1.0, abs(threshold))


def straddle_confirmed(est: LimitEstimate, threshold: float, tri: Trichotomy | None = None) -> bool:
    """Inconclusive region ``liminf <= threshold <= limsup`` confirmed by the
    numbers: either a window that oscillates across it without trending, or
    a tight pin at it."""
    tri = tri or classify(est, threshold)
    if tri.variant != "Straddles":
        return False
    lo, hi = est.window_min, est.window_max
    oscillating = abs(est.drift) <= hi - lo
    spread = oscillating and lo + RAW_BAND_FLOOR < threshold < hi - RAW_BAND_FLOOR
    return spread or pinned(est, threshold, tri)


def combine(estimates: list[LimitEstimate]) -> LimitEstimate:
    """Joint estimate: min of liminfs, max of limsups, widest band.

    The drift kept is the one of largest magnitude.
    """
    if not estimates:
        raise ValueError("nothing to combine")
    drift = max((e.drift for e in estimates), key=abs)
    return LimitEstimate(
        min(e.liminf_hat for e in estimates),
        max(e.limsup_hat for e in estimates),
        max(e.band for e in estimates),
        sum(e.samples_used for e in estimates),
        any(e.extrapolated for e in estimates),
        drift,
        unbounded=all(e.unbounded for e in estimates),
        unmodelled_trend=any(e.unmodelled_trend for e in estimates),
        window_min=min(e.window_min for e in estimates),
        window_max=max(e.window_max for e in estimates),
    )
