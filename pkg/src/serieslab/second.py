"""Tests built on the two second ratios a(2n)/a(n) and a(2n+1)/a(n).

The Raabe-type functional ``ln(lambda*n) * (1/2 - ratio)`` is compared against
``ln(2)/2``; its limit for ``a(n) = 1/(n (ln n)^p)`` is ``p*ln(2)/2``, which is
what :func:`lemma_functional` evaluates directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import (
    EPS,
    GAUSS_TREND_LIMIT,
    AuxiliarySequence,
    get_aux,
    half_trend,
    kummer_quantity,
    positivity_guard,
    threshold_verdict,
    tri_json,
    window_signs,
)
from .limits import LimitEstimate, classify, combine, estimate_limits, pinned, straddle_confirmed
from .sequences import IndexSchedule, half_minus_ratio, half_minus_second_ratio, monotone_check, second_ratios
from .verdict import CONVERGES, DIVERGES, INCONCLUSIVE, UNDECIDED, Verdict, inapplicable

LN2 = math.log(2.0)
SECOND_RAABE_THRESHOLD = LN2 / 2
LIMIT_SPREAD_FRACTION = 0.1


def _ratio_estimates(seq, schedule: IndexSchedule) -> tuple[LimitEstimate, LimitEstimate]:
    even = estimate_limits(lambda n: second_ratios(seq, n)[0].value, schedule, extrapolate=True)
    odd = estimate_limits(lambda n: second_ratios(seq, n)[1].value, schedule, extrapolate=True)
    return even, odd


@dataclass(frozen=True)
class SecondRatioEvidence:
    L: float
    l: float
    even: LimitEstimate
    odd: LimitEstimate

    def to_json(self) -> dict:
        return {"L": self.L, "l": self.l, "even": self.even.to_json(), "odd": self.odd.to_json()}


def second_ratio_test(seq, schedule: IndexSchedule) -> Verdict:
    """L < 1/2 converges, l > 1/2 diverges, l <= 1/2 <= L inconclusive."""
    bad = positivity_guard(seq, schedule, doubled=True)
    if bad:
        return bad
    even, odd = _ratio_estimates(seq, schedule)
    joint = combine([even, odd])
    ev = SecondRatioEvidence(joint.limsup_hat, joint.liminf_hat, even, odd)
    return threshold_verdict(joint, 0.5, {"second_ratio": ev.to_json()}, converges_above=False)


def lemma_functional(p: float, lambda_scale: float, which: str, n: int) -> float:
    """The two log-p functionals at index ``n`` (both tend to ``p*ln(2)/2``).

    eq1: ``ln(lam n) (1/2 - (ln n)^p / (2 (ln 2n)^p))``
    eq2: ``ln(lam n) (1/2 - n (ln n)^p / ((2n+1) (ln(2n+1))^p))``
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not lambda_scale > 0:
        raise ValueError("lambda_scale must be positive")
    ln_n = math.log(n)
    if which == "eq1":
        log_ratio = -LN2 - p * math.log1p(LN2 / ln_n)
    elif which == "eq2":
        log_ratio = -LN2 - math.log1p(1 / (2 * n)) - p * math.log1p(math.log1p((n + 1) / n) / ln_n)
    else:
        raise ValueError(f"which must be 'eq1' or 'eq2', not {which!r}")
    return math.log(lambda_scale * n) * half_minus_ratio(log_ratio)


def second_raabe_functionals(seq, n: int, lambda_scale: float = 1.0) -> tuple[float, float]:
    """``ln(lam n) (1/2 - a(2n)/a(n))`` and ``ln(lam n) (1/2 - a(2n+1)/a(n))``."""
    scale = math.log(lambda_scale * n)
    return (
        scale * half_minus_second_ratio(seq, n, 2 * n),
        scale * half_minus_second_ratio(seq, n, 2 * n + 1),
    )


@dataclass(frozen=True)
class SecondRaabeEvidence:
    lambda_scale: float
    f1: LimitEstimate
    f2: LimitEstimate
    threshold: float = SECOND_RAABE_THRESHOLD

    @property
    def m(self) -> float:
        return min(self.f1.liminf_hat, self.f2.liminf_hat)

    @property
    def M(self) -> float:
        return max(self.f1.limsup_hat, self.f2.limsup_hat)

    def to_json(self) -> dict:
        return {
            "lambda": self.lambda_scale,
            "m1": self.f1.liminf_hat,
            "M1": self.f1.limsup_hat,
            "m2": self.f2.liminf_hat,
            "M2": self.f2.limsup_hat,
            "m": self.m,
            "M": self.M,
            "threshold": self.threshold,
            "f1": self.f1.to_json(),
            "f2": self.f2.to_json(),
        }


def _second_raabe_estimates(seq, schedule, lambda_scale):
    if not lambda_scale > 0:
        raise ValueError("lambda must be positive")
    if lambda_scale * schedule.indices[0] <= 1:
        raise ValueError("lambda * n0 must exceed 1 so that ln(lambda n) > 0")
    f1 = estimate_limits(
        lambda n: second_raabe_functionals(seq, n, lambda_scale)[0], schedule, True, lambda_scale
    )
    f2 = estimate_limits(
        lambda n: second_raabe_functionals(seq, n, lambda_scale)[1], schedule, True, lambda_scale
    )
    return SecondRaabeEvidence(lambda_scale, f1, f2)


def second_raabe_test(seq, schedule: IndexSchedule, lambda_scale: float = 1.0) -> Verdict:
    """m > ln2/2 converges, M < ln2/2 diverges, m <= ln2/2 <= M inconclusive."""
    bad = positivity_guard(seq, schedule, doubled=True)
    if bad:
        return bad
    ev = _second_raabe_estimates(seq, schedule, lambda_scale)
    joint = combine([ev.f1, ev.f2])
    return threshold_verdict(
        joint, SECOND_RAABE_THRESHOLD, {"second_raabe": ev.to_json()}, converges_above=True
    )


def _window_spread_ok(seq, schedule, lambda_scale, which: int) -> bool:
    vals = np.array([second_raabe_functionals(seq, n, lambda_scale)[which] for n in schedule.indices])
    window = vals[-schedule.window :]
    total = float(vals.max() - vals.min())
    return float(window.max() - window.min()) <= LIMIT_SPREAD_FRACTION * total or total == 0.0


def second_raabe_limit_form(seq, schedule: IndexSchedule, lambda_scale: float = 1.0) -> Verdict:
    """Limit form: both functionals must settle; compare their limits with ln2/2.

    Never reports inconclusive: a limit at the threshold is undecided here.
    """
    bad = positivity_guard(seq, schedule, doubled=True)
    if bad:
        return bad
    ev = _second_raabe_estimates(seq, schedule, lambda_scale)
    evidence = {"second_raabe": ev.to_json(), "beta1": ev.f1.center, "beta2": ev.f2.center}
    settled = [
        est.unbounded or _window_spread_ok(seq, schedule, lambda_scale, i)
        for i, est in enumerate((ev.f1, ev.f2))
    ]
    if not all(settled):
        return Verdict(UNDECIDED, evidence, ["limits may not exist: window spread exceeds 10% of the sampled range"])
    joint = combine([ev.f1, ev.f2])
    tri = classify(joint, SECOND_RAABE_THRESHOLD)
    evidence["classification"] = tri_json(tri)
    if tri.above:
        return Verdict(CONVERGES, evidence)
    if tri.below:
        return Verdict(DIVERGES, evidence)
    return Verdict(UNDECIDED, evidence, ["limit not separable from ln2/2"])


@dataclass(frozen=True)
class SecondGaussFit:
    beta_hat: LimitEstimate
    p_exp: float
    residual_bound: float
    residual_trend: float

    def to_json(self) -> dict:
        return {
            "beta_hat": self.beta_hat.to_json(),
            "p_exp": self.p_exp,
            "residual_bound": self.residual_bound,
            "residual_trend": self.residual_trend,
        }


def second_gauss_test(seq, schedule: IndexSchedule, p_exp: float = 2.0) -> Verdict:
    """a(2n)/a(n) = 1/2 - beta/ln n + gamma(n)/(ln n)^p with gamma bounded, p > 1,
    for monotone decreasing a(n): beta > ln2/2 converges, beta <= ln2/2 diverges."""
    if not p_exp > 1:
        raise ValueError("p_exp must exceed 1")
    bad = positivity_guard(seq, schedule, doubled=True)
    if bad:
        return bad
    mono = monotone_check(seq, schedule.indices)
    if not mono.ok:
        return inapplicable("monotone decreasing", witness=list(mono.witness))

    def f(n):
        return math.log(n) * half_minus_second_ratio(seq, n, 2 * n)

    est = estimate_limits(f, schedule, extrapolate=True)
    t = SECOND_RAABE_THRESHOLD
    if est.unbounded:
        up = est.liminf_hat > 0
        return Verdict(
            CONVERGES if up else DIVERGES,
            {"beta_estimate": est.to_json(), "monotone": mono.to_json()},
            ["beta-hat window >> ln2/2" if up else "beta-hat window << ln2/2"],
        )
    beta = est.center
    tail = np.array(schedule.tail, dtype=float)
    scale = np.log(tail) ** (p_exp - 1)
    f_tail = np.array([f(n) for n in schedule.tail])
    gamma = (beta - f_tail) * scale
    trend = half_trend(gamma, 64 * EPS * np.maximum(1.0, np.abs(f_tail)) * scale)
    fit = SecondGaussFit(est, p_exp, float(np.max(np.abs(gamma))), trend)
    evidence = {"fit": fit.to_json(), "threshold": t, "monotone": mono.to_json()}
    if not trend <= GAUSS_TREND_LIMIT:
        return Verdict(UNDECIDED, evidence, [f"decomposition rejected: gamma grows by {trend:.3g} across window (sampled)"])
    tri = classify(est, t)
    evidence["classification"] = tri_json(tri)
    if tri.above:
        return Verdict(CONVERGES, evidence)
    if tri.below:
        return Verdict(DIVERGES, evidence)
    if pinned(est, t, tri):
        return Verdict(DIVERGES, evidence, ["beta = ln2/2 within a tight band: the beta <= ln2/2 clause applies"])
    return Verdict(UNDECIDED, evidence, ["beta band too wide to place against ln2/2"])


def second_kummer_test(seq, schedule: IndexSchedule, aux: AuxiliarySequence | str = "inv_n") -> Verdict:
    """Second Kummer with
    ``k1(n) = p(n) a(n)/a(2n) - 2 p(2n)`` and ``k2(n) = p(n) a(n)/a(2n+1) - 2 p(2n+1)``.

    Converges when both stay positive and bounded away from zero over the
    window (r1, r2 are half the window minima). Diverges when the condensed
    reciprocal sum of ``p`` is known to diverge and at least one of them is
    strictly negative at every window index.
    """
    if isinstance(aux, str):
        aux = get_aux(aux)
    bad = positivity_guard(seq, schedule, doubled=True)
    if bad:
        return bad
    k1 = [kummer_quantity(seq, aux, n, 2 * n, 2.0) for n in schedule.tail]
    k2 = [kummer_quantity(seq, aux, n, 2 * n + 1, 2.0) for n in schedule.tail]
    evidence = {
        "aux": aux.name,
        "kappa1_window": [min(v for v, _ in k1), max(v for v, _ in k1)],
        "kappa2_window": [min(v for v, _ in k2), max(v for v, _ in k2)],
    }
    notes = ["'sufficiently large n' is the trailing window (sampled)"]
    pos1, _, _ = window_signs(k1)
    pos2, _, _ = window_signs(k2)
    if pos1 and pos2:
        e1 = estimate_limits(lambda n: kummer_quantity(seq, aux, n, 2 * n, 2.0)[0], schedule, extrapolate=True)
        e2 = estimate_limits(lambda n: kummer_quantity(seq, aux, n, 2 * n + 1, 2.0)[0], schedule, extrapolate=True)
        t1, t2 = classify(e1, 0.0), classify(e2, 0.0)
        evidence.update(estimate1=e1.to_json(), estimate2=e2.to_json())
        if t1.above and t2.above:
            evidence.update(r1=0.5 * evidence["kappa1_window"][0], r2=0.5 * evidence["kappa2_window"][0])
            return Verdict(CONVERGES, evidence, notes)
        return Verdict(UNDECIDED, evidence, notes + ["kappa positive but not bounded away from 0"])
    neg1 = all(v < -1e-9 * s for v, s in k1)
    neg2 = all(v < -1e-9 * s for v, s in k2)
    if neg1 or neg2:
        evidence["negative"] = [name for name, flag in (("kappa1", neg1), ("kappa2", neg2)) if flag]
        if not aux.condensed_reciprocal_diverges:
            return Verdict(UNDECIDED, evidence, notes + [f"divergence of sum 1/(2^k p(2^k)) unknown for aux {aux.name!r}"])
        return Verdict(DIVERGES, evidence, notes)
    return Verdict(UNDECIDED, evidence, notes)


def _strict_margin(ratio_max: float) -> float:
    # ratio_max = 1/(2 + r)
    return 1 / ratio_max - 2 if ratio_max > 0 else math.inf


def strict_second_ratio(seq, schedule: IndexSchedule) -> Verdict:
    """Both second ratios below 1/(2+r) for some r > 0: converges. Never diverges."""
    bad = positivity_guard(seq, schedule, doubled=True)
    if bad:
        return bad
    even = [second_ratios(seq, n) for n in schedule.tail]
    max1 = max(a.value for a, _ in even)
    max2 = max(b.value for _, b in even)
    evidence = {"max_even": max1, "max_odd": max2}
    if max1 < 0.5 and max2 < 0.5:
        e1, e2 = _ratio_estimates(seq, schedule)
        tri = classify(combine([e1, e2]), 0.5)
        evidence["classification"] = tri_json(tri)
        if tri.below:
            evidence.update(r1=_strict_margin(max1), r2=_strict_margin(max2))
            return Verdict(CONVERGES, evidence)
        return Verdict(UNDECIDED, evidence, ["ratios below 1/2 without a strict margin"])
    return Verdict(UNDECIDED, evidence, ["a ratio reaches 1/2"])


def divergence_ratio_check(seq, schedule: IndexSchedule) -> Verdict:
    """a(2n)/a(n) > 1 throughout, or a(2n+1)/a(n) > 1 + 1/(2n) throughout:
    diverges. Never converges."""
    bad = positivity_guard(seq, schedule, doubled=True)
    if bad:
        return bad
    even_ok = all(seq.log_ratio(n, 2 * n) > 0 for n in schedule.tail)
    odd_ok = all(seq.log_ratio(n, 2 * n + 1) > math.log1p(1 / (2 * n)) for n in schedule.tail)
    evidence = {"even_exceeds_1": even_ok, "odd_exceeds_1_plus_1_over_2n": odd_ok}
    if even_ok or odd_ok:
        return Verdict(DIVERGES, evidence, ["inequality holds at every window index (sampled)"])
    return Verdict(UNDECIDED, evidence)
