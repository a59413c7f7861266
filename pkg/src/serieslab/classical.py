"""The classical battery: ratio, Raabe, Gauss, Kummer, Cauchy condensation,
and the second-ratio comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .expr import DomainError, SeriesSpec, check_positivity
from .limits import (
    TIGHT_BAND,
    LimitEstimate,
    classify,
    estimate_limits,
    straddle_confirmed,
)
from .sequences import (
    CONDENSED_SCHEDULE,
    CondensedSequence,
    IndexSchedule,
    classical_ratio,
    monotone_check,
)
from .verdict import CONVERGES, DIVERGES, INCONCLUSIVE, UNDECIDED, Verdict, inapplicable

GAUSS_TREND_LIMIT = 1.5
ZERO_RTOL = 1e-9
EPS = np.finfo(float).eps


# --------------------------------------------------------------------------
# Auxiliary sequences for Kummer-type tests


@dataclass(frozen=True)
class AuxiliarySequence:
    """A positive sequence ``p(n)`` with known divergence facts.

    ``diff(n, m, c)`` returns ``p(n) - c*p(m)`` without cancellation.
    """

    name: str
    p: Callable[[int], float]
    diff: Callable[[int, int, float], float]
    reciprocal_sum_diverges: bool  # sum 1/p(n)
    condensed_reciprocal_diverges: bool  # sum 1/(2^k p(2^k))


def _nlogn_diff(n: int, m: int, c: float) -> float:
    if c == 1:
        # n ln n - m ln m = -[(m - n) ln m + n log1p((m - n)/n)]
        return -((m - n) * math.log(m) + n * math.log1p((m - n) / n))
    return n * math.log(n) - c * m * math.log(m)


AUX_CATALOG: dict[str, AuxiliarySequence] = {
    "one": AuxiliarySequence("one", lambda n: 1.0, lambda n, m, c: 1.0 - c, True, False),
    "n": AuxiliarySequence("n", lambda n: float(n), lambda n, m, c: float(n - c * m), True, False),
    "n_log_n": AuxiliarySequence("n_log_n", lambda n: n * math.log(n), _nlogn_diff, True, False),
    "inv_n": AuxiliarySequence(
        "inv_n", lambda n: 1.0 / n, lambda n, m, c: (m - c * n) / (n * m), True, True
    ),
}


def get_aux(name: str) -> AuxiliarySequence:
    try:
        return AUX_CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown auxiliary sequence {name!r}; choose from {sorted(AUX_CATALOG)}")


def kummer_quantity(seq, aux: AuxiliarySequence, n: int, m: int, c: float) -> tuple[float, float]:
    """``p(n) a(n)/a(m) - c p(m)`` and its rounding scale.

    Written as ``p(n) expm1(log a(n) - log a(m)) + (p(n) - c p(m))`` so that an
    exact zero (harmonic series with ``p(n) = n``) comes out at rounding level.
    """
    try:
        a = aux.p(n) * math.expm1(-seq.log_ratio(n, m))
    except OverflowError:
        a = math.inf
    b = aux.diff(n, m, c)
    return a + b, abs(a) + abs(b)


# --------------------------------------------------------------------------
# helpers


def positivity_guard(seq, schedule: IndexSchedule, doubled: bool) -> Verdict | None:
    bad = check_positivity(seq, schedule.indices, doubled=doubled)
    if bad is not None:
        return inapplicable("positivity", index=bad)
    return None


def tri_json(tri) -> dict:
    return {"variant": tri.variant, "margin": tri.margin, "effective_band": tri.band}


def threshold_verdict(
    est: LimitEstimate, threshold: float, evidence: dict, converges_above: bool
) -> Verdict:
    """Shared three-way decision; a confirmed straddle is inconclusive."""
    tri = classify(est, threshold)
    evidence = {**evidence, "estimate": est.to_json(), "threshold": threshold, "classification": tri_json(tri)}
    if tri.below:
        return Verdict(DIVERGES if converges_above else CONVERGES, evidence)
    if tri.above:
        return Verdict(CONVERGES if converges_above else DIVERGES, evidence)
    if straddle_confirmed(est, threshold, tri):
        return Verdict(INCONCLUSIVE, evidence, [f"liminf <= {threshold:.10g} <= limsup confirmed"])
    return Verdict(UNDECIDED, evidence, ["numeric resolution insufficient"])


# --------------------------------------------------------------------------
# tests


def ratio_test(seq, schedule: IndexSchedule) -> Verdict:
    """D'Alembert: limsup a(n+1)/a(n) < 1 converges, liminf > 1 diverges."""
    bad = positivity_guard(seq, schedule, doubled=False)
    if bad:
        return bad
    est = estimate_limits(lambda n: classical_ratio(seq, n).value, schedule, extrapolate=True)
    return threshold_verdict(est, 1.0, {"functional": "a(n+1)/a(n)"}, converges_above=False)


def raabe_functional(seq, n: int) -> float:
    """``n (1 - a(n+1)/a(n))``."""
    try:
        return -n * math.expm1(seq.log_ratio(n, n + 1))
    except OverflowError:
        return -math.inf


def raabe_test(seq, schedule: IndexSchedule) -> Verdict:
    """Raabe: lim n(1 - a(n+1)/a(n)) > 1 converges, < 1 diverges, = 1 inconclusive."""
    bad = positivity_guard(seq, schedule, doubled=False)
    if bad:
        return bad
    est = estimate_limits(lambda n: raabe_functional(seq, n), schedule, extrapolate=True)
    return threshold_verdict(est, 1.0, {"functional": "n(1-a(n+1)/a(n))"}, converges_above=True)


@dataclass(frozen=True)
class DecompositionFit:
    beta_hat: LimitEstimate
    lambda_exp: float
    residual_bound: float
    residual_trend: float
    epsilon_tail: tuple[float, ...] = ()

    def to_json(self) -> dict:
        return {
            "beta_hat": self.beta_hat.to_json(),
            "lambda_exp": self.lambda_exp,
            "residual_bound": self.residual_bound,
            "residual_trend": self.residual_trend,
            "epsilon_tail": list(self.epsilon_tail),
        }


def half_trend(values: np.ndarray, noise=0.0) -> float:
    """max|second half| / max|first half|, the growth factor across the samples.

    Entries at or below ``noise`` (scalar or per-entry) count as zero.
    """
    mags = np.abs(np.asarray(values, dtype=float))
    mags = np.where(mags <= noise, 0.0, mags)
    half = len(mags) // 2
    first = float(np.max(mags[:half]))
    second = float(np.max(mags[half:]))
    if first == 0.0:
        return 1.0 if second == 0.0 else math.inf
    return second / first


def gauss_test(seq, schedule: IndexSchedule, lambda_exp: float = 1.0) -> Verdict:
    """Gauss: a(n+1)/a(n) = 1 - beta/n + gamma(n)/n^(1+lambda), gamma bounded.

    beta is the intercept of an affine fit of the Raabe functional in
    ``n**-lambda``; gamma is then sampled and must not grow across the window.
    Converges iff beta > 1; beta <= 1 diverges (no inconclusive case).
    """
    if not lambda_exp > 0:
        raise ValueError("lambda_exp must be positive")
    bad = positivity_guard(seq, schedule, doubled=False)
    if bad:
        return bad
    raabe = estimate_limits(lambda n: raabe_functional(seq, n), schedule)
    if raabe.unbounded:
        up = raabe.liminf_hat > 0
        return Verdict(
            CONVERGES if up else DIVERGES,
            {"raabe_estimate": raabe.to_json(), "lambda_exp": lambda_exp},
            ["beta-hat window >> 1" if up else "beta-hat window << 1"],
        )

    tail = np.array(schedule.tail, dtype=float)
    rho = np.array([raabe_functional(seq, n) for n in schedule.tail])
    y = tail**-lambda_exp
    ym = y.mean()
    dy = y - ym
    slope = float(dy @ (rho - rho.mean()) / (dy @ dy))
    beta = float(rho.mean() - slope * ym)
    fit_resid = float(np.max(np.abs(rho - (beta + slope * y))))
    gamma = (beta - rho) * tail**lambda_exp
    # rho carries rounding of order ulp(|rho|), which n**lambda amplifies
    trend = half_trend(gamma, 64 * EPS * np.maximum(1.0, np.abs(rho)) * tail**lambda_exp)
    band = fit_resid + 1e-12 * max(1.0, abs(beta))
    beta_est = LimitEstimate(beta, beta, band, len(rho), True)
    fit = DecompositionFit(beta_est, lambda_exp, float(np.max(np.abs(gamma))), trend)
    evidence = {"fit": fit.to_json()}
    if not trend <= GAUSS_TREND_LIMIT:
        return Verdict(UNDECIDED, evidence, [f"decomposition rejected: gamma grows by {trend:.3g} across window (sampled)"])
    tri = classify(beta_est, 1.0)
    evidence["classification"] = tri_json(tri)
    notes = ["gamma boundedness is sampled evidence"]
    if tri.above:
        return Verdict(CONVERGES, evidence, notes)
    if tri.below:
        return Verdict(DIVERGES, evidence, notes)
    if band <= TIGHT_BAND * max(1.0, abs(beta)):
        return Verdict(DIVERGES, evidence, notes + ["beta = 1 within a tight band: the beta <= 1 clause applies"])
    return Verdict(UNDECIDED, evidence, notes + ["beta band too wide to place against 1"])


def window_signs(values: list[tuple[float, float]]) -> tuple[bool, bool, bool]:
    """(all strictly positive, all <= 0 within rounding, any rounding-zero)."""
    pos = all(v > ZERO_RTOL * s or v == math.inf for v, s in values)
    nonpos = all(v <= ZERO_RTOL * s for v, s in values)
    zero = any(abs(v) <= ZERO_RTOL * s for v, s in values)
    return pos, nonpos, zero


def kummer_test(seq, schedule: IndexSchedule, aux: AuxiliarySequence | str = "n") -> Verdict:
    """Kummer with ``kappa(n) = p(n) a(n)/a(n+1) - p(n+1)``.

    Converges when kappa stays positive across the window and its limit
    estimate is bounded away from zero (r is half the window minimum).
    Diverges when kappa <= 0 across the window and sum 1/p(n) is known to
    diverge; a kappa that vanishes to rounding counts as <= 0.
    """
    if isinstance(aux, str):
        aux = get_aux(aux)
    bad = positivity_guard(seq, schedule, doubled=False)
    if bad:
        return bad
    window = [kummer_quantity(seq, aux, n, n + 1, 1.0) for n in schedule.tail]
    est = estimate_limits(lambda n: kummer_quantity(seq, aux, n, n + 1, 1.0)[0], schedule, extrapolate=True)
    pos, nonpos, zero = window_signs(window)
    wmin = min(v for v, _ in window)
    evidence = {
        "aux": aux.name,
        "kappa_window_min": wmin,
        "kappa_window_max": max(v for v, _ in window),
        "estimate": est.to_json(),
    }
    notes = ["'sufficiently large n' is the trailing window (sampled)"]
    if pos:
        tri = classify(est, 0.0)
        evidence["classification"] = tri_json(tri)
        if tri.above:
            evidence["r"] = 0.5 * wmin
            return Verdict(CONVERGES, evidence, notes)
        return Verdict(UNDECIDED, evidence, notes + ["kappa positive but not bounded away from 0"])
    if nonpos:
        if zero:
            notes.append("kappa vanishes to rounding; classified by the kappa <= 0 relaxation")
        if not aux.reciprocal_sum_diverges:
            return Verdict(UNDECIDED, evidence, notes + [f"divergence of sum 1/p(n) unknown for aux {aux.name!r}"])
        return Verdict(DIVERGES, evidence, notes)
    return Verdict(UNDECIDED, evidence, notes + ["kappa changes sign in window"])


def term_divergence_check(seq, schedule: IndexSchedule) -> Verdict:
    """Terms that never decrease (sampled) do not tend to zero: diverges."""
    logs = [seq.term(n).log for n in schedule.tail]
    rising = all(b >= a - 1e-9 * max(1.0, abs(a)) for a, b in zip(logs, logs[1:]))
    evidence = {"log_terms_first": logs[0], "log_terms_last": logs[-1]}
    if rising:
        return Verdict(DIVERGES, evidence, ["terms do not tend to zero (sampled non-decreasing window)"])
    return Verdict(UNDECIDED, evidence, ["terms decrease across the window"])


INNER_TESTS = {
    "ratio": ratio_test,
    "raabe": raabe_test,
    "gauss": gauss_test,
    "kummer": kummer_test,
    "term_divergence": term_divergence_check,
}


def condensation_test(
    spec: SeriesSpec,
    schedule: IndexSchedule,
    inner: str = "raabe",
    check_terms: bool = True,
) -> Verdict:
    """Cauchy condensation: run ``inner`` on ``b(k) = 2^k a(2^k)``.

    Requires a (sampled) monotone decreasing sequence. With ``check_terms``,
    condensed terms that do not decay decide divergence before the inner test.
    """
    if inner not in INNER_TESTS:
        raise ValueError(f"unknown inner test {inner!r}")
    bad = positivity_guard(spec, schedule, doubled=False)
    if bad:
        return bad
    mono = monotone_check(spec, schedule.indices)
    if not mono.ok:
        return inapplicable("monotone decreasing", witness=list(mono.witness))
    condensed = CondensedSequence(spec)
    cschedule = IndexSchedule(
        CONDENSED_SCHEDULE.n0, CONDENSED_SCHEDULE.growth, CONDENSED_SCHEDULE.count, schedule.window
    )
    evidence = {"monotone": mono.to_json(), "condensed_schedule": cschedule.to_json(), "inner": inner}
    try:
        if check_terms or inner == "term_divergence":
            terms = term_divergence_check(condensed, cschedule)
            if terms.decisive or inner == "term_divergence":
                return Verdict(terms.variant, {**evidence, "terms": terms.evidence}, terms.notes)
        result = INNER_TESTS[inner](condensed, cschedule)
    except DomainError as exc:
        return Verdict(UNDECIDED, evidence, [f"condensed sequence not evaluable: {exc}"])
    return Verdict(
        result.variant,
        {**evidence, "inner_evidence": result.evidence},
        [f"forwarded from inner {inner} test on 2^k a(2^k)", *result.notes],
    )


@dataclass(frozen=True)
class ComparisonReport:
    relation: str  # "A<=B" | "B<=A" | "mixed" | "inapplicable"
    equal: bool
    indices_checked: int
    detail: dict

    def to_json(self) -> dict:
        return {"relation": self.relation, "equal": self.equal, "indices_checked": self.indices_checked, **self.detail}


def second_ratio_comparison(spec_a, spec_b, schedule: IndexSchedule) -> ComparisonReport:
    """Check ``a(2n)/a(n) <= b(2n)/b(n)`` and ``a(2n+1)/a(n) <= b(2n+1)/b(n)``
    at every window index, in both directions."""
    for label, s in (("A", spec_a), ("B", spec_b)):
        bad = check_positivity(s, schedule.indices)
        if bad is not None:
            return ComparisonReport("inapplicable", False, 0, {"precondition": "positivity", "series": label, "index": bad})
    tol = 1e-14
    a_le_b = b_le_a = True
    equal = True
    for n in schedule.tail:
        for m in (2 * n, 2 * n + 1):
            la, lb = spec_a.log_ratio(n, m), spec_b.log_ratio(n, m)
            a_le_b &= la <= lb + tol
            b_le_a &= lb <= la + tol
            equal &= abs(la - lb) <= tol
    if a_le_b:
        relation = "A<=B"
    elif b_le_a:
        relation = "B<=A"
    else:
        relation = "mixed"
    detail = {"note": "equality on both ratios"} if equal else {}
    return ComparisonReport(relation, equal, len(schedule.tail), detail)
