import math

import mpmath as mp
import pytest

from serieslab.corpus import builtin_corpus
from serieslab.expr import SeriesSpec
from serieslab.limits import estimate_limits
from serieslab.second import (
    SECOND_RAABE_THRESHOLD,
    divergence_ratio_check,
    lemma_functional,
    second_gauss_test,
    second_kummer_test,
    second_raabe_functionals,
    second_raabe_limit_form,
    second_raabe_test,
    second_ratio_test,
    strict_second_ratio,
)
from serieslab.sequences import DEFAULT_SCHEDULE, IndexSchedule
from serieslab.verdict import CONVERGES, DECISIVE, DIVERGES, INAPPLICABLE, INCONCLUSIVE, UNDECIDED

SCHED = DEFAULT_SCHEDULE
LN2 = math.log(2)


def S(source, first_index=None):
    return SeriesSpec.from_source(source, first_index)


def v(verdict):
    return verdict.variant


def log_power_family(beta):
    """b(n) = 1/(n (ln n)^(2 beta/ln 2)), convergent iff beta > ln2/2."""
    return S(f"1/(n*ln(n)^({2 * beta / LN2!r}))", 2)


# -- second ratio ---------------------------------------------------------------


@pytest.mark.parametrize(
    "source, expected", [("(1/2)^n", CONVERGES), ("1/n", INCONCLUSIVE), ("1/sqrt(n)", DIVERGES)]
)
def test_second_ratio_examples(source, expected):
    assert v(second_ratio_test(S(source), SCHED)) == expected


def test_second_ratio_evidence_values():
    ev = second_ratio_test(S("1/sqrt(n)"), SCHED).evidence["second_ratio"]
    assert ev["l"] == pytest.approx(1 / math.sqrt(2), abs=1e-5)
    assert ev["l"] <= ev["L"]


# -- log-p functionals ---------------------------------------------------------


def test_lemma_p0_is_exactly_zero():
    for n in (2, 10, 10**6, 10**13):
        assert lemma_functional(0.0, 1.0, "eq1", n) == 0.0


def test_lemma_p2_finite_value_against_high_precision():
    mp.mp.dps = 40
    n = mp.mpf(10) ** 6
    exact = mp.log(n) * (mp.mpf(1) / 2 - (mp.log(n) / mp.log(2 * n)) ** 2 / 2)
    got = lemma_functional(2.0, 1.0, "eq1", 10**6)
    assert got == pytest.approx(float(exact), rel=1e-12)
    # first-order expansion ln2 - 6 (ln2)^2 / (4 ln n) = 0.641
    assert got < LN2 and abs(got - 0.641) < 0.005


@pytest.mark.parametrize("p", [-1.0, 0.5, 3.0])
@pytest.mark.parametrize("n", [3, 1000, 10**12])
def test_lemma_eq2_against_high_precision(p, n):
    mp.mp.dps = 40
    N = mp.mpf(n)
    exact = mp.log(N) * (mp.mpf(1) / 2 - N * mp.log(N) ** p / ((2 * N + 1) * mp.log(2 * N + 1) ** p))
    assert lemma_functional(p, 1.0, "eq2", n) == pytest.approx(float(exact), rel=1e-11, abs=1e-15)


def test_lemma_rejects_bad_arguments():
    with pytest.raises(ValueError):
        lemma_functional(1.0, 1.0, "eq1", 1)
    with pytest.raises(ValueError):
        lemma_functional(1.0, 0.0, "eq1", 10)
    with pytest.raises(ValueError):
        lemma_functional(1.0, 1.0, "eq3", 10)


@pytest.mark.parametrize("p", [-1.0, 0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("which", ["eq1", "eq2"])
def test_lemma_limits_are_lambda_independent(p, lam, which):
    est = estimate_limits(lambda n: lemma_functional(p, lam, which, n), SCHED, True, lam)
    target = p * LN2 / 2
    assert abs(est.liminf_hat - target) <= 0.02 and abs(est.limsup_hat - target) <= 0.02


# -- Second Raabe -----------------------------------------------------------------


def test_threshold_identity():
    assert SECOND_RAABE_THRESHOLD == math.log(2) / 2
    for source in ("1/n", "1/n^2", "(1/2)^n"):
        ev = second_raabe_test(S(source), SCHED).evidence["second_raabe"]
        assert ev["threshold"] == math.log(2) / 2


def test_second_raabe_harmonic():
    res = second_raabe_test(S("1/n"), SCHED)
    assert v(res) == DIVERGES
    ev = res.evidence["second_raabe"]
    assert abs(ev["M"]) <= 0.02
    # the even functional vanishes exactly: a(2n)/a(n) = 1/2
    assert second_raabe_functionals(S("1/n"), 10**9)[0] == 0.0


def test_second_raabe_log_p2():
    res = second_raabe_test(S("1/(n*ln(n)^2)", 2), SCHED)
    assert v(res) == CONVERGES
    ev = res.evidence["second_raabe"]
    assert ev["m"] == pytest.approx(LN2, abs=0.02) and ev["M"] == pytest.approx(LN2, abs=0.02)


def test_second_raabe_log_p_half():
    res = second_raabe_test(S("1/(n*ln(n)^0.5)", 2), SCHED)
    assert v(res) == DIVERGES
    assert res.evidence["second_raabe"]["M"] == pytest.approx(0.25 * LN2, abs=0.02)


def test_second_raabe_rejects_bad_lambda():
    with pytest.raises(ValueError):
        second_raabe_test(S("1/n"), SCHED, -1.0)
    with pytest.raises(ValueError):
        second_raabe_test(S("1/n"), IndexSchedule(n0=2), 0.25)


@pytest.mark.parametrize("beta, truth", [(0.2, DIVERGES), (0.30, DIVERGES), (0.40, CONVERGES), (0.6, CONVERGES)])
@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
def test_reduction_property(beta, truth, lam):
    res = second_raabe_test(log_power_family(beta), SCHED, lam)
    assert v(res) in (truth, UNDECIDED)
    if abs(beta - SECOND_RAABE_THRESHOLD) > 0.05:
        assert v(res) == truth


def test_near_threshold_never_decisive_wrongly():
    res = second_raabe_test(log_power_family(0.346), SCHED)
    assert v(res) in (UNDECIDED, INCONCLUSIVE)


def test_lambda_invariance_on_corpus():
    for entry in builtin_corpus():
        verdicts = {v(second_raabe_test(entry.spec, SCHED, lam)) for lam in (0.5, 1.0, 3.0)}
        if UNDECIDED not in verdicts:
            assert len(verdicts) == 1, (entry.id, verdicts)


# -- limit form --------------------------------------------------------------------


def test_limit_form_examples():
    assert v(second_raabe_limit_form(S("1/n"), SCHED)) == DIVERGES
    res = second_raabe_limit_form(S("1/(n*ln(n)^2)", 2), SCHED)
    assert v(res) == CONVERGES
    assert res.evidence["beta1"] == pytest.approx(LN2, abs=0.02)
    assert v(second_raabe_limit_form(S("1/(n*ln(n))", 2), SCHED)) == UNDECIDED


def test_limit_form_flags_unsettled_functional():
    res = second_raabe_limit_form(S("1/n^2"), SCHED)
    assert v(res) == UNDECIDED
    assert any("limits may not exist" in note for note in res.notes)


# -- Second Gauss --------------------------------------------------------------------


def test_second_gauss_examples():
    res = second_gauss_test(S("1/n"), SCHED)
    assert v(res) == DIVERGES
    assert res.evidence["fit"]["beta_hat"]["liminf"] == pytest.approx(0.0, abs=1e-9)
    res = second_gauss_test(S("1/(n*ln(n)^2)", 2), SCHED)
    assert v(res) == CONVERGES
    assert res.evidence["fit"]["beta_hat"]["liminf"] == pytest.approx(LN2, abs=0.02)


def test_second_gauss_boundary_case_is_never_wrong():
    # beta = ln2/2 exactly; the tight band needed by the <= clause is not
    # reached at this schedule depth, so the sound outcome is Undecided
    res = second_gauss_test(S("1/(n*ln(n))", 2), SCHED)
    assert v(res) in (DIVERGES, UNDECIDED)
    if v(res) == UNDECIDED:
        assert res.evidence["fit"]["beta_hat"]["liminf"] == pytest.approx(LN2 / 2, abs=0.02)


def test_second_gauss_requires_monotone_and_p_exp():
    res = second_gauss_test(S("n/(n+1)"), SCHED)
    assert v(res) == INAPPLICABLE
    with pytest.raises(ValueError):
        second_gauss_test(S("1/n"), SCHED, 1.0)


# -- Second Kummer and corollaries ---------------------------------------------------


def test_second_kummer_examples():
    res = second_kummer_test(S("1/n^2"), SCHED, "one")
    assert v(res) == CONVERGES
    assert res.evidence["kappa1_window"][0] == pytest.approx(2.0)
    assert res.evidence["kappa2_window"][0] > 2.0
    res = second_kummer_test(S("n/(n+1)"), SCHED, "inv_n")
    assert v(res) == DIVERGES and "kappa1" in res.evidence["negative"]
    assert v(second_kummer_test(S("1/n"), SCHED, "inv_n")) == UNDECIDED


def test_second_kummer_needs_condensed_fact():
    res = second_kummer_test(S("n/(n+1)"), SCHED, "n")
    assert v(res) == UNDECIDED


def test_strict_second_ratio_examples():
    res = strict_second_ratio(S("1/n^2"), SCHED)
    assert v(res) == CONVERGES
    assert res.evidence["r1"] == pytest.approx(2.0, abs=0.05)
    assert v(strict_second_ratio(S("1/n"), SCHED)) == UNDECIDED
    assert v(strict_second_ratio(S("(1/2)^n"), SCHED)) == CONVERGES


@pytest.mark.parametrize("source, expected", [("n", DIVERGES), ("n/(n+1)", DIVERGES), ("1/n", UNDECIDED)])
def test_divergence_ratio_examples(source, expected):
    assert v(divergence_ratio_check(S(source), SCHED)) == expected


def test_strict_corollary_consistent_with_second_ratio():
    for entry in builtin_corpus():
        if v(strict_second_ratio(entry.spec, SCHED)) == CONVERGES:
            res = second_ratio_test(entry.spec, SCHED)
            assert v(res) in (CONVERGES, UNDECIDED), entry.id
            if v(res) == UNDECIDED:
                assert res.evidence["second_ratio"]["L"] < 0.5


@pytest.mark.parametrize(
    "test",
    [
        second_ratio_test,
        second_raabe_test,
        second_raabe_limit_form,
        second_gauss_test,
        second_kummer_test,
        strict_second_ratio,
        divergence_ratio_check,
    ],
)
def test_second_soundness_on_corpus(test):
    for entry in builtin_corpus():
        res = test(entry.spec, SCHED)
        if res.variant in DECISIVE:
            assert res.variant == entry.truth, (test.__name__, entry.id)
