import math

import pytest

from serieslab.classical import (
    AUX_CATALOG,
    condensation_test,
    gauss_test,
    get_aux,
    kummer_quantity,
    kummer_test,
    raabe_test,
    ratio_test,
    second_ratio_comparison,
)
from serieslab.corpus import builtin_corpus
from serieslab.expr import SeriesSpec
from serieslab.sequences import DEFAULT_SCHEDULE, IndexSchedule, monotone_check
from serieslab.verdict import CONVERGES, DECISIVE, DIVERGES, INAPPLICABLE, INCONCLUSIVE, UNDECIDED

SCHED = DEFAULT_SCHEDULE


def S(source, first_index=None):
    return SeriesSpec.from_source(source, first_index)


def v(verdict):
    return verdict.variant


# -- ratio --------------------------------------------------------------------


@pytest.mark.parametrize(
    "source, expected",
    [("(1/2)^n", CONVERGES), ("n", INCONCLUSIVE), ("1/n", INCONCLUSIVE), ("1.1^n", DIVERGES)],
)
def test_ratio_examples(source, expected):
    assert v(ratio_test(S(source), SCHED)) == expected


def test_ratio_limsup_reported():
    ev = ratio_test(S("(1/2)^n"), SCHED).evidence
    assert ev["estimate"]["limsup"] == pytest.approx(0.5)
    assert ev["threshold"] == 1.0


def test_positivity_violation_is_inapplicable():
    res = ratio_test(S("ln(n)-1"), IndexSchedule(n0=2, count=20))
    assert v(res) == INAPPLICABLE
    assert res.evidence["precondition"] == "positivity" and res.evidence["index"] == 2


# -- Raabe --------------------------------------------------------------------


@pytest.mark.parametrize(
    "source, expected, rho",
    [("1/n^2", CONVERGES, 2.0), ("1/n", INCONCLUSIVE, 1.0), ("1/sqrt(n)", DIVERGES, 0.5)],
)
def test_raabe_examples(source, expected, rho):
    res = raabe_test(S(source), SCHED)
    assert v(res) == expected
    est = res.evidence["estimate"]
    assert est["liminf"] == pytest.approx(rho, abs=1e-6)


# -- Gauss --------------------------------------------------------------------


def test_gauss_harmonic_diverges_at_boundary():
    res = gauss_test(S("1/n"), SCHED, 1.0)
    assert v(res) == DIVERGES
    fit = res.evidence["fit"]
    assert fit["beta_hat"]["liminf"] == pytest.approx(1.0, abs=1e-9)
    # gamma(n) = n/(n+1) is bounded
    assert fit["residual_bound"] == pytest.approx(1.0, abs=1e-3)


def test_gauss_p2_converges():
    res = gauss_test(S("1/n^2"), SCHED, 1.0)
    assert v(res) == CONVERGES
    assert res.evidence["fit"]["beta_hat"]["liminf"] == pytest.approx(2.0, abs=1e-9)


def test_gauss_geometric_reports_unbounded_beta():
    res = gauss_test(S("(1/2)^n"), SCHED, 1.0)
    assert v(res) == CONVERGES
    assert any(">>" in note for note in res.notes)


def test_gauss_rejects_growing_residual():
    # at lambda = 2 the 3/n^2 term of n^2/(n+1)^2 forces gamma(n) ~ 3n
    res = gauss_test(S("1/n^2"), SCHED, 2.0)
    assert v(res) == UNDECIDED
    assert res.evidence["fit"]["residual_trend"] > 1.5


def test_gauss_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        gauss_test(S("1/n"), SCHED, 0.0)


# -- Kummer ---------------------------------------------------------------------


def test_aux_catalog_names():
    assert sorted(AUX_CATALOG) == ["inv_n", "n", "n_log_n", "one"]
    with pytest.raises(ValueError):
        get_aux("n_squared")


def test_aux_known_facts():
    assert get_aux("n").reciprocal_sum_diverges and not get_aux("n").condensed_reciprocal_diverges
    assert get_aux("n_log_n").reciprocal_sum_diverges
    assert get_aux("inv_n").condensed_reciprocal_diverges
    # sum 1/(2^k * 1) is geometric: converges
    assert not get_aux("one").condensed_reciprocal_diverges


def test_kummer_geometric_with_one():
    res = kummer_test(S("(1/2)^n"), SCHED, "one")
    assert v(res) == CONVERGES
    assert res.evidence["kappa_window_min"] == pytest.approx(1.0)
    assert res.evidence["r"] == pytest.approx(0.5)


def test_kummer_harmonic_zero_boundary():
    res = kummer_test(S("1/n"), SCHED, "n")
    assert v(res) == DIVERGES
    assert any("relaxation" in note for note in res.notes)
    kappa, scale = kummer_quantity(S("1/n"), get_aux("n"), 10**12, 10**12 + 1, 1.0)
    assert abs(kappa) <= 1e-9 * scale


def test_kummer_p2_with_n():
    res = kummer_test(S("1/n^2"), SCHED, "n")
    assert v(res) == CONVERGES
    assert res.evidence["kappa_window_min"] == pytest.approx(1.0, abs=1e-6)


def test_kummer_generalizes_ratio_on_corpus():
    for entry in builtin_corpus():
        if v(ratio_test(entry.spec, SCHED)) == CONVERGES:
            assert v(kummer_test(entry.spec, SCHED, "one")) == CONVERGES, entry.id


# -- condensation ---------------------------------------------------------------


def test_condensation_examples():
    assert v(condensation_test(S("1/n^2"), SCHED, "ratio")) == CONVERGES
    res = condensation_test(S("1/n"), SCHED, "ratio", check_terms=False)
    assert v(res) == INCONCLUSIVE
    res = condensation_test(S("1/n"), SCHED, "ratio")
    assert v(res) == DIVERGES and "terms" in res.evidence
    assert v(condensation_test(S("1/(n*ln(n)^2)", 2), SCHED, "raabe")) == CONVERGES


def test_condensation_requires_monotone():
    res = condensation_test(S("n/(n+1)"), SCHED)
    assert v(res) == INAPPLICABLE
    assert res.evidence["witness"][0] == 1


def test_condensation_matches_truth_when_decisive():
    for entry in builtin_corpus():
        if not monotone_check(entry.spec, SCHED.indices).ok:
            continue
        res = condensation_test(entry.spec, SCHED)
        if res.variant in DECISIVE:
            assert res.variant == entry.truth, entry.id


# -- second ratio comparison ---------------------------------------------------


def test_comparison_examples():
    rep = second_ratio_comparison(S("1/n^2"), S("1/n"), SCHED)
    assert rep.relation == "A<=B" and not rep.equal
    rep = second_ratio_comparison(S("1/n"), S("1/n"), SCHED)
    assert rep.relation == "A<=B" and rep.equal and "equality" in rep.to_json()["note"]
    assert second_ratio_comparison(S("1/n"), S("1/n^2"), SCHED).relation == "B<=A"


def test_comparison_mixed_and_inapplicable():
    rep = second_ratio_comparison(S("(2+(-1)^n)/n^2"), S("1/n^2"), SCHED)
    assert rep.relation == "mixed"
    low = IndexSchedule(n0=2, count=20)
    assert second_ratio_comparison(S("ln(n)-1"), S("1/n"), low).relation == "inapplicable"


# -- soundness ----------------------------------------------------------------------


@pytest.mark.parametrize("test", [ratio_test, raabe_test, gauss_test, kummer_test, condensation_test])
def test_classical_soundness_on_corpus(test):
    for entry in builtin_corpus():
        res = test(entry.spec, SCHED)
        if res.variant in DECISIVE:
            assert res.variant == entry.truth, (test.__name__, entry.id)
