import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import load_json
from evgr.errors import (
    CoverageMismatch,
    DegenerateMarginals,
    EmptyTable,
    LengthMismatch,
    OutOfRange,
    ZeroVariance,
)
from evgr.irr import (
    ContingencyTable2x2,
    bonferroni,
    build_table,
    cohen_kappa,
    concept_count,
    irr_report,
    landis_koch_label,
    paired_t_test,
    pooled_irr,
    question_items,
    regularized_incomplete_beta,
    t_two_tailed_p,
)
from evgr.rubric import CONCEPTS, Concept, Corpus, Phase, RaterRecord, Response, ScoreVector

T_TABLE = load_json("t_pvalues.json")["rows"]


def _question_corpus(n_students=34, qid="Q1"):
    return Corpus([
        Response(f"{qid}-{s}-{p}", f"s{s}", qid, Phase(p), "x") for s in range(n_students) for p in ("pre", "post")
    ])


def test_build_table_examples():
    flags = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
    rec = RaterRecord("a", {f"r{i}": ScoreVector((f,) + (0,) * 8) for i, f in enumerate(flags)})
    items = [(f"r{i}", Concept.VARIATION) for i in range(10)]
    assert build_table(rec, rec, items) == ContingencyTable2x2(3, 0, 0, 7)
    assert build_table(rec, rec, []) == ContingencyTable2x2(0, 0, 0, 0)
    with pytest.raises(CoverageMismatch):
        build_table(rec, RaterRecord("b"), items)


def test_pooled_items_for_68_responses():
    corpus = _question_corpus()
    items = question_items(corpus, "Q1")
    assert len(items) == len({(r, c) for r, c in items}) == 68 * 9 == 612
    rec = RaterRecord("a", {rid: ScoreVector.zeros() for rid in corpus.ids})
    assert build_table(rec, rec, items).n == 612


def test_kappa_perfect_agreement():
    assert cohen_kappa(ContingencyTable2x2(5, 0, 0, 5)).kappa == 1.0


def test_kappa_ten_percent_marginals():
    # each rater marks 10 of 100 items positive
    for a in range(11):
        t = ContingencyTable2x2(a, 10 - a, 10 - a, 80 + a)
        assert abs(cohen_kappa(t).p_expected - 0.82) <= 1e-12


def test_kappa_hand_computed_table():
    r = cohen_kappa(ContingencyTable2x2(20, 5, 10, 65))
    assert abs(r.p_observed - 0.85) <= 1e-12
    assert abs(r.p_expected - 0.60) <= 1e-12
    assert abs(r.kappa - 0.625) <= 1e-12
    se = math.sqrt(0.85 * 0.15 / (100 * 0.4 ** 2))
    assert r.se == pytest.approx(se, abs=1e-12)
    assert r.se == pytest.approx(0.0893, abs=1e-4)
    assert r.ci_low == pytest.approx(0.450, abs=1e-3)
    assert r.ci_high == pytest.approx(0.800, abs=1e-3)
    wide = cohen_kappa(ContingencyTable2x2(20, 5, 10, 65), confidence=0.99)
    assert wide.ci_high - wide.ci_low > r.ci_high - r.ci_low


def test_kappa_errors():
    with pytest.raises(EmptyTable):
        cohen_kappa(ContingencyTable2x2())
    with pytest.raises(DegenerateMarginals):
        cohen_kappa(ContingencyTable2x2(0, 0, 0, 9))
    with pytest.raises(OutOfRange):
        cohen_kappa(ContingencyTable2x2(1, 0, 0, 1), confidence=1.0)
    with pytest.raises(OutOfRange):
        ContingencyTable2x2(-1, 0, 0, 0)


_counts = st.integers(0, 60)


@given(_counts, _counts, _counts, _counts)
def test_kappa_properties(a, b, c, d):
    t = ContingencyTable2x2(a, b, c, d)
    assume(t.n > 0)
    try:
        r = cohen_kappa(t)
    except DegenerateMarginals:
        return
    assert -1.0 - 1e-12 <= r.kappa <= 1.0 + 1e-12
    assert (abs(r.kappa - 1.0) < 1e-12) == (b == 0 and c == 0)
    assert r.ci_low <= r.kappa <= r.ci_high
    assert r.kappa - r.ci_low == pytest.approx(r.ci_high - r.kappa, abs=1e-12)
    swapped = cohen_kappa(t.category_swapped())
    assert swapped.kappa == pytest.approx(r.kappa, abs=1e-12)
    tr = cohen_kappa(t.transposed())
    assert (tr.kappa, tr.se, tr.ci_low, tr.ci_high) == pytest.approx((r.kappa, r.se, r.ci_low, r.ci_high), abs=1e-12)


@given(st.integers(1, 40), st.integers(1, 40))
def test_kappa_zero_at_chance(p, q):
    # outer-product table: observed agreement equals the chance expectation
    t = ContingencyTable2x2(p * p, p * q, p * q, q * q)
    r = cohen_kappa(t)
    assert r.p_observed == pytest.approx(r.p_expected, abs=1e-15)
    assert abs(r.kappa) <= 1e-12


def test_t_test_examples():
    r = paired_t_test([1, -1, 1, -1], [0, 0, 0, 0])
    assert r.t == 0.0 and r.p_two_tailed == 1.0 and r.df == 3
    r = paired_t_test([1, 2, 3, 4], [0, 0, 0, 0])
    assert r.t == pytest.approx(3.873, abs=5e-4) and r.df == 3
    assert r.p_two_tailed == pytest.approx(0.0305, abs=5e-5)
    assert r.mean_difference == 2.5 and r.sd_difference == pytest.approx(math.sqrt(5 / 3))


def test_t_test_errors():
    with pytest.raises(LengthMismatch):
        paired_t_test([1, 2], [1])
    with pytest.raises(ZeroVariance):
        paired_t_test([1, 2, 3], [1, 2, 3])
    with pytest.raises(ZeroVariance):
        paired_t_test([2, 3, 4], [1, 2, 3])


def test_p_values_match_frozen_integration_oracle():
    worst = max(abs(t_two_tailed_p(r["t"], r["df"]) - r["p"]) for r in T_TABLE)
    assert worst <= 1e-8


def test_incomplete_beta_edges():
    assert regularized_incomplete_beta(0.0, 2, 3) == 0.0
    assert regularized_incomplete_beta(1.0, 2, 3) == 1.0
    # I_x(1, 1) = x and I_x(a, 1) = x^a
    assert regularized_incomplete_beta(0.3, 1, 1) == pytest.approx(0.3, abs=1e-14)
    assert regularized_incomplete_beta(0.3, 2.5, 1) == pytest.approx(0.3 ** 2.5, abs=1e-14)
    with pytest.raises(OutOfRange):
        regularized_incomplete_beta(1.2, 1, 1)


_samples = st.lists(st.integers(-20, 20), min_size=2, max_size=30)


@given(_samples, st.data(), st.integers(-1000, 1000))
def test_t_test_properties(x, data, shift):
    y = data.draw(st.lists(st.integers(-20, 20), min_size=len(x), max_size=len(x)))
    diffs = [a - b for a, b in zip(x, y)]
    assume(len(set(diffs)) > 1)
    r = paired_t_test(x, y)
    back = paired_t_test(y, x)
    assert back.t == -r.t and back.p_two_tailed == r.p_two_tailed
    moved = paired_t_test([a + shift for a in x], [b + shift for b in y])
    assert moved == r
    assert 0.0 <= r.p_two_tailed <= 1.0


def test_bonferroni_examples():
    assert bonferroni([0.5]) == [0.5]
    assert bonferroni([0.3, 0.4]) == [0.6, 0.8]
    assert bonferroni([0.00117, 0.2, 0.3, 0.9])[0] == pytest.approx(0.00468)
    with pytest.raises(OutOfRange):
        bonferroni([1.5])


@given(st.lists(st.floats(0, 1), min_size=1, max_size=20))
def test_bonferroni_properties(ps):
    adj = bonferroni(ps)
    m = len(ps)
    assert adj == [min(1.0, m * p) for p in ps]
    for pi, ai in zip(ps, adj):
        for pj, aj in zip(ps, adj):
            if pi <= pj:
                assert ai <= aj
    assert all(a <= 1.0 for a in adj)


@pytest.mark.parametrize("kappa, label", [
    (0.63, "substantial"), (0.55, "moderate"), (1.0, "almost perfect"), (-0.3, "poor"), (0.0, "poor"),
    (0.2, "slight"), (0.2000001, "fair"), (0.4, "fair"), (0.6, "moderate"), (0.8, "substantial"), (0.81, "almost perfect"),
])
def test_landis_koch(kappa, label):
    assert landis_koch_label(kappa) == label


def test_landis_koch_range():
    with pytest.raises(OutOfRange):
        landis_koch_label(1.5)


def test_concept_counts():
    assert concept_count(ScoreVector.zeros(), "KC") == concept_count(ScoreVector.zeros(), "NI") == 0
    ones = ScoreVector((1,) * 9)
    assert concept_count(ones, "KC") == 6 and concept_count(ones, "NI") == 3


def _raters(corpus, seed):
    import random
    rnd = random.Random(seed)
    machine = RaterRecord("machine")
    consensus = RaterRecord("consensus")
    for rid in corpus.ids:
        flags = tuple(rnd.random() < 0.3 for _ in CONCEPTS)
        machine.assignments[rid] = ScoreVector(flags)
        noisy = tuple(f if rnd.random() < 0.85 else 1 - f for f in flags)
        consensus.assignments[rid] = ScoreVector(noisy)
    return machine, consensus


def test_pooled_identical_raters():
    corpus = _question_corpus(10)
    machine, _ = _raters(corpus, 1)
    for subset in ("all", "KC", "NI"):
        assert pooled_irr(machine, machine, corpus, "Q1", subset).kappa == 1.0


def test_pooled_irr_matches_manual_table():
    corpus = _question_corpus(34)
    machine, consensus = _raters(corpus, 2)
    r = pooled_irr(machine, consensus, corpus, "Q1", "KC")
    a = b = c = d = 0
    for rid in corpus.ids:
        for concept in CONCEPTS[:6]:
            m, h = machine[rid][concept], consensus[rid][concept]
            a += m and h
            b += m and not h
            c += h and not m
            d += not m and not h
    assert r.n_items == 68 * 6
    assert r.kappa == cohen_kappa(ContingencyTable2x2(a, b, c, d)).kappa
    pre = pooled_irr(machine, consensus, corpus, "Q1", "all", phase="pre")
    assert pre.n_items == 34 * 9


def test_irr_report_structure():
    corpus = Corpus(list(_question_corpus(34, "Q1")) + list(_question_corpus(36, "Q2")))
    machine, consensus = _raters(corpus, 3)
    rep = irr_report(machine, consensus, corpus)
    assert [(k["question"], k["subset"]) for k in rep["kappa"]] == [
        (q, s) for q in ("Q1", "Q2") for s in ("all", "KC", "NI")
    ]
    assert [t["comparison"] for t in rep["t_tests"]] == ["Q1 KC", "Q1 NI", "Q2 KC", "Q2 NI"]
    assert [t["df"] for t in rep["t_tests"]] == [67, 67, 71, 71]
    ps = [t["p"] for t in rep["t_tests"]]
    assert [t["adj_p"] for t in rep["t_tests"]] == bonferroni(ps)
    for row in rep["kappa"]:
        assert row["ci"][0] <= row["kappa"] <= row["ci"][1]
        assert row["label"] == landis_koch_label(row["kappa"])


def test_irr_report_degenerate_rows_are_null():
    corpus = _question_corpus(5)
    same = RaterRecord("m", {rid: ScoreVector.zeros() for rid in corpus.ids})
    rep = irr_report(same, same, corpus)
    assert all(k["kappa"] is None and k["label"] is None for k in rep["kappa"])
    assert all(t["t"] is None and t["adj_p"] is None for t in rep["t_tests"])


def test_irr_report_optional_breakdowns():
    corpus = _question_corpus(20)
    machine, consensus = _raters(corpus, 4)
    rep = irr_report(machine, consensus, corpus, per_concept=True, per_phase=True)
    assert [r["concept"] for r in rep["concept_kappa"]] == [c.value for c in CONCEPTS]
    assert all(r["n_items"] == 40 for r in rep["concept_kappa"])
    assert {(r["phase"], r["subset"]) for r in rep["phase_kappa"]} == {
        (p, s) for p in ("pre", "post") for s in ("all", "KC", "NI")
    }
    assert "concept_kappa" not in irr_report(machine, consensus, corpus)
