"""Agreement and difference statistics between two raters.

Cohen's kappa over pooled (response, concept) items with an asymptotic
confidence interval, two-tailed paired t-tests, Bonferroni adjustment and
Landis-Koch qualitative bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable, Sequence

from .errors import (
    CoverageMismatch,
    DegenerateMarginals,
    EmptyTable,
    LengthMismatch,
    OutOfRange,
    ZeroVariance,
)
from .rubric import CONCEPTS, Concept, ConceptClass, Corpus, Phase, RaterRecord, ScoreVector, concepts_of


@dataclass(frozen=True)
class ContingencyTable2x2:
    """Counts of (rater1, rater2) outcomes: a=(1,1), b=(1,0), c=(0,1), d=(0,0)."""

    a: int = 0
    b: int = 0
    c: int = 0
    d: int = 0

    def __post_init__(self) -> None:
        if min(self.a, self.b, self.c, self.d) < 0:
            raise OutOfRange("contingency counts must be non-negative")

    @property
    def n(self) -> int:
        return self.a + self.b + self.c + self.d

    def transposed(self) -> ContingencyTable2x2:
        return ContingencyTable2x2(self.a, self.c, self.b, self.d)

    def category_swapped(self) -> ContingencyTable2x2:
        return ContingencyTable2x2(self.d, self.c, self.b, self.a)


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    p_observed: float
    p_expected: float
    se: float
    ci_low: float
    ci_high: float
    n_items: int
    confidence: float = 0.95


@dataclass(frozen=True)
class PairedTTestResult:
    t: float
    df: int
    p_two_tailed: float
    mean_difference: float
    sd_difference: float


def build_table(r1: RaterRecord, r2: RaterRecord, items: Iterable[tuple[str, Concept]]) -> ContingencyTable2x2:
    a = b = c = d = 0
    for rid, concept in items:
        if rid not in r1 or rid not in r2:
            raise CoverageMismatch(f"response {rid!r} not scored by both raters")
        v1, v2 = r1[rid][concept], r2[rid][concept]
        if v1 and v2:
            a += 1
        elif v1:
            b += 1
        elif v2:
            c += 1
        else:
            d += 1
    return ContingencyTable2x2(a, b, c, d)


def cohen_kappa(table: ContingencyTable2x2, confidence: float = 0.95) -> KappaResult:
    """Cohen's kappa with the large-sample standard error

    ``se = sqrt(p_o (1 - p_o) / (n (1 - p_e)^2))`` and a normal interval
    ``kappa +/- z * se``.
    """
    n = table.n
    if n == 0:
        raise EmptyTable("kappa is undefined on an empty table")
    if not 0.0 < confidence < 1.0:
        raise OutOfRange(f"confidence must be in (0, 1), got {confidence}")
    p_o = (table.a + table.d) / n
    p_e = ((table.a + table.b) / n) * ((table.a + table.c) / n) + ((table.c + table.d) / n) * ((table.b + table.d) / n)
    if p_e >= 1.0:
        raise DegenerateMarginals("both raters gave one constant, identical score; kappa is undefined")
    kappa = (p_o - p_e) / (1.0 - p_e)
    se = math.sqrt(p_o * (1.0 - p_o) / (n * (1.0 - p_e) ** 2))
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    return KappaResult(
        kappa=kappa,
        p_observed=p_o,
        p_expected=p_e,
        se=se,
        ci_low=kappa - z * se,
        ci_high=kappa + z * se,
        n_items=n,
        confidence=confidence,
    )


def question_items(
    corpus: Corpus,
    question_id: str,
    subset: str = "all",
    phase: Phase | str | None = None,
) -> list[tuple[str, Concept]]:
    """(response, concept) pairs for one question; both phases pooled unless ``phase`` is given."""
    concepts = CONCEPTS if subset == "all" else concepts_of(subset)
    return [
        (r.response_id, c)
        for r in corpus.filter(question_id, phase)
        for c in concepts
    ]


def pooled_irr(
    machine: RaterRecord,
    consensus: RaterRecord,
    corpus: Corpus,
    question_id: str,
    subset: str = "all",
    *,
    phase: Phase | str | None = None,
    confidence: float = 0.95,
) -> KappaResult:
    """Kappa for one question over all its (response, concept) items.

    ``subset`` is ``"all"``, ``"KC"`` or ``"NI"``. Pre and post responses are
    pooled; pass ``phase`` to restrict to one.
    """
    items = question_items(corpus, question_id, subset, phase)
    return cohen_kappa(build_table(machine, consensus, items), confidence)


def concept_irr(
    machine: RaterRecord,
    consensus: RaterRecord,
    corpus: Corpus,
    question_id: str,
    concept: Concept | str,
    confidence: float = 0.95,
) -> KappaResult:
    """Kappa for a single concept within a question. Not part of the default report."""
    concept = Concept(concept)
    items = [(r.response_id, concept) for r in corpus.filter(question_id)]
    return cohen_kappa(build_table(machine, consensus, items), confidence)


# --- t distribution -------------------------------------------------------------

_FPMIN = 1e-300
_CF_EPS = 1e-16


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not 0.0 <= x <= 1.0:
        raise OutOfRange(f"x must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_tailed_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise OutOfRange("df must be positive")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return min(1.0, regularized_incomplete_beta(x, df / 2.0, 0.5))


def paired_t_test(x: Sequence[float], y: Sequence[float]) -> PairedTTestResult:
    """Two-tailed paired t-test on ``x - y``. Positive t means x is larger."""
    if len(x) != len(y):
        raise LengthMismatch(f"paired samples differ in length: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise LengthMismatch("paired t-test needs at least two pairs")
    diffs = [float(a) - float(b) for a, b in zip(x, y)]
    if all(d == diffs[0] for d in diffs):
        raise ZeroVariance("all paired differences are equal")
    mean = math.fsum(diffs) / n
    var = math.fsum((d - mean) ** 2 for d in diffs) / (n - 1)
    sd = math.sqrt(var)
    t = mean / (sd / math.sqrt(n))
    df = n - 1
    return PairedTTestResult(t=t, df=df, p_two_tailed=t_two_tailed_p(t, df), mean_difference=mean, sd_difference=sd)


def bonferroni(p_values: Sequence[float]) -> list[float]:
    m = len(p_values)
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise OutOfRange(f"p-value {p} outside [0, 1]")
    return [min(1.0, m * p) for p in p_values]


_BANDS = (
    (0.0, "poor"),
    (0.2, "slight"),
    (0.4, "fair"),
    (0.6, "moderate"),
    (0.8, "substantial"),
    (1.0, "almost perfect"),
)


def landis_koch_label(kappa: float) -> str:
    """Qualitative band; each boundary belongs to the band below it."""
    if not -1.0 <= kappa <= 1.0:
        raise OutOfRange(f"kappa {kappa} outside [-1, 1]")
    for upper, label in _BANDS:
        if kappa <= upper:
            return label
    return _BANDS[-1][1]


def concept_count(score: ScoreVector, cls: ConceptClass | str) -> int:
    return score.count(cls)


def class_counts(record: RaterRecord, corpus: Corpus, question_id: str, cls: ConceptClass | str) -> list[int]:
    """Per-response concept counts for one question, in corpus order."""
    return [concept_count(record[r.response_id], cls) for r in corpus.filter(question_id)]


# --- report assembly ----------------------------------------------------------------


def kappa_row(question_id: str, subset: str, result: KappaResult) -> dict:
    return {
        "question": question_id,
        "subset": subset,
        "kappa": result.kappa,
        "ci": [result.ci_low, result.ci_high],
        "label": landis_koch_label(max(-1.0, min(1.0, result.kappa))),
        "n_items": result.n_items,
    }


def irr_report(
    machine: RaterRecord,
    consensus: RaterRecord,
    corpus: Corpus,
    question_ids: Sequence[str] | None = None,
    confidence: float = 0.95,
    *,
    per_concept: bool = False,
    per_phase: bool = False,
) -> dict:
    """Kappa rows for every question and subset, plus t-test rows with Bonferroni adjustment.

    t-tests compare per-response KC and NI counts, consensus minus machine, so
    a positive t means the humans found more. Statistics that are undefined
    for the data (constant marginals, zero-variance differences) are reported
    as null. ``per_concept`` and ``per_phase`` add the finer-grained kappas
    that are left out by default.
    """
    questions = list(question_ids) if question_ids else corpus.questions()
    kappas = []
    tests = []
    for q in questions:
        for subset in ("all", "KC", "NI"):
            kappas.append(_safe_kappa_row(
                q, subset,
                lambda: pooled_irr(machine, consensus, corpus, q, subset, confidence=confidence),
                len(question_items(corpus, q, subset)),
            ))
        for cls in ("KC", "NI"):
            row = {"comparison": f"{q} {cls}", "t": None, "df": None, "p": None, "adj_p": None}
            try:
                res = paired_t_test(
                    class_counts(consensus, corpus, q, cls),
                    class_counts(machine, corpus, q, cls),
                )
            except (ZeroVariance, LengthMismatch):
                tests.append(row)
                continue
            row.update(t=res.t, df=res.df, p=res.p_two_tailed)
            tests.append(row)
    # undefined tests (t is 0/0) do not count toward the Bonferroni family
    defined = [row for row in tests if row["p"] is not None]
    for row, adj in zip(defined, bonferroni([r["p"] for r in defined])):
        row["adj_p"] = adj
    report = {"confidence": confidence, "kappa": kappas, "t_tests": tests}
    if per_concept:
        rows = []
        for q in questions:
            for c in CONCEPTS:
                row = _safe_kappa_row(q, c.value, lambda: concept_irr(machine, consensus, corpus, q, c, confidence),
                                      len(corpus.filter(q)))
                rows.append({"concept": row.pop("subset"), **row})
        report["concept_kappa"] = rows
    if per_phase:
        rows = []
        for q in questions:
            for phase in Phase:
                for subset in ("all", "KC", "NI"):
                    row = _safe_kappa_row(
                        q, subset,
                        lambda: pooled_irr(machine, consensus, corpus, q, subset, phase=phase, confidence=confidence),
                        len(question_items(corpus, q, subset, phase)),
                    )
                    rows.append({"phase": phase.value, **row})
        report["phase_kappa"] = rows
    return report


def _safe_kappa_row(question_id: str, subset: str, compute, n_items: int) -> dict:
    try:
        return kappa_row(question_id, subset, compute())
    except (DegenerateMarginals, EmptyTable):
        return {"question": question_id, "subset": subset, "kappa": None, "ci": None, "label": None, "n_items": n_items}
