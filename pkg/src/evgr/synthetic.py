"""Synthetic corpora with known, linearly separable concept labels.

Each concept owns a marker word; a response mentions the marker iff the
concept is present. Filler words are drawn independently of the labels, so
any correct bag-of-words pipeline can score such a corpus perfectly.
"""

from __future__ import annotations

import numpy as np

from .rubric import CONCEPTS, Concept, Corpus, Phase, RaterRecord, Response, ScoreVector

# marker words survive stopword removal and stem to distinct, filler-free terms
MARKERS: dict[Concept, str] = {
    Concept.VARIATION: "mutations",
    Concept.HERITABILITY: "inherited",
    Concept.COMPETITION: "compete",
    Concept.LIMITED_RESOURCES: "scarce",
    Concept.DIFFERENTIAL_SURVIVAL: "survive",
    Concept.NON_ADAPTIVE: "drift",
    Concept.ADAPT: "acclimate",
    Concept.NEED: "needed",
    Concept.USE_DISUSE: "unused",
}

FILLER = (
    "bacteria", "population", "antibiotic", "mushroom", "toxin", "cells",
    "species", "generations", "environment", "explain", "biologists",
    "frequency", "individuals", "trait", "change", "time", "group", "chemical",
)


def separable_corpus(
    n: int = 100,
    seed: int = 0,
    questions: tuple[str, ...] = ("Q1",),
    p_present: float = 0.5,
) -> tuple[Corpus, RaterRecord]:
    """Build ``n`` responses and their ground-truth labels (rater ``"truth"``).

    Every concept is guaranteed both a positive and a negative response.
    """
    rng = np.random.default_rng(seed)
    flags = (rng.random((n, len(CONCEPTS))) < p_present).astype(int)
    for j in range(len(CONCEPTS)):
        flags[2 * j % n, j] = 1
        flags[(2 * j + 1) % n, j] = 0
    responses = []
    truth = RaterRecord("truth")
    for i in range(n):
        words = list(rng.choice(FILLER, size=int(rng.integers(3, 9))))
        words += [MARKERS[c] for c, f in zip(CONCEPTS, flags[i]) if f]
        rng.shuffle(words)
        rid = f"r{i:04d}"
        responses.append(
            Response(
                response_id=rid,
                student_id=f"s{i // 2:04d}",
                question_id=questions[(i // 2) % len(questions)],
                phase=Phase.PRE if i % 2 == 0 else Phase.POST,
                text=" ".join(words).capitalize() + ".",
            )
        )
        truth.assignments[rid] = ScoreVector(tuple(int(f) for f in flags[i]))
    return Corpus(tuple(responses)), truth
