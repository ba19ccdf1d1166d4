"""Concept co-occurrence counts and concept-map data export.

Exports are data only: node sizes as the percentage of responses containing
a concept, edges as raw co-occurrence counts and percentages. Rendering is
left to whatever consumes the JSON.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyInput
from .rubric import CONCEPTS, Concept, Corpus, Phase, RaterRecord, ScoreVector


@dataclass(frozen=True)
class CooccurrenceMatrix:
    counts: tuple[tuple[int, ...], ...]
    n_responses: int

    def __getitem__(self, pair: tuple[Concept | str, Concept | str]) -> int:
        i, j = (CONCEPTS.index(Concept(c)) for c in pair)
        return self.counts[i][j]

    def to_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)


def cooccurrence(scores: Sequence[ScoreVector]) -> CooccurrenceMatrix:
    if not scores:
        raise EmptyInput("co-occurrence needs at least one score vector")
    S = np.array([sv.flags for sv in scores], dtype=np.int64)
    M = S.T @ S
    return CooccurrenceMatrix(tuple(tuple(int(v) for v in row) for row in M), len(scores))


@dataclass(frozen=True)
class ConceptMapExport:
    question_id: str
    phase: str
    n_responses: int
    nodes: tuple[dict, ...]
    edges: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "phase": self.phase,
            "n_responses": self.n_responses,
            "nodes": list(self.nodes),
            "edges": list(self.edges),
        }

    @classmethod
    def from_dict(cls, d: dict) -> ConceptMapExport:
        return cls(d["question_id"], d["phase"], int(d["n_responses"]), tuple(d["nodes"]), tuple(d["edges"]))


def export_concept_map(matrix: CooccurrenceMatrix, question_id: str, phase: str = "all") -> ConceptMapExport:
    n = matrix.n_responses
    if n < 1:
        raise EmptyInput("concept map needs at least one response")
    nodes = tuple(
        {"concept": c.value, "count": matrix.counts[i][i], "percent": 100.0 * matrix.counts[i][i] / n}
        for i, c in enumerate(CONCEPTS)
    )
    edges = []
    for i in range(len(CONCEPTS)):
        for j in range(i + 1, len(CONCEPTS)):
            count = matrix.counts[i][j]
            if count > 0:
                edges.append({
                    "concept_a": CONCEPTS[i].value,
                    "concept_b": CONCEPTS[j].value,
                    "count": count,
                    "percent": 100.0 * count / n,
                })
    return ConceptMapExport(question_id, str(phase), n, nodes, tuple(edges))


def matrix_from_export(export: ConceptMapExport) -> CooccurrenceMatrix:
    """Rebuild the co-occurrence matrix from an export."""
    k = len(CONCEPTS)
    M = [[0] * k for _ in range(k)]
    for node in export.nodes:
        i = CONCEPTS.index(Concept(node["concept"]))
        M[i][i] = int(node["count"])
    for e in export.edges:
        i = CONCEPTS.index(Concept(e["concept_a"]))
        j = CONCEPTS.index(Concept(e["concept_b"]))
        M[i][j] = M[j][i] = int(e["count"])
    return CooccurrenceMatrix(tuple(tuple(r) for r in M), export.n_responses)


def concept_maps(corpus: Corpus, record: RaterRecord, phases: Sequence[str] = ("pre", "post")) -> list[ConceptMapExport]:
    """One concept map per question and phase; empty slices are skipped."""
    maps = []
    for q in corpus.questions():
        for phase in phases:
            part = corpus.filter(q, None if phase == "all" else Phase(phase))
            if len(part) == 0:
                continue
            matrix = cooccurrence([record[r.response_id] for r in part])
            maps.append(export_concept_map(matrix, q, phase))
    return maps
