"""Rubric and corpus domain types.

The nine rubric concepts are fixed: six key concepts followed by three naive
ideas. Declaration order is significant; it drives CSV column order, matrix
order in the co-occurrence report, and node order in concept-map exports.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import OffTargetViolation


class ConceptClass(str, enum.Enum):
    KEY_CONCEPT = "KeyConcept"
    NAIVE_IDEA = "NaiveIdea"


class Concept(str, enum.Enum):
    VARIATION = "Variation"
    HERITABILITY = "Heritability"
    COMPETITION = "Competition"
    LIMITED_RESOURCES = "LimitedResources"
    DIFFERENTIAL_SURVIVAL = "DifferentialSurvival"
    NON_ADAPTIVE = "NonAdaptive"
    ADAPT = "Adapt"
    NEED = "Need"
    USE_DISUSE = "UseDisuse"

    @property
    def concept_class(self) -> ConceptClass:
        return _CLASS_OF[self]

    def __str__(self) -> str:
        return self.value


CONCEPTS: tuple[Concept, ...] = tuple(Concept)
KEY_CONCEPTS: tuple[Concept, ...] = CONCEPTS[:6]
NAIVE_IDEAS: tuple[Concept, ...] = CONCEPTS[6:]
_CLASS_OF = {c: ConceptClass.KEY_CONCEPT for c in KEY_CONCEPTS} | {
    c: ConceptClass.NAIVE_IDEA for c in NAIVE_IDEAS
}
_POSITION = {c: i for i, c in enumerate(CONCEPTS)}


def concepts_of(cls: ConceptClass | str) -> tuple[Concept, ...]:
    """Concepts belonging to a class; accepts ``"KC"``/``"NI"`` shorthands."""
    key = {"KC": ConceptClass.KEY_CONCEPT, "NI": ConceptClass.NAIVE_IDEA}.get(str(cls), cls)
    return KEY_CONCEPTS if ConceptClass(key) is ConceptClass.KEY_CONCEPT else NAIVE_IDEAS


class Phase(str, enum.Enum):
    PRE = "pre"
    POST = "post"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ScoreVector:
    """Binary presence flags for the nine concepts of one response.

    ``flags`` is stored in concept declaration order. ``off_target`` marks a
    response that does not address the question; such a response carries no
    key-concept credit.
    """

    flags: tuple[int, ...]
    off_target: bool = False

    def __post_init__(self) -> None:
        flags = tuple(int(f) for f in self.flags)
        if len(flags) != len(CONCEPTS):
            raise ValueError(f"expected {len(CONCEPTS)} flags, got {len(flags)}")
        if any(f not in (0, 1) for f in flags):
            raise ValueError(f"flags must be 0/1, got {flags}")
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "off_target", bool(self.off_target))

    @classmethod
    def from_mapping(cls, scores: Mapping[Concept | str, int], off_target: bool = False) -> ScoreVector:
        lookup = {Concept(k): v for k, v in scores.items()}
        missing = [c.value for c in CONCEPTS if c not in lookup]
        if missing:
            raise ValueError(f"score map is missing concepts {missing}")
        return cls(tuple(lookup[c] for c in CONCEPTS), off_target)

    @classmethod
    def zeros(cls) -> ScoreVector:
        return cls((0,) * len(CONCEPTS))

    def __getitem__(self, concept: Concept | str) -> int:
        return self.flags[_POSITION[Concept(concept)]]

    def as_dict(self) -> dict[Concept, int]:
        return dict(zip(CONCEPTS, self.flags))

    def count(self, cls: ConceptClass | str) -> int:
        return sum(self[c] for c in concepts_of(cls))

    def check_off_target(self, response_id: str) -> None:
        if self.off_target and self.count(ConceptClass.KEY_CONCEPT):
            raise OffTargetViolation(response_id)


@dataclass(frozen=True)
class Response:
    response_id: str
    student_id: str
    question_id: str
    phase: Phase
    text: str


@dataclass(frozen=True)
class Corpus:
    """An ordered, immutable collection of responses.

    Construction does not enforce id uniqueness; :func:`evgr.corpus_io.parse_corpus`
    does, and :func:`evgr.corpus_io.validate_corpus` reports violations.
    """

    responses: tuple[Response, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "responses", tuple(self.responses))

    def __len__(self) -> int:
        return len(self.responses)

    def __iter__(self) -> Iterator[Response]:
        return iter(self.responses)

    def __getitem__(self, i: int) -> Response:
        return self.responses[i]

    @property
    def ids(self) -> list[str]:
        return [r.response_id for r in self.responses]

    def by_id(self) -> dict[str, Response]:
        return {r.response_id: r for r in self.responses}

    def questions(self) -> list[str]:
        return sorted({r.question_id for r in self.responses})

    def subset(self, indices: Iterable[int]) -> Corpus:
        return Corpus(tuple(self.responses[i] for i in indices))

    def filter(self, question_id: str | None = None, phase: Phase | str | None = None) -> Corpus:
        phase = Phase(phase) if phase is not None else None
        return Corpus(
            tuple(
                r
                for r in self.responses
                if (question_id is None or r.question_id == question_id)
                and (phase is None or r.phase is phase)
            )
        )


@dataclass
class RaterRecord:
    """One rater's score vectors keyed by response id."""

    rater_id: str
    assignments: dict[str, ScoreVector] = field(default_factory=dict)

    def __getitem__(self, response_id: str) -> ScoreVector:
        return self.assignments[response_id]

    def __contains__(self, response_id: object) -> bool:
        return response_id in self.assignments

    def labels(self, concept: Concept | str) -> dict[str, int]:
        """Per-response binary labels for one concept."""
        concept = Concept(concept)
        return {rid: sv[concept] for rid, sv in self.assignments.items()}
