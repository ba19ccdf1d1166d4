"""Corpus CSV ingestion, validation, consensus resolution and scored output.

File layout: a fixed header ``response_id,student_id,question_id,phase,text``
followed by zero or more rater label blocks named ``<rater_id>:<Concept>``.
A rater block may also carry an ``<rater_id>:off_target`` column; it is only
written when at least one of that rater's vectors is flagged.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    BadLabel,
    BadPhase,
    CoverageMismatch,
    DuplicateResponseId,
    EmptyText,
    MissingColumn,
    UnknownColumn,
    UnresolvedDisagreement,
)
from .rubric import CONCEPTS, Concept, Corpus, Phase, RaterRecord, Response, ScoreVector

RESPONSE_COLUMNS = ("response_id", "student_id", "question_id", "phase", "text")
OFF_TARGET = "off_target"


@dataclass(frozen=True)
class CorpusFormatSpec:
    required_columns: tuple[str, ...] = RESPONSE_COLUMNS
    label_separator: str = ":"


DEFAULT_FORMAT = CorpusFormatSpec()


def _label_column(rater_id: str, name: str, sep: str = ":") -> str:
    return f"{rater_id}{sep}{name}"


def parse_corpus(raw: bytes, fmt: CorpusFormatSpec = DEFAULT_FORMAT) -> tuple[Corpus, list[RaterRecord]]:
    """Parse a corpus CSV byte stream.

    Returns the corpus in row order and one :class:`RaterRecord` per label
    block found in the header, ordered as the blocks first appear. Label cells
    must be exactly ``0`` or ``1``.
    """
    text = raw.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumn(fmt.required_columns[0]) from None

    for name in fmt.required_columns:
        if name not in header:
            raise MissingColumn(name)
    pos = {name: header.index(name) for name in fmt.required_columns}

    blocks: dict[str, dict[str, int]] = {}
    for i, col in enumerate(header):
        if col in pos or fmt.label_separator not in col:
            continue
        rater_id, _, name = col.rpartition(fmt.label_separator)
        if not rater_id or (name != OFF_TARGET and name not in Concept._value2member_map_):
            raise UnknownColumn(col)
        blocks.setdefault(rater_id, {})[name] = i
    for rater_id, cols in blocks.items():
        for c in CONCEPTS:
            if c.value not in cols:
                raise MissingColumn(_label_column(rater_id, c.value, fmt.label_separator))

    responses: list[Response] = []
    seen: set[str] = set()
    raters = {rid: RaterRecord(rid) for rid in blocks}
    for row_no, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise MissingColumn(f"row {row_no} has {len(row)} cells, header has {len(header)}")
        rid = row[pos["response_id"]]
        if rid in seen:
            raise DuplicateResponseId(rid)
        seen.add(rid)
        try:
            phase = Phase(row[pos["phase"]])
        except ValueError:
            raise BadPhase(row_no, row[pos["phase"]]) from None
        body = row[pos["text"]]
        if not body.strip():
            raise EmptyText(row_no)
        responses.append(
            Response(rid, row[pos["student_id"]], row[pos["question_id"]], phase, body)
        )
        for rater_id, cols in blocks.items():
            values = {}
            for name, i in cols.items():
                cell = row[i]
                if cell not in ("0", "1"):
                    raise BadLabel(row_no, header[i], cell)
                values[name] = int(cell)
            off = bool(values.pop(OFF_TARGET, 0))
            sv = ScoreVector.from_mapping(values, off_target=off)
            sv.check_off_target(rid)
            raters[rater_id].assignments[rid] = sv

    return Corpus(tuple(responses)), list(raters.values())


def _check_coverage(corpus: Corpus, rater: RaterRecord) -> None:
    ids = set(corpus.ids)
    have = set(rater.assignments)
    if ids != have:
        missing = sorted(ids - have)[:3]
        extra = sorted(have - ids)[:3]
        raise CoverageMismatch(
            f"rater {rater.rater_id!r} coverage differs from corpus (missing {missing}, extra {extra})"
        )


def write_scored_csv(corpus: Corpus, raters: Sequence[RaterRecord]) -> bytes:
    """Serialize a corpus and its rater blocks; output is deterministic.

    Rater blocks are ordered lexicographically by ``rater_id``; within a block
    concept columns follow declaration order.
    """
    ordered = sorted(raters, key=lambda r: r.rater_id)
    for r in ordered:
        _check_coverage(corpus, r)
    header = list(RESPONSE_COLUMNS)
    with_flag = {}
    for r in ordered:
        header.extend(_label_column(r.rater_id, c.value) for c in CONCEPTS)
        with_flag[r.rater_id] = any(sv.off_target for sv in r.assignments.values())
        if with_flag[r.rater_id]:
            header.append(_label_column(r.rater_id, OFF_TARGET))

    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for resp in corpus:
        row = [resp.response_id, resp.student_id, resp.question_id, resp.phase.value, resp.text]
        for r in ordered:
            sv = r.assignments[resp.response_id]
            row.extend(str(f) for f in sv.flags)
            if with_flag[r.rater_id]:
                row.append(str(int(sv.off_target)))
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


# --- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    level: str  # "error" | "warning"
    code: str
    message: str
    row: int | None = None

    def to_dict(self) -> dict:
        d = {"level": self.level, "code": self.code, "message": self.message}
        if self.row is not None:
            d["row"] = self.row
        return d


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()
    summary: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(f.level == "error" for f in self.findings)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "findings": [f.to_dict() for f in self.findings],
            "summary": self.summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def validate_corpus(corpus: Corpus, known_questions: Iterable[str] | None = None) -> ValidationReport:
    """Inspect a corpus and report findings without modifying it.

    Errors: duplicate ids, empty texts, question ids outside
    ``known_questions`` (when given). Warnings: a question whose pre and post
    response counts differ.
    """
    findings: list[Finding] = []
    counts = Counter(r.response_id for r in corpus)
    reported: set[str] = set()
    known = set(known_questions) if known_questions is not None else None
    per_question: dict[str, Counter] = defaultdict(Counter)

    for row, r in enumerate(corpus, start=1):
        if counts[r.response_id] > 1 and r.response_id not in reported:
            reported.add(r.response_id)
            findings.append(
                Finding("error", "DuplicateResponseId", f"response_id {r.response_id!r} appears {counts[r.response_id]} times", row)
            )
        if not r.text.strip():
            findings.append(Finding("error", "EmptyText", "response text is empty", row))
        if known is not None and r.question_id not in known:
            findings.append(Finding("error", "UnknownQuestionId", f"unknown question id {r.question_id!r}", row))
        per_question[r.question_id][Phase(r.phase).value] += 1

    for q in sorted(per_question):
        pre, post = per_question[q]["pre"], per_question[q]["post"]
        if pre != post:
            findings.append(
                Finding("warning", "PhaseImbalance", f"question {q!r} has {pre} pre and {post} post responses")
            )

    summary = {
        "n_responses": len(corpus),
        "questions": {q: {"pre": per_question[q]["pre"], "post": per_question[q]["post"]} for q in sorted(per_question)},
    }
    return ValidationReport(tuple(findings), summary)


# --- consensus ----------------------------------------------------------------

ResolutionKey = tuple  # (response_id, Concept | "off_target")


def resolve_consensus(
    a: RaterRecord,
    b: RaterRecord,
    resolutions: Mapping[ResolutionKey, int] | None = None,
) -> RaterRecord:
    """Merge two human raters into a consensus record.

    Agreed cells are copied. Every disagreement needs an entry in
    ``resolutions`` keyed by ``(response_id, concept)``. The off-target flag
    is the OR of both raters unless ``(response_id, "off_target")`` is given.
    """
    resolutions = {
        (rid, key if key == OFF_TARGET else Concept(key)): int(v)
        for (rid, key), v in (resolutions or {}).items()
    }
    if set(a.assignments) != set(b.assignments):
        raise CoverageMismatch(f"raters {a.rater_id!r} and {b.rater_id!r} cover different responses")

    out = RaterRecord("consensus")
    # iterate in a's insertion order; symmetric in (a, b) since the merge is cell-wise
    for rid, sa in a.assignments.items():
        sb = b.assignments[rid]
        flags = []
        for c in CONCEPTS:
            va, vb = sa[c], sb[c]
            if va == vb:
                flags.append(va)
            elif (rid, c) in resolutions:
                flags.append(resolutions[(rid, c)])
            else:
                raise UnresolvedDisagreement(rid, c)
        off = bool(resolutions.get((rid, OFF_TARGET), sa.off_target or sb.off_target))
        sv = ScoreVector(tuple(flags), off)
        sv.check_off_target(rid)
        out.assignments[rid] = sv
    return out


def load_csv(path) -> tuple[Corpus, list[RaterRecord]]:
    with open(path, "rb") as fh:
        return parse_corpus(fh.read())


def rater_by_id(raters: Sequence[RaterRecord], rater_id: str | None) -> RaterRecord:
    """Pick a rater block; with ``rater_id=None`` the file must hold exactly one."""
    if rater_id is None:
        if len(raters) != 1:
            raise CoverageMismatch(
                f"expected exactly one rater block, found {[r.rater_id for r in raters]}"
            )
        return raters[0]
    for r in raters:
        if r.rater_id == rater_id:
            return r
    raise CoverageMismatch(f"no rater block {rater_id!r} (have {[r.rater_id for r in raters]})")


__all__ = [
    "CorpusFormatSpec",
    "DEFAULT_FORMAT",
    "Finding",
    "ValidationReport",
    "load_csv",
    "parse_corpus",
    "rater_by_id",
    "resolve_consensus",
    "validate_corpus",
    "write_scored_csv",
]
