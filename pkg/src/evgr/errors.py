"""Exception hierarchy.

Every error raised on bad input derives from :class:`EvgrError` so the CLI can
map it to exit code 1 with a one-line diagnostic.
"""

from __future__ import annotations


class EvgrError(Exception):
    """Base class for all data errors raised by this package."""


# corpus-io

class CorpusError(EvgrError):
    pass


class MissingColumn(CorpusError):
    def __init__(self, name: str):
        super().__init__(f"missing required column {name!r}")
        self.name = name


class UnknownColumn(CorpusError):
    def __init__(self, name: str):
        super().__init__(f"unrecognised label column {name!r}")
        self.name = name


class DuplicateResponseId(CorpusError):
    def __init__(self, response_id: str):
        super().__init__(f"duplicate response_id {response_id!r}")
        self.response_id = response_id


class BadPhase(CorpusError):
    def __init__(self, row: int, value: str = ""):
        super().__init__(f"row {row}: phase must be 'pre' or 'post', got {value!r}")
        self.row = row


class BadLabel(CorpusError):
    def __init__(self, row: int, col: str, value: str = ""):
        super().__init__(f"row {row}, column {col!r}: label must be 0 or 1, got {value!r}")
        self.row = row
        self.col = col


class EmptyText(CorpusError):
    def __init__(self, row: int):
        super().__init__(f"row {row}: response text is empty")
        self.row = row


class OffTargetViolation(CorpusError):
    def __init__(self, response_id: str):
        super().__init__(
            f"response {response_id!r} is flagged off-target but has key concepts scored"
        )
        self.response_id = response_id


class CoverageMismatch(EvgrError):
    pass


class UnresolvedDisagreement(EvgrError):
    def __init__(self, response_id: str, concept: object):
        super().__init__(f"raters disagree on ({response_id!r}, {concept}) and no resolution given")
        self.response_id = response_id
        self.concept = concept


# text-features

class EmptyVocabulary(EvgrError):
    pass


# svm-smo

class SingleClassInput(EvgrError):
    pass


class DimensionMismatch(EvgrError):
    pass


class SizeLimitExceeded(EvgrError):
    pass


# model-suite

class TooFewSamples(EvgrError):
    pass


class SingleClassFold(EvgrError):
    def __init__(self, fold_index: int):
        super().__init__(f"training split for fold {fold_index} contains a single class")
        self.fold_index = fold_index


class MixedModels(EvgrError):
    pass


class CorruptBundle(EvgrError):
    pass


class VersionMismatch(EvgrError):
    pass


# irr-stats

class EmptyTable(EvgrError):
    pass


class DegenerateMarginals(EvgrError):
    pass


class LengthMismatch(EvgrError):
    pass


class ZeroVariance(EvgrError):
    pass


class OutOfRange(EvgrError):
    pass


# reporting

class EmptyInput(EvgrError):
    pass
