"""Per-concept training, k-fold cross-validation and model bundles.

Each concept gets its own vocabulary and classifier. Cross-validation fits
both the vocabulary and the classifier on the training split only. The
deployed model is the mean of the fold models, re-indexed onto a vocabulary
fitted on the full corpus (every fold vocabulary is a subset of it).
"""

from __future__ import annotations

import gzip
import hashlib
import json
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Sequence

import numpy as np

from .corpus_io import write_scored_csv
from .errors import (
    CorruptBundle,
    DegenerateMarginals,
    EvgrError,
    MixedModels,
    SingleClassFold,
    TooFewSamples,
    VersionMismatch,
)
from .features import FeatureConfig, Vocabulary, build_vocabulary, to_matrix, vectorize
from .irr import ContingencyTable2x2, cohen_kappa
from .rubric import CONCEPTS, Concept, Corpus, RaterRecord, ScoreVector
from .svm.smo import LinearModel, SmoParams, TrainingMeta, predict, train_smo

BUNDLE_MAGIC = b"EVGB"
BUNDLE_VERSION = 1
ACCURACY_BENCHMARK = 0.90
KAPPA_BENCHMARK = 0.8


@dataclass(frozen=True)
class FoldResult:
    accuracy: float
    kappa: float
    n_validation: int

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "kappa": self.kappa, "n_validation": self.n_validation}


@dataclass(frozen=True)
class CvReport:
    concept: Concept
    k: int
    per_fold: tuple[FoldResult, ...]
    mean_accuracy: float = field(init=False)
    mean_kappa: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "concept", Concept(self.concept))
        object.__setattr__(self, "per_fold", tuple(self.per_fold))
        if len(self.per_fold) != self.k:
            raise ValueError(f"expected {self.k} fold results, got {len(self.per_fold)}")
        object.__setattr__(self, "mean_accuracy", float(np.mean([f.accuracy for f in self.per_fold])))
        object.__setattr__(self, "mean_kappa", float(np.mean([f.kappa for f in self.per_fold])))

    @property
    def passes_benchmarks(self) -> bool:
        return meets_benchmarks(self.mean_accuracy, self.mean_kappa)

    def to_dict(self) -> dict:
        return {
            "concept": self.concept.value,
            "k": self.k,
            "per_fold": [f.to_dict() for f in self.per_fold],
            "mean_accuracy": self.mean_accuracy,
            "mean_kappa": self.mean_kappa,
            "passes_benchmarks": self.passes_benchmarks,
        }

    @classmethod
    def from_dict(cls, d: dict) -> CvReport:
        return cls(Concept(d["concept"]), int(d["k"]), tuple(FoldResult(**f) for f in d["per_fold"]))


def meets_benchmarks(mean_accuracy: float, mean_kappa: float) -> bool:
    return mean_accuracy >= ACCURACY_BENCHMARK and mean_kappa >= KAPPA_BENCHMARK


def make_folds(n: int, k: int, seed: int = 0) -> list[list[int]]:
    """Partition ``range(n)`` into ``k`` shuffled folds whose sizes differ by at most one."""
    if k < 2:
        raise TooFewSamples(f"k must be at least 2, got {k}")
    if n < k:
        raise TooFewSamples(f"{n} samples cannot fill {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [sorted(int(i) for i in part) for part in np.array_split(perm, k)]


def _fold_kappa(truth: Sequence[int], pred: Sequence[int]) -> float:
    a = sum(1 for t, p in zip(truth, pred) if t and p)
    b = sum(1 for t, p in zip(truth, pred) if t and not p)
    c = sum(1 for t, p in zip(truth, pred) if not t and p)
    d = len(truth) - a - b - c
    try:
        return cohen_kappa(ContingencyTable2x2(a, b, c, d)).kappa
    except DegenerateMarginals:
        # one class in the fold and every prediction matches it
        return 1.0


def _check_config(config: FeatureConfig) -> None:
    if config.remove_misclassified:
        raise NotImplementedError("remove_misclassified is reserved and not implemented")


def _fit(texts: Sequence[str], labels: Sequence[int], concept, config, params, backend) -> tuple[Vocabulary, LinearModel]:
    vocab = build_vocabulary(texts, config)
    vectors = [vectorize(t, vocab) for t in texts]
    model, _ = train_smo(
        to_matrix(vectors), labels, params,
        concept=concept, config=config, vocab_fingerprint=vocab.fingerprint, backend=backend,
    )
    return vocab, model


def _cross_validate(corpus, labels, concept, config, params, k, seed, backend):
    _check_config(config)
    texts = [r.text for r in corpus]
    y = [int(labels[r.response_id]) for r in corpus]
    if len(set(y)) < 2:
        raise SingleClassFold(0)
    folds = make_folds(len(corpus), k, seed)
    results, fitted = [], []
    for fi, held in enumerate(folds):
        held_set = set(held)
        train_idx = [i for i in range(len(corpus)) if i not in held_set]
        train_y = [y[i] for i in train_idx]
        if len(set(train_y)) < 2:
            raise SingleClassFold(fi)
        vocab, model = _fit([texts[i] for i in train_idx], train_y, concept, config, params, backend)
        pred = [predict(model, vectorize(texts[i], vocab))[0] for i in held]
        truth = [y[i] for i in held]
        acc = sum(p == t for p, t in zip(pred, truth)) / len(held)
        results.append(FoldResult(acc, _fold_kappa(truth, pred), len(held)))
        fitted.append((vocab, model))
    return CvReport(Concept(concept), k, tuple(results)), fitted


def cross_validate(
    corpus: Corpus,
    labels: Mapping[str, int],
    concept: Concept | str,
    config: FeatureConfig = FeatureConfig(),
    params: SmoParams = SmoParams(),
    k: int = 10,
    seed: int = 0,
    *,
    backend: str = "auto",
) -> CvReport:
    """k-fold cross-validation for one concept.

    Vocabulary and model are fitted on each training split alone. A fold
    whose training split holds a single class raises :class:`SingleClassFold`.
    """
    report, _ = _cross_validate(corpus, labels, Concept(concept), config, params, k, seed, backend)
    return report


def reindex_model(model: LinearModel, source: Vocabulary, target: Vocabulary) -> LinearModel:
    """Express a model over ``target`` terms; terms missing from ``source`` get weight 0."""
    w = np.zeros(len(target))
    for term, i in source.index.items():
        j = target.index.get(term)
        if j is None:
            if model.weights[i] != 0.0:
                raise MixedModels(f"term {term!r} carries weight but is absent from the target vocabulary")
            continue
        w[j] = model.weights[i]
    return LinearModel(w, model.bias, model.concept, target.fitted_config, target.fingerprint, model.training_meta)


def average_fold_models(models: Sequence[LinearModel]) -> LinearModel:
    """Arithmetic mean of weights and biases of models sharing concept, config and vocabulary."""
    if not models:
        raise MixedModels("no models to average")
    first = models[0]
    for m in models[1:]:
        if (m.concept, m.config, m.vocab_fingerprint, m.dimension) != (
            first.concept, first.config, first.vocab_fingerprint, first.dimension,
        ):
            raise MixedModels("models differ in concept, configuration or vocabulary")
    weights = np.mean(np.stack([m.weights for m in models]), axis=0)
    bias = float(np.mean([m.bias for m in models]))
    meta = TrainingMeta(
        n_samples=max(m.training_meta.n_samples for m in models),
        n_positive=max(m.training_meta.n_positive for m in models),
        iterations=sum(m.training_meta.iterations for m in models),
        converged=all(m.training_meta.converged for m in models),
    )
    return LinearModel(weights, bias, first.concept, first.config, first.vocab_fingerprint, meta)


@dataclass(frozen=True, eq=False)
class ModelBundle:
    models: dict[Concept, LinearModel]
    vocabularies: dict[Concept, Vocabulary]
    cv_reports: dict[Concept, CvReport]
    created_at: str
    corpus_fingerprint: str

    def __post_init__(self) -> None:
        for c in CONCEPTS:
            if c not in self.models or c not in self.vocabularies:
                raise CorruptBundle(f"bundle lacks a model or vocabulary for {c.value}")
            model, vocab = self.models[c], self.vocabularies[c]
            if model.vocab_fingerprint != vocab.fingerprint or model.config != vocab.fitted_config:
                raise CorruptBundle(f"model for {c.value} does not match its vocabulary")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelBundle):
            return NotImplemented
        return (
            self.models == other.models
            and self.vocabularies == other.vocabularies
            and {c: r.to_dict() for c, r in self.cv_reports.items()}
            == {c: r.to_dict() for c, r in other.cv_reports.items()}
            and self.created_at == other.created_at
            and self.corpus_fingerprint == other.corpus_fingerprint
        )


def corpus_fingerprint(corpus: Corpus) -> str:
    return hashlib.sha256(write_scored_csv(corpus, [])).hexdigest()


def _train_concept(corpus, labels, concept, config, params, k, seed, deploy, backend):
    report, fitted = _cross_validate(corpus, labels, concept, config, params, k, seed, backend)
    texts = [r.text for r in corpus]
    full_vocab = build_vocabulary(texts, config)
    if deploy == "average":
        model = average_fold_models([reindex_model(m, v, full_vocab) for v, m in fitted])
    elif deploy == "retrain":
        y = [int(labels[r.response_id]) for r in corpus]
        full_vocab, model = _fit(texts, y, concept, config, params, backend)
    else:
        raise ValueError(f"deploy must be 'average' or 'retrain', got {deploy!r}")
    return model, full_vocab, report


def train_bundle(
    corpus: Corpus,
    label_sets: Mapping[Concept | str, Mapping[str, int]],
    configs: Mapping[Concept | str, FeatureConfig] | None = None,
    params: SmoParams = SmoParams(),
    seed: int = 0,
    *,
    k: int = 10,
    deploy: str = "average",
    workers: int = 1,
    created_at: str | None = None,
    backend: str = "auto",
) -> ModelBundle:
    """Cross-validate and train one model per concept.

    ``deploy="average"`` (default) ships the mean of the k fold models;
    ``deploy="retrain"`` refits on all data. CV reports are kept whether or
    not a concept meets the benchmarks.
    """
    label_sets = {Concept(c): v for c, v in label_sets.items()}
    missing = [c.value for c in CONCEPTS if c not in label_sets]
    if missing:
        raise EvgrError(f"label sets missing for {missing}")
    configs = {Concept(c): v for c, v in (configs or {}).items()}
    for c in CONCEPTS:
        _check_config(configs.get(c, FeatureConfig()))

    def job(c: Concept):
        return _train_concept(
            corpus, label_sets[c], c, configs.get(c, FeatureConfig()), params, k, seed, deploy, backend,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(zip(CONCEPTS, pool.map(job, CONCEPTS)))
    else:
        results = {c: job(c) for c in CONCEPTS}
    return ModelBundle(
        models={c: results[c][0] for c in CONCEPTS},
        vocabularies={c: results[c][1] for c in CONCEPTS},
        cv_reports={c: results[c][2] for c in CONCEPTS},
        created_at=created_at or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        corpus_fingerprint=corpus_fingerprint(corpus),
    )


def label_sets_from(record: RaterRecord) -> dict[Concept, dict[str, int]]:
    return {c: record.labels(c) for c in CONCEPTS}


def score_corpus(bundle: ModelBundle, corpus: Corpus) -> RaterRecord:
    """Machine scores for every response; the off-target flag is never set."""
    out = RaterRecord("machine")
    for r in corpus:
        flags = tuple(
            predict(bundle.models[c], vectorize(r.text, bundle.vocabularies[c]))[0] for c in CONCEPTS
        )
        out.assignments[r.response_id] = ScoreVector(flags, off_target=False)
    return out


def save_bundle(bundle: ModelBundle) -> bytes:
    doc = {
        "version": BUNDLE_VERSION,
        "created_at": bundle.created_at,
        "corpus_fingerprint": bundle.corpus_fingerprint,
        "concepts": {
            c.value: {
                "model": bundle.models[c].to_dict(),
                "vocabulary": bundle.vocabularies[c].to_dict(),
                "cv_report": bundle.cv_reports[c].to_dict() if c in bundle.cv_reports else None,
            }
            for c in CONCEPTS
        },
    }
    payload = json.dumps(doc, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return BUNDLE_MAGIC + gzip.compress(payload, mtime=0)


def load_bundle(raw: bytes) -> ModelBundle:
    if raw[:4] != BUNDLE_MAGIC:
        raise CorruptBundle("missing EVGB magic prefix")
    try:
        doc = json.loads(gzip.decompress(raw[4:]).decode("utf-8"))
    except (OSError, EOFError, zlib.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptBundle(f"cannot decode bundle: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise CorruptBundle("bundle document has no version")
    if doc["version"] != BUNDLE_VERSION:
        raise VersionMismatch(f"bundle version {doc['version']!r}, this build reads {BUNDLE_VERSION}")
    try:
        models, vocabs, reports = {}, {}, {}
        for c in CONCEPTS:
            entry = doc["concepts"][c.value]
            models[c] = LinearModel.from_dict(entry["model"])
            vocabs[c] = Vocabulary.from_dict(entry["vocabulary"])
            if entry.get("cv_report") is not None:
                reports[c] = CvReport.from_dict(entry["cv_report"])
        return ModelBundle(models, vocabs, reports, doc["created_at"], doc["corpus_fingerprint"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptBundle(f"malformed bundle: {exc}") from exc
