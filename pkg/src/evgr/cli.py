"""Command-line interface.

Exit codes: 0 success, 1 data error (one-line diagnostic on stderr),
2 usage error. ``EVGR_SEED`` overrides the default RNG seed when ``--seed``
is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from .corpus_io import Finding, ValidationReport, load_csv, validate_corpus, write_scored_csv
from .errors import CorpusError, CoverageMismatch, EvgrError
from .features import FeatureConfig
from .irr import irr_report
from .reporting import concept_maps
from .rubric import CONCEPTS, Concept
from .suite import cross_validate, label_sets_from, load_bundle, save_bundle, score_corpus, train_bundle
from .svm.smo import SmoParams


def _default_seed() -> int:
    raw = os.environ.get("EVGR_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise EvgrError(f"EVGR_SEED must be an integer, got {raw!r}") from None


def _pick_rater(raters, rater_id: str | None, preferred: str | None = None):
    ids = [r.rater_id for r in raters]
    if rater_id is not None:
        for r in raters:
            if r.rater_id == rater_id:
                return r
        raise CoverageMismatch(f"no rater block {rater_id!r} (have {ids})")
    if preferred is not None and preferred in ids:
        return raters[ids.index(preferred)]
    if len(raters) == 1:
        return raters[0]
    raise CoverageMismatch(f"cannot choose a rater block among {ids}; pass the rater id explicitly")


def _load_configs(path: str | None) -> dict[Concept, FeatureConfig]:
    if path is None:
        return {}
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    base = doc.get("default", {})
    return {c: FeatureConfig.from_dict({**base, **doc.get(c.value, {})}) for c in CONCEPTS}


def _params(args) -> SmoParams:
    seed = args.seed if args.seed is not None else _default_seed()
    return SmoParams(c=args.c, kkt_tolerance=args.tol, rng_seed=seed)


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_validate(args) -> int:
    known = args.questions.split(",") if args.questions else None
    try:
        corpus, _ = load_csv(args.input)
    except CorpusError as exc:
        # a file that does not parse is still reported as JSON
        report = ValidationReport((Finding("error", type(exc).__name__, str(exc), getattr(exc, "row", None)),))
    else:
        report = validate_corpus(corpus, known)
    _emit(report.to_json() + "\n", None)
    return 0 if report.ok else 1


def _training_inputs(args):
    corpus, inline = load_csv(args.input)
    if args.labels:
        _, raters = load_csv(args.labels)
    else:
        raters = inline
    labels = _pick_rater(raters, args.labels_rater, "consensus")
    missing = set(corpus.ids) - set(labels.assignments)
    if missing:
        raise CoverageMismatch(f"labels missing for {len(missing)} responses, e.g. {sorted(missing)[0]!r}")
    return corpus, labels


def cmd_train(args) -> int:
    corpus, labels = _training_inputs(args)
    bundle = train_bundle(
        corpus,
        label_sets_from(labels),
        _load_configs(args.configs),
        _params(args),
        _seed(args),
        k=args.k,
        deploy="retrain" if args.retrain else "average",
        workers=args.workers,
        created_at=args.created_at,
    )
    Path(args.out).write_bytes(save_bundle(bundle))
    failing = [c.value for c, r in bundle.cv_reports.items() if not r.passes_benchmarks]
    if failing:
        print(f"note: below accuracy/kappa benchmarks: {', '.join(failing)}", file=sys.stderr)
    return 0


def cmd_cv(args) -> int:
    corpus, labels = _training_inputs(args)
    configs = _load_configs(args.configs)
    concepts = [Concept(c) for c in args.concept] if args.concept else list(CONCEPTS)
    reports = [
        cross_validate(
            corpus, labels.labels(c), c, configs.get(c, FeatureConfig()), _params(args), args.k, _seed(args),
        )
        for c in concepts
    ]
    doc = {"reports": [r.to_dict() for r in reports]}
    if args.format == "json":
        _emit(_dump(doc), None)
    else:
        lines = [f"{'concept':<22}{'k':>4}{'accuracy':>10}{'kappa':>9}  benchmarks"]
        for r in reports:
            lines.append(
                f"{r.concept.value:<22}{r.k:>4}{r.mean_accuracy:>10.3f}{r.mean_kappa:>9.3f}  "
                f"{'pass' if r.passes_benchmarks else 'FAIL'}"
            )
        _emit("\n".join(lines) + "\n", None)
    if args.json:
        _emit(_dump(doc), args.json)
    return 0


def cmd_score(args) -> int:
    bundle = load_bundle(Path(args.bundle).read_bytes())
    corpus, _ = load_csv(args.input)
    machine = score_corpus(bundle, corpus)
    data = write_scored_csv(corpus, [machine])
    if args.out in (None, "-"):
        sys.stdout.buffer.write(data)
    else:
        Path(args.out).write_bytes(data)
    return 0


def cmd_irr(args) -> int:
    corpus, _ = load_csv(args.input)
    _, m_raters = load_csv(args.machine)
    _, c_raters = load_csv(args.consensus)
    machine = _pick_rater(m_raters, args.machine_rater, "machine")
    consensus = _pick_rater(c_raters, args.consensus_rater, "consensus")
    doc = irr_report(
        machine, consensus, corpus, args.question or None, args.confidence,
        per_concept=args.per_concept, per_phase=args.per_phase,
    )
    _emit(_dump(doc), args.out)
    return 0


def cmd_report(args) -> int:
    corpus, inline = load_csv(args.input)
    raters = load_csv(args.scores)[1] if args.scores else inline
    record = _pick_rater(raters, args.rater, "machine")
    phases = args.phases.split(",")
    maps = concept_maps(corpus, record, phases)
    _emit(_dump({"rater": record.rater_id, "maps": [m.to_dict() for m in maps]}), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evgr", description="Concept scoring and inter-rater reliability tools.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a corpus CSV and print a JSON report")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--questions", help="comma-separated list of known question ids")
    v.set_defaults(func=cmd_validate)

    def training_args(sp):
        sp.add_argument("--in", dest="input", required=True)
        sp.add_argument("--labels", help="CSV holding the label block (defaults to --in)")
        sp.add_argument("--labels-rater", help="rater id of the label block")
        sp.add_argument("--configs", help="JSON file of per-concept feature configurations")
        sp.add_argument("--k", type=int, default=10)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--c", type=float, default=1.0)
        sp.add_argument("--tol", type=float, default=1e-3)

    t = sub.add_parser("train", help="cross-validate and write a model bundle")
    training_args(t)
    t.add_argument("--out", required=True)
    t.add_argument("--retrain", action="store_true", help="deploy a full-data refit instead of the fold average")
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--created-at", help="timestamp to record in the bundle (default: now)")
    t.set_defaults(func=cmd_train)

    cv = sub.add_parser("cv", help="run k-fold cross-validation")
    training_args(cv)
    cv.add_argument("--concept", action="append", choices=[c.value for c in CONCEPTS])
    cv.add_argument("--format", choices=("text", "json"), default="text")
    cv.add_argument("--json", help="also write the JSON report to this path")
    cv.set_defaults(func=cmd_cv)

    s = sub.add_parser("score", help="score a corpus with a bundle")
    s.add_argument("--bundle", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_score)

    i = sub.add_parser("irr", help="agreement statistics between machine and consensus scores")
    i.add_argument("--in", dest="input", required=True)
    i.add_argument("--machine", required=True)
    i.add_argument("--consensus", required=True)
    i.add_argument("--machine-rater")
    i.add_argument("--consensus-rater")
    i.add_argument("--question", action="append")
    i.add_argument("--confidence", type=float, default=0.95)
    i.add_argument("--per-concept", action="store_true", help="add one kappa per concept")
    i.add_argument("--per-phase", action="store_true", help="add kappas for pre and post separately")
    i.add_argument("--out")
    i.set_defaults(func=cmd_irr)

    r = sub.add_parser("report", help="concept-map JSON per question and phase")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--scores", help="scored CSV (defaults to --in)")
    r.add_argument("--rater")
    r.add_argument("--phases", default="pre,post")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EvgrError, NotImplementedError, OSError, ValueError) as exc:
        print(f"evgr: error: {exc}", file=sys.stderr)
        return 1


def run_cli(argv: Sequence[str]) -> int:
    """Run the CLI in-process and return its exit code (usage errors give 2)."""
    try:
        return main(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
