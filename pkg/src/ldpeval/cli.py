"""Batch command line entry point.

Each artifact-producing subcommand writes one content-addressed run
directory under the configured runs directory; input digests and the
effective settings determine the run id, so reruns over identical inputs
land in identical directories.

Exit codes: 0 success, 1 configuration error, 2 data validation error,
3 provider failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import alignment, analysis, augment, datastore, judge, jury, metrics
from .baselines import EmptyTextError, bleu, rouge_l, rouge_n
from .domain import Evaluation, HumanReview, ScoreSet, tag_counts, validate
from .errors import ConfigError, DataValidationError, ProviderError

CONFIG_KEYS = {
    "judge_model": "scripted",
    "judge_endpoint": "",
    "judge_api_key_env": "",
    "embed_model": "",
    "embed_endpoint": "",
    "embed_api_key_env": "",
    "similarity_threshold": "0.80",
    "adjusted_similarity_threshold": "0.90",
    "relevance_threshold": "0.85",
    "correctness_threshold": "1.0",
    "runs_dir": "runs",
    "parallelism": "1",
    "request_timeout": "30.0",
    "max_retries": "3",
    "answer_model": "",
    "service_tokens": "",
}

ENV_PREFIX = "LDPEVAL_"


def load_settings(config_path: Optional[str], environ=os.environ) -> dict[str, str]:
    """Defaults, overridden by the config file, overridden by environment."""
    settings = dict(CONFIG_KEYS)
    if config_path:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {config_path}")
        for lineno, line in enumerate(path.read_text().splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in settings:
                raise ConfigError(f"{config_path}:{lineno}: unknown setting {key!r}")
            settings[key] = value.strip()
    for key in settings:
        env_value = environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            settings[key] = env_value
    return settings


def _float_setting(settings: dict[str, str], key: str) -> float:
    try:
        return float(settings[key])
    except ValueError:
        raise ConfigError(f"setting {key} must be a number, got {settings[key]!r}")


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; that slot belongs to
    data validation here, so usage problems are rethrown as config errors."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ldpeval", description=__doc__)
    parser.add_argument("--config", help="key=value settings file")
    parser.add_argument(
        "--mock",
        action="store_true",
        help="scripted judge and offline embedder; forbids endpoint settings",
    )
    parser.add_argument(
        "--fixed-clock",
        metavar="ISO8601",
        help="pin all timestamps (for reproducible runs)",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest", help="validate a corpus or import a release file")
    p.add_argument("--corpus", help="corpus directory to validate")
    p.add_argument("--release", help="released tagged-LDP JSONL file to import")
    p.add_argument("--out", help="directory to write the imported corpus to")

    p = sub.add_parser("judge", help="segment and tag every answer in a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--verify", action="store_true", help="run the verification pass")

    p = sub.add_parser("score", help="compute tag-count scores for a judge run")
    p.add_argument("--run", required=True, metavar="RUN_ID")

    p = sub.add_parser("baseline", help="BLEU/ROUGE of answers against ground truth")
    p.add_argument("--corpus", required=True)

    p = sub.add_parser("align", help="match machine LDPs against human evaluations")
    p.add_argument("--run", required=True, metavar="RUN_ID")
    p.add_argument("--human", required=True, help="human evaluations JSONL")

    p = sub.add_parser("jury", help="aggregate multiple judges' evaluations")
    p.add_argument("--evaluations", nargs="+", required=True, metavar="FILE")
    p.add_argument(
        "--strategy",
        default="hybrid",
        choices=[s.value for s in jury.Strategy],
    )

    p = sub.add_parser("augment", help="derive corrupted answers with known tags")
    p.add_argument("--corpus", required=True)
    p.add_argument("--evaluations", required=True, metavar="FILE")
    p.add_argument(
        "--kinds",
        default=",".join(k.value for k in augment.AugmentationKind),
        help="comma-separated transform names",
    )
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("iaa", help="inter-reviewer agreement table")
    p.add_argument("--reviews-a", required=True, metavar="FILE")
    p.add_argument("--reviews-b", required=True, metavar="FILE")
    p.add_argument("--corpus", help="corpus directory, for per-contract-type rows")

    p = sub.add_parser("triage", help="split scored answers into cleared and flagged")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--scores", metavar="FILE", help="scores JSONL")
    group.add_argument("--run", metavar="RUN_ID", help="score run to read")
    p.add_argument("--relevance-threshold", type=float)
    p.add_argument("--correctness-threshold", type=float)
    p.add_argument(
        "--baseline-hours",
        help="comma-separated review-hour baselines for the savings table",
    )

    p = sub.add_parser("report", help="method-vs-human correlation table")
    p.add_argument("--human", required=True, help="human quarter scores JSONL")
    p.add_argument(
        "--method",
        action="append",
        required=True,
        metavar="NAME=FILE",
        help="scores JSONL per method; repeatable",
    )
    p.add_argument("--criterion", default="f1", choices=["correctness", "precision", "recall", "f1"])

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--evaluations", required=True, metavar="FILE")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)

    return parser


# ---------------------------------------------------------------------------
# Shared plumbing


def _parse_clock(value: Optional[str]) -> Callable[[], datetime]:
    if value is None:
        return lambda: datetime.now(timezone.utc)
    try:
        pinned = datetime.fromisoformat(value)
    except ValueError:
        raise ConfigError(f"--fixed-clock must be an ISO-8601 timestamp, got {value!r}")
    if pinned.tzinfo is None:
        pinned = pinned.replace(tzinfo=timezone.utc)
    return lambda: pinned


def _check_mock(args, settings) -> None:
    if not args.mock:
        return
    for key in ("judge_endpoint", "embed_endpoint"):
        if settings[key]:
            raise ConfigError(f"--mock forbids the {key} setting")


def _corpus_digests(directory: Path) -> dict[str, str]:
    digests = {}
    for name in (datastore.CONTRACTS_FILE, datastore.QA_PAIRS_FILE, "script.jsonl"):
        path = directory / name
        if path.is_file():
            digests[name] = datastore.digest_file(path)
    return digests


def _read_evaluations(path: Path) -> list[Evaluation]:
    problems = []
    evaluations = []
    if not Path(path).is_file():
        raise DataValidationError(f"evaluations file not found: {path}")
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            ev = Evaluation.from_dict(json.loads(line))
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"{Path(path).name}:{lineno}: bad record ({exc!r})")
            continue
        for violation in validate(ev):
            problems.append(f"{Path(path).name}:{lineno}: {violation.path}: {violation.message}")
        evaluations.append(ev)
    if problems:
        raise DataValidationError("evaluations failed validation", problems)
    return evaluations


def _read_reviews(path: Path) -> list[HumanReview]:
    problems = []
    reviews = []
    if not Path(path).is_file():
        raise DataValidationError(f"reviews file not found: {path}")
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            review = HumanReview.from_dict(json.loads(line))
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"{Path(path).name}:{lineno}: bad record ({exc!r})")
            continue
        for violation in validate(review):
            problems.append(f"{Path(path).name}:{lineno}: {violation.path}: {violation.message}")
        reviews.append(review)
    if problems:
        raise DataValidationError("reviews failed validation", problems)
    return reviews


def _read_score_rows(path: Path) -> dict[str, ScoreSet]:
    if not Path(path).is_file():
        raise DataValidationError(f"scores file not found: {path}")
    rows = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataValidationError(f"{Path(path).name}:{lineno}: invalid JSON ({exc.msg})")
        if "qa_id" not in record:
            raise DataValidationError(f"{Path(path).name}:{lineno}: missing qa_id")
        rows[record["qa_id"]] = ScoreSet.from_dict(record)
    if not rows:
        raise DataValidationError(f"no score rows in {path}")
    return rows


def _make_embedder(args, settings) -> alignment.Embedder:
    if settings["embed_endpoint"] and not args.mock:
        return alignment.HttpEmbedder(
            endpoint_url=settings["embed_endpoint"],
            model_id=settings["embed_model"] or "default",
            api_key_ref=settings["embed_api_key_env"] or None,
            timeout=_float_setting(settings, "request_timeout"),
        )
    return alignment.OfflineEmbedder()


def _align_config(settings) -> alignment.AlignConfig:
    return alignment.AlignConfig(
        similarity_threshold=_float_setting(settings, "similarity_threshold"),
        adjusted_similarity_threshold=_float_setting(
            settings, "adjusted_similarity_threshold"
        ),
    )


def _start_run(settings, subcommand: str, config: dict, digests: dict, clock) -> datastore.RunWriter:
    config = {"subcommand": subcommand, **config}
    return datastore.RunWriter(
        Path(settings["runs_dir"]), config, digests, clock=clock
    )


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.4f}"


# ---------------------------------------------------------------------------
# Subcommands


def cmd_ingest(args, settings, clock, out) -> int:
    if not args.corpus and not args.release:
        raise ConfigError("ingest needs --corpus and/or --release")
    if args.release:
        if not args.out:
            raise ConfigError("--release needs --out")
        result = datastore.import_legalbench_ldp(Path(args.release))
        for warning in result.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        for error in result.errors:
            print(f"error: {error}", file=sys.stderr)
        if not result.corpus.qa_pairs and result.errors:
            raise DataValidationError("import produced no usable records", result.errors)
        out_dir = Path(args.out)
        datastore.write_corpus(out_dir, result.corpus)
        with open(out_dir / "human_evaluations.jsonl", "w", encoding="utf-8") as fh:
            for ev in result.evaluations:
                fh.write(datastore.canonical_json(ev.to_dict()) + "\n")
        if result.sidecar:
            (out_dir / "sidecar.json").write_text(
                datastore.canonical_json(result.sidecar) + "\n", encoding="utf-8"
            )
        print(
            f"imported {len(result.corpus.qa_pairs)} qa pairs, "
            f"{len(result.evaluations)} evaluations -> {out_dir}",
            file=out,
        )
    if args.corpus:
        corpus = datastore.load_corpus(Path(args.corpus))
        print(
            f"corpus ok: {len(corpus.contracts)} contracts, "
            f"{len(corpus.qa_pairs)} qa pairs",
            file=out,
        )
    return 0


def _judge_backend(args, settings, corpus_dir: Path):
    if not args.mock and not settings["judge_endpoint"]:
        raise ConfigError("judge needs the judge_endpoint setting, or --mock")
    if args.mock:
        script = {}
        script_path = corpus_dir / "script.jsonl"
        if script_path.is_file():
            for line in script_path.read_text().splitlines():
                if line.strip():
                    record = json.loads(line)
                    script[record["key"]] = record["reply"]
        return judge.ScriptedBackend(script=script)
    cfg = judge.JudgeConfig(
        model_id=settings["judge_model"],
        endpoint_url=settings["judge_endpoint"],
        api_key_ref=settings["judge_api_key_env"] or None,
        request_timeout=_float_setting(settings, "request_timeout"),
        max_retries=int(settings["max_retries"]),
        parallelism=int(settings["parallelism"]),
        answer_model_id=settings["answer_model"] or None,
    )
    return judge.HttpChatBackend(cfg)


def cmd_judge(args, settings, clock, out) -> int:
    corpus_dir = Path(args.corpus)
    corpus = datastore.load_corpus(corpus_dir)
    backend = _judge_backend(args, settings, corpus_dir)
    cfg = judge.JudgeConfig(
        model_id=backend.model_id,
        endpoint_url=settings["judge_endpoint"] or None,
        api_key_ref=settings["judge_api_key_env"] or None,
        request_timeout=_float_setting(settings, "request_timeout"),
        max_retries=int(settings["max_retries"]),
        parallelism=int(settings["parallelism"]),
        answer_model_id=settings["answer_model"] or None,
    )
    raw_records = []

    def sink(qa_id: str, purpose: str, raw: judge.RawJudgeResponse) -> None:
        raw_records.append({"qa_id": qa_id, "purpose": purpose, **raw.to_dict()})

    runner = judge.JudgeRunner(cfg, backend, clock=clock, raw_sink=sink)
    items = [
        (corpus.contracts[qa.contract_id], qa) for qa in corpus.qa_pairs.values()
    ]
    evaluations = runner.evaluate_batch(items)
    warnings = []
    if args.verify:
        verified = []
        for (doc, qa), ev in zip(items, evaluations):
            outcome = runner.verify_chain(doc, qa, ev)
            verified.append(outcome.evaluation)
            if outcome.warning:
                warnings.append(f"{qa.id}: {outcome.warning}")
        evaluations = verified

    writer = _start_run(
        settings,
        "judge",
        {"model_id": cfg.model_id, "verify": bool(args.verify), "mock": bool(args.mock)},
        _corpus_digests(corpus_dir),
        clock,
    )
    writer.write_jsonl("evaluations.jsonl", [e.to_dict() for e in evaluations])
    writer.write_jsonl("raw_responses.jsonl", raw_records)
    writer.finish()
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"judged {len(evaluations)} answers -> {writer.path}", file=out)
    return 0


def cmd_score(args, settings, clock, out) -> int:
    run = datastore.load_run(Path(settings["runs_dir"]), args.run)
    evaluations = [Evaluation.from_dict(r) for r in run.read_jsonl("evaluations.jsonl")]
    if not evaluations:
        raise DataValidationError(f"run {args.run} holds no evaluations")
    rows = []
    for ev in evaluations:
        scores = metrics.compute_scores(tag_counts(ev))
        rows.append({"qa_id": ev.qa_id, **scores.to_dict()})
    writer = _start_run(
        settings,
        "score",
        {"source_run": args.run},
        {"evaluations.jsonl": run.manifest.artifacts["evaluations.jsonl"]},
        clock,
    )
    writer.write_jsonl("scores.jsonl", rows)
    csv = ["qa_id,correctness,precision,recall,f1"]
    csv += [
        f"{r['qa_id']},{_fmt(r['correctness'])},{_fmt(r['precision'])},"
        f"{_fmt(r['recall'])},{_fmt(r['f1'])}"
        for r in rows
    ]
    writer.write_text("reports/scores.csv", "\n".join(csv) + "\n")
    writer.finish()
    print(f"scored {len(rows)} evaluations -> {writer.path}", file=out)
    return 0


def cmd_baseline(args, settings, clock, out) -> int:
    corpus_dir = Path(args.corpus)
    corpus = datastore.load_corpus(corpus_dir)
    rows = []
    for qa in corpus.qa_pairs.values():
        if not qa.ground_truth:
            continue
        try:
            row = {
                "qa_id": qa.id,
                "bleu": bleu(qa.answer, qa.ground_truth),
                "rouge1_f1": rouge_n(qa.answer, qa.ground_truth, 1).f1,
                "rouge2_f1": rouge_n(qa.answer, qa.ground_truth, 2).f1,
                "rougeL_f1": rouge_l(qa.answer, qa.ground_truth).f1,
            }
        except EmptyTextError as exc:
            raise DataValidationError(f"{qa.id}: {exc}")
        rows.append(row)
    if not rows:
        raise DataValidationError("no qa pairs with ground truth to compare against")
    writer = _start_run(settings, "baseline", {}, _corpus_digests(corpus_dir), clock)
    writer.write_jsonl("baselines.jsonl", rows)
    csv = ["qa_id,bleu,rouge1_f1,rouge2_f1,rougeL_f1"]
    csv += [
        f"{r['qa_id']},{r['bleu']:.4f},{r['rouge1_f1']:.4f},"
        f"{r['rouge2_f1']:.4f},{r['rougeL_f1']:.4f}"
        for r in rows
    ]
    writer.write_text("reports/baselines.csv", "\n".join(csv) + "\n")
    writer.finish()
    print(f"compared {len(rows)} answers -> {writer.path}", file=out)
    return 0


def cmd_align(args, settings, clock, out) -> int:
    run = datastore.load_run(Path(settings["runs_dir"]), args.run)
    machine = [Evaluation.from_dict(r) for r in run.read_jsonl("evaluations.jsonl")]
    human = _read_evaluations(Path(args.human))
    human_by_qa = {}
    for ev in human:
        if ev.qa_id in human_by_qa:
            raise DataValidationError(f"duplicate human evaluation for {ev.qa_id}")
        human_by_qa[ev.qa_id] = ev
    cfg = _align_config(settings)
    embedder = _make_embedder(args, settings)
    rows = []
    for machine_ev in machine:
        human_ev = human_by_qa.get(machine_ev.qa_id)
        if human_ev is None:
            continue
        report = alignment.align_evaluations(
            list(machine_ev.ldps), list(human_ev.ldps), cfg, embedder
        )
        rows.append({"qa_id": machine_ev.qa_id, **report.to_dict()})
    if not rows:
        raise DataValidationError("no qa ids shared between the run and the human file")
    writer = _start_run(
        settings,
        "align",
        {
            "source_run": args.run,
            "similarity_threshold": cfg.similarity_threshold,
            "adjusted_similarity_threshold": cfg.adjusted_similarity_threshold,
        },
        {
            "evaluations.jsonl": run.manifest.artifacts["evaluations.jsonl"],
            "human": datastore.digest_file(Path(args.human)),
        },
        clock,
    )
    writer.write_jsonl("alignment.jsonl", rows)
    csv = ["qa_id,pairs,accuracy,adjusted_accuracy"]
    csv += [
        f"{r['qa_id']},{len(r['pairs'])},{r['accuracy']:.4f},{r['adjusted_accuracy']:.4f}"
        for r in rows
    ]
    writer.write_text("reports/alignment.csv", "\n".join(csv) + "\n")
    writer.finish()
    mean = sum(r["accuracy"] for r in rows) / len(rows)
    print(f"aligned {len(rows)} answers, mean accuracy {mean:.4f} -> {writer.path}", file=out)
    return 0


def cmd_jury(args, settings, clock, out) -> int:
    files = [Path(p) for p in args.evaluations]
    if len(files) < 2:
        raise ConfigError("jury needs at least two --evaluations files")
    per_file = [_read_evaluations(p) for p in files]
    by_qa: dict[str, list[Evaluation]] = {}
    for evaluations in per_file:
        for ev in evaluations:
            by_qa.setdefault(ev.qa_id, []).append(ev)
    strategy = jury.Strategy(args.strategy)
    cfg = _align_config(settings)
    embedder = _make_embedder(args, settings)
    fused = []
    for qa_id, group in by_qa.items():
        if len(group) < 2:
            raise DataValidationError(
                f"{qa_id} was evaluated by only one judge; the jury needs all files to cover it"
            )
        fused.append(jury.aggregate(group, strategy, cfg, embedder))
    writer = _start_run(
        settings,
        "jury",
        {"strategy": strategy.value},
        {f"evaluations_{i}": datastore.digest_file(p) for i, p in enumerate(files)},
        clock,
    )
    writer.write_jsonl("jury_evaluations.jsonl", [e.to_dict() for e in fused])
    writer.finish()
    print(f"aggregated {len(fused)} answers ({strategy.value}) -> {writer.path}", file=out)
    return 0


def cmd_augment(args, settings, clock, out) -> int:
    try:
        kinds = [augment.AugmentationKind(k.strip()) for k in args.kinds.split(",") if k.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc))
    if not kinds:
        raise ConfigError("no augmentation kinds selected")
    corpus = datastore.load_corpus(Path(args.corpus))
    evaluations = _read_evaluations(Path(args.evaluations))
    rewriter = augment.MockRewriter()
    rows = []
    skipped = []
    for ev in evaluations:
        qa = corpus.qa_pairs.get(ev.qa_id)
        if qa is None:
            raise DataValidationError(f"evaluation for unknown qa_id {ev.qa_id!r}")
        for kind in kinds:
            try:
                example = augment.apply_transform(kind, qa, ev, args.seed, rewriter)
            except augment.AugmentationError as exc:
                skipped.append(f"{ev.qa_id}/{kind.value}: {exc}")
                continue
            rows.append(example.to_dict())
    writer = _start_run(
        settings,
        "augment",
        {"kinds": [k.value for k in kinds], "seed": args.seed},
        {"evaluations": datastore.digest_file(Path(args.evaluations))},
        clock,
    )
    writer.write_jsonl("augmented.jsonl", rows)
    writer.finish()
    for line in skipped:
        print(f"skipped: {line}", file=sys.stderr)
    print(
        f"augmented {len(rows)} examples ({len(skipped)} skipped) -> {writer.path}",
        file=out,
    )
    return 0


def cmd_iaa(args, settings, clock, out) -> int:
    reviews_a = _read_reviews(Path(args.reviews_a))
    reviews_b = _read_reviews(Path(args.reviews_b))
    groups = None
    if args.corpus:
        groups = datastore.load_corpus(Path(args.corpus)).contract_type_of()
    cells = analysis.iaa(reviews_a, reviews_b, groups)
    csv = analysis.render_iaa_csv(cells)
    writer = _start_run(
        settings,
        "iaa",
        {"grouped": bool(args.corpus)},
        {
            "reviews_a": datastore.digest_file(Path(args.reviews_a)),
            "reviews_b": datastore.digest_file(Path(args.reviews_b)),
        },
        clock,
    )
    writer.write_text("reports/iaa.csv", csv)
    writer.write_jsonl("iaa.jsonl", [c.to_dict() for c in cells])
    writer.finish()
    print(csv, end="", file=out)
    print(f"-> {writer.path}", file=out)
    return 0


def cmd_triage(args, settings, clock, out) -> int:
    if args.scores:
        scores_path = Path(args.scores)
    else:
        run = datastore.load_run(Path(settings["runs_dir"]), args.run)
        scores_path = run.path / "scores.jsonl"
    scores = _read_score_rows(scores_path)
    cfg = analysis.TriageConfig(
        relevance_threshold=(
            args.relevance_threshold
            if args.relevance_threshold is not None
            else _float_setting(settings, "relevance_threshold")
        ),
        correctness_threshold=(
            args.correctness_threshold
            if args.correctness_threshold is not None
            else _float_setting(settings, "correctness_threshold")
        ),
    )
    report = analysis.triage(scores, cfg)
    writer = _start_run(
        settings,
        "triage",
        {
            "relevance_threshold": cfg.relevance_threshold,
            "correctness_threshold": cfg.correctness_threshold,
        },
        {"scores": datastore.digest_file(scores_path)},
        clock,
    )
    writer.write_text("reports/triage.csv", analysis.render_triage_csv(report))
    savings = []
    if args.baseline_hours:
        for token in args.baseline_hours.split(","):
            try:
                hours = float(token)
            except ValueError:
                raise ConfigError(f"--baseline-hours must be numbers, got {token!r}")
            savings.append(analysis.time_savings(report, hours))
        writer.write_text(
            "reports/time_savings.csv", analysis.render_time_savings_csv(savings)
        )
    writer.write_text(
        "triage.json", datastore.canonical_json(report.to_dict()) + "\n"
    )
    writer.finish()
    print(
        f"{len(report.cleared)} cleared / {len(report.flagged)} flagged "
        f"of {report.total} -> {writer.path}",
        file=out,
    )
    for saved in savings:
        print(
            f"baseline {saved.baseline_hours}h -> estimated {saved.estimated_hours}h",
            file=out,
        )
    return 0


def cmd_report(args, settings, clock, out) -> int:
    human_path = Path(args.human)
    if not human_path.is_file():
        raise DataValidationError(f"human scores file not found: {human_path}")
    human_rows = {}
    for line in human_path.read_text().splitlines():
        if line.strip():
            record = json.loads(line)
            human_rows[record["qa_id"]] = record["score"]
    if not human_rows:
        raise DataValidationError(f"no rows in {human_path}")

    methods = {}
    digests = {"human": datastore.digest_file(human_path)}
    for spec_item in args.method:
        name, sep, path_text = spec_item.partition("=")
        if not sep:
            raise ConfigError(f"--method must look like NAME=FILE, got {spec_item!r}")
        rows = _read_score_rows(Path(path_text))
        missing = [qa_id for qa_id in human_rows if qa_id not in rows]
        if missing:
            raise DataValidationError(
                f"method {name!r} lacks scores for {len(missing)} qa ids", missing
            )
        values = []
        for qa_id in human_rows:
            value = getattr(rows[qa_id], args.criterion)
            if value is None:
                raise DataValidationError(
                    f"method {name!r} has no {args.criterion} for {qa_id}"
                )
            values.append(value)
        methods[name] = values
        digests[f"method_{name}"] = datastore.digest_file(Path(path_text))

    human = [float(human_rows[qa_id]) for qa_id in human_rows]
    rows = analysis.correlation_report(methods, human)
    csv = analysis.render_correlation_csv(rows)
    writer = _start_run(
        settings, "report", {"criterion": args.criterion}, digests, clock
    )
    writer.write_text("reports/correlation.csv", csv)
    writer.write_jsonl("correlation.jsonl", [r.to_dict() for r in rows])
    writer.finish()
    print(csv, end="", file=out)
    print(f"-> {writer.path}", file=out)
    return 0


def cmd_serve(args, settings, clock, out) -> int:
    from .service import ServiceConfig, ServiceState, create_app

    tokens = {}
    for pair in settings["service_tokens"].split(","):
        pair = pair.strip()
        if not pair:
            continue
        token, sep, reviewer_id = pair.partition("=")
        if not sep or not token or not reviewer_id:
            raise ConfigError("service_tokens must look like token=reviewer,...")
        tokens[token] = reviewer_id
    if not tokens:
        raise ConfigError("serve needs at least one token in service_tokens")

    corpus = datastore.load_corpus(Path(args.corpus))
    machine = {}
    for ev in _read_evaluations(Path(args.evaluations)):
        machine[ev.qa_id] = ev
    state = ServiceState(
        corpus=corpus,
        machine_evaluations=machine,
        cfg=ServiceConfig(
            tokens=tokens,
            relevance_threshold=_float_setting(settings, "relevance_threshold"),
            correctness_threshold=_float_setting(settings, "correctness_threshold"),
        ),
        embedder=_make_embedder(args, settings),
        align_cfg=_align_config(settings),
        clock=clock,
    )
    app = create_app(state)
    print(f"serving {len(machine)} evaluations on {args.host}:{args.port}", file=out)
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "judge": cmd_judge,
    "score": cmd_score,
    "baseline": cmd_baseline,
    "align": cmd_align,
    "jury": cmd_jury,
    "augment": cmd_augment,
    "iaa": cmd_iaa,
    "triage": cmd_triage,
    "report": cmd_report,
    "serve": cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None, out=sys.stdout) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings = load_settings(args.config)
        _check_mock(args, settings)
        clock = _parse_clock(args.fixed_clock)
        return COMMANDS[args.subcommand](args, settings, clock, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataValidationError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return 2
    except (ProviderError, judge.ParseError) as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
