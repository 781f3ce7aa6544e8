"""Corpus loading, release-file import, and content-addressed run storage.

Corpora are two JSONL files (contracts.jsonl, qa_pairs.jsonl).  Runs live
under runs/<run_id>/ where run_id is a hash of the config snapshot and the
input digests, so identical inputs land in identical directories.  Every
artifact's digest is recorded in manifest.json and checked on load.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

from .domain import ContractDoc, Evaluation, LegalDataPoint, QAPair, Source, Tag, validate
from .errors import DataValidationError, IntegrityError, MissingRunError

CONTRACTS_FILE = "contracts.jsonl"
QA_PAIRS_FILE = "qa_pairs.jsonl"
MANIFEST_FILE = "manifest.json"

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


def canonical_json(obj: Any) -> str:
    """Stable rendering: sorted keys, tight separators, raw unicode."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_file(path: Path) -> str:
    return digest_bytes(Path(path).read_bytes())


@dataclass(frozen=True)
class Corpus:
    contracts: dict[str, ContractDoc]
    qa_pairs: dict[str, QAPair]

    def contract_type_of(self) -> dict[str, str]:
        """qa_id -> contract_type, for grouped reports."""
        return {
            qa.id: self.contracts[qa.contract_id].contract_type
            for qa in self.qa_pairs.values()
        }


def _read_jsonl(path: Path, problems: list[str]) -> list[tuple[int, dict]]:
    records = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            problems.append(f"{path.name}:{lineno}: invalid JSON ({exc.msg})")
            continue
        if not isinstance(record, dict):
            problems.append(f"{path.name}:{lineno}: expected an object")
            continue
        records.append((lineno, record))
    return records


def load_corpus(directory: Path) -> Corpus:
    """Load and fully validate a corpus directory.

    Every problem is reported with its file and line number; any problem
    at all fails the load.
    """
    directory = Path(directory)
    problems: list[str] = []
    contracts: dict[str, ContractDoc] = {}
    qa_pairs: dict[str, QAPair] = {}

    contracts_path = directory / CONTRACTS_FILE
    qa_path = directory / QA_PAIRS_FILE
    for path in (contracts_path, qa_path):
        if not path.is_file():
            problems.append(f"{path.name}: file not found in {directory}")
    if problems:
        raise DataValidationError("corpus failed validation", problems)

    for lineno, record in _read_jsonl(contracts_path, problems):
        try:
            doc = ContractDoc.from_dict(record)
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"{CONTRACTS_FILE}:{lineno}: bad record ({exc})")
            continue
        for violation in validate(doc):
            problems.append(f"{CONTRACTS_FILE}:{lineno}: {violation.path}: {violation.message}")
        if doc.id in contracts:
            problems.append(f"{CONTRACTS_FILE}:{lineno}: duplicate contract id {doc.id!r}")
        contracts[doc.id] = doc

    for lineno, record in _read_jsonl(qa_path, problems):
        try:
            qa = QAPair.from_dict(record)
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"{QA_PAIRS_FILE}:{lineno}: bad record ({exc})")
            continue
        for violation in validate(qa):
            problems.append(f"{QA_PAIRS_FILE}:{lineno}: {violation.path}: {violation.message}")
        if qa.id in qa_pairs:
            problems.append(f"{QA_PAIRS_FILE}:{lineno}: duplicate qa id {qa.id!r}")
        if qa.contract_id not in contracts:
            problems.append(
                f"{QA_PAIRS_FILE}:{lineno}: unknown contract_id {qa.contract_id!r}"
            )
        qa_pairs[qa.id] = qa

    if problems:
        raise DataValidationError("corpus failed validation", problems)
    return Corpus(contracts=contracts, qa_pairs=qa_pairs)


@dataclass(frozen=True)
class ImportResult:
    corpus: Corpus
    evaluations: list[Evaluation]
    sidecar: dict[str, dict]
    errors: list[str]
    warnings: list[str]


_KNOWN_IMPORT_FIELDS = {
    "question_id", "contract_id", "contract_type", "contract_text",
    "question", "answer", "reference_answer", "ldps",
}


def import_legalbench_ldp(path: Path) -> ImportResult:
    """Adapt a released tagged-LDP JSONL file into domain records.

    Field mapping, one released record per line:
      question_id      -> QAPair.id
      contract_id      -> ContractDoc.id
      contract_type    -> ContractDoc.contract_type (default "unknown")
      contract_text    -> ContractDoc.text (first record wins)
      question, answer -> QAPair
      reference_answer -> QAPair.ground_truth
      ldps[].text/.label/.citation -> LegalDataPoint (label parsed as Tag)

    Anything else is preserved per question in the sidecar.  Records that
    do not fit are reported individually and skipped; the rest import.
    """
    path = Path(path)
    problems: list[str] = []
    records = _read_jsonl(path, problems)
    errors = list(problems)
    warnings: list[str] = []
    contracts: dict[str, ContractDoc] = {}
    qa_pairs: dict[str, QAPair] = {}
    evaluations: list[Evaluation] = []
    sidecar: dict[str, dict] = {}

    if not records:
        warnings.append(f"{path.name}: no records found")

    for lineno, record in records:
        where = f"record at line {lineno}"
        try:
            qa_id = record["question_id"]
            contract_id = record["contract_id"]
            qa = QAPair(
                id=qa_id,
                contract_id=contract_id,
                question=record["question"],
                answer=record["answer"],
                ground_truth=record.get("reference_answer"),
            )
            ldps = tuple(
                LegalDataPoint(
                    text=item["text"],
                    tag=Tag.parse(item["label"]),
                    source=Source.HUMAN,
                    citation=item.get("citation"),
                )
                for item in record["ldps"]
            )
            ev = Evaluation(
                qa_id=qa_id,
                evaluator_id="release",
                evaluator_kind=Source.HUMAN,
                ldps=ldps,
                created_at=_EPOCH,
            )
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"{where}: schema mismatch ({exc!r})")
            continue

        violations = validate(qa) + validate(ev)
        if violations:
            errors.append(
                f"{where}: " + "; ".join(f"{v.path}: {v.message}" for v in violations)
            )
            continue
        if qa_id in qa_pairs:
            errors.append(f"{where}: duplicate question_id {qa_id!r}")
            continue

        if contract_id not in contracts:
            text = record.get("contract_text")
            if not text:
                errors.append(f"{where}: first record for {contract_id!r} lacks contract_text")
                continue
            contracts[contract_id] = ContractDoc(
                id=contract_id,
                contract_type=record.get("contract_type", "unknown"),
                text=text,
            )
        qa_pairs[qa_id] = qa
        evaluations.append(ev)
        extra = {k: v for k, v in record.items() if k not in _KNOWN_IMPORT_FIELDS}
        if extra:
            sidecar[qa_id] = extra

    return ImportResult(
        corpus=Corpus(contracts=contracts, qa_pairs=qa_pairs),
        evaluations=evaluations,
        sidecar=sidecar,
        errors=errors,
        warnings=warnings,
    )


def compute_run_id(config: dict, input_digests: dict[str, str]) -> str:
    """Deterministic run identity: hash of config snapshot plus input digests."""
    payload = canonical_json({"config": config, "inputs": input_digests})
    return digest_bytes(payload.encode("utf-8"))[:16]


@dataclass(frozen=True)
class RunManifest:
    run_id: str
    config: dict
    input_digests: dict[str, str]
    artifacts: dict[str, str]
    created_at: datetime

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "config": self.config,
            "input_digests": self.input_digests,
            "artifacts": self.artifacts,
            "created_at": self.created_at.isoformat(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(
            run_id=d["run_id"],
            config=d["config"],
            input_digests=d["input_digests"],
            artifacts=d["artifacts"],
            created_at=datetime.fromisoformat(d["created_at"]),
        )


def _check_artifact_name(name: str) -> None:
    parts = Path(name).parts
    if Path(name).is_absolute() or ".." in parts or not parts:
        raise ValueError(f"artifact name must be a relative path, got {name!r}")


class RunWriter:
    """Single writer for one run directory; finish() seals the manifest."""

    def __init__(
        self,
        root: Path,
        config: dict,
        input_digests: dict[str, str],
        clock: Callable[[], datetime] = _utcnow,
    ):
        self.run_id = compute_run_id(config, input_digests)
        self._config = config
        self._input_digests = dict(input_digests)
        self._clock = clock
        self.path = Path(root) / self.run_id
        self.path.mkdir(parents=True, exist_ok=True)
        self._artifacts: dict[str, str] = {}
        self._finished = False

    def _store(self, name: str, data: bytes) -> None:
        if self._finished:
            raise ValueError("run is already finished")
        _check_artifact_name(name)
        target = self.path / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        self._artifacts[name] = digest_bytes(data)

    def write_jsonl(self, name: str, records: Iterable[dict]) -> None:
        text = "".join(canonical_json(r) + "\n" for r in records)
        self._store(name, text.encode("utf-8"))

    def write_text(self, name: str, text: str) -> None:
        self._store(name, text.encode("utf-8"))

    def finish(self) -> RunManifest:
        if self._finished:
            raise ValueError("run is already finished")
        manifest = RunManifest(
            run_id=self.run_id,
            config=self._config,
            input_digests=self._input_digests,
            artifacts=dict(sorted(self._artifacts.items())),
            created_at=self._clock(),
        )
        data = canonical_json(manifest.to_dict()) + "\n"
        (self.path / MANIFEST_FILE).write_text(data, encoding="utf-8")
        self._finished = True
        return manifest


@dataclass(frozen=True)
class LoadedRun:
    path: Path
    manifest: RunManifest

    def read_text(self, name: str) -> str:
        if name not in self.manifest.artifacts:
            raise DataValidationError(f"run has no artifact {name!r}")
        return (self.path / name).read_text(encoding="utf-8")

    def read_jsonl(self, name: str) -> list[dict]:
        return [json.loads(line) for line in self.read_text(name).splitlines() if line]


def load_run(root: Path, run_id: str, verify: bool = True) -> LoadedRun:
    """Open a run directory, checking every artifact against its digest."""
    path = Path(root) / run_id
    manifest_path = path / MANIFEST_FILE
    if not manifest_path.is_file():
        raise MissingRunError(f"no run {run_id!r} under {root}")
    manifest = RunManifest.from_dict(json.loads(manifest_path.read_text(encoding="utf-8")))
    if verify:
        bad = []
        for name, expected in manifest.artifacts.items():
            target = path / name
            if not target.is_file():
                bad.append(f"{name}: missing")
            elif digest_file(target) != expected:
                bad.append(f"{name}: digest mismatch")
        if bad:
            raise IntegrityError(f"run {run_id} failed integrity check", bad)
    return LoadedRun(path=path, manifest=manifest)


def write_corpus(directory: Path, corpus: Corpus) -> None:
    """Inverse of load_corpus, with the same canonical JSONL rendering."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    contracts = "".join(canonical_json(c.to_dict()) + "\n" for c in corpus.contracts.values())
    qa = "".join(canonical_json(q.to_dict()) + "\n" for q in corpus.qa_pairs.values())
    (directory / CONTRACTS_FILE).write_text(contracts, encoding="utf-8")
    (directory / QA_PAIRS_FILE).write_text(qa, encoding="utf-8")
