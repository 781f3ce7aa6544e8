"""Tests for ldpeval.datastore."""

import json

import pytest

from ldpeval.datastore import (
    Corpus,
    LoadedRun,
    RunManifest,
    RunWriter,
    canonical_json,
    compute_run_id,
    digest_bytes,
    import_legalbench_ldp,
    load_corpus,
    load_run,
    write_corpus,
)
from ldpeval.domain import Evaluation, Source, Tag
from ldpeval.errors import DataValidationError, IntegrityError, MissingRunError

from .conftest import FIXED_TS, FIXTURES, evaluation, fixed_clock


class TestLoadCorpus:
    def test_hosting_fixture_loads(self):
        corpus = load_corpus(FIXTURES / "hosting")
        assert list(corpus.contracts) == ["hosting-001"]
        assert list(corpus.qa_pairs) == ["qa-001", "qa-002", "qa-003", "qa-004"]
        assert corpus.contracts["hosting-001"].contract_type == "hosting"
        assert "[par_46]" in corpus.contracts["hosting-001"].text

    def test_contract_type_map(self):
        corpus = load_corpus(FIXTURES / "hosting")
        assert corpus.contract_type_of() == {
            f"qa-00{i}": "hosting" for i in range(1, 5)
        }

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataValidationError) as err:
            load_corpus(tmp_path)
        assert any("contracts.jsonl" in p for p in err.value.problems)

    def test_dangling_contract_id(self, tmp_path):
        (tmp_path / "contracts.jsonl").write_text(
            '{"id": "c-1", "contract_type": "nda", "text": "body"}\n'
        )
        (tmp_path / "qa_pairs.jsonl").write_text(
            '{"id": "qa-1", "contract_id": "c-404", "question": "q", "answer": "a"}\n'
        )
        with pytest.raises(DataValidationError) as err:
            load_corpus(tmp_path)
        assert err.value.problems == [
            "qa_pairs.jsonl:1: unknown contract_id 'c-404'"
        ]

    def test_duplicate_qa_id(self, tmp_path):
        (tmp_path / "contracts.jsonl").write_text(
            '{"id": "c-1", "contract_type": "nda", "text": "body"}\n'
        )
        row = '{"id": "qa-1", "contract_id": "c-1", "question": "q", "answer": "a"}\n'
        (tmp_path / "qa_pairs.jsonl").write_text(row + row)
        with pytest.raises(DataValidationError) as err:
            load_corpus(tmp_path)
        assert any("qa_pairs.jsonl:2: duplicate qa id" in p for p in err.value.problems)

    def test_bad_json_reports_line(self, tmp_path):
        (tmp_path / "contracts.jsonl").write_text(
            '{"id": "c-1", "contract_type": "nda", "text": "body"}\nnot json\n'
        )
        (tmp_path / "qa_pairs.jsonl").write_text("")
        with pytest.raises(DataValidationError) as err:
            load_corpus(tmp_path)
        assert any(p.startswith("contracts.jsonl:2:") for p in err.value.problems)

    def test_domain_violations_reported(self, tmp_path):
        (tmp_path / "contracts.jsonl").write_text(
            '{"id": "", "contract_type": "nda", "text": "body"}\n'
        )
        (tmp_path / "qa_pairs.jsonl").write_text("")
        with pytest.raises(DataValidationError) as err:
            load_corpus(tmp_path)
        assert any("contracts.jsonl:1:" in p for p in err.value.problems)

    def test_write_then_load_round_trip(self, tmp_path):
        corpus = load_corpus(FIXTURES / "hosting")
        write_corpus(tmp_path, corpus)
        again = load_corpus(tmp_path)
        assert again == corpus


def release_record(**overrides):
    record = {
        "question_id": "lb-1",
        "contract_id": "c-1",
        "contract_type": "license",
        "contract_text": "[par_1] Licensed software is provided as is.",
        "question": "What is licensed?",
        "answer": "Software is licensed as is.",
        "reference_answer": "The software.",
        "ldps": [
            {"text": "Software is licensed as is.", "label": "Correct", "citation": "[par_1]"}
        ],
    }
    record.update(overrides)
    return record


class TestImportRelease:
    def write(self, tmp_path, records):
        path = tmp_path / "release.jsonl"
        path.write_text("".join(json.dumps(r) + "\n" for r in records))
        return path

    def test_well_formed_record(self, tmp_path):
        result = import_legalbench_ldp(self.write(tmp_path, [release_record()]))
        assert result.errors == []
        assert list(result.corpus.qa_pairs) == ["lb-1"]
        (ev,) = result.evaluations
        assert ev.evaluator_kind is Source.HUMAN
        assert ev.ldps[0].tag is Tag.CORRECT
        assert ev.ldps[0].citation == "[par_1]"
        assert result.corpus.qa_pairs["lb-1"].ground_truth == "The software."

    def test_unknown_tag_is_per_record(self, tmp_path):
        bad = release_record(
            question_id="lb-2",
            ldps=[{"text": "x", "label": "mostly-right"}],
        )
        result = import_legalbench_ldp(self.write(tmp_path, [release_record(), bad]))
        assert list(result.corpus.qa_pairs) == ["lb-1"]
        assert len(result.errors) == 1
        assert "line 2" in result.errors[0]

    def test_empty_file_warns(self, tmp_path):
        result = import_legalbench_ldp(self.write(tmp_path, []))
        assert result.corpus.qa_pairs == {}
        assert result.warnings and "no records" in result.warnings[0]

    def test_unknown_fields_to_sidecar(self, tmp_path):
        record = release_record(split="test", annotator_notes="tricky")
        result = import_legalbench_ldp(self.write(tmp_path, [record]))
        assert result.sidecar == {"lb-1": {"split": "test", "annotator_notes": "tricky"}}

    def test_duplicate_question_id(self, tmp_path):
        result = import_legalbench_ldp(
            self.write(tmp_path, [release_record(), release_record()])
        )
        assert len(result.evaluations) == 1
        assert any("duplicate question_id" in e for e in result.errors)

    def test_contract_text_required_once(self, tmp_path):
        first = release_record()
        second = release_record(question_id="lb-2", contract_text=None)
        result = import_legalbench_ldp(self.write(tmp_path, [first, second]))
        # Second record reuses the contract already seen; no error.
        assert result.errors == []
        assert list(result.corpus.qa_pairs) == ["lb-1", "lb-2"]

    def test_missing_contract_text_on_new_contract(self, tmp_path):
        record = release_record(contract_id="c-2", contract_text=None)
        result = import_legalbench_ldp(self.write(tmp_path, [record]))
        assert result.corpus.qa_pairs == {}
        assert any("lacks contract_text" in e for e in result.errors)


class TestRunStorage:
    def make_run(self, root, marker="a"):
        writer = RunWriter(
            root,
            config={"subcommand": "judge", "marker": marker},
            input_digests={"corpus": "ff" * 32},
            clock=fixed_clock,
        )
        evs = [
            evaluation("qa-1", [Tag.CORRECT, Tag.MISSING]),
            evaluation("qa-2", [Tag.CORRECT]),
        ]
        writer.write_jsonl("evaluations.jsonl", [e.to_dict() for e in evs])
        writer.write_text("reports/triage.csv", "qa_id,status\nqa-1,cleared\n")
        manifest = writer.finish()
        return writer, manifest, evs

    def test_round_trip_identity(self, tmp_path):
        writer, manifest, evs = self.make_run(tmp_path)
        run = load_run(tmp_path, writer.run_id)
        assert run.manifest == manifest
        records = run.read_jsonl("evaluations.jsonl")
        assert [Evaluation.from_dict(r) for r in records] == evs
        assert run.read_text("reports/triage.csv").startswith("qa_id,status")

    def test_run_id_deterministic(self, tmp_path):
        a = compute_run_id({"x": 1}, {"corpus": "aa"})
        b = compute_run_id({"x": 1}, {"corpus": "aa"})
        c = compute_run_id({"x": 2}, {"corpus": "aa"})
        assert a == b != c
        assert len(a) == 16

    def test_byte_identical_rewrites(self, tmp_path):
        self.make_run(tmp_path / "r1")
        self.make_run(tmp_path / "r2")
        files1 = sorted(p.relative_to(tmp_path / "r1") for p in (tmp_path / "r1").rglob("*") if p.is_file())
        files2 = sorted(p.relative_to(tmp_path / "r2") for p in (tmp_path / "r2").rglob("*") if p.is_file())
        assert files1 == files2
        for rel in files1:
            assert (tmp_path / "r1" / rel).read_bytes() == (tmp_path / "r2" / rel).read_bytes()

    def test_tamper_detection(self, tmp_path):
        writer, _, _ = self.make_run(tmp_path)
        target = writer.path / "evaluations.jsonl"
        target.write_text(target.read_text().replace("correct", "missing"))
        with pytest.raises(IntegrityError) as err:
            load_run(tmp_path, writer.run_id)
        assert any("digest mismatch" in p for p in err.value.problems)

    def test_missing_artifact_detected(self, tmp_path):
        writer, _, _ = self.make_run(tmp_path)
        (writer.path / "evaluations.jsonl").unlink()
        with pytest.raises(IntegrityError):
            load_run(tmp_path, writer.run_id)

    def test_unknown_run(self, tmp_path):
        with pytest.raises(MissingRunError):
            load_run(tmp_path, "deadbeef00000000")

    def test_unknown_artifact_read(self, tmp_path):
        writer, _, _ = self.make_run(tmp_path)
        run = load_run(tmp_path, writer.run_id)
        with pytest.raises(DataValidationError, match="no artifact"):
            run.read_text("nope.jsonl")

    def test_finish_is_single_shot(self, tmp_path):
        writer, _, _ = self.make_run(tmp_path)
        with pytest.raises(ValueError, match="finished"):
            writer.finish()
        with pytest.raises(ValueError, match="finished"):
            writer.write_text("late.txt", "x")

    def test_artifact_names_stay_inside(self, tmp_path):
        writer = RunWriter(tmp_path, config={}, input_digests={}, clock=fixed_clock)
        with pytest.raises(ValueError, match="relative"):
            writer.write_text("../escape.txt", "x")
        with pytest.raises(ValueError, match="relative"):
            writer.write_text("/abs.txt", "x")

    def test_manifest_round_trip(self):
        manifest = RunManifest(
            run_id="ab" * 8,
            config={"k": "v"},
            input_digests={"corpus": "cc"},
            artifacts={"evaluations.jsonl": "dd"},
            created_at=FIXED_TS,
        )
        assert RunManifest.from_dict(manifest.to_dict()) == manifest


class TestCanonicalJson:
    def test_sorted_and_tight(self):
        assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'

    def test_unicode_preserved(self):
        assert canonical_json({"k": "§4"}) == '{"k":"§4"}'

    def test_digest_stable(self):
        assert digest_bytes(b"x") == digest_bytes(b"x")
        assert digest_bytes(b"x") != digest_bytes(b"y")
