"""Generate the test fixture corpus. Run from the repo root; output is
committed, so this only needs re-running when the fixtures change shape."""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
HOSTING = ROOT / "tests" / "fixtures" / "hosting"
HOSTING.mkdir(parents=True, exist_ok=True)

PAR = {
    1: (
        "WEB SITE HOSTING AGREEMENT. This Web Site Hosting Agreement is entered "
        "into on April 6, 1999 between Digital Media Services, Inc., a Delaware "
        "corporation, and Sunshine Retail Group, LLC."
    ),
    2: (
        "WHEREAS, the Provider operates computer servers connected to the "
        "Internet and offers hosting services to commercial customers;"
    ),
    36: (
        "The hosting services shall commence on April 1, 1999 and continue for "
        "an initial term of twenty-four months, renewing automatically unless "
        "either party gives sixty days written notice."
    ),
    46: (
        "The validity, construction, interpretation and legal effect of this "
        "Agreement shall be governed by the laws of the State of Florida, "
        "without regard to its conflict of laws principles."
    ),
}

contract_text = "\n\n".join(f"[par_{n}] {text}" for n, text in sorted(PAR.items()))

contracts = [
    {"id": "hosting-001", "contract_type": "hosting", "text": contract_text},
]


def q(detail_label, detail):
    return (
        f'Highlight the parts (if any) of this contract related to "{detail_label}" '
        f"that should be reviewed by a lawyer. Details: {detail}"
    )


qa_pairs = [
    {
        "id": "qa-001",
        "contract_id": "hosting-001",
        "question": q("Document Name", "The name of the contract"),
        "answer": "The name of the contract is 'WEB SITE HOSTING AGREEMENT' ([par_1] Preamble).",
        "ground_truth": 'The contract is titled "WEB SITE HOSTING AGREEMENT" ([par_1]).',
    },
    {
        "id": "qa-002",
        "contract_id": "hosting-001",
        "question": q("Agreement Date", "The date of the contract"),
        "answer": "The agreement date is April 6, 1999 ([par_1] Unnumbered Clause).",
        "ground_truth": (
            "The agreement is dated April 6, 1999 ([par_1]); services commence "
            "on April 1, 1999 ([par_36])."
        ),
    },
    {
        "id": "qa-003",
        "contract_id": "hosting-001",
        "question": q("Effective Date", "The date when the contract is effective"),
        "answer": (
            "The contract specifies that it is entered into on April 6, 1999 "
            "([par_1] 1). This date appears to be the effective date of the "
            "contract, though the term 'Effective Date' is not explicitly "
            "defined or used in the agreement."
        ),
        "ground_truth": "The contract is entered into on April 6, 1999 ([par_1]).",
    },
    {
        "id": "qa-004",
        "contract_id": "hosting-001",
        "question": q(
            "Governing Law",
            "Which state/country's law governs the interpretation of the contract?",
        ),
        "answer": (
            "The contract specifies that the laws of the State of Florida govern "
            "its validity, construction, interpretation, and legal effect "
            "([par_46] 46)."
        ),
        "ground_truth": "Florida law governs the contract ([par_46]).",
    },
]

script = {
    "qa-001": '<correct>The name of the contract is "WEB SITE HOSTING AGREEMENT" [par_1]</correct>',
    "qa-002": (
        "<correct>The agreement date is April 6, 1999 [par_1]</correct>\n"
        "<missing>The agreement also mentions April 1, 1999 as the commencement date [par_36]</missing>"
    ),
    "qa-003": (
        "<correct>The contract is entered into on April 6, 1999 [par_1]</correct>\n"
        "<irrelevant>This date appears to be the effective date of the contract, "
        "though the term 'Effective Date' is not explicitly defined or used in the agreement.</irrelevant>"
    ),
    "qa-004": "<correct>The contract is governed by the laws of the State of Florida [par_46]</correct>",
}

TS = "2024-01-02T03:04:05+00:00"

# Human tagging of the same answers, worded slightly differently so the
# offline embedder has to do real matching. qa-003's second point disagrees.
human_evals = [
    {
        "qa_id": "qa-001",
        "evaluator_id": "ann-a",
        "evaluator_kind": "human",
        "created_at": TS,
        "ldps": [
            {
                "text": 'The name of the contract is "WEB SITE HOSTING AGREEMENT"',
                "tag": "correct",
                "source": "human",
                "citation": "[par_1]",
            }
        ],
    },
    {
        "qa_id": "qa-002",
        "evaluator_id": "ann-a",
        "evaluator_kind": "human",
        "created_at": TS,
        "ldps": [
            {
                "text": "The agreement date is April 6, 1999",
                "tag": "correct",
                "source": "human",
                "citation": "[par_1]",
            },
            {
                "text": "The agreement also mentions April 1, 1999 as the commencement date",
                "tag": "missing",
                "source": "human",
                "citation": "[par_36]",
            },
        ],
    },
    {
        "qa_id": "qa-003",
        "evaluator_id": "ann-a",
        "evaluator_kind": "human",
        "created_at": TS,
        "ldps": [
            {
                "text": "The contract is entered into on April 6, 1999",
                "tag": "correct",
                "source": "human",
                "citation": "[par_1]",
            },
            {
                "text": (
                    "This date appears to be the effective date of the contract, "
                    "though the term 'Effective Date' is not explicitly defined "
                    "or used in the agreement."
                ),
                "tag": "correct",
                "source": "human",
                "citation": None,
            },
        ],
    },
    {
        "qa_id": "qa-004",
        "evaluator_id": "ann-a",
        "evaluator_kind": "human",
        "created_at": TS,
        "ldps": [
            {
                "text": "The contract is governed by the laws of the State of Florida",
                "tag": "correct",
                "source": "human",
                "citation": "[par_46]",
            }
        ],
    },
]


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n")


write_jsonl(HOSTING / "contracts.jsonl", contracts)
write_jsonl(HOSTING / "qa_pairs.jsonl", qa_pairs)
write_jsonl(
    HOSTING / "script.jsonl",
    [{"key": k, "reply": v} for k, v in script.items()],
)
write_jsonl(HOSTING / "human_evaluations.jsonl", human_evals)

# Triage fixture: 150 score rows of which exactly 51 clear at
# correctness == 1.0 and f1 >= 0.85.
rng = random.Random(20240102)
rows = []
for i in range(150):
    qa_id = f"lb-{i + 1:03d}"
    if i < 51:
        f1 = round(rng.uniform(0.85, 1.0), 2)
        row = {"qa_id": qa_id, "correctness": 1.0, "precision": f1, "recall": f1, "f1": f1}
    else:
        mode = rng.choice(["low_f1", "low_corr", "absent"])
        if mode == "low_f1":
            f1 = round(rng.uniform(0.0, 0.84), 2)
            row = {"qa_id": qa_id, "correctness": 1.0, "precision": f1, "recall": f1, "f1": f1}
        elif mode == "low_corr":
            f1 = round(rng.uniform(0.5, 1.0), 2)
            corr = round(rng.uniform(0.0, 0.99), 2)
            row = {"qa_id": qa_id, "correctness": corr, "precision": f1, "recall": f1, "f1": f1}
        else:
            row = {"qa_id": qa_id, "correctness": 1.0, "precision": None, "recall": None, "f1": None}
    rows.append(row)
rng.shuffle(rows)
write_jsonl(ROOT / "tests" / "fixtures" / "triage_scores.jsonl", rows)

cleared = sum(
    1
    for r in rows
    if r["correctness"] == 1.0 and r["f1"] is not None and r["f1"] >= 0.85
)
print(f"triage fixture: {cleared} cleared / {150 - cleared} flagged")
