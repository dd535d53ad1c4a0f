"""Benchmark runner: direct/indirect question sets scored by matchers.

Judging is automatic: a question's expectations are substrings, regexes,
or values computed by independent oracle SQL against the fixture database.
Correct means every expectation matched, Incomplete means some did,
Incorrect means none did. The report mirrors the two-column layout
(Question | Correct | Incomplete) with one table per question kind, plus a
machine-readable JSON twin; neither embeds timestamps, so identical engine
state yields byte-identical reports.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .cms import CmsStore
from .engine import Engine
from .errors import ContractQaError, EngineUnreachable

VERDICTS = ("Correct", "Incomplete", "Incorrect")


@dataclass
class BenchmarkQuestion:
    id: str
    text: str
    kind: str  # direct | indirect
    expected: list[dict]


@dataclass
class Judgment:
    question_id: str
    verdict: str
    evidence: dict = field(default_factory=dict)


@dataclass
class QuestionTally:
    question: BenchmarkQuestion
    counts: dict = field(default_factory=lambda: {v: 0 for v in VERDICTS})
    evidence: list[dict] = field(default_factory=list)


@dataclass
class Report:
    trials: int
    tallies: list[QuestionTally]

    def fully_correct(self) -> int:
        return sum(1 for t in self.tallies if t.counts["Correct"] == self.trials)

    def to_markdown(self) -> str:
        lines = ["# Benchmark report", "", f"Trials per question: {self.trials}", ""]
        for kind, title in (("direct", "Direct questions"), ("indirect", "Indirect questions")):
            rows = [t for t in self.tallies if t.question.kind == kind]
            if not rows:
                continue
            lines.append(f"## {title}")
            lines.append("")
            lines.append("| Question | Correct | Incomplete |")
            lines.append("|---|---|---|")
            for t in rows:
                correct = t.counts["Correct"] or "-"
                incomplete = t.counts["Incomplete"] or "-"
                lines.append(f"| {t.question.text} | {correct} | {incomplete} |")
            lines.append("")
        return "\n".join(lines)

    def to_json(self) -> str:
        payload = {
            "trials": self.trials,
            "questions": [
                {
                    "id": t.question.id,
                    "kind": t.question.kind,
                    "text": t.question.text,
                    "counts": t.counts,
                    "evidence": t.evidence,
                }
                for t in self.tallies
            ],
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def load_questions(path: str | Path) -> list[BenchmarkQuestion]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    questions = []
    for item in raw:
        if not item.get("expected"):
            raise ValueError(f"question {item.get('id')} has no expectations")
        questions.append(
            BenchmarkQuestion(
                id=item["id"], text=item["text"], kind=item["kind"],
                expected=item["expected"],
            )
        )
    return questions


def _word_present(value: str, answer: str) -> bool:
    return re.search(rf"(?<!\w){re.escape(value)}(?!\w)", answer) is not None


def _match(matcher: dict, answer: str, store: CmsStore) -> tuple[bool, str]:
    """Evaluate one expectation; returns (matched, description)."""
    kind = matcher["type"]
    if kind == "contains":
        return matcher["value"] in answer, f"contains {matcher['value']!r}"
    if kind == "regex":
        return re.search(matcher["pattern"], answer) is not None, f"regex {matcher['pattern']!r}"
    if kind == "oracle_sql":
        table = store.execute_readonly(matcher["sql"])
        if matcher.get("mode", "scalar") == "scalar":
            value = str(table.rows[0][0]) if table.rows else "0"
            return _word_present(value, answer), f"oracle scalar {value}"
        values = [str(row[0]) for row in table.rows]
        missing = [v for v in values if not _word_present(v, answer)]
        return not missing, f"oracle rows {values} (missing {missing})"
    raise ValueError(f"unknown matcher type {kind!r}")


def judge(question: BenchmarkQuestion, answer_text: str, store: CmsStore) -> Judgment:
    matched, missing = [], []
    for matcher in question.expected:
        ok, description = _match(matcher, answer_text, store)
        (matched if ok else missing).append(description)
    if not missing:
        verdict = "Correct"
    elif matched:
        verdict = "Incomplete"
    else:
        verdict = "Incorrect"
    return Judgment(
        question_id=question.id, verdict=verdict,
        evidence={"matched": matched, "missing": missing},
    )


def run_benchmark(
    questions: list[BenchmarkQuestion],
    engine: Engine,
    trials: int = 10,
    role: str = "contract_manager",
) -> Report:
    """Ask every question ``trials`` times in fresh sessions and tally."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tallies = []
    first_call = True
    for question in questions:
        tally = QuestionTally(question=question)
        for _ in range(trials):
            session = engine.create_session(role)
            try:
                answer = engine.ask(session.id, question.text)
            except ContractQaError as exc:
                if first_call:
                    raise EngineUnreachable(f"engine failed on first question: {exc}")
                tally.counts["Incorrect"] += 1
                tally.evidence.append({"error": str(exc)})
                continue
            finally:
                first_call = False
            judgment = judge(question, answer.text, engine.store)
            tally.counts[judgment.verdict] += 1
            tally.evidence.append(judgment.evidence)
        tallies.append(tally)
    return Report(trials=trials, tallies=tallies)
