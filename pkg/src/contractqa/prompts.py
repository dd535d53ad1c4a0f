"""Prompt building blocks and rendering helpers.

The instruction strings are part of the product behavior: they pin the
answers to retrieved material, force OCS citations, and set the tone.
Tests and the offline simulated provider key on the marker strings, so
changing them is an interface change, not a cosmetic one.
"""

from __future__ import annotations

INSTRUCTION_GROUNDING = "Do not use prior knowledge."
INSTRUCTION_CITE_OCS = "Whenever you answer a question about a contract, provide the OCS number."
INSTRUCTION_TONE = "You should use a formal and objective tone."
INSTRUCTION_HISTORY = (
    "Given the chat history and the question asked, construct the response "
    "completely, without the user needing to review the history."
)
INSTRUCTION_CONFLICT = (
    "When retrieved contract text and database values disagree on a number or "
    "date, prefer the database values."
)

BASE_INSTRUCTIONS = [
    INSTRUCTION_GROUNDING,
    INSTRUCTION_CITE_OCS,
    INSTRUCTION_TONE,
    INSTRUCTION_HISTORY,
    INSTRUCTION_CONFLICT,
]

CLASSIFY_MARKER = "Answer with exactly one word: IN or OUT."
SQL_TASK_MARKER = "Write exactly one SQL SELECT statement"
REFUSAL_MARKER = "outside the contract-management domain"
EXCERPTS_HEADER = "## Retrieved contract excerpts"
SQL_RESULT_HEADER = "## Database query result"
QUESTION_PREFIX = "Question: "

CLASSIFY_SYSTEM = "You route questions for a contract-management assistant."

REFUSAL_SYSTEM = (
    "You are an assistant restricted to the contract-management domain. "
    "The question below is outside the contract-management domain. Politely "
    "explain, in one or two sentences, that you only answer questions about "
    "the organization's contracts. Do not answer the question itself."
)


def classify_prompt(question: str) -> list[dict]:
    user = (
        "Decide whether the question below is about the contract-management "
        "domain (contracts, suppliers, clauses, values, terms, managers, "
        f"procurement).\n{QUESTION_PREFIX}{question}\n{CLASSIFY_MARKER}"
    )
    return [
        {"role": "system", "content": CLASSIFY_SYSTEM},
        {"role": "user", "content": user},
    ]


def refusal_prompt(question: str) -> list[dict]:
    return [
        {"role": "system", "content": REFUSAL_SYSTEM},
        {"role": "user", "content": f"{QUESTION_PREFIX}{question}"},
    ]


def render_table(columns: list[str], rows: list[tuple]) -> str:
    lines = ["columns: " + " | ".join(columns)]
    for row in rows:
        lines.append("row: " + " | ".join(str(v) for v in row))
    return "\n".join(lines)


def render_messages(messages: list[dict]) -> str:
    """Flatten a message sequence for matchers and logging."""
    return "\n\n".join(f"[{m['role']}]\n{m['content']}" for m in messages)
