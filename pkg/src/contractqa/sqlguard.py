"""Read-only SQL validation.

A statement is accepted only if it lexes cleanly as EXACTLY ONE statement
whose main verb is SELECT (CTE prefixes allowed) and whose token stream
contains no data-modification, DDL, transaction-control, attachment, or
pragma-like constructs. The check runs on lexed tokens, so case changes,
comments, and whitespace games cannot smuggle a verb past it, and keywords
inside string literals are ignored rather than falsely flagged.

The lexer understands line and block comments, single-quoted strings with
'' escapes, and "..."/[...]/`...` quoted identifiers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

# Statements may not contain these as keyword tokens anywhere. REPLACE gets
# an exception when used as the string function, i.e. directly before "(".
FORBIDDEN_KEYWORDS = frozenset({
    "insert", "update", "delete", "drop", "alter", "create", "truncate",
    "replace", "merge", "grant", "revoke", "attach", "detach", "pragma",
    "vacuum", "reindex", "analyze", "begin", "commit", "rollback",
    "savepoint", "release", "exec", "execute", "call", "copy", "set",
    "lock", "rename",
})

# SELECT-internal constructs that still write, plus dangerous functions and
# pragma-like table-valued functions.
FORBIDDEN_FUNCTIONS = frozenset({
    "load_extension", "readfile", "writefile", "edit", "fts3_tokenizer",
})

_STATEMENT_VERBS = frozenset({
    "select", "values", "insert", "update", "delete", "replace", "create",
    "drop", "alter", "pragma", "attach", "detach", "begin", "commit",
    "rollback", "vacuum", "analyze", "reindex", "savepoint", "release",
    "with", "explain", "merge", "truncate", "grant", "revoke", "call",
    "exec", "execute", "set", "copy", "lock",
})


class Violation(str, Enum):
    NOT_SELECT = "NotSelect"
    MULTI_STATEMENT = "MultiStatement"
    FORBIDDEN_KEYWORD = "ForbiddenKeyword"
    FORBIDDEN_CONSTRUCT = "ForbiddenConstruct"


@dataclass(frozen=True)
class ValidationVerdict:
    ok: bool
    violation: Violation | None = None

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violation": self.violation.value if self.violation else None}


class _LexError(Exception):
    pass


@dataclass(frozen=True)
class _Token:
    kind: str  # word | string | ident | number | punct
    value: str


_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_NUMBER_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


def tokenize(sql: str) -> list[_Token]:
    """Lex ``sql`` into tokens, dropping comments and whitespace."""
    tokens: list[_Token] = []
    i, n = 0, len(sql)
    while i < n:
        ch = sql[i]
        if ch.isspace():
            i += 1
            continue
        if sql.startswith("--", i):
            nl = sql.find("\n", i)
            i = n if nl == -1 else nl + 1
            continue
        if sql.startswith("/*", i):
            end = sql.find("*/", i + 2)
            if end == -1:
                raise _LexError("unterminated block comment")
            i = end + 2
            continue
        if ch == "'":
            i = _scan_quoted(sql, i, "'")
            tokens.append(_Token("string", ""))
            continue
        if ch == '"':
            i = _scan_quoted(sql, i, '"')
            tokens.append(_Token("ident", ""))
            continue
        if ch == "`":
            i = _scan_quoted(sql, i, "`")
            tokens.append(_Token("ident", ""))
            continue
        if ch == "[":
            end = sql.find("]", i + 1)
            if end == -1:
                raise _LexError("unterminated bracket identifier")
            tokens.append(_Token("ident", ""))
            i = end + 1
            continue
        m = _WORD_RE.match(sql, i)
        if m:
            tokens.append(_Token("word", m.group(0).lower()))
            i = m.end()
            continue
        m = _NUMBER_RE.match(sql, i)
        if m:
            tokens.append(_Token("number", m.group(0)))
            i = m.end()
            continue
        tokens.append(_Token("punct", ch))
        i += 1
    return tokens


def _scan_quoted(sql: str, start: int, quote: str) -> int:
    """Return the index just past a quoted region; doubled quotes escape."""
    i = start + 1
    n = len(sql)
    while i < n:
        if sql[i] == quote:
            if i + 1 < n and sql[i + 1] == quote:
                i += 2
                continue
            return i + 1
        i += 1
    raise _LexError(f"unterminated {quote} literal")


def _split_statements(tokens: list[_Token]) -> list[list[_Token]]:
    statements: list[list[_Token]] = []
    current: list[_Token] = []
    for tok in tokens:
        if tok.kind == "punct" and tok.value == ";":
            if current:
                statements.append(current)
                current = []
        else:
            current.append(tok)
    if current:
        statements.append(current)
    return statements


def _main_verb(tokens: list[_Token]) -> str | None:
    """First depth-0 statement verb, skipping parenthesized CTE bodies."""
    depth = 0
    start = 0
    if tokens and tokens[0].kind == "word" and tokens[0].value == "with":
        start = 1
    else:
        return tokens[0].value if tokens and tokens[0].kind == "word" else None
    for tok in tokens[start:]:
        if tok.kind == "punct":
            if tok.value == "(":
                depth += 1
            elif tok.value == ")":
                depth -= 1
            continue
        if depth == 0 and tok.kind == "word" and tok.value in _STATEMENT_VERBS:
            return tok.value
    return None


def validate_sql(sql: str) -> ValidationVerdict:
    """Decide whether ``sql`` is a single, purely-reading SELECT."""
    try:
        tokens = tokenize(sql or "")
    except _LexError:
        return ValidationVerdict(ok=False, violation=Violation.NOT_SELECT)

    statements = _split_statements(tokens)
    if not statements:
        return ValidationVerdict(ok=False, violation=Violation.NOT_SELECT)
    if len(statements) > 1:
        return ValidationVerdict(ok=False, violation=Violation.MULTI_STATEMENT)

    stmt = statements[0]
    head = stmt[0]
    if head.kind != "word" or head.value not in ("select", "with"):
        return ValidationVerdict(ok=False, violation=Violation.NOT_SELECT)
    if _main_verb(stmt) != "select":
        return ValidationVerdict(ok=False, violation=Violation.NOT_SELECT)

    for pos, tok in enumerate(stmt):
        if tok.kind != "word":
            continue
        if tok.value in FORBIDDEN_KEYWORDS:
            follows = stmt[pos + 1] if pos + 1 < len(stmt) else None
            is_call = follows is not None and follows.kind == "punct" and follows.value == "("
            if tok.value == "replace" and is_call:
                continue  # REPLACE(x, y, z) the string function
            return ValidationVerdict(ok=False, violation=Violation.FORBIDDEN_KEYWORD)
        if tok.value == "into":
            return ValidationVerdict(ok=False, violation=Violation.FORBIDDEN_CONSTRUCT)
        if tok.value in FORBIDDEN_FUNCTIONS or tok.value.startswith("pragma_"):
            return ValidationVerdict(ok=False, violation=Violation.FORBIDDEN_CONSTRUCT)

    return ValidationVerdict(ok=True)
