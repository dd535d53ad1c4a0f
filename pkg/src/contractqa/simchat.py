"""Deterministic offline chat provider.

Stands in for the hosted model in tests, the eval harness, and keyless
demo runs. It only ever answers from material present in the prompt
(retrieved excerpts, database rows), so grounding properties hold by
construction, and identical prompts always produce identical text.
"""

from __future__ import annotations

import re

from .ingest import find_contract_ids, strip_header
from .prompts import (
    CLASSIFY_MARKER,
    EXCERPTS_HEADER,
    QUESTION_PREFIX,
    REFUSAL_MARKER,
    SQL_RESULT_HEADER,
    SQL_TASK_MARKER,
    render_messages,
)
from .providers import ChatProvider

_DOMAIN_WORDS = (
    "contract", "contrato", "ocs", "supplier", "fornecedor", "clause",
    "cláusula", "clausula", "manager", "vigência", "vigencia", "penalt",
    "amendment", "aditivo", "procurement", "tender", "licita", "exemption",
    "inflexibility", "inexigib",
)
_DOMAIN_WORD_RES = (re.compile(r"\bdls?\b"),)

_CHUNK_HEADER_RE = re.compile(r"^\[chunk (?P<id>[^\]]+)\] \(score [^)]*\)$", re.MULTILINE)
_PROVENANCE_RE = re.compile(r"^\[contract: (?P<contract>[^|\]]*) \| clause: (?P<clause>[^\]]*)\]")


def _money(cents: int) -> str:
    whole, frac = divmod(int(cents), 100)
    return f"R$ {whole:,}.{frac:02d}"


def _last_question(rendered: str) -> str:
    questions = re.findall(rf"^{re.escape(QUESTION_PREFIX)}(.*)$", rendered, re.MULTILINE)
    return questions[-1].strip() if questions else ""


def _quote(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


class SimulatedChatProvider(ChatProvider):
    """Rule-based model stand-in: routes, writes SQL, and verbalizes results."""

    name = "simulated"

    def complete(self, messages: list[dict]) -> str:
        rendered = render_messages(messages)
        if CLASSIFY_MARKER in rendered:
            return self._classify(_last_question(rendered))
        if SQL_TASK_MARKER in rendered:
            return self._generate_sql(_last_question(rendered))
        if REFUSAL_MARKER in rendered:
            return (
                "I am sorry, but I can only answer questions about the "
                "organization's administrative contracts. Please ask about a "
                "contract, its clauses, suppliers, values, or terms."
            )
        return self._answer(rendered)

    # -- routing ----------------------------------------------------------------

    def _classify(self, question: str) -> str:
        ql = question.lower()
        if any(word in ql for word in _DOMAIN_WORDS):
            return "IN"
        if any(rx.search(ql) for rx in _DOMAIN_WORD_RES):
            return "IN"
        return "OUT"

    # -- text-to-SQL ------------------------------------------------------------

    def _generate_sql(self, question: str) -> str:
        rule = self._sql_rule(question)
        if rule is None:
            return "I cannot translate this question into a database query."
        entities, sql = rule
        lines = [f"ENTITY: {mention} -> {target}" for mention, target in entities]
        lines.append("```sql")
        lines.append(sql)
        lines.append("```")
        return "\n".join(lines)

    def _sql_rule(self, question: str):
        # Strip one terminator only: supplier names like "Ltda." keep their dot.
        q = re.sub(r"[?!.]\s*$", "", question.strip())
        ql = q.lower()
        ids = find_contract_ids(q)
        ocs = ids[0] if ids else None

        def year_of(match: str) -> str:
            return match if len(match) == 4 else f"20{match}"

        if "how many active" in ql:
            return (
                [("active", "contracts.situation")],
                "SELECT COUNT(*) FROM contracts WHERE situation = 'active'",
            )
        if re.search(r"contracts (?:per|by) supplier", ql):
            return (
                [("per supplier", "contracts.supplier")],
                "SELECT supplier, COUNT(*) AS contracts FROM contracts "
                "GROUP BY supplier ORDER BY contracts DESC, supplier LIMIT 10",
            )
        m = re.search(r"end in the year (\d{2,4})", ql)
        if m:
            year = year_of(m.group(1))
            return (
                [("end in the year", "contracts.end_date")],
                "SELECT ocs, end_date FROM contracts "
                f"WHERE substr(end_date, 1, 4) = '{year}' ORDER BY ocs",
            )
        m = re.search(r"how many contracts do we have with supplier\s+(.+)$", q, re.IGNORECASE)
        if m:
            return (
                [(m.group(1), "contracts.supplier")],
                f"SELECT COUNT(*) FROM contracts WHERE supplier = {_quote(m.group(1))}",
            )
        if "due to inflexibility" in ql:
            return (
                [("inflexibility", "contracts.procurement_mode")],
                "SELECT COUNT(*) FROM contracts WHERE procurement_mode = 'inexigibility'",
            )
        if "how many dls" in ql or "exemptions from tenders" in ql:
            m = re.search(r"in (\d{2,4})$", ql)
            year = year_of(m.group(1)) if m else None
            sql = "SELECT COUNT(*) FROM contracts WHERE procurement_mode = 'waiver-of-bidding'"
            if year:
                sql += f" AND substr(start_date, 1, 4) = '{year}'"
            return ([("DLs (Exemptions from Tenders)", "contracts.procurement_mode")], sql)
        m = re.search(r"managers of the contracts we have with company\s+(.+)$", q, re.IGNORECASE)
        if m:
            return (
                [(m.group(1), "contracts.supplier")],
                "SELECT DISTINCT manager FROM contracts "
                f"WHERE supplier = {_quote(m.group(1))} ORDER BY manager",
            )
        m = re.search(r"does employee\s+(.+?)\s+have under", q, re.IGNORECASE)
        if m:
            return (
                [(m.group(1), "contracts.manager")],
                f"SELECT COUNT(*) FROM contracts WHERE manager = {_quote(m.group(1))}",
            )
        if "summary of contract" in ql and ocs:
            return (
                [(ocs, "contracts.ocs")],
                "SELECT ocs, object, supplier, manager, total_value_cents, "
                f"start_date, end_date, situation FROM contracts WHERE ocs = {_quote(ocs)}",
            )
        if ocs and "manager" in ql:
            return (
                [(ocs, "contracts.ocs")],
                f"SELECT manager FROM contracts WHERE ocs = {_quote(ocs)}",
            )
        if ocs and "supplier" in ql:
            return (
                [(ocs, "contracts.ocs")],
                f"SELECT supplier FROM contracts WHERE ocs = {_quote(ocs)}",
            )
        if ocs and "term" in ql:
            return (
                [(ocs, "contracts.ocs")],
                f"SELECT start_date, end_date FROM contracts WHERE ocs = {_quote(ocs)}",
            )
        if ocs and ("subject" in ql or "object" in ql):
            return (
                [(ocs, "contracts.ocs")],
                f"SELECT object FROM contracts WHERE ocs = {_quote(ocs)}",
            )
        m = re.search(r"contract whose subject is\s+(.+)$", q, re.IGNORECASE)
        if m:
            return (
                [(m.group(1), "contracts.object")],
                "SELECT ocs, object FROM contracts "
                f"WHERE object LIKE '%{m.group(1).replace(chr(39), chr(39) * 2)}%' ORDER BY ocs",
            )
        m = re.search(r"contract with the supplier\s+(.+)$", q, re.IGNORECASE)
        if m:
            return (
                [(m.group(1), "contracts.supplier")],
                f"SELECT ocs, supplier FROM contracts WHERE supplier = {_quote(m.group(1))} ORDER BY ocs",
            )
        m = re.search(r"do we have an?\s+(.+?)\s+support contract", q, re.IGNORECASE)
        if m:
            name = m.group(1).replace("'", "''")
            return (
                [(m.group(1), "contracts.supplier")],
                "SELECT ocs, supplier, object FROM contracts "
                f"WHERE supplier LIKE '%{name}%' ORDER BY ocs",
            )
        return None

    # -- final answers ------------------------------------------------------------

    def _answer(self, rendered: str) -> str:
        question = _last_question(rendered)
        excerpts = self._parse_excerpts(rendered)
        table = self._parse_table(rendered)

        cited: list[str] = []
        for _, header_contract, _, _ in excerpts:
            if header_contract and header_contract not in cited:
                cited.append(header_contract)
        if table:
            _, rows = table
            for row in rows:
                for value in row:
                    for ocs in find_contract_ids(str(value)):
                        if ocs not in cited:
                            cited.append(ocs)

        body = self._verbalize(question, excerpts, table)
        citation = self._citation(cited, body)
        return body + citation if citation else body

    @staticmethod
    def _citation(cited: list[str], body: str) -> str:
        missing = [ocs for ocs in cited if ocs not in body]
        if not missing:
            return ""
        if len(cited) == 1:
            return f" The OCS number is {cited[0]}."
        return " Relevant contracts: " + ", ".join(cited) + "."

    def _verbalize(self, question: str, excerpts, table) -> str:
        ql = question.lower()
        if table is not None:
            columns, rows = table
            if not rows:
                return "No matching records were found in the contract database."
            if "summary of contract" in ql and set(columns) >= {"ocs", "object", "supplier"}:
                return self._summary(columns, rows[0])
            if len(rows) == 1 and len(columns) == 1:
                value = rows[0][0]
                if re.fullmatch(r"-?\d+", str(value)):
                    return f"Based on the contract records, the requested figure is {value}."
                return f"Based on the contract records: {value}."
            if len(columns) == 1:
                listed = "; ".join(str(r[0]) for r in rows[:30])
                return f"The records list {columns[0]}: {listed}."
            shown = "; ".join(
                ", ".join(f"{c}={v}" for c, v in zip(columns, row)) for row in rows[:30]
            )
            return f"The records show: {shown}."
        if excerpts:
            chunk_id, contract, clause, text = excerpts[0]
            snippet = " ".join(strip_header(text).split())[:400]
            where = f"contract {contract}" if contract else f"excerpt {chunk_id}"
            clause_part = f" ({clause})" if clause else ""
            return f"According to {where}{clause_part}: {snippet}"
        return (
            "I could not find this information in the available contract "
            "documents or records."
        )

    @staticmethod
    def _summary(columns: list[str], row: tuple) -> str:
        record = dict(zip(columns, row))
        value = _money(int(record.get("total_value_cents", 0)))
        return (
            f"Summary of contract {record.get('ocs', '?')}: "
            f"object: {record.get('object', '?')}; "
            f"supplier: {record.get('supplier', '?')}; "
            f"manager: {record.get('manager', '?')}; "
            f"total value: {value}; "
            f"validity: {record.get('start_date', '?')} to {record.get('end_date', '?')}; "
            f"situation: {record.get('situation', '?')}."
        )

    @staticmethod
    def _parse_excerpts(rendered: str):
        if EXCERPTS_HEADER not in rendered:
            return []
        section = rendered.split(EXCERPTS_HEADER, 1)[1]
        if SQL_RESULT_HEADER in section:
            section = section.split(SQL_RESULT_HEADER, 1)[0]
        excerpts = []
        matches = list(_CHUNK_HEADER_RE.finditer(section))
        for i, m in enumerate(matches):
            end = matches[i + 1].start() if i + 1 < len(matches) else len(section)
            text = section[m.end() : end].strip("\n")
            prov = _PROVENANCE_RE.match(text)
            contract = prov.group("contract").strip() if prov else ""
            clause = prov.group("clause").strip() if prov else ""
            excerpts.append((m.group("id"), contract, clause, text))
        return excerpts

    @staticmethod
    def _parse_table(rendered: str):
        if SQL_RESULT_HEADER not in rendered:
            return None
        section = rendered.split(SQL_RESULT_HEADER, 1)[1]
        cols_m = re.search(r"^columns: (.*)$", section, re.MULTILINE)
        if cols_m is None:
            return None
        columns = [c.strip() for c in cols_m.group(1).split("|")]
        rows = [
            tuple(v.strip() for v in line.split("|"))
            for line in re.findall(r"^row: (.*)$", section, re.MULTILINE)
        ]
        return columns, rows
