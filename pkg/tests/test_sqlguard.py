import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contractqa.sqlguard import Violation, validate_sql
from sql_corpora import mutation_corpus, readonly_corpus


class TestVerdicts:
    def test_drop_table_is_not_select(self):
        verdict = validate_sql("DROP TABLE contracts")
        assert not verdict.ok
        assert verdict.violation == Violation.NOT_SELECT

    def test_plain_select_ok(self):
        verdict = validate_sql("SELECT ocs FROM contracts")
        assert verdict.ok
        assert verdict.violation is None

    def test_multi_statement(self):
        verdict = validate_sql("SELECT 1; DELETE FROM contracts")
        assert not verdict.ok
        assert verdict.violation == Violation.MULTI_STATEMENT

    def test_update_is_not_select(self):
        verdict = validate_sql("UPDATE contracts SET supplier = 'x'")
        assert not verdict.ok
        assert verdict.violation == Violation.NOT_SELECT

    def test_cte_select_accepted(self):
        verdict = validate_sql(
            "WITH active AS (SELECT * FROM contracts WHERE situation = 'active') "
            "SELECT COUNT(*) FROM active"
        )
        assert verdict.ok

    def test_cte_hiding_delete_rejected(self):
        verdict = validate_sql("WITH d AS (SELECT 1) DELETE FROM contracts")
        assert not verdict.ok

    def test_select_into_is_forbidden_construct(self):
        verdict = validate_sql("SELECT * INTO stolen FROM contracts")
        assert verdict.violation == Violation.FORBIDDEN_CONSTRUCT

    def test_embedded_keyword_is_forbidden_keyword(self):
        verdict = validate_sql("SELECT 1 FROM t WHERE x = 1 AND (DELETE)")
        assert verdict.violation == Violation.FORBIDDEN_KEYWORD

    def test_pragma_function_rejected(self):
        verdict = validate_sql("SELECT * FROM pragma_table_info('contracts')")
        assert verdict.violation == Violation.FORBIDDEN_CONSTRUCT

    def test_load_extension_rejected(self):
        verdict = validate_sql("SELECT load_extension('/tmp/x.so')")
        assert verdict.violation == Violation.FORBIDDEN_CONSTRUCT

    def test_replace_function_allowed_replace_statement_rejected(self):
        assert validate_sql("SELECT REPLACE(supplier, 'a', 'b') FROM contracts").ok
        assert not validate_sql("REPLACE INTO contracts VALUES (1)").ok

    def test_keywords_in_strings_ignored(self):
        assert validate_sql("SELECT 'DROP TABLE contracts; DELETE FROM x' AS t").ok

    def test_quoted_identifiers_not_treated_as_keywords(self):
        assert validate_sql('SELECT "update", [delete], `insert` FROM notes').ok

    def test_empty_and_comment_only_are_not_select(self):
        assert validate_sql("").violation == Violation.NOT_SELECT
        assert validate_sql("-- just a comment").violation == Violation.NOT_SELECT

    def test_unterminated_string_is_not_select(self):
        assert validate_sql("SELECT 'oops FROM contracts").violation == Violation.NOT_SELECT

    def test_trailing_semicolon_is_still_single_statement(self):
        assert validate_sql("SELECT 1;").ok

    def test_ok_verdict_has_no_violation(self):
        for sql in readonly_corpus():
            verdict = validate_sql(sql)
            assert verdict.ok == (verdict.violation is None)


class TestCorpora:
    def test_mutation_corpus_is_large_enough(self):
        assert len(mutation_corpus()) >= 100

    def test_readonly_corpus_is_large_enough(self):
        assert len(readonly_corpus()) >= 50

    @pytest.mark.parametrize("sql", mutation_corpus())
    def test_zero_false_accepts(self, sql):
        assert not validate_sql(sql).ok, f"falsely accepted: {sql!r}"

    @pytest.mark.parametrize("sql", readonly_corpus())
    def test_zero_false_rejects(self, sql):
        verdict = validate_sql(sql)
        assert verdict.ok, f"falsely rejected: {sql!r} ({verdict.violation})"


def _flip_case(sql: str, flips: list[bool]) -> str:
    out = []
    i = 0
    for ch in sql:
        if ch.isalpha():
            out.append(ch.upper() if flips[i % len(flips)] else ch.lower())
            i += 1
        else:
            out.append(ch)
    return "".join(out)


def _pad_whitespace(sql: str, choices: list[int]) -> str:
    fillers = [" ", "  ", "\n", "\t ", " /* note */ "]
    out = []
    i = 0
    for ch in sql:
        if ch == " ":
            out.append(fillers[choices[i % len(choices)] % len(fillers)])
            i += 1
        else:
            out.append(ch)
    return "".join(out)


@given(
    st.sampled_from(mutation_corpus() + readonly_corpus()),
    st.lists(st.booleans(), min_size=1, max_size=16),
    st.lists(st.integers(min_value=0, max_value=4), min_size=1, max_size=16),
)
@settings(max_examples=120, deadline=None)
def test_obfuscation_invariance_property(sql, flips, pads):
    """Case changes and whitespace/comment padding never change the verdict
    (padding skips statements with line comments, where a newline would
    change what is commented out)."""
    baseline = validate_sql(sql)
    if "'" not in sql and '"' not in sql:
        assert validate_sql(_flip_case(sql, flips)) == baseline
    if "--" not in sql:
        assert validate_sql(_pad_whitespace(sql, pads)) == baseline
