"""Statement corpora for the SQL validator: mutations that must all be
rejected, and read-only statements that must all be accepted."""

BASE_MUTATIONS = [
    "INSERT INTO contracts VALUES ('1/2020', 'x', 'y', 'z', 1, '2020-01-01', '2021-01-01', 'active', 'tender')",
    "INSERT INTO contracts (ocs) SELECT ocs FROM contracts",
    "INSERT OR IGNORE INTO managers VALUES ('a', 'b', 'c')",
    "INSERT OR REPLACE INTO managers VALUES ('a', 'b', 'c')",
    "UPDATE contracts SET supplier = 'evil'",
    "UPDATE contracts SET total_value_cents = 0 WHERE ocs = '278/2023'",
    "DELETE FROM contracts",
    "DELETE FROM contracts WHERE ocs = '278/2023'",
    "DROP TABLE contracts",
    "DROP TABLE IF EXISTS contracts",
    "DROP INDEX idx_contracts_supplier",
    "DROP VIEW v",
    "DROP TRIGGER trg",
    "ALTER TABLE contracts ADD COLUMN hacked TEXT",
    "ALTER TABLE contracts RENAME TO gone",
    "CREATE TABLE evil (x TEXT)",
    "CREATE TEMP TABLE evil AS SELECT * FROM contracts",
    "CREATE INDEX evil_idx ON contracts(supplier)",
    "CREATE TRIGGER trg AFTER INSERT ON contracts BEGIN SELECT 1; END",
    "CREATE VIEW v AS SELECT * FROM contracts",
    "CREATE VIRTUAL TABLE ft USING fts5(content)",
    "TRUNCATE TABLE contracts",
    "REPLACE INTO contracts VALUES ('1/2020', 'x', 'y', 'z', 1, '2020-01-01', '2021-01-01', 'active', 'tender')",
    "MERGE INTO contracts USING dual ON (1=1) WHEN MATCHED THEN UPDATE SET supplier = 'x'",
    "GRANT ALL ON contracts TO PUBLIC",
    "REVOKE ALL ON contracts FROM PUBLIC",
    "ATTACH DATABASE '/tmp/evil.db' AS evil",
    "DETACH DATABASE evil",
    "PRAGMA writable_schema = ON",
    "PRAGMA journal_mode = DELETE",
    "VACUUM",
    "REINDEX",
    "ANALYZE",
    "BEGIN",
    "BEGIN TRANSACTION",
    "COMMIT",
    "ROLLBACK",
    "SAVEPOINT sp1",
    "RELEASE SAVEPOINT sp1",
    "SET search_path TO public",
    "LOCK TABLE contracts IN ACCESS EXCLUSIVE MODE",
    "COPY contracts TO '/tmp/out.csv'",
    "CALL evil_proc()",
    "EXEC sp_evil",
    "EXECUTE sp_evil",
    "SELECT * INTO stolen FROM contracts",
    "SELECT load_extension('/tmp/evil.so')",
    "SELECT writefile('/tmp/x', ocs) FROM contracts",
    "SELECT readfile('/etc/passwd')",
    "SELECT * FROM pragma_table_info('contracts')",
    "WITH d AS (SELECT 1) DELETE FROM contracts",
    "WITH d AS (SELECT ocs FROM contracts) INSERT INTO log SELECT * FROM d",
    "WITH d AS (SELECT 1) UPDATE contracts SET supplier = 'x'",
    "SELECT 1; DELETE FROM contracts",
    "SELECT 1; DROP TABLE contracts",
    "SELECT ocs FROM contracts; UPDATE contracts SET supplier = 'x'",
    "SELECT 1; SELECT 2",
    "DELETE FROM contracts; SELECT 1",
    "VALUES (1)",
    "EXPLAIN QUERY PLAN SELECT * FROM contracts",
    "",
    "   ",
    "-- nothing but a comment",
]


def _comment_obfuscate(sql: str) -> str:
    return sql.replace(" ", "/**/", 2)


def _comment_prefix(sql: str) -> str:
    return f"/* audit: routine read */ {sql}"


def _line_comment(sql: str) -> str:
    return f"-- harmless\n{sql}"


def _whitespace(sql: str) -> str:
    return "\n\t " + sql.replace(" ", "\n", 3) + "\n;"


_OBFUSCATIONS = [
    str.upper,
    str.lower,
    str.title,
    _comment_obfuscate,
    _comment_prefix,
    _line_comment,
    _whitespace,
]


def mutation_corpus() -> list[str]:
    """Base mutations plus obfuscated variants; all must be rejected."""
    corpus = list(BASE_MUTATIONS)
    for i, sql in enumerate(m for m in BASE_MUTATIONS if m.strip()):
        corpus.append(_OBFUSCATIONS[i % len(_OBFUSCATIONS)](sql))
    return corpus


READONLY_STATEMENTS = [
    "SELECT ocs FROM contracts",
    "SELECT * FROM contracts",
    "SELECT COUNT(*) FROM contracts WHERE situation = 'active'",
    "select ocs, supplier from contracts where situation = 'active'",
    "SELECT DISTINCT supplier FROM contracts",
    "SELECT ocs FROM contracts ORDER BY ocs LIMIT 10",
    "SELECT ocs FROM contracts ORDER BY start_date DESC LIMIT 5 OFFSET 5",
    "SELECT supplier, COUNT(*) FROM contracts GROUP BY supplier",
    "SELECT supplier, COUNT(*) AS n FROM contracts GROUP BY supplier HAVING n > 1",
    "SELECT manager, SUM(total_value_cents) FROM contracts GROUP BY manager",
    "SELECT AVG(total_value_cents), MIN(start_date), MAX(end_date) FROM contracts",
    "SELECT c.ocs, a.description FROM contracts c JOIN amendments a ON a.ocs = c.ocs",
    "SELECT c.ocs FROM contracts c LEFT JOIN amendments a ON a.ocs = c.ocs WHERE a.id IS NULL",
    "SELECT m.name, m.unit FROM managers m INNER JOIN contracts c ON c.manager = m.name",
    "SELECT ocs FROM contracts WHERE supplier IN (SELECT name FROM managers)",
    "SELECT ocs FROM contracts WHERE EXISTS (SELECT 1 FROM amendments a WHERE a.ocs = contracts.ocs)",
    "SELECT ocs, (SELECT COUNT(*) FROM amendments a WHERE a.ocs = c.ocs) FROM contracts c",
    "WITH active AS (SELECT * FROM contracts WHERE situation = 'active') SELECT COUNT(*) FROM active",
    "WITH a AS (SELECT 1 AS x), b AS (SELECT 2 AS y) SELECT x, y FROM a, b",
    "WITH RECURSIVE cnt(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM cnt WHERE x < 5) SELECT x FROM cnt",
    "WITH v(n) AS (VALUES (1), (2), (3)) SELECT SUM(n) FROM v",
    "SELECT ocs FROM contracts UNION SELECT ocs FROM contracts",
    "SELECT ocs FROM contracts UNION ALL SELECT ocs FROM contracts",
    "SELECT ocs FROM contracts INTERSECT SELECT ocs FROM contracts WHERE situation = 'active'",
    "SELECT ocs FROM contracts EXCEPT SELECT ocs FROM contracts WHERE situation = 'closed'",
    "SELECT CASE WHEN situation = 'active' THEN 1 ELSE 0 END FROM contracts",
    "SELECT ocs FROM contracts WHERE supplier LIKE '%Oracle%'",
    "SELECT ocs FROM contracts WHERE ocs GLOB '2*'",
    "SELECT ocs FROM contracts WHERE total_value_cents BETWEEN 100 AND 10000000",
    "SELECT ocs FROM contracts WHERE situation IN ('active', 'suspended')",
    "SELECT REPLACE(supplier, 'Ltda.', 'Ltda') FROM contracts",
    "SELECT UPPER(supplier), LOWER(manager) FROM contracts",
    "SELECT substr(end_date, 1, 4) FROM contracts",
    "SELECT strftime('%Y', start_date) FROM contracts",
    "SELECT ocs || ' / ' || supplier FROM contracts",
    "SELECT total_value_cents / 100.0 AS total FROM contracts",
    "SELECT ROW_NUMBER() OVER (ORDER BY start_date) AS rn, ocs FROM contracts",
    "SELECT supplier, RANK() OVER (PARTITION BY situation ORDER BY total_value_cents DESC) FROM contracts",
    "SELECT 'DROP TABLE contracts' AS warning_text",
    "SELECT 'delete from x; update y' AS phrase",
    "SELECT \"update\" FROM notes",
    "SELECT [delete] FROM notes",
    "SELECT `insert` FROM notes",
    "SELECT 1",
    "SELECT 1;",
    "  SELECT   ocs\nFROM\tcontracts  ",
    "/* leading comment */ SELECT ocs FROM contracts",
    "SELECT ocs FROM contracts -- trailing comment",
    "SELECT COALESCE(NULL, supplier) FROM contracts",
    "SELECT IIF(situation = 'active', 'yes', 'no') FROM contracts",
    "SELECT CAST(total_value_cents AS REAL) FROM contracts",
    "SELECT COUNT(DISTINCT manager) FROM contracts WHERE procurement_mode = 'tender'",
    "SELECT a.ocs, SUM(a.value_delta_cents) FROM amendments a GROUP BY a.ocs ORDER BY 2 DESC",
    "SeLeCt OcS fRoM cOnTrAcTs",
]


def readonly_corpus() -> list[str]:
    return list(READONLY_STATEMENTS)
