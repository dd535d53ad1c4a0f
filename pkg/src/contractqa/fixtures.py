"""Deterministic synthetic fixture corpus.

Generates 75 contracts (texts + CMS rows + ingestion manifest) plus the
resolved benchmark question set. Everything derives from one RNG seed, so
two runs produce byte-identical fixtures, which is what lets the whole
test suite freeze expected values against this corpus.

Two contracts are pinned because tests and the benchmark rely on them: the
Oracle database-support contract 278/2023 and the IBM content-management
support contract 159/2021.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from datetime import date, timedelta
from decimal import Decimal
from importlib import resources
from pathlib import Path

from .cms import ContractRecord
from .ingest import slugify

ORACLE_OCS = "278/2023"
ORACLE_SUPPLIER = "Oracle do Brasil Sistemas Ltda."
ORACLE_MANAGER = "Carla Menezes"
ORACLE_OBJECT = "suporte técnico e atualização de licenças do SGBD Oracle Database"

IBM_OCS = "159/2021"
IBM_SUPPLIER = "IBM Brasil Indústria, Máquinas e Serviços Ltda."
IBM_OBJECT = "suporte técnico ao software IBM Content Management"

UNIQUE_OBJECT = "manutenção de plataforma de monitoramento de rede"
BUSY_MANAGER = "Paulo Siqueira"

ACTIVE_COUNT = 7  # tests assume exactly this many active contracts

_SUPPLIERS = [
    "Altivo Tecnologia da Informação S.A.",
    "Nexa Serviços Digitais Ltda.",
    "Horizonte Dados e Sistemas Ltda.",
    "Vetor Sul Informática Ltda.",
    "Praxis Soluções Corporativas S.A.",
    "Candango Redes e Telecom Ltda.",
    "Atlântica Software Ltda.",
    "Imperial TI Consultoria Ltda.",
    "Sertão Digital Serviços Ltda.",
    "Mirante Sistemas de Gestão S.A.",
    "Guanabara Infraestrutura de TI Ltda.",
    "Pampa Computação Ltda.",
]

_MANAGERS = [
    BUSY_MANAGER,
    ORACLE_MANAGER,
    "Ana Prado",
    "Bruno Tavares",
    "Cecília Fontes",
    "Diego Armando Sales",
    "Elisa Quadros",
    "Fábio Nogueira",
    "Helena Barreto",
    "Ivo Rezende",
]

_OBJECTS = [
    "desenvolvimento e sustentação de sistemas corporativos em Java",
    "licenciamento de ferramentas de análise de dados",
    "serviços de computação em nuvem e hospedagem de aplicações",
    "suporte à infraestrutura de telefonia IP",
    "consultoria em segurança da informação",
    "fornecimento de equipamentos de microinformática",
    "serviços de impressão corporativa departamental",
    "manutenção de datacenter e sistemas de climatização",
    "licenças de software de virtualização de servidores",
    "serviços de service desk e atendimento ao usuário",
    "sustentação de plataforma de business intelligence",
    "modernização de portais institucionais",
    "gestão de identidades e controle de acessos",
    "fábrica de testes e qualidade de software",
    "serviços de backup e recuperação de dados",
    "evolução do barramento de integração de sistemas",
]

_FILLERS = [
    "As partes observarão as normas internas de governança aplicáveis.",
    "A contratada manterá equipe dimensionada durante toda a execução.",
    "Os níveis de serviço serão apurados mensalmente pela fiscalização.",
    "Eventuais divergências serão tratadas em reunião de acompanhamento.",
    "A contratada guardará sigilo sobre as informações a que tiver acesso.",
    "Os pagamentos dependem de atesto da unidade gestora.",
]

_ORDINALS = ["PRIMEIRA", "SEGUNDA", "TERCEIRA", "QUARTA", "QUINTA", "SEXTA", "SÉTIMA", "OITAVA"]

_MODE_PT = {
    "tender": "licitação (pregão eletrônico)",
    "waiver-of-bidding": "dispensa de licitação (DL)",
    "inexigibility": "inexigibilidade de licitação",
}


@dataclass
class FixtureSet:
    root: Path
    texts_dir: Path
    manifest_path: Path
    contracts_csv: Path
    amendments_csv: Path
    questions_path: Path
    records: list[ContractRecord]
    source_without_id: str  # document whose text omits the OCS id (CMS lookup path)


def _money_pt(cents: int) -> str:
    whole, frac = divmod(cents, 100)
    group = f"{whole:,}".replace(",", ".")
    return f"R$ {group},{frac:02d}"


def _source_for(record: ContractRecord) -> str:
    num, year = record.ocs.split("/")
    return f"contrato-{slugify(record.supplier)}-{num}-{year}.pdf"


def build_records(n_contracts: int = 75, seed: int = 42) -> list[ContractRecord]:
    rng = random.Random(seed)
    records: list[ContractRecord] = []

    def add(ocs, obj, supplier, manager, value, start, months, situation, mode):
        records.append(
            ContractRecord(
                ocs=ocs, object=obj, supplier=supplier, manager=manager,
                total_value=Decimal(value) / 100, start_date=start,
                end_date=start + timedelta(days=int(months * 30.44)),
                situation=situation, procurement_mode=mode,
            )
        )

    add(ORACLE_OCS, ORACLE_OBJECT, ORACLE_SUPPLIER, ORACLE_MANAGER,
        842_000_00, date(2023, 5, 2), 36, "active", "tender")
    add(IBM_OCS, IBM_OBJECT, IBM_SUPPLIER, "Ana Prado",
        1_275_000_00, date(2021, 3, 15), 48, "active", "tender")
    # Two more IBM contracts so supplier-level counts are interesting.
    add("412/2022", "suporte ao ambiente de mensageria corporativa", IBM_SUPPLIER,
        BUSY_MANAGER, 390_000_00, date(2022, 8, 1), 36, "closed", "tender")
    add("87/2020", "manutenção de licenças de servidor de aplicação", IBM_SUPPLIER,
        "Bruno Tavares", 505_000_00, date(2020, 2, 10), 48, "closed", "waiver-of-bidding")
    # The only contract whose object carries the unique benchmark phrase.
    add("333/2022", UNIQUE_OBJECT, "Candango Redes e Telecom Ltda.",
        BUSY_MANAGER, 260_000_00, date(2022, 4, 18), 30, "active", "waiver-of-bidding")

    used_numbers = {int(r.ocs.split("/")[0]) for r in records}
    synth_count = n_contracts - len(records)
    active_left = ACTIVE_COUNT - sum(1 for r in records if r.situation == "active")
    # Spread of procurement modes: mostly tender, a block of DLs (two forced
    # into 2022 so the year-scoped DL question has data), a few inexigibility.
    modes = ["waiver-of-bidding"] * 9 + ["inexigibility"] * 6
    modes += ["tender"] * (synth_count - len(modes))
    rng.shuffle(modes)
    forced_dl_years = [2022, 2022]

    for i in range(synth_count):
        while True:
            number = rng.randint(100, 999)
            if number not in used_numbers:
                used_numbers.add(number)
                break
        mode = modes[i]
        if mode == "waiver-of-bidding" and forced_dl_years:
            year = forced_dl_years.pop()
        else:
            year = rng.choice([2019, 2020, 2021, 2022, 2023, 2024])
        start = date(year, rng.randint(1, 12), rng.randint(1, 28))
        months = rng.choice([12, 24, 24, 36, 36, 48, 60])
        situation = "active" if active_left > 0 else rng.choice(
            ["closed", "closed", "closed", "suspended"]
        )
        if situation == "active":
            active_left -= 1
        manager = BUSY_MANAGER if i % 12 == 0 else rng.choice(_MANAGERS)
        add(
            f"{number}/{year}",
            rng.choice(_OBJECTS),
            rng.choice(_SUPPLIERS),
            manager,
            rng.randint(90_000_00, 22_000_000_00),
            start,
            months,
            situation,
            mode,
        )
    return records


def _document_text(record: ContractRecord, rng: random.Random, include_id: bool = True) -> str:
    ocs_part = f" OCS nº {record.ocs}" if include_id else ""
    parts = [
        f"Contrato de prestação de serviços{ocs_part}\n"
        "\n"
        "Contratante: unidade de gestão de contratos de tecnologia da informação. "
        f"Contratada: {record.supplier}. "
        f"Modalidade de contratação: {_MODE_PT[record.procurement_mode]}.\n"
        "\n"
    ]
    clauses = [
        ("OBJETO",
         f"O objeto do presente contrato é a {record.object}, conforme as "
         "condições, anexos e especificações pactuados entre as partes."),
        ("VIGÊNCIA",
         f"O presente contrato vigorará de {record.start_date.isoformat()} a "
         f"{record.end_date.isoformat()}, podendo ser prorrogado mediante termo aditivo."),
        ("VALOR",
         f"O valor global do contrato é de {_money_pt(record.total_value_cents)} "
         "para todo o período de vigência, incluídos tributos e encargos."),
        ("GESTÃO DO CONTRATO",
         f"A gestão e a fiscalização do contrato cabem a {record.manager}, "
         "designado pela unidade de apoio à gestão de contratos."),
        ("PENALIDADES",
         "O descumprimento das obrigações sujeita a contratada a advertência e "
         f"multa de {rng.randint(2, 10)}% sobre o valor mensal do contrato. "
         + rng.choice(_FILLERS)),
    ]
    extra = rng.sample(
        [
            ("OBRIGAÇÕES DA CONTRATADA",
             "A contratada executará os serviços com pessoal qualificado. " + rng.choice(_FILLERS)),
            ("CONFIDENCIALIDADE",
             "As informações trocadas entre as partes são confidenciais. " + rng.choice(_FILLERS)),
            ("RESCISÃO",
             "O contrato poderá ser rescindido nas hipóteses regulamentares. " + rng.choice(_FILLERS)),
        ],
        rng.randint(1, 3),
    )
    clauses.extend(extra)
    for i, (title, body) in enumerate(clauses):
        parts.append(f"CLÁUSULA {_ORDINALS[i]} - {title}\n{body}\n\n")
    return "".join(parts).rstrip() + "\n"


def build_fixtures(root: str | Path, n_contracts: int = 75, seed: int = 42) -> FixtureSet:
    """Write the full fixture tree under ``root`` and return its layout."""
    root = Path(root)
    texts_dir = root / "texts"
    texts_dir.mkdir(parents=True, exist_ok=True)
    records = build_records(n_contracts=n_contracts, seed=seed)
    rng = random.Random(seed + 1)

    # One document deliberately omits its OCS id so ingestion has to fall
    # back to the CMS source lookup.
    source_without_id = _source_for(records[7])

    manifest = []
    for i, record in enumerate(records):
        source = _source_for(record)
        include_id = source != source_without_id
        text = _document_text(record, rng, include_id=include_id)
        text_file = f"texts/{Path(source).stem}.txt"
        (root / text_file).write_text(text, encoding="utf-8")
        entry = {"source": source, "text_file": text_file}
        if i in (3, 11, 29):  # a few manifest-level id overrides
            entry["contract_id"] = record.ocs
        manifest.append(entry)
    manifest_path = root / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )

    contracts_csv = root / "contracts.csv"
    with contracts_csv.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "ocs", "object", "supplier", "manager", "total_value",
            "start_date", "end_date", "situation", "procurement_mode",
        ])
        for r in records:
            writer.writerow([
                r.ocs, r.object, r.supplier, r.manager, str(r.total_value),
                r.start_date.isoformat(), r.end_date.isoformat(), r.situation,
                r.procurement_mode,
            ])

    amendments_csv = root / "amendments.csv"
    with amendments_csv.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ocs", "seq", "description", "signed_date", "value_delta_cents"])
        for r in rng.sample(records, min(20, len(records))):
            writer.writerow([
                r.ocs, 1, rng.choice(["Aditivo de prazo", "Aditivo de valor"]),
                (r.start_date + timedelta(days=rng.randint(120, 600))).isoformat(),
                rng.randint(-5_000_000, 25_000_000),
            ])

    questions_path = root / "benchmark_questions.json"
    questions_path.write_text(
        json.dumps(build_benchmark(records), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    return FixtureSet(
        root=root, texts_dir=texts_dir, manifest_path=manifest_path,
        contracts_csv=contracts_csv, amendments_csv=amendments_csv,
        questions_path=questions_path, records=records,
        source_without_id=source_without_id,
    )


def load_templates() -> list[dict]:
    raw = resources.files("contractqa.data").joinpath("benchmark_templates.json").read_text("utf-8")
    return json.loads(raw)


def build_benchmark(records: list[ContractRecord]) -> list[dict]:
    """Resolve the benchmark templates against the generated records."""
    oracle = next(r for r in records if r.ocs == ORACLE_OCS)
    unique = next(r for r in records if r.object == UNIQUE_OBJECT)
    end_year = "2025"
    dl_year = "2022"

    def sub(template: str, ocs: str | None = None, x: str | None = None,
            year: str | None = None) -> str:
        text = template
        if ocs:
            text = text.replace("nnn/yy", ocs)
        if x:
            text = text.replace("xxxx", x).replace("xxx", x)
        if year:
            text = text.replace(" yy?", f" {year}?")
        return text

    contains = lambda v: {"type": "contains", "value": v}
    scalar = lambda sql: {"type": "oracle_sql", "mode": "scalar", "sql": sql}
    rows = lambda sql: {"type": "oracle_sql", "mode": "rows", "sql": sql}

    resolution = {
        "D1": (dict(ocs=ORACLE_OCS), [contains("Oracle Database"), contains(ORACLE_OCS)]),
        "D2": (dict(x="monitoramento de rede"), [contains(unique.ocs)]),
        "D3": (dict(x=ORACLE_SUPPLIER), [contains(ORACLE_OCS)]),
        "D4": (dict(ocs=ORACLE_OCS), [contains(ORACLE_MANAGER)]),
        "D5": (dict(ocs=IBM_OCS), [contains("IBM")]),
        "D6": (dict(ocs=ORACLE_OCS), [contains(oracle.start_date.isoformat()),
                                      contains(oracle.end_date.isoformat())]),
        "I1": (dict(), [scalar("SELECT COUNT(*) FROM contracts WHERE situation = 'active'")]),
        "I2": (dict(year=end_year), [rows(
            "SELECT ocs FROM contracts WHERE substr(end_date, 1, 4) = "
            f"'{end_year}' ORDER BY ocs")]),
        "I3": (dict(x=IBM_SUPPLIER), [scalar(
            "SELECT COUNT(*) FROM contracts WHERE supplier = "
            f"'{IBM_SUPPLIER.replace(chr(39), chr(39) * 2)}'")]),
        "I4": (dict(), [scalar(
            "SELECT COUNT(*) FROM contracts WHERE procurement_mode = 'inexigibility'")]),
        "I5": (dict(year=dl_year), [scalar(
            "SELECT COUNT(*) FROM contracts WHERE procurement_mode = 'waiver-of-bidding' "
            f"AND substr(start_date, 1, 4) = '{dl_year}'")]),
        "I6": (dict(x=IBM_SUPPLIER), [rows(
            "SELECT DISTINCT manager FROM contracts WHERE supplier = "
            f"'{IBM_SUPPLIER.replace(chr(39), chr(39) * 2)}' ORDER BY manager")]),
        "I7": (dict(x=BUSY_MANAGER), [scalar(
            f"SELECT COUNT(*) FROM contracts WHERE manager = '{BUSY_MANAGER}'")]),
        "I8": (dict(ocs=ORACLE_OCS), [
            contains(ORACLE_SUPPLIER), contains(ORACLE_MANAGER), contains("active"),
            contains(oracle.start_date.isoformat()), contains(oracle.end_date.isoformat()),
            contains("R$ "),
        ]),
    }

    questions = []
    for template in load_templates():
        params, expected = resolution[template["id"]]
        questions.append({
            "id": template["id"],
            "kind": template["kind"],
            "text": sub(template["template"], **params),
            "expected": expected,
        })
    return questions
