"""Scoring and aggregate metrics: accuracy, std, saturation, CPS.

Saturation is 1 - (max accuracy - mean accuracy) across models for one
approach; CPS multiplies saturation by the max accuracy. Standard
deviation uses the sample (n-1) divisor, defined as 0 for a single model
so degenerate runs still report.
"""

from __future__ import annotations

import csv
import json
import math
import re
import statistics
from dataclasses import dataclass, field
from pathlib import Path

_CURRENCY = "$€£"
_TERMINAL_PUNCT = ".!?,;:"
_QUOTES = "\"'`"
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")

NUMERIC_REL_TOL = 1e-6


@dataclass
class RunRecord:
    qid: str
    approach: str
    model: str
    domain: str
    difficulty: str
    predicted: str
    gold: str
    correct: bool
    steps_used: int
    termination: str


@dataclass
class MetricsRow:
    approach: str
    domain: str
    difficulty: str
    per_model_accuracy: dict[str, float] = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return accuracy_mean(list(self.per_model_accuracy.values()))

    @property
    def std(self) -> float:
        return std(list(self.per_model_accuracy.values()))

    @property
    def max(self) -> float:
        return max(self.per_model_accuracy.values())

    @property
    def saturation(self) -> float:
        return saturation(list(self.per_model_accuracy.values()))

    @property
    def cps(self) -> float:
        return cps(list(self.per_model_accuracy.values()))


def parse_number(text: str) -> float | None:
    cleaned = text.strip()
    for ch in _CURRENCY:
        cleaned = cleaned.replace(ch, "")
    cleaned = cleaned.replace(",", "").replace(" ", "")
    if not _NUMBER.match(cleaned):
        return None
    return float(cleaned)


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return format(value, ".12g")


def normalize_answer(text: str) -> str:
    """Trim, unquote, drop terminal punctuation, collapse spaces, casefold.

    Anything that then parses as a number is canonicalized numerically, so
    "2.50" and "2.5" (or "$ 1,425" and "1425") collapse to the same form.
    """
    s = text.strip()
    while True:
        before = s
        while len(s) >= 2 and s[0] == s[-1] and s[0] in _QUOTES:
            s = s[1:-1].strip()
        s = s.rstrip(_TERMINAL_PUNCT).strip()
        if s == before:
            break
    s = " ".join(s.split())
    s = s.casefold()
    number = parse_number(s)
    if number is not None:
        return _format_number(number)
    return s


def is_correct(predicted: str, gold: str) -> bool:
    np_, ng = normalize_answer(predicted), normalize_answer(gold)
    if np_ == ng:
        return True
    pn, gn = parse_number(np_), parse_number(ng)
    if pn is not None and gn is not None:
        return math.isclose(pn, gn, rel_tol=NUMERIC_REL_TOL, abs_tol=1e-9)
    return False


def accuracy(records: list[RunRecord]) -> float:
    if not records:
        raise ValueError("no records")
    return sum(1 for r in records if r.correct) / len(records)


def _check_accuracies(values: list[float]) -> None:
    if not values:
        raise ValueError("empty accuracy vector")


def accuracy_mean(values: list[float]) -> float:
    _check_accuracies(values)
    return sum(values) / len(values)


def std(values: list[float]) -> float:
    _check_accuracies(values)
    if len(values) == 1:
        return 0.0
    return statistics.stdev(values)


def saturation(values: list[float]) -> float:
    _check_accuracies(values)
    return 1.0 - (max(values) - accuracy_mean(values))


def cps(values: list[float]) -> float:
    _check_accuracies(values)
    return saturation(values) * max(values)


def aggregate_records(records: list[RunRecord]) -> list[MetricsRow]:
    """One MetricsRow per (approach, domain, difficulty) over all models seen."""
    cells: dict[tuple[str, str, str, str], list[RunRecord]] = {}
    for record in records:
        key = (record.approach, record.domain, record.difficulty, record.model)
        cells.setdefault(key, []).append(record)
    rows: dict[tuple[str, str, str], MetricsRow] = {}
    for (approach, domain, difficulty, model), cell in sorted(cells.items()):
        row = rows.setdefault(
            (approach, domain, difficulty),
            MetricsRow(approach=approach, domain=domain, difficulty=difficulty),
        )
        row.per_model_accuracy[model] = accuracy(cell)
    return [rows[k] for k in sorted(rows)]


def rows_from_accuracy_table(
    table: dict[str, dict[str, dict[str, dict[str, float]]]],
    approaches: list[str] | None = None,
    models: list[str] | None = None,
) -> list[MetricsRow]:
    """Build rows from a nested difficulty/approach/model/domain table."""
    rows: list[MetricsRow] = []
    for difficulty in sorted(table):
        per_approach = table[difficulty]
        for approach in sorted(per_approach):
            if approaches is not None and approach not in approaches:
                continue
            per_model = per_approach[approach]
            domains: set[str] = set()
            for domain_map in per_model.values():
                domains.update(domain_map)
            for domain in sorted(domains):
                row = MetricsRow(approach=approach, domain=domain, difficulty=difficulty)
                for model in sorted(per_model, key=str.lower):
                    if models is not None and model not in models:
                        continue
                    if domain in per_model[model]:
                        row.per_model_accuracy[model] = per_model[model][domain]
                if row.per_model_accuracy:
                    rows.append(row)
    return rows


def read_records_jsonl(paths: list[Path]) -> tuple[list[RunRecord], int]:
    """Load RunRecords; corrupt lines are skipped and counted."""
    records: list[RunRecord] = []
    skipped = 0
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                try:
                    doc = json.loads(line)
                    records.append(
                        RunRecord(
                            qid=doc["qid"],
                            approach=doc["approach"],
                            model=doc["model"],
                            domain=doc["domain"],
                            difficulty=doc["difficulty"],
                            predicted=doc.get("predicted") or "",
                            gold=doc["gold"],
                            correct=bool(doc["correct"]),
                            steps_used=int(doc.get("steps_used", 0)),
                            termination=doc.get("termination") or "",
                        )
                    )
                except (ValueError, KeyError, TypeError):
                    skipped += 1
    return records, skipped


def record_to_dict(record: RunRecord) -> dict:
    return {
        "qid": record.qid,
        "approach": record.approach,
        "model": record.model,
        "domain": record.domain,
        "difficulty": record.difficulty,
        "predicted": record.predicted,
        "gold": record.gold,
        "correct": record.correct,
        "steps_used": record.steps_used,
        "termination": record.termination,
    }


def _round2(value: float) -> str:
    return f"{value:.2f}"


def write_reports(rows: list[MetricsRow], out_dir: Path) -> list[Path]:
    """Emit accuracy and aggregate CSVs per difficulty plus a text report."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    difficulties = sorted({r.difficulty for r in rows})
    report_lines: list[str] = []
    for difficulty in difficulties or ["easy"]:
        subset = [r for r in rows if r.difficulty == difficulty]
        domains = sorted({r.domain for r in subset})
        approaches = sorted({r.approach for r in subset})
        models = sorted({m for r in subset for m in r.per_model_accuracy}, key=str.lower)

        acc_path = out_dir / f"accuracy_{difficulty}.csv"
        with open(acc_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["approach", "model"] + domains)
            for approach in approaches:
                for model in models:
                    cells = []
                    for domain in domains:
                        row = next(
                            (r for r in subset if r.approach == approach and r.domain == domain),
                            None,
                        )
                        if row is not None and model in row.per_model_accuracy:
                            cells.append(_round2(row.per_model_accuracy[model]))
                        else:
                            cells.append("")
                    if any(cells):
                        writer.writerow([approach, model] + cells)
        written.append(acc_path)

        agg_path = out_dir / f"aggregate_{difficulty}.csv"
        with open(agg_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            header = ["approach"]
            for domain in domains:
                header += [f"{domain}_mean", f"{domain}_std", f"{domain}_cps"]
            writer.writerow(header)
            for approach in approaches:
                cells = [approach]
                for domain in domains:
                    row = next(
                        (r for r in subset if r.approach == approach and r.domain == domain),
                        None,
                    )
                    if row is None:
                        cells += ["", "", ""]
                    else:
                        cells += [_round2(row.mean), _round2(row.std), _round2(row.cps)]
                writer.writerow(cells)
        written.append(agg_path)

        report_lines.append(f"== {difficulty} ==")
        for approach in approaches:
            for domain in domains:
                row = next(
                    (r for r in subset if r.approach == approach and r.domain == domain),
                    None,
                )
                if row is None:
                    continue
                report_lines.append(
                    f"{approach:12} {domain:10} mean={_round2(row.mean)} "
                    f"std={_round2(row.std)} sat={_round2(row.saturation)} "
                    f"cps={_round2(row.cps)} models={len(row.per_model_accuracy)}"
                )
        report_lines.append("")
    report_path = out_dir / "report.txt"
    report_path.write_text("\n".join(report_lines) + "\n", encoding="utf-8")
    written.append(report_path)
    return written
