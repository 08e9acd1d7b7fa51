"""Pairwise inter-annotator reliability statistics.

Percent agreement, Cohen's Kappa and Gwet's AC1 over aligned label
vectors, plus the confusion matrix behind them. Kappa corrects chance
by the product of per-rater marginals; AC1 by the averaged marginals
pi_k with pe = (1/(K-1)) * sum pi_k(1-pi_k), which stays stable under
the high-prevalence regimes where Kappa turns paradoxical. Undefined
statistics (pe = 1) are explicit None markers, never 0 or NaN.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from prescribe.core import AnnotationRecord


class LabelKind(Enum):
    DI = "DI"
    AG = "AG"
    TOXICITY = "Toxicity"

    @property
    def domain(self) -> tuple[int, ...]:
        return (0, 1, 2) if self == LabelKind.AG else (0, 1)


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K counts; rows are rater A, columns rater B."""

    categories: tuple[int, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        k = len(self.categories)
        if k < 2:
            raise ValueError("confusion matrix needs at least two categories")
        if len(self.counts) != k or any(len(row) != k for row in self.counts):
            raise ValueError("counts must be KxK for K categories")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("counts must be non-negative")

    @property
    def n(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(len(self.categories)))

    def row_totals(self) -> list[int]:
        return [sum(row) for row in self.counts]

    def col_totals(self) -> list[int]:
        k = len(self.categories)
        return [sum(self.counts[i][j] for i in range(k)) for j in range(k)]

    def transpose(self) -> "ConfusionMatrix":
        k = len(self.categories)
        return ConfusionMatrix(
            self.categories,
            tuple(tuple(self.counts[i][j] for i in range(k)) for j in range(k)),
        )

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[tuple[int, int]], categories: Sequence[int]
    ) -> "ConfusionMatrix":
        cats = tuple(categories)
        pos = {c: i for i, c in enumerate(cats)}
        grid = [[0] * len(cats) for _ in cats]
        for a, b in pairs:
            grid[pos[a]][pos[b]] += 1
        return cls(cats, tuple(tuple(row) for row in grid))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["a\\b"] + [str(c) for c in self.categories])
        for cat, row in zip(self.categories, self.counts):
            writer.writerow([str(cat)] + [str(c) for c in row])
        return buf.getvalue()


def percent_agreement(m: ConfusionMatrix) -> float:
    if m.n == 0:
        raise ValueError("empty confusion matrix")
    return m.trace / m.n


def cohen_kappa(m: ConfusionMatrix) -> float | None:
    """(po - pe) / (1 - pe) with pe from per-rater marginal products.

    None when pe = 1 (degenerate single-category marginals).
    """
    n = m.n
    if n == 0:
        raise ValueError("empty confusion matrix")
    po = m.trace / n
    pe = sum(r * c for r, c in zip(m.row_totals(), m.col_totals())) / (n * n)
    if pe == 1:
        return None
    return (po - pe) / (1 - pe)


def gwet_ac1(m: ConfusionMatrix) -> float | None:
    """(po - pe) / (1 - pe) with pe = (1/(K-1)) * sum pi_k(1-pi_k)."""
    n = m.n
    if n == 0:
        raise ValueError("empty confusion matrix")
    k = len(m.categories)
    po = m.trace / n
    pis = [(r + c) / (2 * n) for r, c in zip(m.row_totals(), m.col_totals())]
    pe = sum(p * (1 - p) for p in pis) / (k - 1)
    if pe == 1:
        return None
    return (po - pe) / (1 - pe)


@dataclass(frozen=True)
class AgreementReport:
    pair: tuple[str, str]
    label_kind: LabelKind
    n: int
    percent_agreement: float
    cohen_kappa: float | None
    gwet_ac1: float | None
    matrix: ConfusionMatrix
    unmatched: tuple[int, int] = (0, 0)


def record_label(record: AnnotationRecord, kind: LabelKind) -> int | None:
    if kind == LabelKind.DI:
        return None if record.di is None else int(record.di)
    if kind == LabelKind.AG:
        return None if record.ag is None else int(record.ag)
    return int(record.toxic)


def align(
    a: Sequence[AnnotationRecord],
    b: Sequence[AnnotationRecord],
    kind: LabelKind,
) -> tuple[list[tuple[int, int]], int, int]:
    """Inner-join two record sets on unit_id for one label kind.

    Returns (label pairs, units only in a, units only in b). Records
    lacking the requested label (descriptive records have no DI/AG)
    count as missing. Duplicate unit ids within one side are an error.
    """
    return align_labels(_label_map(a, kind), _label_map(b, kind))


def _label_map(records: Sequence[AnnotationRecord], kind: LabelKind) -> dict[str, int]:
    labels: dict[str, int] = {}
    for record in records:
        if record.unit_id in labels:
            raise AlignmentError(f"duplicate unit id {record.unit_id!r} in record set")
        value = record_label(record, kind)
        if value is not None:
            labels[record.unit_id] = value
    return labels


def align_labels(
    a: dict[str, int], b: dict[str, int]
) -> tuple[list[tuple[int, int]], int, int]:
    shared = sorted(a.keys() & b.keys())
    pairs = [(a[uid], b[uid]) for uid in shared]
    return pairs, len(a) - len(pairs), len(b) - len(pairs)


def report_from_labels(
    a: dict[str, int],
    b: dict[str, int],
    kind: LabelKind,
    pair: tuple[str, str],
) -> AgreementReport:
    pairs, only_a, only_b = align_labels(a, b)
    if not pairs:
        raise AlignmentError(f"no aligned units for pair {pair[0]} & {pair[1]}")
    observed = {x for p in pairs for x in p}
    categories = tuple(sorted(set(kind.domain) | observed))
    matrix = ConfusionMatrix.from_pairs(pairs, categories)
    return AgreementReport(
        pair=pair,
        label_kind=kind,
        n=matrix.n,
        percent_agreement=percent_agreement(matrix),
        cohen_kappa=cohen_kappa(matrix),
        gwet_ac1=gwet_ac1(matrix),
        matrix=matrix,
        unmatched=(only_a, only_b),
    )


def report_pair(
    a: Sequence[AnnotationRecord],
    b: Sequence[AnnotationRecord],
    kind: LabelKind,
    pair: tuple[str, str],
) -> AgreementReport:
    return report_from_labels(_label_map(a, kind), _label_map(b, kind), kind, pair)


def _fmt_stat(value: float | None) -> str:
    return "undefined" if value is None else f"{value:.4f}"


def render_report(report: AgreementReport, fmt: str = "table") -> str:
    """Render a report as human table, csv, or one JSON line."""
    if fmt == "jsonl":
        return json.dumps(
            {
                "pair": list(report.pair),
                "kind": report.label_kind.value,
                "n": report.n,
                "agreement_pct": report.percent_agreement * 100,
                "cohen_kappa": report.cohen_kappa,
                "gwet_ac1": report.gwet_ac1,
                "unmatched": list(report.unmatched),
                "matrix": {
                    "categories": list(report.matrix.categories),
                    "counts": [list(r) for r in report.matrix.counts],
                },
            },
            sort_keys=True,
        )
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["pair", "kind", "n", "agreement_pct", "cohen_kappa", "gwet_ac1"])
        writer.writerow(
            [
                f"{report.pair[0]} & {report.pair[1]}",
                report.label_kind.value,
                report.n,
                f"{report.percent_agreement * 100:.2f}",
                _fmt_stat(report.cohen_kappa),
                _fmt_stat(report.gwet_ac1),
            ]
        )
        return buf.getvalue()
    lines = [
        f"Pair: {report.pair[0]} & {report.pair[1]}  ({report.label_kind.value})",
        f"n = {report.n}  (unmatched: {report.unmatched[0]} / {report.unmatched[1]})",
        f"Agr.% = {report.percent_agreement * 100:.2f}",
        f"CK    = {_fmt_stat(report.cohen_kappa)}",
        f"AC1   = {_fmt_stat(report.gwet_ac1)}",
        "Confusion matrix (rows = first annotator):",
        report.matrix.to_csv().rstrip(),
    ]
    return "\n".join(lines)
