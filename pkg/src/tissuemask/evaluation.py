"""Pixel-level scoring, aggregation, and report rendering.

Metrics follow the tissue-positive convention (mask value 1 = tissue):

    jaccard     = TP / (TP + FP + FN)
    dice        = 2 TP / (2 TP + FP + FN)
    sensitivity = TP / (TP + FN)
    specificity = TN / (TN + FP)

A metric whose denominator is zero is Undefined (None) and excluded
from aggregates cell by cell.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, EmptyInputError

__all__ = [
    "ConfusionCounts",
    "MetricSet",
    "EvalRecord",
    "Report",
    "confusion",
    "metrics",
    "aggregate",
    "render_table",
    "export_boxplot_data",
]

METRIC_NAMES = ("jaccard", "dice", "sensitivity", "specificity")


@dataclass
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass
class MetricSet:
    jaccard: Optional[float]
    dice: Optional[float]
    sensitivity: Optional[float]
    specificity: Optional[float]

    def get(self, name: str) -> Optional[float]:
        return getattr(self, name)


@dataclass
class EvalRecord:
    item_id: str
    method_id: str
    counts: ConfusionCounts
    metrics: MetricSet
    elapsed_seconds: float = 0.0
    fold: Optional[int] = None


@dataclass
class MethodStats:
    n: int
    mean: dict  # metric -> mean over defined records (None if none defined)
    std: dict  # metric -> population std
    counts: dict  # metric -> number of defined records
    mean_elapsed: float
    per_fold: dict = field(default_factory=dict)  # fold -> {metric: (mean, std, n)}
    fold_mean_of_means: dict = field(default_factory=dict)


@dataclass
class Report:
    methods: dict  # method_id -> MethodStats


def confusion(pred: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise DimensionMismatchError(f"pred {pred.shape} vs gt {gt.shape}")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = pred.size - tp - fp - fn
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def _ratio(num: int, den: int) -> Optional[float]:
    return None if den == 0 else num / den


def metrics(c: ConfusionCounts) -> MetricSet:
    return MetricSet(
        jaccard=_ratio(c.tp, c.tp + c.fp + c.fn),
        dice=_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn),
        sensitivity=_ratio(c.tp, c.tp + c.fn),
        specificity=_ratio(c.tn, c.tn + c.fp),
    )


def _mean_std(values: list[float]):
    if not values:
        return None, None
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)  # population
    return mean, math.sqrt(var)


def aggregate(records: list[EvalRecord], grouping: str = "overall") -> Report:
    """Mean and population std per metric per method.

    grouping "perFold" additionally breaks cells down by fold and
    carries the mean-of-fold-means alongside the overall mean (the two
    coincide only for equal-sized folds).
    """
    if not records:
        raise EmptyInputError("no records to aggregate")
    if grouping not in ("overall", "perFold"):
        raise ValueError(f"unknown grouping {grouping!r}")
    out = {}
    for method in sorted({r.method_id for r in records}):
        recs = [r for r in records if r.method_id == method]
        mean, std, counts = {}, {}, {}
        for m in METRIC_NAMES:
            vals = [r.metrics.get(m) for r in recs if r.metrics.get(m) is not None]
            mean[m], std[m] = _mean_std(vals)
            counts[m] = len(vals)
        stats = MethodStats(
            n=len(recs), mean=mean, std=std, counts=counts,
            mean_elapsed=sum(r.elapsed_seconds for r in recs) / len(recs),
        )
        if grouping == "perFold":
            folds = sorted({r.fold for r in recs if r.fold is not None})
            for f in folds:
                cell = {}
                frecs = [r for r in recs if r.fold == f]
                for m in METRIC_NAMES:
                    vals = [
                        r.metrics.get(m) for r in frecs
                        if r.metrics.get(m) is not None
                    ]
                    mu, sd = _mean_std(vals)
                    cell[m] = (mu, sd, len(vals))
                stats.per_fold[f] = cell
            for m in METRIC_NAMES:
                fold_means = [
                    stats.per_fold[f][m][0] for f in folds
                    if stats.per_fold[f][m][0] is not None
                ]
                stats.fold_mean_of_means[m], _ = _mean_std(fold_means)
        out[method] = stats
    return Report(methods=out)


_COLUMNS = ("Time (s)", "Jaccard Index", "Dice Coeff.", "Sensitivity", "Specificity")


def _cell(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.2f}"


def render_table(report: Report, fmt: str = "text") -> str:
    """One row per method, columns in Table-1 order, 2-decimal rounding.

    CSV output keeps full precision next to the rounded columns and the
    population-std columns.
    """
    if fmt == "text":
        widths = [max(14, len(c) + 2) for c in _COLUMNS]
        head = "Method".ljust(16) + "".join(
            c.rjust(w) for c, w in zip(_COLUMNS, widths)
        )
        lines = [head, "-" * len(head)]
        for method, s in report.methods.items():
            cells = [_cell(s.mean_elapsed)] + [
                _cell(s.mean[m]) for m in METRIC_NAMES
            ]
            lines.append(
                method.ljust(16)
                + "".join(c.rjust(w) for c, w in zip(cells, widths))
            )
        lines.append("")
        lines.append("std = population standard deviation; means skip undefined cells")
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        cols = ["method", "n", "time_s"]
        for m in METRIC_NAMES:
            cols += [m, f"{m}_rounded", f"{m}_std", f"{m}_n"]
        buf.write(",".join(cols) + "\n")
        for method, s in report.methods.items():
            row = [method, str(s.n), repr(s.mean_elapsed)]
            for m in METRIC_NAMES:
                mu, sd = s.mean[m], s.std[m]
                row += [
                    "" if mu is None else repr(mu),
                    "" if mu is None else f"{mu:.2f}",
                    "" if sd is None else repr(sd),
                    str(s.counts[m]),
                ]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def export_boxplot_data(records: list[EvalRecord]) -> str:
    """Long-format CSV (method, item, jaccard); undefined rows omitted."""
    rows = sorted(
        (
            (r.method_id, r.item_id, r.metrics.jaccard)
            for r in records
            if r.metrics.jaccard is not None
        ),
    )
    buf = io.StringIO()
    buf.write("method,item,jaccard\n")
    for method, item, j in rows:
        buf.write(f"{method},{item},{j!r}\n")
    return buf.getvalue()


def records_csv(records: list[EvalRecord]) -> str:
    """Per-item records as CSV, full precision."""
    buf = io.StringIO()
    buf.write(
        "method,item,fold,tp,tn,fp,fn,jaccard,dice,sensitivity,specificity,time_s\n"
    )
    for r in sorted(records, key=lambda r: (r.method_id, r.item_id)):
        c = r.counts
        cells = [
            r.method_id, r.item_id,
            "" if r.fold is None else str(r.fold),
            str(c.tp), str(c.tn), str(c.fp), str(c.fn),
        ]
        for m in METRIC_NAMES:
            v = r.metrics.get(m)
            cells.append("" if v is None else repr(v))
        cells.append(repr(r.elapsed_seconds))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()
