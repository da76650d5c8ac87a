"""Confusion-matrix evaluation report and its text rendering.

Rows are the images used for feature extraction, columns the images
matched against; the diagonal therefore holds genuine scores and
everything else impostor scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class EvalReport:
    labels: list[str]
    matrix: list[list[float]]  # row = extraction image, column = matched-against image
    notes: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        n = len(self.labels)
        if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
            raise ValueError("matrix must be square and match the label count")
        for row in self.matrix:
            for v in row:
                if not 0.0 <= v <= 100.0:
                    raise ValueError(f"matrix entry {v} outside [0, 100]")

    @property
    def diagonal_mean(self) -> float:
        n = len(self.labels)
        if n == 0:
            return 0.0
        return sum(self.matrix[i][i] for i in range(n)) / n

    @property
    def off_diagonal_mean(self) -> float:
        n = len(self.labels)
        if n < 2:
            return 0.0
        total = sum(sum(row) for row in self.matrix) - sum(self.matrix[i][i] for i in range(n))
        return total / (n * n - n)

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "matrix": [list(row) for row in self.matrix],
            "diagonal_mean": self.diagonal_mean,
            "off_diagonal_mean": self.off_diagonal_mean,
            "notes": list(self.notes),
        }


def render_report(report: EvalReport, title: str | None = None) -> str:
    """Paper-style grid: row labels down the side, scores as whole percents."""
    width = max([6] + [len(lab) + 2 for lab in report.labels])
    lines = []
    if title:
        lines.append(title)
    header = " " * width + "".join(f"{lab:>{width}}" for lab in report.labels)
    lines.append(header)
    for lab, row in zip(report.labels, report.matrix):
        cells = "".join(f"{v:>{width}.0f}" for v in row)
        lines.append(f"{lab:<{width}}{cells}")
    lines.append(f"diagonal mean: {report.diagonal_mean:.1f}%")
    lines.append(f"off-diagonal mean: {report.off_diagonal_mean:.1f}%")
    for note in report.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def render_reports(reports: list[EvalReport], titles: list[str] | None = None) -> str:
    """Render several tables plus the pooled diagonal mean across all of them."""
    if titles is None:
        titles = [None] * len(reports)
    blocks = [render_report(r, t) for r, t in zip(reports, titles)]
    diag = [r.matrix[i][i] for r in reports for i in range(len(r.labels))]
    if diag:
        overall = sum(diag) / len(diag)
        blocks.append(f"overall diagonal mean: {overall:.1f}% (rounds to {round(overall):d}%)\n")
    return "\n".join(blocks)
