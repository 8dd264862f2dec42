"""Corpus summary statistics: existing vs mined counts per language pair."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .errors import ConfigError

OVERALL = "overall"


@dataclass(frozen=True)
class PairStats:
    pair: str  # e.g. "en-hi"
    existing: int
    mined: int

    def __post_init__(self):
        if self.existing < 0 or self.mined < 0:
            raise ConfigError(f"{self.pair}: counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.existing + self.mined

    @property
    def factor(self) -> Optional[float]:
        """total / existing to one decimal; None when nothing pre-existed."""
        if self.existing == 0:
            return None
        return round(self.total / self.existing, 1)


@dataclass(frozen=True)
class CorpusStats:
    rows: tuple
    overall: PairStats

    def to_dict(self) -> dict:
        def row(r: PairStats) -> dict:
            return {
                "pair": r.pair,
                "existing": r.existing,
                "mined": r.mined,
                "total": r.total,
                "factor": r.factor,
            }

        return {"rows": [row(r) for r in self.rows], "overall": row(self.overall)}


def compute_stats(rows: Sequence[PairStats]) -> CorpusStats:
    """Per-pair rows plus an overall row summed over all pairs."""
    overall = PairStats(
        pair=OVERALL,
        existing=sum(r.existing for r in rows),
        mined=sum(r.mined for r in rows),
    )
    return CorpusStats(rows=tuple(rows), overall=overall)


def read_counts(path) -> list:
    """Three-column TSV: pair, existing count, mined count.

    Blank lines, ``#`` comments and an optional header row are skipped.
    """
    rows = []
    for line_no, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ConfigError(f"{path}:{line_no}: expected pair\texisting\tmined")
        if not rows and [p.strip().lower() for p in parts] == ["pair", "existing", "mined"]:
            continue
        try:
            rows.append(PairStats(parts[0], int(parts[1]), int(parts[2])))
        except ValueError:
            raise ConfigError(f"{path}:{line_no}: counts must be integers")
    return rows


def format_table(stats: CorpusStats) -> str:
    """Plain-text table with an overall row, factors to one decimal."""
    header = ("pair", "existing", "mined", "total", "factor")
    lines = [header]
    for r in list(stats.rows) + [stats.overall]:
        factor = "na" if r.factor is None else f"{r.factor:.1f}"
        lines.append((r.pair, str(r.existing), str(r.mined), str(r.total), factor))
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    out = []
    for row in lines:
        out.append("  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(out)
