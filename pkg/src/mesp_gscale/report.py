"""Gap rows, gap-decrease ratios and the CSV format used by the CLI."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

CSV_FIELDS = ("s", "bound", "scaling", "ub", "lb", "gap", "ratio", "iters", "seconds")


class ReportError(ValueError):
    pass


def fmt(v) -> str:
    """12 significant digits; blanks for missing values."""
    if v is None:
        return ""
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return ""
    return f"{v:.12g}"


@dataclass
class GapRow:
    s: int
    bound: str
    scaling: str
    ub: float
    lb: float
    ratio: float = None
    iters: int = None
    seconds: float = None

    @property
    def gap(self) -> float:
        return self.ub - self.lb

    def as_csv(self) -> list:
        return [fmt(self.s), self.bound, self.scaling, fmt(self.ub), fmt(self.lb), fmt(self.gap),
                fmt(self.ratio), fmt(self.iters), fmt(self.seconds)]


def decrease_ratio(gap_o, gap_g):
    """``(gap_o - gap_g) / gap_o``, or ``None`` when ``gap_o`` is not positive."""
    if not gap_o > 0:
        return None
    return (gap_o - gap_g) / gap_o


def attach_ratios(rows):
    """Fill ``ratio`` on g-scaled rows from the o-scaled row with the same ``(s, bound)``.

    Returns the list of ``(s, bound)`` keys whose ratio is undefined because
    ``gap_o <= 0``.  Raises :class:`ReportError` if a g row has no o partner.
    """
    o_rows = {(r.s, r.bound): r for r in rows if r.scaling == "o"}
    undefined = []
    for r in rows:
        if r.scaling != "g":
            continue
        o = o_rows.get((r.s, r.bound))
        if o is None:
            raise ReportError(f"no o-scaling row for s={r.s}, bound={r.bound}")
        r.ratio = decrease_ratio(o.gap, r.gap)
        if r.ratio is None:
            undefined.append((r.s, r.bound))
    g_keys = {(r.s, r.bound) for r in rows if r.scaling == "g"}
    missing = sorted(set(o_rows) - g_keys)
    if missing:
        raise ReportError(f"no g-scaling row for (s, bound) in {missing}")
    return undefined


def summarize(rows) -> str:
    lines = []
    for bound in sorted({r.bound for r in rows if r.ratio is not None}):
        rs = [r for r in rows if r.bound == bound and r.ratio is not None]
        best = max(rs, key=lambda r: (r.ratio, -r.s))
        lines.append(f"{bound}: max gap-decrease ratio {fmt(best.ratio)} at s={best.s}")
    return "\n".join(lines) if lines else "no gap-decrease ratios defined"


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow(r.as_csv())
    return buf.getvalue()


def from_csv(text) -> list:
    rows = []
    rd = csv.DictReader(io.StringIO(text))
    if rd.fieldnames is None or tuple(rd.fieldnames) != CSV_FIELDS:
        raise ReportError(f"unexpected CSV header {rd.fieldnames}")
    for d in rd:
        rows.append(GapRow(
            s=int(d["s"]), bound=d["bound"], scaling=d["scaling"], ub=float(d["ub"]), lb=float(d["lb"]),
            ratio=float(d["ratio"]) if d["ratio"] else None,
            iters=int(d["iters"]) if d["iters"] else None,
            seconds=float(d["seconds"]) if d["seconds"] else None,
        ))
    return rows
