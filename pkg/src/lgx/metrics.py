"""SR, SPL and pooled PSR over episode results."""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .policy import EpisodeResult
from .prompt import PsrCounter, psr


def _check(results: Sequence[EpisodeResult]) -> None:
    if not results:
        raise ValueError("need at least one episode result")


def success_rate(results: Sequence[EpisodeResult]) -> float:
    _check(results)
    return 100.0 * sum(bool(r.success) for r in results) / len(results)


def spl_term(r: EpisodeResult) -> float:
    if not r.success:
        return 0.0
    denom = max(r.path_length, r.optimal_length)
    if denom <= 0:
        return 1.0
    return r.optimal_length / denom


def spl(results: Sequence[EpisodeResult]) -> float:
    """Success weighted by (optimal / max(actual, optimal)) path length, in %."""
    _check(results)
    return 100.0 * sum(spl_term(r) for r in results) / len(results)


def pooled_psr(results: Sequence[EpisodeResult]) -> float | None:
    total = PsrCounter()
    for r in results:
        total = total.merge(r.psr)
    return psr(total) if total.p_total else None


@dataclass
class SuiteSummary:
    sr: float
    spl: float
    psr: float | None
    n_episodes: int
    per_label: dict[str, tuple[float, float, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_label"] = {k: list(v) for k, v in self.per_label.items()}
        return d

    def table(self) -> str:
        psr_s = "-" if self.psr is None else f"{self.psr:.1f}"
        lines = [f"SR {self.sr:.1f}  SPL {self.spl:.1f}  PSR {psr_s}  (n={self.n_episodes})",
                 f"{'target':<24} {'SR':>6} {'SPL':>6} {'n':>4}"]
        for label, (sr_, spl_, n) in sorted(self.per_label.items()):
            lines.append(f"{label:<24} {sr_:>6.1f} {spl_:>6.1f} {n:>4}")
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "sr", "spl", "n"])
        w.writerow(["ALL", f"{self.sr:.6f}", f"{self.spl:.6f}", self.n_episodes])
        for label, (sr_, spl_, n) in sorted(self.per_label.items()):
            w.writerow([label, f"{sr_:.6f}", f"{spl_:.6f}", n])
        return buf.getvalue()


def summarize(results: Sequence[EpisodeResult]) -> SuiteSummary:
    _check(results)
    groups: dict[str, list[EpisodeResult]] = defaultdict(list)
    for r in results:
        groups[r.target_label].append(r)
    per_label = {k: (success_rate(v), spl(v), len(v)) for k, v in groups.items()}
    return SuiteSummary(success_rate(results), spl(results), pooled_psr(results), len(results), per_label)
