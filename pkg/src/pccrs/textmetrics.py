"""Word-overlap metrics and the credibility-band relevance-gap analysis."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from statistics import mean
from typing import Sequence

from .errors import InsufficientBandDataError

_PUNCT = re.compile(r"[^\w\s]")

REFERENCES = ("item-info", "user-history")
METRICS = ("bleu1", "rougeL")


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace."""
    return _PUNCT.sub("", text.lower()).split()


def bleu1(candidate: str, reference: str) -> float:
    """Clipped unigram precision times the brevity penalty min(1, exp(1 - r/c))."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand:
        return 0.0
    ref_counts = Counter(ref)
    cand_counts = Counter(cand)
    clipped = sum(min(count, ref_counts[token]) for token, count in cand_counts.items())
    precision = clipped / len(cand)
    brevity = min(1.0, math.exp(1.0 - len(ref) / len(cand)))
    return precision * brevity


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for token_a in a:
        row = [0] * (len(b) + 1)
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = max(prev[j], row[j - 1])
        prev = row
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """F1 over the longest common subsequence of the token sequences."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class BandedExplanation:
    """One explanation with its credibility band and the two reference texts."""

    text: str
    band: str  # "low" | "mid" | "high"
    item_info: str
    user_history: str


@dataclass(frozen=True)
class GapCell:
    mean_low: float
    mean_high: float

    @property
    def gap(self) -> float:
        return self.mean_low - self.mean_high


@dataclass(frozen=True)
class RelevanceGapReport:
    """Per (reference, metric) band means; gap = mean_low - mean_high."""

    cells: dict[tuple[str, str], GapCell]
    counts: dict[str, int]

    def to_rows(self) -> list[dict[str, object]]:
        rows: list[dict[str, object]] = []
        for reference in REFERENCES:
            for metric in METRICS:
                cell = self.cells[(reference, metric)]
                rows.append(
                    {
                        "reference": reference,
                        "metric": metric,
                        "mean_low": cell.mean_low,
                        "mean_high": cell.mean_high,
                        "gap": cell.gap,
                        "n_low": self.counts["low"],
                        "n_high": self.counts["high"],
                    }
                )
        return rows


_METRIC_FNS = {"bleu1": bleu1, "rougeL": rouge_l}


def relevance_gap(explanations: Sequence[BandedExplanation]) -> RelevanceGapReport:
    """Band-mean metric scores against item information and user history.

    Mid-band explanations are excluded; at least one low and one high sample
    are required.
    """
    lows = [e for e in explanations if e.band == "low"]
    highs = [e for e in explanations if e.band == "high"]
    mids = [e for e in explanations if e.band == "mid"]
    if not lows or not highs:
        raise InsufficientBandDataError(
            f"need both bands, got {len(lows)} low and {len(highs)} high"
        )
    cells: dict[tuple[str, str], GapCell] = {}
    for reference in REFERENCES:
        ref_of = (lambda e: e.item_info) if reference == "item-info" else (lambda e: e.user_history)
        for metric in METRICS:
            fn = _METRIC_FNS[metric]
            cells[(reference, metric)] = GapCell(
                mean_low=mean(fn(e.text, ref_of(e)) for e in lows),
                mean_high=mean(fn(e.text, ref_of(e)) for e in highs),
            )
    return RelevanceGapReport(cells=cells, counts={"low": len(lows), "high": len(highs), "mid": len(mids)})
