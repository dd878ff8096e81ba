"""Daily net sentiment, the monthly index and its subgroup variants.

A day's net is ``(p - n) / (p + n)`` (0 when there are no relevant items);
a month's index is the mean of the daily nets over all calendar days.
"""

from __future__ import annotations

import datetime as dt
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .naive_bayes import SentimentClass
from .series import Month, MonthlySeries

log = logging.getLogger(__name__)

EPS = 1e-9
SCHEMES = {
    "print_online": ("print", "online"),
    "nationwide_local": ("nationwide", "local"),
    "frequent_infrequent": ("frequent", "infrequent"),
}


@dataclass(frozen=True)
class DailyCounts:
    date: dt.date
    n_positive: float = 0
    n_negative: float = 0
    n_irrelevant: float = 0

    def __post_init__(self):
        if min(self.n_positive, self.n_negative, self.n_irrelevant) < 0:
            raise DataError(f"{self.date}: negative count")


def daily_net(counts: DailyCounts) -> float:
    p, n = counts.n_positive, counts.n_negative
    return (p - n) / (p + n) if p + n > 0 else 0.0


def monthly_emsi(daily: Sequence[DailyCounts]) -> float:
    """Average of daily nets over every calendar day; absent days count as 0."""
    if not daily:
        raise DataError("no days given")
    month = Month.of(daily[0].date)
    seen = set()
    total = 0.0
    for d in daily:
        if Month.of(d.date) != month:
            raise DataError(f"{d.date} is not in {month}")
        if d.date in seen:
            raise DataError(f"duplicate date {d.date}")
        seen.add(d.date)
        total += daily_net(d)
    return total / month.days


@dataclass
class EmsiSeries:
    start: Month
    values: np.ndarray
    n_positive: np.ndarray
    n_negative: np.ndarray
    n_irrelevant: np.ndarray
    name: str = "emsi"

    def __len__(self) -> int:
        return len(self.values)

    @property
    def months(self) -> list[Month]:
        return [self.start + i for i in range(len(self.values))]

    @property
    def days(self) -> list[int]:
        return [m.days for m in self.months]

    def as_series(self) -> MonthlySeries:
        return MonthlySeries(self.start, self.values, "index", self.name)


def _emsi_from_days(days: Mapping[dt.date, list[float]], first: Month, last: Month,
                    item_counts: Mapping[Month, list[int]], name: str) -> EmsiSeries:
    # days: date -> [weighted positive, weighted negative]
    n_months = last - first + 1
    values = np.zeros(n_months)
    for date, (p, n) in days.items():
        if p + n > 0:
            values[Month.of(date) - first] += (p - n) / (p + n)
    months = [first + i for i in range(n_months)]
    values /= np.array([m.days for m in months], dtype=float)
    counts = np.array([item_counts.get(m, [0, 0, 0]) for m in months], dtype=float).reshape(n_months, 3)
    return EmsiSeries(first, values, counts[:, 0], counts[:, 1], counts[:, 2], name)


def build_emsi(docs: Iterable[tuple[dt.date, SentimentClass]], first: Month, last: Month,
               weights: Sequence[float] | None = None, name: str = "emsi") -> EmsiSeries:
    """Monthly index over ``first..last`` from (date, predicted class) pairs.

    ``weights`` scales each item's contribution to its day's positive and
    negative mass; the ratio is unchanged by any per-day normalisation.
    """
    if last < first:
        raise DataError("empty month range")
    days: dict[dt.date, list[float]] = defaultdict(lambda: [0.0, 0.0])
    counts: dict[Month, list[int]] = defaultdict(lambda: [0, 0, 0])
    docs = list(docs)
    if weights is None:
        weights = [1.0] * len(docs)
    for (date, label), w in zip(docs, weights, strict=True):
        m = Month.of(date)
        if not first <= m <= last:
            raise DataError(f"document dated {date} outside {first}..{last}")
        label = SentimentClass(label)
        if label is SentimentClass.positive:
            days[date][0] += w
            counts[m][0] += 1
        elif label is SentimentClass.negative:
            days[date][1] += w
            counts[m][1] += 1
        else:
            counts[m][2] += 1
    return _emsi_from_days(days, first, last, counts, name)


def centered_ma(series: MonthlySeries | EmsiSeries, window: int = 12) -> MonthlySeries:
    """Centred moving average; even windows use the 2 x window form with half-weight ends."""
    x = np.asarray(series.values, dtype=float)
    if window < 1:
        raise DataError("window must be positive")
    if window % 2 == 0:
        w = np.ones(window + 1)
        w[[0, -1]] = 0.5
    else:
        w = np.ones(window)
    w /= window
    if len(x) < len(w):
        raise DataError(f"series of length {len(x)} too short for a centred {window}-term average")
    vals = np.convolve(x, w, mode="valid")
    half = (len(w) - 1) // 2
    return MonthlySeries(series.start + half, vals, "index", f"{getattr(series, 'name', '')}_ma{window}")


# --------------------------------------------------------------- subgroups

@dataclass(frozen=True)
class ClassifiedItem:
    id: str
    date: dt.date
    outlet: str
    channel: str
    word_count: int
    label: SentimentClass


def outlet_features(items: Sequence[ClassifiedItem]) -> dict[str, tuple[float, float]]:
    """Outlet -> (average words per item, item count)."""
    words: dict[str, int] = defaultdict(int)
    n: dict[str, int] = defaultdict(int)
    for it in items:
        words[it.outlet] += it.word_count
        n[it.outlet] += 1
    return {o: (words[o] / n[o], float(n[o])) for o in sorted(n)}


def default_exemplars(features: Mapping[str, tuple[float, float]]) -> dict[str, tuple[float, float]]:
    """Frequent = short and many items, infrequent = long and few, at the 10th/90th percentiles."""
    f = np.array(list(features.values()), dtype=float)
    aw10, aw90 = np.percentile(f[:, 0], [10, 90])
    n10, n90 = np.percentile(f[:, 1], [10, 90])
    return {"frequent": (float(aw10), float(n90)), "infrequent": (float(aw90), float(n10))}


def assign_exemplars(features: Mapping[str, tuple[float, float]],
                     exemplars: Mapping[str, tuple[float, float]]) -> dict[str, tuple[str, float]]:
    """Outlet -> (nearest exemplar group, inverse-distance weight)."""
    out = {}
    for outlet, feat in features.items():
        dists = {g: float(np.hypot(feat[0] - e[0], feat[1] - e[1])) for g, e in exemplars.items()}
        group = min(dists, key=lambda g: (dists[g], g))
        out[outlet] = (group, 1.0 / max(dists[group], EPS))
    return out


def split_subgroups(items: Sequence[ClassifiedItem], scheme: str, first: Month, last: Month,
                    locality: Mapping[str, str] | None = None,
                    exemplars: Mapping[str, tuple[float, float]] | None = None) -> dict[str, EmsiSeries]:
    if scheme not in SCHEMES:
        raise DataError(f"unknown subgroup scheme {scheme!r}; choose from {', '.join(SCHEMES)}")
    groups = SCHEMES[scheme]
    members: dict[str, list[ClassifiedItem]] = {g: [] for g in groups}
    weights: dict[str, list[float]] = {g: [] for g in groups}
    if scheme == "print_online":
        for it in items:
            members[it.channel].append(it)
            weights[it.channel].append(1.0)
    elif scheme == "nationwide_local":
        locality = {k: v.strip().lower() for k, v in (locality or {}).items()}
        missing = set()
        for it in items:
            g = locality.get(it.outlet)
            if g not in groups:
                if it.outlet not in missing:
                    log.warning("outlet %r missing from locality table; treated as nationwide", it.outlet)
                    missing.add(it.outlet)
                g = "nationwide"
            members[g].append(it)
            weights[g].append(1.0)
    else:
        feats = outlet_features(items)
        ex = dict(exemplars) if exemplars else default_exemplars(feats)
        if set(ex) != set(groups):
            raise DataError(f"exemplars must be given for {groups}")
        assigned = assign_exemplars(feats, ex)
        for it in items:
            g, w = assigned[it.outlet]
            members[g].append(it)
            weights[g].append(w)
    return {g: build_emsi(((it.date, it.label) for it in members[g]), first, last,
                          weights[g], name=g)
            for g in groups}
