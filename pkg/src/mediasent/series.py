"""Monthly series, survey balances, macro transforms, HP filter and ADF test."""

from __future__ import annotations

import calendar
import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg
from scipy.stats import norm

from .errors import DataError, NumericError

HP_LAMBDA_MONTHLY = 129600.0


@total_ordering
@dataclass(frozen=True)
class Month:
    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise DataError(f"invalid month {self.year}-{self.month}")

    @classmethod
    def parse(cls, text: str) -> "Month":
        try:
            y, m = text.strip().split("-")[:2]
            if len(y) != 4 or not 1 <= len(m) <= 2:
                raise ValueError
            return cls(int(y), int(m))
        except ValueError:
            raise DataError(f"invalid month {text!r}; expected YYYY-MM") from None

    @classmethod
    def of(cls, date: dt.date) -> "Month":
        return cls(date.year, date.month)

    @property
    def ordinal(self) -> int:
        return self.year * 12 + self.month - 1

    @classmethod
    def from_ordinal(cls, n: int) -> "Month":
        return cls(n // 12, n % 12 + 1)

    def __add__(self, k: int) -> "Month":
        return Month.from_ordinal(self.ordinal + k)

    def __sub__(self, other):
        if isinstance(other, Month):
            return self.ordinal - other.ordinal
        return Month.from_ordinal(self.ordinal - other)

    def __lt__(self, other: "Month") -> bool:
        return self.ordinal < other.ordinal

    @property
    def days(self) -> int:
        return calendar.monthrange(self.year, self.month)[1]

    def dates(self) -> list[dt.date]:
        return [dt.date(self.year, self.month, d) for d in range(1, self.days + 1)]

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


@dataclass(frozen=True)
class Quarter:
    year: int
    quarter: int

    @classmethod
    def parse(cls, text: str) -> "Quarter":
        t = text.strip().upper()
        try:
            y, q = t.split("-Q")
            out = cls(int(y), int(q))
        except ValueError:
            raise DataError(f"invalid quarter {text!r}; expected YYYY-Qn") from None
        if not 1 <= out.quarter <= 4:
            raise DataError(f"invalid quarter {text!r}")
        return out

    @property
    def ordinal(self) -> int:
        return self.year * 4 + self.quarter - 1

    def __add__(self, k: int) -> "Quarter":
        n = self.ordinal + k
        return Quarter(n // 4, n % 4 + 1)

    @property
    def middle_month(self) -> Month:
        return Month(self.year, 3 * (self.quarter - 1) + 2)

    def __str__(self) -> str:
        return f"{self.year:04d}-Q{self.quarter}"


@dataclass
class MonthlySeries:
    start: Month
    values: np.ndarray
    units: str = ""
    name: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise DataError("series values must be one-dimensional")
        if np.isnan(self.values).any():
            raise DataError(f"series {self.name or ''} contains NaN")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> Month:
        return self.start + (len(self.values) - 1)

    @property
    def months(self) -> list[Month]:
        return [self.start + i for i in range(len(self.values))]

    def slice(self, first: Month, last: Month) -> "MonthlySeries":
        if first < self.start or self.end < last:
            raise DataError(f"range {first}..{last} outside {self.start}..{self.end}")
        i, j = first - self.start, last - self.start + 1
        return MonthlySeries(first, self.values[i:j], self.units, self.name)

    def __getitem__(self, m: Month) -> float:
        return float(self.values[m - self.start])

    def replace(self, values, start: Month | None = None, units: str | None = None) -> "MonthlySeries":
        return MonthlySeries(start or self.start, values,
                             self.units if units is None else units, self.name)


@dataclass
class QuarterlySeries:
    start: Quarter
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)


def align(*series: MonthlySeries) -> list[MonthlySeries]:
    """Restrict all series to their common month range."""
    first = max(s.start for s in series)
    last = min(s.end for s in series)
    if last < first:
        raise DataError("series do not overlap")
    return [s.slice(first, last) for s in series]


# ----------------------------------------------------------------- survey

@dataclass(frozen=True)
class SurveyWave:
    month: Month
    counts: tuple[int, int, int, int, int, int]     # A1..A6
    total: int

    def __post_init__(self):
        if len(self.counts) != 6 or any(c < 0 for c in self.counts):
            raise DataError(f"{self.month}: need six non-negative answer counts")
        if sum(self.counts) != self.total:
            raise DataError(f"{self.month}: answer counts sum to {sum(self.counts)}, total is {self.total}")


def survey_balance(waves: Sequence[SurveyWave]) -> MonthlySeries:
    """Net balance in percentage points: 100 * (A4 + A5 - A1 - A2) / total."""
    if not waves:
        raise DataError("no survey waves")
    for prev, cur in zip(waves, waves[1:]):
        if cur.month - prev.month != 1:
            raise DataError(f"survey waves not contiguous at {cur.month}")
    vals = []
    for w in waves:
        if w.total == 0:
            raise DataError(f"{w.month}: zero respondents")
        a1, a2, _, a4, a5, _ = w.counts
        vals.append(100.0 * (a4 + a5 - a1 - a2) / w.total)
    return MonthlySeries(waves[0].month, vals, "percentage points")


# ------------------------------------------------------------- transforms

def interpolate_q_to_m(series: QuarterlySeries) -> MonthlySeries:
    """Linear interpolation between mid-quarter months, flat at both ends."""
    n = len(series.values)
    if n < 2:
        raise DataError("need at least two quarters to interpolate")
    first = Month(series.start.year, 3 * (series.start.quarter - 1) + 1)
    n_months = 3 * n
    anchors = np.arange(n) * 3 + 1
    values = np.interp(np.arange(n_months), anchors, series.values)
    return MonthlySeries(first, values, name=series.name)


def hp_filter(x, lam: float = HP_LAMBDA_MONTHLY) -> tuple[np.ndarray, np.ndarray]:
    """Hodrick-Prescott trend and cycle.

    The trend solves ``(I + lam * D'D) trend = x`` with D the second-difference
    operator. That matrix has condition number near ``16 * lam``, so the cycle
    is computed instead as ``D' z`` with ``(I / lam + DD') z = D x``, which is
    the same solution but stays well conditioned for very large ``lam``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if lam < 0:
        raise DataError("lambda must be non-negative")
    if n < 4:
        raise DataError("HP filter needs at least 4 observations")
    if lam == 0:
        return x.copy(), np.zeros(n)
    # DD' in upper banded storage: row 0 = 2nd superdiagonal, row 1 = 1st, row 2 = main
    ab = np.zeros((3, n - 2))
    ab[0, 2:] = 1.0
    ab[1, 1:] = -4.0
    ab[2] = 6.0 + 1.0 / lam
    try:
        z = linalg.solveh_banded(ab, np.diff(x, 2))
    except linalg.LinAlgError as exc:
        raise NumericError(f"HP system is singular: {exc}") from exc
    cycle = np.zeros(n)
    cycle[:-2] += z
    cycle[1:-1] -= 2 * z
    cycle[2:] += z
    return x - cycle, cycle


def hp_series(series: MonthlySeries, lam: float = HP_LAMBDA_MONTHLY):
    trend, cycle = hp_filter(series.values, lam)
    return series.replace(trend), series.replace(cycle)


def yoy_pct_change(series: MonthlySeries) -> MonthlySeries:
    x = series.values
    if len(x) < 13:
        raise DataError("year-on-year change needs at least 13 months")
    if np.any(x[:-12] <= 0):
        raise DataError("year-on-year change needs positive base values")
    return series.replace(100.0 * (x[12:] / x[:-12] - 1.0), series.start + 12, "percent")


def deflate(nominal: MonthlySeries, cpi: MonthlySeries) -> MonthlySeries:
    if nominal.start != cpi.start or len(nominal) != len(cpi):
        raise DataError(f"deflate: ranges differ ({nominal.start}..{nominal.end} vs {cpi.start}..{cpi.end})")
    if np.any(cpi.values <= 0):
        raise DataError("deflate: CPI must be positive")
    return nominal.replace(nominal.values / cpi.values * 100.0)


def regime_demean(series: MonthlySeries, break_month: Month) -> MonthlySeries:
    """Subtract the pre-break mean before ``break_month`` and the post-break mean from it on."""
    k = break_month - series.start
    if not 0 < k < len(series):
        raise DataError(f"break {break_month} not strictly inside {series.start}..{series.end}")
    x = series.values.copy()
    x[:k] -= x[:k].mean()
    x[k:] -= x[k:].mean()
    return series.replace(x)


# ------------------------------------------------------------------- ADF

# MacKinnon (1994) response-surface coefficients, constant-only case, N = 1
_TAU_MAX, _TAU_MIN, _TAU_STAR = 2.74, -18.83, -1.61
_TAU_SMALLP = (2.1659, 1.4412, 3.8269e-2)
_TAU_LARGEP = (1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2)
# MacKinnon (2010) finite-sample critical values, constant-only case, N = 1
_CRIT_2010 = {
    "1%": (-3.43035, -6.5393, -16.786, -79.433),
    "5%": (-2.86154, -2.8903, -4.234, -40.040),
    "10%": (-2.56677, -1.5384, -2.809, 0.0),
}


def adf_pvalue(stat: float) -> float:
    if stat > _TAU_MAX:
        return 1.0
    if stat < _TAU_MIN:
        return 0.0
    coef = _TAU_SMALLP if stat <= _TAU_STAR else _TAU_LARGEP
    return float(norm.cdf(sum(c * stat ** i for i, c in enumerate(coef))))


def adf_critical_values(nobs: int) -> dict[str, float]:
    return {k: b0 + b1 / nobs + b2 / nobs ** 2 + b3 / nobs ** 3
            for k, (b0, b1, b2, b3) in _CRIT_2010.items()}


@dataclass
class AdfResult:
    statistic: float
    p_value: float
    lag: int
    nobs: int
    critical_values: dict[str, float] = field(default_factory=dict)
    aic: dict[int, float] = field(default_factory=dict)


def _adf_design(x: np.ndarray, p: int, trim: int):
    dx = np.diff(x)
    # rows t = trim .. len(dx)-1 of the differenced series
    y = dx[trim:]
    cols = [np.ones(len(y)), x[trim:-1]]
    for j in range(1, p + 1):
        cols.append(dx[trim - j:len(dx) - j])
    return y, np.column_stack(cols)


def _ols_t(y, X):
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    n, k = X.shape
    ssr = float(resid @ resid)
    sigma2 = ssr / (n - k)
    xtx_inv = np.linalg.inv(X.T @ X)
    return beta, ssr, np.sqrt(sigma2 * np.diag(xtx_inv))


def adf_test(x, max_lag: int = 12) -> AdfResult:
    """ADF regression with a constant, lag order chosen by AIC.

    All candidate orders 0..max_lag are compared on the common sample that
    the largest order allows; the chosen order is then re-estimated on its
    full sample.
    """
    x = np.asarray(getattr(x, "values", x), dtype=float)
    if len(x) < 25:
        raise DataError("ADF test needs at least 25 observations")
    max_lag = min(max_lag, (len(x) - 1) // 2 - 3)
    if max_lag < 0:
        raise DataError("series too short for the requested lag order")
    if np.ptp(x) == 0:
        raise NumericError("ADF test undefined for a constant series")
    aic = {}
    for p in range(max_lag + 1):
        y, X = _adf_design(x, p, max_lag)
        n = len(y)
        _, ssr, _ = _ols_t(y, X)
        aic[p] = n * math.log(ssr / n) + 2 * X.shape[1]
    best = min(aic, key=lambda p: (aic[p], p))
    y, X = _adf_design(x, best, best)
    beta, _, se = _ols_t(y, X)
    stat = float(beta[1] / se[1])
    return AdfResult(stat, adf_pvalue(stat), best, len(y), adf_critical_values(len(y)), aic)


# -------------------------------------------------------------------- I/O

def _parse_period(text: str):
    return Quarter.parse(text) if "Q" in text.upper() else Month.parse(text)


def read_table(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#")) if r]
    if not rows:
        raise DataError(f"{path}: empty table")
    return rows[0], rows[1:]


def read_series_csv(path, column: str | None = None) -> dict[str, MonthlySeries | QuarterlySeries]:
    """Read ``period,<col>...`` files; periods are YYYY-MM or YYYY-Qn and must be contiguous."""
    header, rows = read_table(path)
    if not rows:
        raise DataError(f"{path}: no data rows")
    names = header[1:] if column is None else [column]
    for name in names:
        if name not in header[1:]:
            raise DataError(f"{path}: no column {name!r} (have {', '.join(header[1:])})")
    periods = [_parse_period(r[0]) for r in rows]
    for a, b in zip(periods, periods[1:]):
        if type(a) is not type(b) or b.ordinal - a.ordinal != 1:
            raise DataError(f"{path}: periods not contiguous at {b}")
    out = {}
    for name in names:
        j = header.index(name)
        try:
            vals = [float(r[j]) for r in rows]
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: bad value in column {name!r}: {exc}") from exc
        if isinstance(periods[0], Quarter):
            out[name] = QuarterlySeries(periods[0], vals, name)
        else:
            out[name] = MonthlySeries(periods[0], vals, name=name)
    return out


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def write_series_csv(fh, columns: dict[str, MonthlySeries], header_lines: Iterable[str] = ()) -> None:
    """Write several monthly series over the union of their ranges; gaps are blank."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    first = min(s.start for s in columns.values())
    last = max(s.end for s in columns.values())
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["period", *columns])
    for k in range(last - first + 1):
        m = first + k
        row = [str(m)]
        for s in columns.values():
            row.append(fmt(s[m]) if s.start <= m <= s.end else "")
        writer.writerow(row)
