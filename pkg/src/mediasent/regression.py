"""OLS with Newey-West inference and the single-equation test battery.

Lagged regressors are named ``<series>_l<k>``; contemporaneous ones keep
the series name. All p-values are asymptotic (normal for t-ratios,
chi-square for Wald and LM statistics), except the variance-ratio F test.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import linalg, stats

from .errors import DataError, NumericError, RankDeficiencyError
from .series import Month, MonthlySeries, align

ALPHA = 0.05
BG_LAGS = 12

# Andrews (1993) asymptotic critical values for sup-F, one restriction, 15% trimming
QLR_CRITICAL = {"10%": 7.12, "5%": 8.68, "1%": 12.16}


def nw_bandwidth(nobs: int) -> int:
    return int(math.floor(4.0 * (nobs / 100.0) ** (2.0 / 9.0)))


def stars(p: float) -> str:
    return "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.10 else ""


def format_estimate(value: float, p: float, paren: float, digits: int = 2) -> str:
    """``0.06*** (3.62)`` style cell."""
    return f"{value:.{digits}f}{stars(p)} ({paren:.{digits}f})"


# -------------------------------------------------------------------- OLS

@dataclass
class OlsFit:
    names: list[str]
    params: np.ndarray
    resid: np.ndarray
    X: np.ndarray
    y: np.ndarray
    xtx_inv: np.ndarray
    cov_plain: np.ndarray
    cov_hac: np.ndarray
    bandwidth: int
    r2: float
    adj_r2: float
    first: Month | None = None
    meta: dict = field(default_factory=dict)

    @property
    def nobs(self) -> int:
        return len(self.y)

    @property
    def df_resid(self) -> int:
        return self.nobs - len(self.params)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"no regressor {name!r} in fit ({', '.join(self.names)})") from None

    def coef(self, name: str) -> float:
        return float(self.params[self.index(name)])

    def cov(self, kind: str = "hac") -> np.ndarray:
        return self.cov_hac if kind == "hac" else self.cov_plain

    def se(self, kind: str = "hac") -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov(kind)), 0.0, None))

    def tvalues(self, kind: str = "hac") -> np.ndarray:
        se = self.se(kind)
        t = np.zeros_like(self.params)
        ok = se > 0
        t[ok] = self.params[ok] / se[ok]
        # zero SE: infinite t for a nonzero estimate, 0 otherwise
        t[~ok] = np.sign(self.params[~ok]) * np.inf
        t[~ok & (self.params == 0)] = 0.0
        return t

    def pvalues(self, kind: str = "hac") -> np.ndarray:
        return 2.0 * stats.norm.sf(np.abs(self.tvalues(kind)))

    def lag_block(self, series: str) -> list[str]:
        prefix = f"{series}_l"
        return [n for n in self.names if n.startswith(prefix) and n[len(prefix):].isdigit()]

    def table(self, kind: str = "hac") -> list[tuple[str, float, float, float, float]]:
        return list(zip(self.names, self.params, self.se(kind), self.tvalues(kind), self.pvalues(kind)))


def ols(y, X, names: Sequence[str] | None = None, bandwidth: int | None = None,
        first: Month | None = None) -> OlsFit:
    """Least squares through a column-pivoted QR decomposition."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    names = list(names) if names is not None else [f"x{i}" for i in range(k)]
    if n <= k:
        raise DataError(f"need more observations ({n}) than regressors ({k})")
    Q, R, piv = linalg.qr(X, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    tol = max(n, k) * np.finfo(float).eps * (d[0] if d.size else 0.0)
    rank = int(np.sum(d > tol))
    if rank < k:
        raise RankDeficiencyError([names[i] for i in sorted(piv[rank:])])
    beta_p = linalg.solve_triangular(R, Q.T @ y)
    beta = np.empty(k)
    beta[piv] = beta_p
    Rinv = linalg.solve_triangular(R, np.eye(k))
    xtx_inv_p = Rinv @ Rinv.T
    xtx_inv = np.empty((k, k))
    xtx_inv[np.ix_(piv, piv)] = xtx_inv_p
    resid = y - X @ beta
    ssr = float(resid @ resid)
    has_const = bool(np.any(np.all(X == 1.0, axis=0)))
    tss = float(((y - y.mean()) ** 2).sum()) if has_const else float(y @ y)
    r2 = 1.0 - ssr / tss if tss > 0 else 1.0
    df_model_adj = (n - 1) if has_const else n
    adj = 1.0 - (1.0 - r2) * df_model_adj / (n - k)
    sigma2 = ssr / (n - k)
    bw = nw_bandwidth(n) if bandwidth is None else int(bandwidth)
    fit = OlsFit(names, beta, resid, X, y, xtx_inv, sigma2 * xtx_inv, None, bw, r2, adj, first)
    fit.cov_hac = hac_cov(fit, bw)
    return fit


def hac_cov(fit: OlsFit, bandwidth: int | None = None) -> np.ndarray:
    """Newey-West sandwich with Bartlett weights; bandwidth 0 gives White's HC0."""
    L = nw_bandwidth(fit.nobs) if bandwidth is None else int(bandwidth)
    if L < 0:
        raise DataError("bandwidth must be non-negative")
    g = fit.X * fit.resid[:, None]
    S = g.T @ g
    for j in range(1, min(L, fit.nobs - 1) + 1):
        w = 1.0 - j / (L + 1.0)
        G = g[j:].T @ g[:-j]
        S += w * (G + G.T)
    V = fit.xtx_inv @ S @ fit.xtx_inv
    return (V + V.T) / 2.0


@dataclass
class WaldResult:
    statistic: float
    df: int
    p_value: float
    columns: list[str]


def wald_test(fit: OlsFit, columns: Sequence[str], kind: str = "hac") -> WaldResult:
    """Joint test that the named coefficients are all zero."""
    if not columns:
        raise DataError("Wald test needs at least one coefficient")
    idx = [fit.index(c) for c in columns]
    b = fit.params[idx]
    V = fit.cov(kind)[np.ix_(idx, idx)]
    try:
        stat = float(b @ np.linalg.solve(V, b))
    except np.linalg.LinAlgError:
        stat = math.inf if np.any(b != 0) else 0.0
    if not np.isfinite(stat) or stat < 0:
        stat = math.inf if np.any(b != 0) else 0.0
    return WaldResult(stat, len(idx), float(stats.chi2.sf(stat, len(idx))), list(columns))


# ------------------------------------------------------- model templates

@dataclass(frozen=True)
class ModelSpec:
    dependent: str
    regressors: tuple[tuple[str, int], ...]
    constant: bool = True

    @property
    def max_lag(self) -> int:
        return max((lag for _, lag in self.regressors), default=0)

    @property
    def column_names(self) -> list[str]:
        cols = ["const"] if self.constant else []
        return cols + [name if lag == 0 else f"{name}_l{lag}" for name, lag in self.regressors]


@dataclass(frozen=True)
class ModelTemplate:
    """Regressors entering with lags 1..K plus contemporaneous ones; K is chosen later."""

    dependent: str
    lagged: tuple[str, ...]
    contemporaneous: tuple[str, ...] = ()

    def spec(self, K: int) -> ModelSpec:
        regs = [(name, 0) for name in self.contemporaneous]
        for name in self.lagged:
            regs.extend((name, k) for k in range(1, K + 1))
        return ModelSpec(self.dependent, tuple(regs))


def build_design(spec: ModelSpec, data: Mapping[str, MonthlySeries]):
    """Return (y, X, names, first month) over the common range minus the lag burn-in."""
    used = [spec.dependent] + [n for n, _ in spec.regressors]
    try:
        series = {n: data[n] for n in dict.fromkeys(used)}
    except KeyError as exc:
        raise DataError(f"series {exc.args[0]!r} not provided") from None
    common = dict(zip(series, align(*series.values())))
    first_avail = next(iter(common.values())).start
    n_total = len(next(iter(common.values())))
    L = spec.max_lag
    n = n_total - L
    if n <= 0:
        raise DataError("sample too short for the lag depth")
    cols = [np.ones(n)] if spec.constant else []
    for name, lag in spec.regressors:
        v = common[name].values
        cols.append(v[L - lag:n_total - lag])
    y = common[spec.dependent].values[L:]
    return y, np.column_stack(cols), spec.column_names, first_avail + L


def fit_spec(spec: ModelSpec, data: Mapping[str, MonthlySeries], bandwidth: int | None = None) -> OlsFit:
    y, X, names, first = build_design(spec, data)
    return ols(y, X, names, bandwidth, first)


# ---------------------------------------------------------- mean/variance

@dataclass
class MeanTest:
    mean: float
    se: float
    t: float
    p_value: float
    nobs: int

    def cell(self) -> str:
        return format_estimate(self.mean, self.p_value, self.t)


def mean_test(x, bandwidth: int | None = None) -> MeanTest:
    """Regress the series on a constant with HAC standard errors."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    if len(x) < 30:
        raise DataError("mean test needs at least 30 observations")
    if np.ptp(x) == 0:
        raise NumericError("mean test undefined for a zero-variance series")
    fit = ols(x, np.ones((len(x), 1)), ["const"], bandwidth)
    se = float(fit.se()[0])
    t = float(fit.params[0] / se)
    return MeanTest(float(fit.params[0]), se, t, float(2 * stats.norm.sf(abs(t))), len(x))


def _overlap(a, b):
    if isinstance(a, MonthlySeries) and isinstance(b, MonthlySeries):
        try:
            a, b = align(a, b)
        except DataError:
            raise DataError("series do not overlap") from None
        return a.values, b.values
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) != len(b):
        raise DataError("unaligned arrays")
    return a, b


def diff_mean_test(a, b, bandwidth: int | None = None) -> MeanTest:
    av, bv = _overlap(a, b)
    d = av - bv
    if np.ptp(d) == 0:
        warnings.warn("difference series has zero variance; t-ratio set by convention", stacklevel=2)
        m = float(d.mean())
        t = 0.0 if m == 0 else math.copysign(math.inf, m)
        return MeanTest(m, 0.0, t, 1.0 if m == 0 else 0.0, len(d))
    return mean_test(d, bandwidth)


@dataclass
class VarianceTest:
    difference: float
    f: float
    df: tuple[int, int]
    p_value: float

    def cell(self) -> str:
        return format_estimate(self.difference, self.p_value, self.f)


def diff_var_test(a, b) -> VarianceTest:
    """Two-sided variance-ratio F test on the overlapping sample."""
    av, bv = _overlap(a, b)
    va, vb = float(np.var(av, ddof=1)), float(np.var(bv, ddof=1))
    if vb == 0:
        raise NumericError("variance ratio undefined: second series has zero variance")
    f = va / vb
    df = (len(av) - 1, len(bv) - 1)
    p = 2.0 * min(stats.f.cdf(f, *df), stats.f.sf(f, *df))
    return VarianceTest(va - vb, f, df, float(min(p, 1.0)))


# ---------------------------------------------------- serial correlation

@dataclass
class BgResult:
    lm: float
    df: int
    p_value: float


def breusch_godfrey(fit: OlsFit, lags: int = BG_LAGS) -> BgResult:
    """LM test: residuals on the original regressors and ``lags`` own lags (zero-filled)."""
    n = fit.nobs
    if lags < 1:
        raise DataError("Breusch-Godfrey needs at least one lag")
    if lags >= n:
        raise DataError(f"Breusch-Godfrey lags ({lags}) must be below nobs ({n})")
    e = fit.resid
    ee = float(e @ e)
    if ee <= 1e-24 * max(1.0, float(fit.y @ fit.y)):
        # exact fit: nothing left to be autocorrelated
        return BgResult(0.0, lags, 1.0)
    E = np.zeros((n, lags))
    for j in range(1, lags + 1):
        E[j:, j - 1] = e[:-j]
    Z = np.column_stack([fit.X, E])
    coef, *_ = np.linalg.lstsq(Z, e, rcond=None)
    u = e - Z @ coef
    lm = float(n * (1.0 - (u @ u) / ee))
    lm = max(lm, 0.0)
    return BgResult(lm, lags, float(stats.chi2.sf(lm, lags)))


@dataclass
class LagSelection:
    K: int
    fit: OlsFit
    flagged: bool
    bg_pvalues: dict[int, float]


def select_lags(template: ModelTemplate, data: Mapping[str, MonthlySeries], k_max: int,
                bg_lags: int = BG_LAGS, alpha: float = ALPHA,
                bandwidth: int | None = None) -> LagSelection:
    """Smallest K whose residuals pass the Breusch-Godfrey test; k_max with a flag otherwise."""
    if k_max < 1:
        raise DataError("k_max must be at least 1")
    spec_max = template.spec(k_max)
    y, X, _, _ = build_design(spec_max, data)
    if len(y) <= X.shape[1] + bg_lags:
        raise DataError(f"sample of {len(y)} too short for k_max={k_max} "
                        f"({X.shape[1]} regressors + {bg_lags} test lags)")
    pvals = {}
    fit = None
    for K in range(1, k_max + 1):
        fit = fit_spec(template.spec(K), data, bandwidth)
        pvals[K] = breusch_godfrey(fit, bg_lags).p_value
        if pvals[K] >= alpha:
            fit.meta.update(K=K, flagged=False)
            return LagSelection(K, fit, False, pvals)
    fit.meta.update(K=k_max, flagged=True)
    return LagSelection(k_max, fit, True, pvals)


# ----------------------------------------------------------------- Granger

@dataclass
class GrangerResult:
    direction: str                 # x_to_y | y_to_x | bidirectional | none
    k_xy: int
    k_yx: int
    wald_xy: float
    p_xy: float
    wald_yx: float
    p_yx: float
    flagged_xy: bool = False
    flagged_yx: bool = False
    fit_xy: OlsFit | None = field(default=None, repr=False)
    fit_yx: OlsFit | None = field(default=None, repr=False)

    @property
    def arrow(self) -> str:
        return {"x_to_y": "→", "y_to_x": "←", "bidirectional": "↔", "none": ""}[self.direction]


def granger_direction(p_xy: float, p_yx: float, alpha: float = ALPHA) -> str:
    fwd, rev = p_xy < alpha, p_yx < alpha
    if fwd and rev:
        return "bidirectional"
    if fwd:
        return "x_to_y"
    if rev:
        return "y_to_x"
    return "none"


def granger_test(x: MonthlySeries, y: MonthlySeries,
                 controls: Mapping[str, MonthlySeries] | None = None,
                 k_max: int = 12, alpha: float = ALPHA, bg_lags: int = BG_LAGS,
                 bandwidth: int | None = None) -> GrangerResult:
    """Two single-equation tests: lags of x in the y equation and lags of y in the x equation.

    Each equation has its own lag depth (see :func:`select_lags`) and the
    cause block is tested with a joint HAC Wald test.
    """
    controls = dict(controls or {})
    xname, yname = "__x", "__y"
    data = {xname: x, yname: y, **controls}
    common = align(*data.values())
    if len(common[0]) < 60:
        raise DataError(f"Granger test needs at least 60 aligned observations, have {len(common[0])}")
    ctrl = tuple(controls)
    eq_y = ModelTemplate(yname, (xname, *ctrl, yname))
    eq_x = ModelTemplate(xname, (yname, *ctrl, xname))
    sel_y = select_lags(eq_y, data, k_max, bg_lags, alpha, bandwidth)
    sel_x = select_lags(eq_x, data, k_max, bg_lags, alpha, bandwidth)
    w_xy = wald_test(sel_y.fit, sel_y.fit.lag_block(xname))
    w_yx = wald_test(sel_x.fit, sel_x.fit.lag_block(yname))
    for f in (sel_y.fit, sel_x.fit):
        f.names = [n.replace(xname, x.name or "x").replace(yname, y.name or "y") for n in f.names]
    return GrangerResult(granger_direction(w_xy.p_value, w_yx.p_value, alpha),
                         sel_y.K, sel_x.K, w_xy.statistic, w_xy.p_value,
                         w_yx.statistic, w_yx.p_value, sel_y.flagged, sel_x.flagged,
                         sel_y.fit, sel_x.fit)


def contemporaneous_model(survey: MonthlySeries, emsi: MonthlySeries,
                          macros: Mapping[str, MonthlySeries] | None = None,
                          k_max: int = 12, alpha: float = ALPHA, bg_lags: int = BG_LAGS,
                          bandwidth: int | None = None) -> OlsFit:
    """Survey on same-month EMSI and macros plus K own lags (K by :func:`select_lags`)."""
    macros = dict(macros or {})
    data = {"survey": survey, "emsi": emsi, **macros}
    tmpl = ModelTemplate("survey", ("survey",), ("emsi", *macros))
    return select_lags(tmpl, data, k_max, bg_lags, alpha, bandwidth).fit


# ---------------------------------------------------------------- long run

def long_run(beta: float, ar: Sequence[float] | float) -> float:
    rho = float(np.sum(ar))
    if rho >= 1.0:
        raise NumericError(f"sum of autoregressive coefficients {rho:.4f} >= 1; long-run effect undefined")
    return beta / (1.0 - rho)


def _names(target: str | Sequence[str]) -> list[str]:
    return [target] if isinstance(target, str) else list(target)


def long_run_effect(fit: OlsFit, target: str | Sequence[str], ar_names: Sequence[str]) -> float:
    """sum(beta) / (1 - sum(ar)); ``target`` may name one coefficient or a lag block."""
    return long_run(sum(fit.coef(n) for n in _names(target)), [fit.coef(n) for n in ar_names])


def long_run_se(fit: OlsFit, target: str | Sequence[str], ar_names: Sequence[str],
                kind: str = "hac") -> float:
    """Delta-method standard error of sum(beta) / (1 - sum(ar))."""
    targets = _names(target)
    beta = sum(fit.coef(n) for n in targets)
    rho = sum(fit.coef(n) for n in ar_names)
    if rho >= 1.0:
        raise NumericError("long-run effect undefined")
    idx = [fit.index(n) for n in targets] + [fit.index(n) for n in ar_names]
    grad = np.array([1.0 / (1.0 - rho)] * len(targets) + [beta / (1.0 - rho) ** 2] * len(ar_names))
    V = fit.cov(kind)[np.ix_(idx, idx)]
    return float(np.sqrt(grad @ V @ grad))


# ------------------------------------------------------------ breaks (QLR)

@dataclass
class BreakResult:
    index: int                      # first observation of the post-break regime
    sup_f: float
    profile: dict[int, float]
    month: Month | None = None

    @property
    def significant(self) -> bool:
        return self.sup_f > QLR_CRITICAL["5%"]


def qlr_break(x, trim: float = 0.15) -> BreakResult:
    """Sup-F over intercept-shift Chow tests at every candidate inside the trimmed sample."""
    start = getattr(x, "start", None)
    v = np.asarray(getattr(x, "values", x), dtype=float)
    n = len(v)
    if n < 40:
        raise DataError("QLR test needs at least 40 observations")
    lo = int(math.ceil(trim * n))
    hi = int(math.floor((1.0 - trim) * n))
    ssr_r = float(((v - v.mean()) ** 2).sum())
    csum = np.cumsum(v)
    csq = np.cumsum(v * v)
    profile = {}
    for tau in range(lo, hi + 1):
        s1, q1 = csum[tau - 1], csq[tau - 1]
        s2, q2 = csum[-1] - s1, csq[-1] - q1
        ssr_u = (q1 - s1 * s1 / tau) + (q2 - s2 * s2 / (n - tau))
        ssr_u = max(ssr_u, 0.0)
        if ssr_r <= 1e-12 * max(1.0, float(csq[-1])):
            f = 0.0
        elif ssr_u <= 0.0:
            f = math.inf
        else:
            f = max(ssr_r - ssr_u, 0.0) / (ssr_u / (n - 2))
        profile[tau] = float(f)
    best = max(profile, key=lambda t: (profile[t], -t))
    return BreakResult(best, profile[best], profile, None if start is None else start + best)


def level_correct(x, break_index: int):
    """Shift the pre-break segment so its mean equals the post-break mean."""
    v = np.asarray(getattr(x, "values", x), dtype=float).copy()
    if not 0 < break_index < len(v):
        raise DataError("break index outside the series")
    v[:break_index] -= v[:break_index].mean() - v[break_index:].mean()
    return x.replace(v) if isinstance(x, MonthlySeries) else v


# ---------------------------------------------------------------- summary

def significance_summary(fits: Sequence[OlsFit], variables: Sequence[str],
                         alpha: float = ALPHA) -> dict[str, tuple[int, int]]:
    """Per variable: (fits where its lag block is jointly significant, fits containing it)."""
    out = {}
    for var in variables:
        sig = total = 0
        for fit in fits:
            block = fit.lag_block(var)
            if not block:
                continue
            total += 1
            sig += wald_test(fit, block).p_value < alpha
        out[var] = (sig, total)
    return out
