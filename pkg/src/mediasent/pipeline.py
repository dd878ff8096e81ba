"""Six-stage workflow: ingest, train, classify, index, prep, tests.

Every stage reads its inputs from disk and writes its outputs to disk, so a
single stage can be rerun on the previous stage's artifacts. All outputs
carry a ``# mediasent <version> seed=<seed> config=<hash>`` header.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import io
import json
import logging
import os
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import __version__
from .corpus import filter_corpus, ingest_directory, parse_query, read_corpus_csv, write_corpus_csv
from .errors import DataError, MediasentError, StageError
from .index import SCHEMES, ClassifiedItem, build_emsi, centered_ma, split_subgroups
from .naive_bayes import (CLASS_ORDER, LabeledDoc, SentimentClass, classify_many, cross_validate,
                          discriminative_words, load_model, save_model, train)
from .regression import (QLR_CRITICAL, OlsFit, contemporaneous_model, diff_mean_test, diff_var_test,
                         format_estimate, granger_test, long_run_effect, long_run_se, mean_test,
                         qlr_break, significance_summary)
from .series import (HP_LAMBDA_MONTHLY, Month, MonthlySeries, QuarterlySeries, adf_test, align, deflate,
                     fmt, hp_series, interpolate_q_to_m, read_series_csv, read_table, regime_demean,
                     write_series_csv, yoy_pct_change)
from .text import build_vocabulary, tokenize, vectorize

log = logging.getLogger(__name__)

CONFIG_ENV = "MEDIASENT_CONFIG"
STAGES = ("ingest", "train", "classify", "index", "prep", "tests")
MACRO_COLUMNS = ("cpi", "stock", "oil", "unemployment", "sek_eur")
CONTROL_COLUMNS = ("output_gap", "unemployment", "inflation", "sek_eur", "oil_yoy", "stock_yoy")


@dataclass
class PipelineConfig:
    input_dir: Path
    query: Path
    labels: Path
    survey: Path
    macro: Path
    gdp: Path
    out_dir: Path
    locality: Path | None = None
    seed: int = 0
    hp_lambda: float = HP_LAMBDA_MONTHLY
    bandwidth: int | None = None          # None: floor(4 (T/100)^(2/9))
    k_max: int = 12
    bg_lags: int = 12
    cv_k: int = 50
    subgroups: str = ",".join(SCHEMES)
    ma_window: int = 12
    inflation_break: str | None = None
    qlr_trim: float = 0.15
    top_words: int = 20

    PATH_KEYS = ("input_dir", "query", "labels", "survey", "macro", "gdp", "out_dir", "locality")

    @property
    def schemes(self) -> list[str]:
        return [s.strip() for s in self.subgroups.split(",") if s.strip()]

    def check(self) -> None:
        missing = [f"{k}={getattr(self, k)}" for k in self.PATH_KEYS
                   if k != "out_dir" and getattr(self, k) is not None and not Path(getattr(self, k)).exists()]
        if missing:
            raise DataError(f"unresolvable input paths: {', '.join(missing)}")
        for s in self.schemes:
            if s not in SCHEMES:
                raise DataError(f"unknown subgroup scheme {s!r}")

    def hash(self) -> str:
        """Short digest of every setting except the output directory."""
        d = {}
        for f in dataclasses.fields(self):
            if f.name == "out_dir":
                continue
            v = getattr(self, f.name)
            d[f.name] = None if v is None else (Path(v).name if f.name in self.PATH_KEYS else v)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:12]

    def header(self) -> list[str]:
        return [f"mediasent {__version__} seed={self.seed} config={self.hash()}"]

    def stage_seed(self, stage: str) -> int:
        """Per-stage seed derived from the run seed and the stage name."""
        ss = np.random.default_rng([self.seed, zlib.crc32(stage.encode())])
        return int(ss.integers(0, 2**31 - 1))


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _convert(key: str, value: str):
    if key not in _FIELDS:
        raise DataError(f"unknown config key {key!r}")
    value = value.strip()
    if value in ("", "none", "auto") and key in ("bandwidth", "locality", "inflation_break"):
        return None
    kind = _FIELDS[key].type
    try:
        if key in ("seed", "bandwidth", "k_max", "bg_lags", "cv_k", "ma_window", "top_words"):
            return int(value)
        if key in ("hp_lambda", "qlr_trim"):
            return float(value)
    except ValueError:
        raise DataError(f"config key {key!r}: cannot parse {value!r} ({kind})") from None
    return value


def load_config(path: str | os.PathLike | None = None,
                overrides: Mapping[str, str] | None = None) -> PipelineConfig:
    """Read a ``key = value`` file; overrides win. File paths resolve against the file's folder."""
    path = path or os.environ.get(CONFIG_ENV)
    values: dict[str, object] = {}
    base = Path.cwd()
    if path:
        p = Path(path)
        if not p.is_file():
            raise DataError(f"config file {p} not found")
        base = p.resolve().parent
        parser = configparser.ConfigParser(comment_prefixes=("#", ";"), interpolation=None)
        parser.read_string("[pipeline]\n" + p.read_text(encoding="utf-8"))
        for k, v in parser["pipeline"].items():
            values[k] = _convert(k, v)
            if k in PipelineConfig.PATH_KEYS and values[k] is not None:
                values[k] = (base / str(values[k])).resolve()
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        values[k] = _convert(k, str(v))
        if k in PipelineConfig.PATH_KEYS and values[k] is not None:
            values[k] = Path(str(values[k])).resolve()
    required = [f.name for f in dataclasses.fields(PipelineConfig)
                if f.default is dataclasses.MISSING and f.name not in values]
    if required:
        raise DataError(f"missing config keys: {', '.join(required)}")
    return PipelineConfig(**values)


# ------------------------------------------------------------ file helpers

def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _csv_text(header: Sequence[str], rows: Sequence[Sequence], header_lines: Sequence[str]) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def text_table(header: Sequence[str], rows: Sequence[Sequence[str]], title: str = "") -> str:
    cols = [list(map(str, c)) for c in zip(header, *rows)] if rows else [[h] for h in header]
    widths = [max(len(x) for x in c) for c in cols]
    lines = [title] if title else []
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(str(x).ljust(w) for x, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def read_labels(path, corpus: Mapping[str, str] | None = None) -> list[tuple[str, SentimentClass, str]]:
    """Labelled rows (id, label, text); an empty text is looked up in ``corpus``."""
    header, rows = read_table(path)
    need = ["id", "label", "text"]
    if header[:3] != need:
        raise DataError(f"{path}: expected columns {need}, got {header}")
    out = []
    for i, r in enumerate(rows, 2):
        if len(r) < 3:
            raise DataError(f"{path}: row {i} has {len(r)} fields")
        text = r[2]
        if not text.strip():
            if corpus is None or r[0] not in corpus:
                raise DataError(f"{path}: row {i} has no text and id {r[0]!r} is not in the corpus")
            text = corpus[r[0]]
        out.append((r[0], SentimentClass.parse(r[1]), text))
    if not out:
        raise DataError(f"{path}: no labelled rows")
    return out


def labeled_docs(rows, vocab=None):
    toks = [tokenize(t) for _, _, t in rows]
    vocab = vocab or build_vocabulary(toks)
    return [LabeledDoc(i, vectorize(t, vocab), lab) for (i, lab, _), t in zip(rows, toks)], vocab


def read_classified(path) -> list[ClassifiedItem]:
    import datetime as dt

    header, rows = read_table(path)
    col = {h: j for j, h in enumerate(header)}
    for need in ("id", "date", "outlet", "channel", "word_count", "predicted"):
        if need not in col:
            raise DataError(f"{path}: missing column {need!r}")
    out = []
    for r in rows:
        try:
            out.append(ClassifiedItem(r[col["id"]], dt.date.fromisoformat(r[col["date"]]), r[col["outlet"]],
                                      r[col["channel"]], int(r[col["word_count"]]),
                                      SentimentClass.parse(r[col["predicted"]])))
        except ValueError as exc:
            raise DataError(f"{path}: bad row {r[:2]}: {exc}") from exc
    return out


def read_locality(path) -> dict[str, str]:
    header, rows = read_table(path)
    if header[:2] != ["outlet", "locality"]:
        raise DataError(f"{path}: expected columns outlet,locality")
    return {r[0]: r[1] for r in rows if len(r) >= 2}


# ------------------------------------------------------------------ stages

def ingest_stage(cfg: PipelineConfig) -> dict[str, Path]:
    items, problems = ingest_directory(cfg.input_dir)
    query = parse_query(Path(cfg.query).read_text(encoding="utf-8"))
    kept = filter_corpus(items, query)
    buf = io.StringIO()
    write_corpus_csv(kept, buf, cfg.header() + [f"parsed={len(items)} kept={len(kept)} skipped={len(problems)}"])
    return {"corpus": _write(cfg.out_dir / "corpus.csv", buf.getvalue())}


def _corpus_texts(cfg: PipelineConfig) -> dict[str, str]:
    with open(cfg.out_dir / "corpus.csv", newline="", encoding="utf-8") as fh:
        return {it.id: it.text for it in read_corpus_csv(fh)}


def train_stage(cfg: PipelineConfig) -> dict[str, Path]:
    rows = read_labels(cfg.labels, _corpus_texts(cfg))
    docs, vocab = labeled_docs(rows)
    model = train(docs, vocab)
    buf = io.BytesIO()
    save_model(model, buf, {"tool": f"mediasent {__version__}", "seed": cfg.seed, "config": cfg.hash()})
    model_path = cfg.out_dir / "model.bin"
    model_path.parent.mkdir(parents=True, exist_ok=True)
    model_path.write_bytes(buf.getvalue())

    k = min(cfg.cv_k, len(docs))
    rep = cross_validate(docs, k, cfg.stage_seed("cv"))
    names = [c.value for c in CLASS_ORDER]
    rows_cv = [[names[i], *map(int, rep.confusion[i])] for i in range(3)]
    cv_text = _csv_text(["true", *names], rows_cv,
                        cfg.header() + [f"k={rep.k} cv_seed={rep.seed} n={rep.n} accuracy={fmt(rep.accuracy)}"])
    out = {"model": model_path, "cv": _write(cfg.out_dir / "reports" / "cv.csv", cv_text)}
    if SentimentClass.positive in model.classes and SentimentClass.negative in model.classes:
        rows_w = []
        for a, b in ((SentimentClass.positive, SentimentClass.negative),
                     (SentimentClass.negative, SentimentClass.positive)):
            for rank, (w, d) in enumerate(discriminative_words(model, a, b, cfg.top_words), 1):
                rows_w.append([a.value, rank, w, d])
        out["top_words"] = _write(cfg.out_dir / "reports" / "top_words.csv",
                                  _csv_text(["class", "rank", "word", "diff"], rows_w, cfg.header()))
    return out


CLASSIFIED_COLUMNS = ["id", "date", "outlet", "channel", "word_count", "predicted",
                      *(f"score_{c.value}" for c in CLASS_ORDER)]


def classified_rows(model, items) -> list[list]:
    res = classify_many(model, [vectorize(it.tokens(), model.vocab) for it in items], [it.id for it in items])
    return [[it.id, it.date.isoformat(), it.outlet, it.channel, it.word_count, r.predicted.value,
             *(fmt(r.scores[c]) if c in r.scores else "" for c in CLASS_ORDER)]
            for it, r in zip(items, res)]


def classify_stage(cfg: PipelineConfig) -> dict[str, Path]:
    with open(cfg.out_dir / "model.bin", "rb") as fh:
        model = load_model(fh)
    with open(cfg.out_dir / "corpus.csv", newline="", encoding="utf-8") as fh:
        items = read_corpus_csv(fh)
    return {"classified": _write(cfg.out_dir / "classified.csv",
                                 _csv_text(CLASSIFIED_COLUMNS, classified_rows(model, items), cfg.header()))}


def emsi_table(items: Sequence[ClassifiedItem], schemes: Sequence[str], locality=None,
               ma_window: int | None = 12, first: Month | None = None, last: Month | None = None):
    """Header and rows for emsi.csv."""
    if not items:
        raise DataError("no classified items")
    first = first or min(Month.of(it.date) for it in items)
    last = last or max(Month.of(it.date) for it in items)
    main = build_emsi(((it.date, it.label) for it in items), first, last)
    cols: dict[str, np.ndarray] = {}
    for scheme in schemes:
        for name, s in split_subgroups(items, scheme, first, last, locality).items():
            cols[f"emsi_{name}"] = s.values
    header = ["month", "emsi", "n_positive", "n_negative", "n_irrelevant", *cols]
    ma = None
    if ma_window:
        ma = centered_ma(main.as_series(), ma_window)
        header.append(f"emsi_ma{ma_window}")
    rows = []
    for i, m in enumerate(main.months):
        r = [str(m), fmt(main.values[i]), int(main.n_positive[i]), int(main.n_negative[i]),
             int(main.n_irrelevant[i]), *(fmt(v[i]) for v in cols.values())]
        if ma is not None:
            r.append(fmt(ma[m]) if ma.start <= m <= ma.end else "")
        rows.append(r)
    return header, rows


def index_stage(cfg: PipelineConfig) -> dict[str, Path]:
    items = read_classified(cfg.out_dir / "classified.csv")
    locality = read_locality(cfg.locality) if cfg.locality else None
    header, rows = emsi_table(items, cfg.schemes, locality, cfg.ma_window)
    return {"emsi": _write(cfg.out_dir / "emsi.csv", _csv_text(header, rows, cfg.header()))}


def output_gap(gdp: QuarterlySeries, lam: float = HP_LAMBDA_MONTHLY) -> MonthlySeries:
    """HP cycle of log monthly-interpolated GDP, in percent of trend."""
    m = interpolate_q_to_m(gdp)
    if np.any(m.values <= 0):
        raise DataError("GDP must be positive to take logs")
    _, cycle = hp_series(m.replace(np.log(m.values)), lam)
    return MonthlySeries(m.start, 100.0 * cycle.values, "percent", "output_gap")


def build_controls(macro: Mapping[str, MonthlySeries], gdp: QuarterlySeries, lam: float,
                   inflation_break: Month | None = None) -> dict[str, MonthlySeries]:
    missing = [c for c in MACRO_COLUMNS if c not in macro]
    if missing:
        raise DataError(f"macro table lacks columns: {', '.join(missing)}")
    infl = yoy_pct_change(macro["cpi"])
    if inflation_break is not None:
        infl = regime_demean(infl, inflation_break)
    out = {
        "output_gap": output_gap(gdp, lam),
        "unemployment": macro["unemployment"],
        "inflation": infl,
        "sek_eur": macro["sek_eur"],
        "oil_yoy": yoy_pct_change(deflate(macro["oil"], macro["cpi"])),
        "stock_yoy": yoy_pct_change(deflate(macro["stock"], macro["cpi"])),
    }
    return {k: dataclasses.replace(v, name=k) for k, v in out.items()}


def prep_stage(cfg: PipelineConfig) -> dict[str, Path]:
    macro = read_series_csv(cfg.macro)
    gdp_tab = read_series_csv(cfg.gdp)
    gdp = next(iter(gdp_tab.values()))
    if not isinstance(gdp, QuarterlySeries):
        raise DataError(f"{cfg.gdp}: expected quarterly periods")
    brk = Month.parse(cfg.inflation_break) if cfg.inflation_break else None
    controls = build_controls(macro, gdp, cfg.hp_lambda, brk)
    common = align(*controls.values())
    buf = io.StringIO()
    write_series_csv(buf, {s.name: s for s in common}, cfg.header())
    return {"controls": _write(cfg.out_dir / "controls.csv", buf.getvalue())}


def _emsi_measures(path) -> dict[str, MonthlySeries]:
    header, _ = read_table(path)
    names = [h for h in header[1:] if h == "emsi" or (h.startswith("emsi_") and "_ma" not in h)]
    out = {}
    for n in names:
        out[n] = read_series_csv(path, n)[n]
    return out


def _coef_rows(label: Sequence[str], fit: OlsFit) -> list[list]:
    rows = []
    for name, b, se, t, p in fit.table():
        rows.append([*label, name, b, se, t, p, format_estimate(b, p, se)])
    return rows


def tests_stage(cfg: PipelineConfig) -> dict[str, Path]:
    hdr = cfg.header()
    rep = cfg.out_dir / "reports"
    emsi = _emsi_measures(cfg.out_dir / "emsi.csv")
    survey = read_series_csv(cfg.survey)
    controls = read_series_csv(cfg.out_dir / "controls.csv")
    out: dict[str, Path] = {}
    text: list[str] = []
    bw = cfg.bandwidth

    # descriptives and unit roots
    rows = []
    for name, s in [*emsi.items(), *survey.items(), *controls.items()]:
        v = s.values
        a = adf_test(v, max_lag=min(12, len(v) // 4))
        rows.append([name, str(s.start), str(s.end), len(v), float(v.mean()), float(v.std(ddof=1)),
                     float(v.min()), float(v.max()), a.statistic, a.p_value, a.lag])
    head = ["series", "first", "last", "n", "mean", "sd", "min", "max", "adf_stat", "adf_p", "adf_lag"]
    out["descriptives"] = _write(rep / "descriptives.csv", _csv_text(head, rows, hdr))
    text.append(text_table(head, [[*r[:4], *(f"{x:.3f}" for x in r[4:10]), r[10]] for r in rows],
                           "Descriptive statistics and ADF tests"))

    # mean sentiment per measure
    rows = []
    for name, s in emsi.items():
        m = mean_test(s.values, bw)
        rows.append([name, m.mean, m.se, m.t, m.p_value, m.cell()])
    head = ["series", "mean", "hac_se", "t", "p", "cell"]
    out["means"] = _write(rep / "means.csv", _csv_text(head, rows, hdr))
    text.append(text_table(["series", "mean (t)"], [[r[0], r[-1]] for r in rows], "Mean sentiment, HAC t in parentheses"))

    # subgroup differences
    rows = []
    for scheme in cfg.schemes:
        a, b = (f"emsi_{g}" for g in SCHEMES[scheme])
        if a in emsi and b in emsi:
            d = diff_mean_test(emsi[a].values, emsi[b].values, bw)
            f = diff_var_test(emsi[a].values, emsi[b].values)
            rows.append([a, b, d.mean, d.se, d.t, d.p_value, d.cell(), f.f, f.p_value, f.cell()])
    head = ["a", "b", "mean_diff", "hac_se", "t", "p", "cell", "var_ratio", "var_p", "var_cell"]
    out["diffs"] = _write(rep / "diffs.csv", _csv_text(head, rows, hdr))
    text.append(text_table(["a", "b", "mean diff (t)", "variance ratio (F)"],
                           [[r[0], r[1], r[6], r[9]] for r in rows], "Subgroup differences"))

    # Granger tests, coefficient tables and long-run effects
    g_rows, c_rows, lr_rows, fits = [], [], [], []
    for sname, y in survey.items():
        for ename, x in emsi.items():
            g = granger_test(x, y, controls,
                             k_max=cfg.k_max, bg_lags=cfg.bg_lags, bandwidth=bw)
            g_rows.append([ename, sname, g.direction, g.arrow, g.k_xy, g.k_yx, g.wald_xy, g.p_xy,
                           g.wald_yx, g.p_yx, int(g.flagged_xy), int(g.flagged_yx)])
            c_rows += _coef_rows([sname, ename], g.fit_xy)
            fits.append(g.fit_xy)
            fit = g.fit_xy
            try:
                lr = long_run_effect(fit, fit.lag_block(ename), fit.lag_block(sname))
                se = long_run_se(fit, fit.lag_block(ename), fit.lag_block(sname))
            except MediasentError as exc:
                log.warning("long-run effect for %s on %s: %s", ename, sname, exc)
                lr = se = float("nan")
            lr_rows.append([ename, sname, g.k_xy, lr, se])
    head = ["x", "y", "direction", "arrow", "k_xy", "k_yx", "wald_xy", "p_xy", "wald_yx", "p_yx",
            "flagged_xy", "flagged_yx"]
    out["granger"] = _write(rep / "granger.csv", _csv_text(head, g_rows, hdr))
    text.append(text_table(["x", "y", "direction", "K x->y", "p x->y", "K y->x", "p y->x"],
                           [[r[0], r[1], r[2], r[4], f"{r[7]:.4f}", r[5], f"{r[9]:.4f}"] for r in g_rows],
                           "Granger causality (joint HAC Wald tests)"))
    coef_head = ["y", "x", "term", "coef", "hac_se", "t", "p", "cell"]
    out["granger_coefficients"] = _write(rep / "granger_coefficients.csv", _csv_text(coef_head, c_rows, hdr))
    out["long_run"] = _write(rep / "long_run.csv",
                             _csv_text(["x", "y", "K", "effect", "se"], lr_rows, hdr))
    text.append(text_table(["x", "y", "K", "long-run effect (se)"],
                           [[r[0], r[1], r[2], f"{r[3]:.2f} ({r[4]:.2f})"] for r in lr_rows],
                           "Long-run effects of sentiment on expectations"))

    # contemporaneous model per survey series
    rows = []
    for sname, y in survey.items():
        fit = contemporaneous_model(y, emsi["emsi"], controls, k_max=cfg.k_max,
                                    bg_lags=cfg.bg_lags, bandwidth=bw)
        rows += [[r[0], *r[2:]] for r in _coef_rows([sname, "emsi"], fit)]
        rows.append([sname, "K", fit.meta.get("K"), "", "", "", "flagged" if fit.meta.get("flagged") else ""])
    head = ["y", "term", "coef", "hac_se", "t", "p", "cell"]
    out["contemporaneous"] = _write(rep / "contemporaneous.csv", _csv_text(head, rows, hdr))
    text.append(text_table(["y", "term", "coef (HAC se)"], [[r[0], r[1], r[6]] for r in rows if r[1] != "K"],
                           "Contemporaneous model"))

    # structural breaks
    rows = []
    for name, s in [*survey.items(), *emsi.items()]:
        b = qlr_break(s, cfg.qlr_trim)
        rows.append([name, str(b.month), b.sup_f, int(b.significant)])
    head = ["series", "break_month", "sup_f", "significant_5pct"]
    out["qlr"] = _write(rep / "qlr.csv", _csv_text(head, rows, hdr + [f"critical={QLR_CRITICAL}"]))
    text.append(text_table(head, [[r[0], r[1], f"{r[2]:.2f}", r[3]] for r in rows], "QLR break tests"))

    # significance counts across the Granger equations
    summ = significance_summary(fits, [*emsi, *controls])
    rows = [[v, s, t] for v, (s, t) in summ.items()]
    out["summary"] = _write(rep / "summary.csv", _csv_text(["variable", "significant", "equations"], rows, hdr))
    text.append(text_table(["variable", "significant", "equations"], rows,
                           "Significant lag blocks across survey equations"))

    legend = "Stars: * p<0.10, ** p<0.05, *** p<0.01. Parentheses: HAC standard errors or t-ratios as labelled.\n"
    out["report"] = _write(rep / "report.txt", "".join(f"# {h}\n" for h in hdr) + legend + "\n" + "\n".join(text))
    return out


STAGE_FUNCS: dict[str, Callable[[PipelineConfig], dict[str, Path]]] = {
    "ingest": ingest_stage, "train": train_stage, "classify": classify_stage,
    "index": index_stage, "prep": prep_stage, "tests": tests_stage,
}


def run_stage(cfg: PipelineConfig, stage: str) -> dict[str, Path]:
    if stage not in STAGE_FUNCS:
        raise DataError(f"unknown stage {stage!r}; choose from {', '.join(STAGES)}")
    try:
        return STAGE_FUNCS[stage](cfg)
    except MediasentError as exc:
        raise StageError(stage, exc) from exc
    except (OSError, ValueError) as exc:
        raise StageError(stage, DataError(str(exc))) from exc


def run_pipeline(cfg: PipelineConfig, stages: Sequence[str] = STAGES) -> dict[str, Path]:
    """Run the requested stages in workflow order and return every artifact written."""
    cfg.check()
    artifacts: dict[str, Path] = {}
    for stage in STAGES:
        if stage in stages:
            log.info("stage %s", stage)
            artifacts.update(run_stage(cfg, stage))
    return artifacts
