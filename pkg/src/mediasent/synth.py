"""Synthetic fixtures with known ground truth.

A latent monthly tone drives the share of positive vs negative items; the
survey series responds to last month's realised index with known
coefficients, so every downstream estimate has a closed-form target.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .corpus import MAX_RECORDS, MediaItem, serialize_batch
from .errors import DataError
from .index import build_emsi
from .naive_bayes import SentimentClass
from .series import Month, MonthlySeries, Quarter

POSITIVE_WORDS = [
    "stark", "tillväxt", "tillväxten", "bra", "växer", "ökar", "fortsatt", "uppgick",
    "procent", "msek", "reporäntan", "svensk", "väntas", "kommer", "året", "högkonjunktur",
    "uppgång", "optimism", "återhämtning", "rekord", "lyft", "fart", "investeringar", "ljusglimtar",
]
NEGATIVE_WORDS = [
    "finansiella", "regeringen", "sjönk", "amerikanska", "miljarder", "när", "sänker", "hade",
    "punkter", "dollar", "andra", "åtgärder", "svagare", "finanspolitiska", "sänkt", "regeringens",
    "skriver", "lågkonjunkturen", "stora", "recession", "kris", "varsel", "nedgång", "oro",
]
IRRELEVANT_WORDS = [
    "tv", "kanal", "program", "film", "serie", "väder", "sport", "match", "kväll", "morgon",
    "musik", "konsert", "recept", "resa", "semester", "kultur", "teater", "bok", "nyheter", "tablå",
]
SHARED_WORDS = [
    "och", "att", "det", "som", "en", "på", "är", "av", "för", "med", "till", "den", "har",
    "de", "inte", "om", "ett", "men", "sverige", "banken", "marknaden", "enligt", "säger", "under",
]
QUERY_WORDS = ["ekonomi", "prognos", "rapport"]

DEFAULT_OUTLETS = [
    # name, share of items, online share, locality, mean words per item
    ("Dagens Industri", 0.18, 0.5, "nationwide", 60),
    ("Dagens Nyheter", 0.12, 0.4, "nationwide", 70),
    ("Affärsvärlden", 0.10, 0.8, "nationwide", 55),
    ("Svenska Dagbladet", 0.10, 0.4, "nationwide", 65),
    ("Webfinanser", 0.08, 1.0, "nationwide", 30),
    ("Helsingborgs Dagblad", 0.08, 0.5, "local", 45),
    ("Sydsvenskan", 0.08, 0.5, "local", 50),
    ("Ystads Allehanda", 0.06, 0.6, "local", 40),
    ("Borås Tidning", 0.06, 0.6, "local", 40),
    ("Ekonomisk Analys Kvartal", 0.04, 0.2, "nationwide", 160),
    ("Konjunkturbrevet", 0.04, 0.3, "nationwide", 140),
    ("Hallands Nyheter", 0.06, 0.7, "local", 35),
]


@dataclass
class SyntheticSpec:
    seed: int = 2020
    start: str = "2008-01"
    months: int = 120
    items_per_day: float = 2.75
    irrelevant_share: float = 0.4
    shared_fraction: float = 0.55       # share of tokens drawn from the shared pool
    query_terms: bool = True
    off_query_share: float = 0.03       # items that fail the retrieval query
    n_labeled: int = 500
    tone_ar: float = 0.6
    tone_sd: float = 0.3
    emsi_to_survey: float = 9.0
    survey_ar: float = 0.9
    survey_const: float = 0.5
    survey_sd: float = 1.5
    own_ar: float = 0.8
    own_sd: float = 2.0
    outlets: list = field(default_factory=lambda: [list(o) for o in DEFAULT_OUTLETS])

    def companion(self) -> np.ndarray:
        # state (tone, survey, own); the survey loads on tone through the realised index
        return np.array([
            [self.tone_ar, 0.0, 0.0],
            [self.emsi_to_survey, self.survey_ar, 0.0],
            [0.0, 0.0, self.own_ar],
        ])

    def validate(self) -> None:
        radius = float(np.max(np.abs(np.linalg.eigvals(self.companion()))))
        if radius >= 1.0:
            raise DataError(f"unstable series spec: companion spectral radius {radius:.3f} >= 1")
        if not 0 <= self.irrelevant_share <= 1 or not 0 <= self.shared_fraction < 1:
            raise DataError("shares must lie in [0, 1]")
        if self.months < 1 or self.items_per_day <= 0:
            raise DataError("need a positive number of months and items")


@dataclass
class SyntheticData:
    items: list[MediaItem]
    labels: dict[str, SentimentClass]
    on_query: dict[str, bool]
    emsi_true: MonthlySeries
    survey: dict[str, MonthlySeries]
    macro: dict[str, MonthlySeries]
    gdp: tuple[Quarter, np.ndarray]
    locality: dict[str, str]
    truth: dict


def _words(rng, pool, n):
    return [pool[i] for i in rng.integers(0, len(pool), n)]


def _doc(rng, spec: SyntheticSpec, label: SentimentClass, n_words: int, on_query: bool) -> tuple[str, str]:
    own = {SentimentClass.positive: POSITIVE_WORDS, SentimentClass.negative: NEGATIVE_WORDS,
           SentimentClass.irrelevant: IRRELEVANT_WORDS}[label]
    n_shared = int(rng.binomial(n_words, spec.shared_fraction))
    words = _words(rng, own, n_words - n_shared) + _words(rng, SHARED_WORDS, n_shared)
    rng.shuffle(words)
    if spec.query_terms and on_query:
        words += ["ekonomi", QUERY_WORDS[1 + int(rng.integers(0, 2))]]
        rng.shuffle(words)
    headline = " ".join(words[:6]).capitalize()
    body = " ".join(words[6:]) + "."
    return headline, body


def _ar1(rng, n, rho, sd, burn=100):
    e = rng.normal(0.0, sd, n + burn)
    x = np.zeros(n + burn)
    for t in range(1, n + burn):
        x[t] = rho * x[t - 1] + e[t]
    return x[burn:]


def generate(spec: SyntheticSpec) -> SyntheticData:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    rng_text, rng_series, rng_macro = (np.random.default_rng(s) for s in
                                       np.random.SeedSequence(spec.seed).spawn(3))
    first = Month.parse(spec.start)
    last = first + (spec.months - 1)

    tone = np.clip(_ar1(rng_series, spec.months, spec.tone_ar, spec.tone_sd), -0.95, 0.95)
    outlets = spec.outlets
    shares = np.array([o[1] for o in outlets], dtype=float)
    shares /= shares.sum()

    items: list[MediaItem] = []
    labels: dict[str, SentimentClass] = {}
    on_query: dict[str, bool] = {}
    n = 0
    for k in range(spec.months):
        m = first + k
        p_pos = (1.0 + tone[k]) / 2.0
        for day in m.dates():
            for _ in range(int(rng_text.poisson(spec.items_per_day))):
                n += 1
                o = outlets[int(rng_text.choice(len(outlets), p=shares))]
                if rng_text.random() < spec.irrelevant_share:
                    label = SentimentClass.irrelevant
                else:
                    label = SentimentClass.positive if rng_text.random() < p_pos else SentimentClass.negative
                hit = rng_text.random() >= spec.off_query_share
                if not hit:
                    label = SentimentClass.irrelevant
                n_words = max(8, int(rng_text.poisson(o[4])))
                headline, body = _doc(rng_text, spec, label, n_words, hit)
                online = rng_text.random() < o[2]
                time = dt.time(int(rng_text.integers(6, 23)), int(rng_text.integers(0, 60)), 0) if online else None
                item = MediaItem(f"it{n:06d}", o[0], day, time, "online" if online else "print",
                                 headline, body)
                items.append(item)
                labels[item.id] = label
                on_query[item.id] = hit

    relevant = [(it.date, labels[it.id]) for it in items if on_query[it.id]]
    emsi = build_emsi(relevant, first, last).as_series()

    # survey responds to last month's realised index
    e = emsi.values
    u = rng_series.normal(0.0, spec.survey_sd, spec.months)
    swe = np.zeros(spec.months)
    swe[0] = (spec.survey_const + spec.emsi_to_survey * e.mean()) / (1 - spec.survey_ar)
    for t in range(1, spec.months):
        swe[t] = spec.survey_const + spec.emsi_to_survey * e[t - 1] + spec.survey_ar * swe[t - 1] + u[t]
    own = 5.0 + _ar1(rng_series, spec.months, spec.own_ar, spec.own_sd)
    survey = {"swe_now": MonthlySeries(first, swe, "percentage points", "swe_now"),
              "own_now": MonthlySeries(first, own, "percentage points", "own_now")}

    # macro block starts a year early so year-on-year transforms cover the sample
    m0 = first - 12
    nm = spec.months + 12
    infl = 2.0 + _ar1(rng_macro, nm, 0.9, 0.3)
    cpi = 100.0 * np.exp(np.cumsum(infl / 1200.0))
    stock = 1000.0 * np.exp(np.cumsum(rng_macro.normal(0.006, 0.05, nm)))
    oil = 60.0 * np.exp(np.cumsum(rng_macro.normal(0.002, 0.07, nm)))
    unemp = 7.5 + _ar1(rng_macro, nm, 0.95, 0.15)
    sek_eur = 9.2 + _ar1(rng_macro, nm, 0.95, 0.08)
    macro = {name: MonthlySeries(m0, v, name=name) for name, v in
             [("cpi", cpi), ("stock", stock), ("oil", oil),
              ("unemployment", unemp), ("sek_eur", sek_eur)]}
    q0 = Quarter(m0.year, (m0.month - 1) // 3 + 1)
    nq = (nm + 2) // 3
    log_gdp = np.log(1000.0) + 0.006 * np.arange(nq) + _ar1(rng_macro, nq, 0.8, 0.008)
    gdp = (q0, np.exp(log_gdp))

    locality = {o[0]: o[3] for o in outlets}
    truth = {
        "seed": spec.seed,
        "spec": asdict(spec),
        "n_items": len(items),
        "n_relevant_query_hits": len(relevant),
        "first_month": str(first),
        "last_month": str(last),
        "class_shares": {c.value: sum(1 for l in labels.values() if l is c) / max(len(labels), 1)
                         for c in SentimentClass},
        "emsi_to_survey": spec.emsi_to_survey,
        "survey_ar": spec.survey_ar,
        "long_run_effect": spec.emsi_to_survey / (1 - spec.survey_ar),
        "granger": {"swe_now": "x_to_y", "own_now": "none"},
    }
    # rng reserved for label sampling so it does not shift the series streams
    del rng
    return SyntheticData(items, labels, on_query, emsi, survey, macro, gdp, locality, truth)


def write_fixture(data: SyntheticData, out: str | Path, spec: SyntheticSpec) -> dict[str, Path]:
    """Write batch files, labels, series tables, locality table, truth and a pipeline config."""
    from .series import write_series_csv, fmt

    out = Path(out)
    batches = out / "batches"
    batches.mkdir(parents=True, exist_ok=True)
    for old in batches.glob("*.txt"):
        old.unlink()
    for i in range(0, len(data.items), MAX_RECORDS):
        chunk = data.items[i:i + MAX_RECORDS]
        (batches / f"batch_{i // MAX_RECORDS + 1:04d}.txt").write_bytes(serialize_batch(chunk))

    rng = np.random.default_rng([spec.seed, 7])
    hits = [it for it in data.items if data.on_query[it.id]]
    pick = sorted(rng.choice(len(hits), size=min(spec.n_labeled, len(hits)), replace=False))
    with open(out / "labels.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label", "text"])
        for i in pick:
            it = hits[i]
            w.writerow([it.id, data.labels[it.id].value, it.text])

    with open(out / "survey.csv", "w", newline="", encoding="utf-8") as fh:
        write_series_csv(fh, data.survey)
    with open(out / "macro.csv", "w", newline="", encoding="utf-8") as fh:
        write_series_csv(fh, data.macro)
    q0, gdp = data.gdp
    with open(out / "gdp_q.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", "gdp"])
        for k, v in enumerate(gdp):
            w.writerow([str(q0 + k), fmt(v)])
    with open(out / "outlets.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["outlet", "locality"])
        w.writerows(sorted(data.locality.items()))
    with open(out / "emsi_true.csv", "w", newline="", encoding="utf-8") as fh:
        write_series_csv(fh, {"emsi": data.emsi_true})
    (out / "truth.json").write_text(json.dumps(data.truth, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
                                    encoding="utf-8")
    (out / "query.txt").write_text('"ekonomi" AND ("prognos" OR "rapport")\n', encoding="utf-8")
    (out / "pipeline.ini").write_text(
        "# pipeline configuration for the synthetic fixture\n"
        "input_dir = batches\n"
        "query = query.txt\n"
        "labels = labels.csv\n"
        "survey = survey.csv\n"
        "macro = macro.csv\n"
        "gdp = gdp_q.csv\n"
        "locality = outlets.csv\n"
        "out_dir = out\n"
        f"seed = {spec.seed}\n"
        "k_max = 6\n"
        "cv_k = 50\n",
        encoding="utf-8")
    return {"dir": out, "config": out / "pipeline.ini", "truth": out / "truth.json"}
