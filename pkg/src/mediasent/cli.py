"""Command-line entry point: ``mediasent <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import pipeline as pl
from .corpus import filter_corpus, format_query, ingest_directory, matches, parse_query, read_corpus_csv, \
    write_corpus_csv
from .errors import DataError, MediasentError, NumericError, UsageError
from .index import SCHEMES
from .naive_bayes import CLASS_ORDER, SentimentClass, cross_validate, discriminative_words, load_model, \
    save_model, train
from .regression import contemporaneous_model, format_estimate, granger_test, qlr_break, significance_summary
from .series import (HP_LAMBDA_MONTHLY, Month, MonthlySeries, QuarterlySeries, SurveyWave, adf_test, deflate,
                     read_series_csv, read_table, regime_demean, survey_balance, write_series_csv,
                     yoy_pct_change)
from .synth import SyntheticSpec, generate, write_fixture

log = logging.getLogger("mediasent")

_SPEC_TYPES = {"int": int, "float": float, "str": str}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _header(args: argparse.Namespace) -> list[str]:
    settings = {k: str(v) for k, v in sorted(vars(args).items()) if k not in ("func", "out", "verbose")}
    digest = hashlib.sha256(json.dumps(settings, sort_keys=True).encode()).hexdigest()[:12]
    return [f"mediasent {__version__} seed={getattr(args, 'seed', 0)} config={digest}"]


def _emit(args, text: str) -> None:
    out = getattr(args, "out", None)
    if out and out != "-":
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _series(path: str, column: str | None = None) -> MonthlySeries:
    tab = read_series_csv(path, column)
    s = next(iter(tab.values()))
    if not isinstance(s, MonthlySeries):
        raise DataError(f"{path}: expected monthly periods")
    return s


def _read_corpus(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return read_corpus_csv(fh)


def _series_text(args, columns: dict[str, MonthlySeries]) -> str:
    buf = io.StringIO()
    write_series_csv(buf, columns, _header(args))
    return buf.getvalue()


# ------------------------------------------------------------- commands

def cmd_ingest(args):
    items, problems = ingest_directory(args.input)
    if args.query:
        items = filter_corpus(items, parse_query(Path(args.query).read_text(encoding="utf-8")))
    buf = io.StringIO()
    write_corpus_csv(items, buf, _header(args) + [f"kept={len(items)} skipped={len(problems)}"])
    _emit(args, buf.getvalue())
    for p in problems:
        print(f"warning: skipped {p}", file=sys.stderr)


def cmd_query(args):
    text = args.expr if args.expr is not None else Path(args.query).read_text(encoding="utf-8")
    q = parse_query(text)
    if not args.corpus:
        print(format_query(q))
        return
    items = _read_corpus(args.corpus)
    hits = [it.id for it in items if matches(q, it)]
    _emit(args, "".join(f"{h}\n" for h in hits))
    print(f"{len(hits)} of {len(items)} items match", file=sys.stderr)


def _labeled(args):
    corpus = {it.id: it.text for it in _read_corpus(args.corpus)} if args.corpus else None
    return pl.labeled_docs(pl.read_labels(args.labels, corpus))


def cmd_train(args):
    docs, vocab = _labeled(args)
    model = train(docs, vocab)
    buf = io.BytesIO()
    save_model(model, buf, {"tool": f"mediasent {__version__}", "seed": args.seed})
    Path(args.model).parent.mkdir(parents=True, exist_ok=True)
    Path(args.model).write_bytes(buf.getvalue())
    print(f"trained on {len(docs)} documents, {len(vocab)} words; classes "
          + ", ".join(f"{c.value}={int(n)}" for c, n in zip(model.classes, model.class_docs)))


def cmd_cv(args):
    docs, _ = _labeled(args)
    rep = cross_validate(docs, args.k, args.seed)
    names = [c.value for c in CLASS_ORDER]
    rows = [[names[i], *map(int, rep.confusion[i])] for i in range(3)]
    _emit(args, pl._csv_text(["true", *names], rows, _header(args) + [f"accuracy={rep.accuracy:.6f}"]))
    print(f"pooled accuracy {rep.accuracy:.4f} over {rep.n} documents, k={rep.k}", file=sys.stderr)


def cmd_classify(args):
    with open(args.model, "rb") as fh:
        model = load_model(fh)
    rows = pl.classified_rows(model, _read_corpus(args.corpus))
    _emit(args, pl._csv_text(pl.CLASSIFIED_COLUMNS, rows, _header(args)))


def cmd_top_words(args):
    with open(args.model, "rb") as fh:
        model = load_model(fh)
    a, b = SentimentClass.parse(args.a), SentimentClass.parse(args.b)
    for c in (a, b):
        if c not in model.classes:
            raise DataError(f"model has no class {c.value!r}")
    rows = [[i, w, d] for i, (w, d) in enumerate(discriminative_words(model, a, b, args.n), 1)]
    _emit(args, pl._csv_text(["rank", "word", "diff"], rows, _header(args)))


def cmd_index(args):
    items = pl.read_classified(args.classified)
    schemes = [s for s in (args.subgroups or "").split(",") if s]
    for s in schemes:
        if s not in SCHEMES:
            raise UsageError(f"unknown subgroup scheme {s!r}; choose from {', '.join(SCHEMES)}")
    locality = pl.read_locality(args.locality_table) if args.locality_table else None
    header, rows = pl.emsi_table(items, schemes, locality, args.ma or None)
    _emit(args, pl._csv_text(header, rows, _header(args)))


def cmd_prep(args):
    if args.prep == "gap":
        gdp = next(iter(read_series_csv(args.gdp, args.column).values()))
        if not isinstance(gdp, QuarterlySeries):
            raise DataError(f"{args.gdp}: expected quarterly periods")
        _emit(args, _series_text(args, {"output_gap": pl.output_gap(gdp, args.lam)}))
    elif args.prep == "yoy":
        s = _series(args.input, args.column)
        _emit(args, _series_text(args, {f"{s.name}_yoy": yoy_pct_change(s)}))
    elif args.prep == "deflate":
        s = _series(args.input, args.column)
        _emit(args, _series_text(args, {f"{s.name}_real": deflate(s, _series(args.cpi, args.cpi_column))}))
    elif args.prep == "balance":
        header, rows = read_table(args.waves)
        need = ["month", "A1", "A2", "A3", "A4", "A5", "A6", "total"]
        if header[:8] != need:
            raise DataError(f"{args.waves}: expected columns {need}")
        try:
            waves = [SurveyWave(Month.parse(r[0]), tuple(int(v) for v in r[1:7]), int(r[7])) for r in rows]
        except ValueError as exc:
            raise DataError(f"{args.waves}: {exc}") from exc
        _emit(args, _series_text(args, {"balance": survey_balance(waves)}))
    elif args.prep == "adf":
        tab = read_series_csv(args.input, args.column)
        rows, crit = [], []
        for name, s in tab.items():
            r = adf_test(s.values, args.max_lag)
            crit = list(r.critical_values)
            rows.append([name, r.statistic, r.p_value, r.lag, r.nobs, *r.critical_values.values()])
        _emit(args, pl._csv_text(["series", "statistic", "p_value", "lag", "nobs", *(f"crit_{c}" for c in crit)],
                                 rows, _header(args)))
    elif args.prep == "demean":
        s = _series(args.input, args.column)
        _emit(args, _series_text(args, {s.name: regime_demean(s, Month.parse(args.break_month))}))


def _survey_and_controls(args):
    y_tab = read_series_csv(args.y, args.y_column)
    controls = read_series_csv(args.controls) if args.controls else {}
    return y_tab, controls


def cmd_granger(args):
    x = _series(args.x, args.x_column)
    y_tab, controls = _survey_and_controls(args)
    rows, text_rows = [], []
    for yname, y in y_tab.items():
        g = granger_test(x, y, controls, k_max=args.kmax, bandwidth=args.bandwidth)
        rows.append([x.name, yname, g.direction, g.arrow, g.k_xy, g.k_yx, g.wald_xy, g.p_xy,
                     g.wald_yx, g.p_yx, int(g.flagged_xy), int(g.flagged_yx)])
        text_rows.append([x.name, yname, g.direction, g.k_xy, f"{g.p_xy:.4f}", g.k_yx, f"{g.p_yx:.4f}"])
        for name, b, se, t, p in g.fit_xy.table():
            log.info("%s <- %s: %s", yname, name, format_estimate(b, p, se))
    head = ["x", "y", "direction", "arrow", "k_xy", "k_yx", "wald_xy", "p_xy", "wald_yx", "p_yx",
            "flagged_xy", "flagged_yx"]
    _emit(args, pl._csv_text(head, rows, _header(args)))
    if args.out and args.out != "-":
        print(pl.text_table(["x", "y", "direction", "K x->y", "p x->y", "K y->x", "p y->x"], text_rows))


def cmd_contemp(args):
    emsi = _series(args.emsi, args.emsi_column)
    y_tab, controls = _survey_and_controls(args)
    rows = []
    for yname, y in y_tab.items():
        fit = contemporaneous_model(y, emsi, controls, k_max=args.kmax, bandwidth=args.bandwidth)
        rows += [[yname, *r[2:]] for r in pl._coef_rows([yname, "emsi"], fit)]
        rows.append([yname, "K", fit.meta.get("K"), "", "", "", "flagged" if fit.meta.get("flagged") else ""])
    head = ["y", "term", "coef", "hac_se", "t", "p", "cell"]
    _emit(args, pl._csv_text(head, rows, _header(args)))
    if args.out and args.out != "-":
        print(pl.text_table(["y", "term", "coef (HAC se)"], [[r[0], r[1], r[6]] for r in rows if r[1] != "K"]))


def cmd_qlr(args):
    tab = read_series_csv(args.series, args.column)
    rows = []
    for name, s in tab.items():
        if not isinstance(s, MonthlySeries):
            raise DataError(f"{args.series}: expected monthly periods")
        b = qlr_break(s, args.trim)
        rows.append([name, str(b.month), b.sup_f, int(b.significant)])
    _emit(args, pl._csv_text(["series", "break_month", "sup_f", "significant_5pct"], rows, _header(args)))


def cmd_summary(args):
    x = _series(args.x, args.x_column)
    y_tab, controls = _survey_and_controls(args)
    fits = [granger_test(x, y, controls, k_max=args.kmax, bandwidth=args.bandwidth).fit_xy
            for y in y_tab.values()]
    summ = significance_summary(fits, [x.name, *controls])
    rows = [[v, s, t] for v, (s, t) in summ.items()]
    _emit(args, pl._csv_text(["variable", "significant", "equations"], rows, _header(args)))


def cmd_synth(args):
    spec = SyntheticSpec(**{f.name: getattr(args, f.name) for f in dataclasses.fields(SyntheticSpec)
                            if getattr(args, f.name, None) is not None})
    data = generate(spec)
    paths = write_fixture(data, args.out, spec)
    print(f"wrote {len(data.items)} items to {paths['dir']}; config {paths['config']}")


def cmd_run(args):
    overrides = {k: getattr(args, f"cfg_{k}") for k in pl._FIELDS}
    cfg = pl.load_config(args.config, overrides)
    stages = [args.stage] if args.stage else pl.STAGES
    artifacts = pl.run_pipeline(cfg, stages)
    for name, path in artifacts.items():
        print(f"{name}: {path}")


# --------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mediasent", description="Media sentiment index and time-series tests.")
    p.add_argument("--version", action="version", version=f"mediasent {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        return sp

    sp = cmd("ingest", cmd_ingest, "parse batch files into corpus.csv")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--query")
    sp.add_argument("--out", default="-")

    sp = cmd("query", cmd_query, "parse a query and optionally list matching corpus items")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--query")
    g.add_argument("--expr")
    sp.add_argument("--corpus")
    sp.add_argument("--out", default="-")

    for name, func, help in (("train", cmd_train, "train a classifier on labelled data"),
                             ("cv", cmd_cv, "k-fold cross-validation on labelled data")):
        sp = cmd(name, func, help)
        sp.add_argument("--labels", required=True)
        sp.add_argument("--corpus", help="looks up texts for label rows with an empty text field")
        sp.add_argument("--seed", type=int, default=0)
        if name == "train":
            sp.add_argument("--model", required=True)
        else:
            sp.add_argument("--k", type=int, default=50)
            sp.add_argument("--out", default="-")

    sp = cmd("classify", cmd_classify, "classify corpus items")
    sp.add_argument("--model", required=True)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--out", default="-")

    sp = cmd("top-words", cmd_top_words, "most discriminative words between two classes")
    sp.add_argument("--model", required=True)
    sp.add_argument("--a", default="positive")
    sp.add_argument("--b", default="negative")
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--out", default="-")

    sp = cmd("index", cmd_index, "monthly sentiment index from classified items")
    sp.add_argument("--classified", required=True)
    sp.add_argument("--subgroups", default="")
    sp.add_argument("--locality-table")
    sp.add_argument("--ma", type=int, default=0)
    sp.add_argument("--out", default="-")

    sp = cmd("prep", cmd_prep, "series transforms and unit-root tests")
    prep = sp.add_subparsers(dest="prep", required=True, parser_class=_Parser)
    q = prep.add_parser("gap", help="output gap from quarterly GDP")
    q.add_argument("--gdp", required=True)
    q.add_argument("--lambda", dest="lam", type=float, default=HP_LAMBDA_MONTHLY)
    for name, help in (("yoy", "year-on-year percent change"), ("deflate", "deflate by a CPI series"),
                       ("adf", "augmented Dickey-Fuller test"), ("demean", "demean by regime")):
        q = prep.add_parser(name, help=help)
        q.add_argument("--in", dest="input", required=True)
        if name == "deflate":
            q.add_argument("--cpi", required=True)
            q.add_argument("--cpi-column")
        elif name == "adf":
            q.add_argument("--max-lag", type=int, default=12)
        elif name == "demean":
            q.add_argument("--break", dest="break_month", required=True)
    q = prep.add_parser("balance", help="survey balance from answer counts")
    q.add_argument("--waves", required=True)
    for q in prep.choices.values():
        q.add_argument("--column")
        q.add_argument("--out", default="-")

    for name, func, help in (("granger", cmd_granger, "Granger tests between a sentiment series and surveys"),
                             ("contemp", cmd_contemp, "contemporaneous survey model"),
                             ("summary", cmd_summary, "significance counts across survey equations")):
        sp = cmd(name, func, help)
        if name == "contemp":
            sp.add_argument("--emsi", required=True)
            sp.add_argument("--emsi-column", default="emsi")
        else:
            sp.add_argument("--x", required=True)
            sp.add_argument("--x-column", default="emsi")
        sp.add_argument("--y", "--survey", dest="y", required=True)
        sp.add_argument("--y-column")
        sp.add_argument("--controls")
        sp.add_argument("--kmax", type=int, default=12)
        sp.add_argument("--bandwidth", type=int)
        sp.add_argument("--out", default="-")

    sp = cmd("qlr", cmd_qlr, "sup-F test for an intercept shift")
    sp.add_argument("--series", required=True)
    sp.add_argument("--column")
    sp.add_argument("--trim", type=float, default=0.15)
    sp.add_argument("--out", default="-")

    sp = cmd("synth", cmd_synth, "write a synthetic fixture with known ground truth")
    sp.add_argument("--out", required=True)
    for f in dataclasses.fields(SyntheticSpec):
        if f.type in _SPEC_TYPES:
            sp.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=_SPEC_TYPES[f.type])

    sp = cmd("run", cmd_run, "run the whole workflow from a config file")
    sp.add_argument("--config", help=f"key = value file (default: ${pl.CONFIG_ENV})")
    sp.add_argument("--stage", choices=pl.STAGES, help="run a single stage on existing artifacts")
    for name in pl._FIELDS:
        sp.add_argument(f"--{name.replace('_', '-')}", dest=f"cfg_{name}", metavar="VALUE")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except MediasentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NumericError.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
