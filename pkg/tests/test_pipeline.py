import json
import shutil
import warnings
from pathlib import Path

import numpy as np
import pytest

from conftest import FIXTURE
from mediasent import pipeline as pl
from mediasent.errors import DataError, StageError
from mediasent.naive_bayes import cross_validate, load_model, model_metadata
from mediasent.series import read_series_csv, read_table
from mediasent.synth import SyntheticSpec, generate, write_fixture


def outputs(out_dir: Path) -> dict[str, bytes]:
    return {str(p.relative_to(out_dir)): p.read_bytes() for p in sorted(out_dir.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def fused(tmp_path_factory):
    """One full pipeline run over a copy of the bundled fixture."""
    root = tmp_path_factory.mktemp("fused") / "fixture"
    shutil.copytree(FIXTURE, root, ignore=shutil.ignore_patterns("out"))
    cfg = pl.load_config(root / "pipeline.ini")
    artifacts = pl.run_pipeline(cfg)
    return root, cfg, artifacts


def small_fixture(tmp_path, **kw):
    spec = SyntheticSpec(months=kw.pop("months", 24), items_per_day=kw.pop("items_per_day", 1.5),
                         n_labeled=kw.pop("n_labeled", 150), **kw)
    data = generate(spec)
    write_fixture(data, tmp_path / "fx", spec)
    return data, tmp_path / "fx"


class TestSynth:
    def test_unstable_spec(self):
        with pytest.raises(DataError, match="spectral radius"):
            generate(SyntheticSpec(survey_ar=1.0))
        with pytest.raises(DataError):
            SyntheticSpec(tone_ar=1.2).validate()

    def test_bad_shares(self):
        with pytest.raises(DataError):
            SyntheticSpec(irrelevant_share=1.5).validate()

    def test_deterministic(self):
        a = generate(SyntheticSpec(months=6, seed=4))
        b = generate(SyntheticSpec(months=6, seed=4))
        assert [it.text for it in a.items] == [it.text for it in b.items]
        assert np.array_equal(a.survey["swe_now"].values, b.survey["swe_now"].values)

    def test_separable_vocabulary_cv(self, tmp_path):
        _, fx = small_fixture(tmp_path, shared_fraction=0.0, query_terms=False, off_query_share=0.0)
        docs, _ = pl.labeled_docs(pl.read_labels(fx / "labels.csv"))
        rep = cross_validate(docs, k=10, seed=1)
        assert rep.accuracy == 1.0

    def test_all_irrelevant_index_is_zero(self, tmp_path):
        data, fx = small_fixture(tmp_path, irrelevant_share=1.0)
        assert np.all(data.emsi_true.values == 0)
        cfg = pl.load_config(fx / "pipeline.ini", {"k_max": "2", "cv_k": "5"})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for stage in ("ingest", "train", "classify", "index"):
                pl.run_stage(cfg, stage)
        header, rows = read_table(cfg.out_dir / "emsi.csv")
        col = header.index("emsi")
        assert rows and all(float(r[col]) == 0.0 for r in rows)

    def test_fixture_files(self, tmp_path):
        data, fx = small_fixture(tmp_path)
        truth = json.loads((fx / "truth.json").read_text())
        assert truth["long_run_effect"] == pytest.approx(90.0)
        assert truth["granger"]["swe_now"] == "x_to_y"
        assert len(pl.read_labels(fx / "labels.csv")) == 150
        survey = read_series_csv(fx / "survey.csv")
        assert set(survey) == {"swe_now", "own_now"} and len(survey["swe_now"]) == 24


class TestConfig:
    def test_relative_paths_resolve_to_config_folder(self, fixture_copy):
        cfg = pl.load_config(fixture_copy / "pipeline.ini")
        assert cfg.input_dir == (fixture_copy / "batches").resolve()
        assert cfg.seed == 2020 and cfg.k_max == 6 and cfg.bandwidth is None
        cfg.check()

    def test_overrides(self, fixture_copy, tmp_path):
        cfg = pl.load_config(fixture_copy / "pipeline.ini",
                             {"seed": "7", "bandwidth": "3", "out_dir": str(tmp_path / "o"), "k_max": None})
        assert (cfg.seed, cfg.bandwidth, cfg.k_max) == (7, 3, 6)
        assert cfg.out_dir == (tmp_path / "o").resolve()

    def test_env_var(self, fixture_copy, monkeypatch):
        monkeypatch.setenv(pl.CONFIG_ENV, str(fixture_copy / "pipeline.ini"))
        assert pl.load_config().seed == 2020

    def test_errors(self, fixture_copy, tmp_path, monkeypatch):
        monkeypatch.delenv(pl.CONFIG_ENV, raising=False)
        with pytest.raises(DataError, match="missing config keys"):
            pl.load_config()
        with pytest.raises(DataError, match="not found"):
            pl.load_config(tmp_path / "nope.ini")
        with pytest.raises(DataError, match="unknown config key"):
            pl.load_config(fixture_copy / "pipeline.ini", {"colour": "red"})
        with pytest.raises(DataError, match="cannot parse"):
            pl.load_config(fixture_copy / "pipeline.ini", {"k_max": "many"})
        cfg = pl.load_config(fixture_copy / "pipeline.ini", {"subgroups": "print_online,bogus"})
        with pytest.raises(DataError, match="bogus"):
            cfg.check()
        cfg = pl.load_config(fixture_copy / "pipeline.ini", {"labels": str(tmp_path / "missing.csv")})
        with pytest.raises(DataError, match="unresolvable"):
            cfg.check()

    def test_hash_ignores_out_dir_and_folders(self, fixture_copy, tmp_path):
        a = pl.load_config(fixture_copy / "pipeline.ini")
        b = pl.load_config(fixture_copy / "pipeline.ini", {"out_dir": str(tmp_path / "elsewhere")})
        c = pl.load_config(fixture_copy / "pipeline.ini", {"seed": "1"})
        assert a.hash() == b.hash() != c.hash()

    def test_stage_seeds(self, fixture_copy):
        cfg = pl.load_config(fixture_copy / "pipeline.ini")
        assert cfg.stage_seed("cv") == cfg.stage_seed("cv") != cfg.stage_seed("train")


class TestRun:
    def test_artifacts(self, fused):
        root, cfg, artifacts = fused
        for name in ("corpus", "model", "classified", "emsi", "controls", "granger", "report"):
            assert artifacts[name].is_file()
        header = cfg.header()[0]
        for p in cfg.out_dir.rglob("*.csv"):
            assert p.read_text(encoding="utf-8").splitlines()[0] == "# " + header
        assert (cfg.out_dir / "reports" / "report.txt").read_text().startswith("# " + header)
        with open(artifacts["model"], "rb") as fh:
            meta = model_metadata(fh)
        assert meta["seed"] == 2020 and meta["config"] == cfg.hash()

    def test_classified_matches_model(self, fused):
        _, cfg, artifacts = fused
        with open(artifacts["model"], "rb") as fh:
            model = load_model(fh)
        header, rows = read_table(artifacts["classified"])
        assert header == pl.CLASSIFIED_COLUMNS
        assert len(rows) == len(read_table(artifacts["corpus"])[1])
        assert {r[5] for r in rows} <= {c.value for c in model.classes}

    def test_recovers_truth(self, fused):
        root, cfg, _ = fused
        truth = json.loads((root / "truth.json").read_text())
        header, rows = read_table(cfg.out_dir / "reports" / "granger.csv")
        row = next(dict(zip(header, r)) for r in rows if r[0] == "emsi" and r[1] == "swe_now")
        assert row["direction"] == truth["granger"]["swe_now"]
        header, rows = read_table(cfg.out_dir / "reports" / "long_run.csv")
        row = next(dict(zip(header, r)) for r in rows if r[0] == "emsi" and r[1] == "swe_now")
        assert abs(float(row["effect"]) - truth["long_run_effect"]) <= 2 * float(row["se"])

    def test_rerun_identical(self, fused, tmp_path):
        _, cfg, _ = fused
        again = pl.load_config(cfg.input_dir.parent / "pipeline.ini", {"out_dir": str(tmp_path / "again")})
        pl.run_pipeline(again)
        assert outputs(cfg.out_dir) == outputs(again.out_dir)

    @pytest.mark.parametrize("stage", pl.STAGES)
    def test_stage_isolation(self, fused, tmp_path, stage):
        _, cfg, _ = fused
        alone = tmp_path / "alone"
        shutil.copytree(cfg.out_dir, alone)
        before = outputs(alone)
        written = pl.run_stage(pl.load_config(cfg.input_dir.parent / "pipeline.ini",
                                              {"out_dir": str(alone)}), stage)
        for p in written.values():
            p.unlink()
        pl.run_stage(pl.load_config(cfg.input_dir.parent / "pipeline.ini", {"out_dir": str(alone)}), stage)
        assert outputs(alone) == before

    def test_corrupted_batch(self, fixture_copy):
        victim = sorted((fixture_copy / "batches").glob("*.txt"))[3]
        data = victim.read_bytes()
        cut = data.index(b"\n==== ITEM ====", 100) + 1
        victim.write_bytes(data[:cut] + b"===== broken\n" + data[cut:])
        cfg = pl.load_config(fixture_copy / "pipeline.ini")
        with pytest.raises(StageError) as info:
            pl.run_pipeline(cfg)
        assert info.value.stage == "ingest"
        assert victim.name in str(info.value) and f"byte offset {cut}" in str(info.value)
        assert info.value.exit_code == 2
        assert not (cfg.out_dir / "corpus.csv").exists()

    def test_unknown_stage(self, fixture_copy):
        with pytest.raises(DataError):
            pl.run_stage(pl.load_config(fixture_copy / "pipeline.ini"), "plot")


class TestHelpers:
    def test_output_gap_linear_trend(self):
        from mediasent.series import Quarter, QuarterlySeries
        gdp = QuarterlySeries(Quarter(2000, 1), 100 * np.exp(0.01 * np.arange(40)))
        gap = pl.output_gap(gdp)
        # the first and last months are flat extrapolations of the quarterly anchors
        assert np.max(np.abs(gap.values[1:-1])) < 0.05
        assert len(gap) == 120

    def test_text_table(self):
        out = pl.text_table(["a", "bb"], [["1", "2"], ["333", "4"]], "T")
        assert out.splitlines()[0] == "T"
        assert "333" in out
