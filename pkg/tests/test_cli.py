import io
import json

import pytest

from poitour.cli import main

# fixture-city note: u1 and u2 both have a 3-visit day tour, so evaluation
# has two folds; u3's single photo is kept for stats but never evaluated.


@pytest.fixture
def ingested(tmp_path, visits_file, pois_file, capsys):
    archive = tmp_path / "arch.txt"
    code = main(
        ["ingest", "--visits", str(visits_file), "--pois", str(pois_file), "--out", str(archive)]
    )
    assert code == 0
    capsys.readouterr()
    return archive


def train_model(tmp_path, ingested, pois_file, extra=()):
    model_path = tmp_path / "model.txt"
    args = [
        "train", "--archive", str(ingested), "--pois", str(pois_file),
        "--out", str(model_path), "--dim", "8", "--epochs", "5", "--seed", "7",
    ]
    code = main(args + list(extra))
    assert code == 0
    return model_path


class TestIngest:
    def test_summary_counts(self, tmp_path, visits_file, pois_file, capsys):
        archive = tmp_path / "arch.txt"
        code = main(
            ["ingest", "--visits", str(visits_file), "--pois", str(pois_file),
             "--out", str(archive)]
        )
        assert code == 0
        out = capsys.readouterr().out.strip()
        assert out == "users=3 records=9 trajectories=4 pois=5 cities=1 dropped=0"
        assert archive.exists()
        assert archive.with_name("arch.txt.stats").exists()

    def test_missing_file_exit_2(self, tmp_path, pois_file, capsys):
        code = main(
            ["ingest", "--visits", str(tmp_path / "nope.csv"), "--pois", str(pois_file),
             "--out", str(tmp_path / "a.txt")]
        )
        assert code == 2
        assert "nope.csv" in capsys.readouterr().err

    def test_malformed_line_exit_2(self, tmp_path, pois_file, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("photo_id;user_id;timestamp;poi_id\np1;u1;xx;P1\n")
        code = main(
            ["ingest", "--visits", str(bad), "--pois", str(pois_file),
             "--out", str(tmp_path / "a.txt")]
        )
        assert code == 2
        assert "line 2" in capsys.readouterr().err

    def test_multi_city(self, tmp_path, visits_file, pois_file, capsys):
        out = tmp_path / "arch.txt"
        code = main(
            ["ingest",
             "--visits", str(visits_file), "--pois", str(pois_file),
             "--visits", str(visits_file), "--pois", str(pois_file),
             "--out", str(out)]
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert "cities=2" in stdout
        assert (tmp_path / "arch.txt.visits").exists()

    def test_mismatched_pairs_exit_1(self, tmp_path, visits_file, pois_file, capsys):
        code = main(
            ["ingest", "--visits", str(visits_file), "--visits", str(visits_file),
             "--pois", str(pois_file), "--out", str(tmp_path / "a.txt")]
        )
        assert code == 1


class TestTrain:
    def test_reruns_bitwise_identical(self, tmp_path, ingested, pois_file, capsys):
        m1 = tmp_path / "m1.txt"
        m2 = tmp_path / "m2.txt"
        for path in (m1, m2):
            code = main(
                ["train", "--archive", str(ingested), "--pois", str(pois_file),
                 "--out", str(path), "--dim", "8", "--epochs", "5", "--seed", "7"]
            )
            assert code == 0
        assert m1.read_bytes() == m2.read_bytes()
        assert "final_loss=" in capsys.readouterr().out

    def test_fasttext_writes_sidecar(self, tmp_path, ingested, pois_file):
        model_path = train_model(
            tmp_path, ingested, pois_file,
            extra=["--model-kind", "fasttext_skipgram", "--buckets", "1000"],
        )
        assert model_path.with_name("model.txt.ngrams").exists()

    def test_bad_hyperparam_exit_1(self, tmp_path, ingested, pois_file, capsys):
        code = main(
            ["train", "--archive", str(ingested), "--pois", str(pois_file),
             "--out", str(tmp_path / "m.txt"), "--dim", "0"]
        )
        assert code == 1
        assert "dim" in capsys.readouterr().err

    def test_empty_corpus_exit_3(self, tmp_path, pois_file, capsys):
        lonely = tmp_path / "lonely.txt"
        lonely.write_text("u1;P1,100,100\n")  # single-visit trajectory only
        code = main(
            ["train", "--archive", str(lonely), "--pois", str(pois_file),
             "--out", str(tmp_path / "m.txt")]
        )
        assert code == 3


class TestRecommend:
    def test_tiny_budget_start_only(self, tmp_path, ingested, pois_file, capsys):
        model_path = train_model(tmp_path, ingested, pois_file)
        capsys.readouterr()
        code = main(
            ["recommend", "--model", str(model_path), "--pois", str(pois_file),
             "--archive", str(ingested), "--start", "P1", "--budget-seconds", "1"]
        )
        assert code == 0
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert lines[0].startswith("itinerary;start=P1;budget=1.0;scorer=embedding")
        assert len(lines) == 2  # header + the start stop

    def test_geojson_output(self, tmp_path, ingested, pois_file, capsys):
        model_path = train_model(tmp_path, ingested, pois_file)
        geojson_path = tmp_path / "route.geojson"
        code = main(
            ["recommend", "--model", str(model_path), "--pois", str(pois_file),
             "--archive", str(ingested), "--start", "P1", "--budget-seconds", "14400",
             "--geojson", str(geojson_path)]
        )
        assert code == 0
        stop_lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("stop;")]
        collection = json.loads(geojson_path.read_text())
        points = [f for f in collection["features"] if f["geometry"]["type"] == "Point"]
        lines = [f for f in collection["features"] if f["geometry"]["type"] == "LineString"]
        assert len(points) == len(stop_lines)
        assert len(lines) == 1

    def test_baseline_ordering(self, tmp_path, ingested, pois_file, capsys):
        # photo counts in the fixture: P1=3, P2=2, P3=2, P4=1, P5=1
        code = main(
            ["recommend", "--model", "unused-but-validated-lazily", "--pois", str(pois_file),
             "--archive", str(ingested), "--start", "P4", "--budget-seconds", "86400",
             "--baseline"]
        )
        assert code == 0
        out = capsys.readouterr().out
        order = [line.split(";")[2] for line in out.splitlines() if line.startswith("stop;")]
        assert order == ["P4", "P1", "P2", "P3", "P5"]

    def test_unknown_start_exit_4(self, tmp_path, ingested, pois_file, capsys):
        model_path = train_model(tmp_path, ingested, pois_file)
        code = main(
            ["recommend", "--model", str(model_path), "--pois", str(pois_file),
             "--archive", str(ingested), "--start", "GHOST", "--budget-seconds", "3600"]
        )
        assert code == 4
        assert "GHOST" in capsys.readouterr().err

    def test_out_file(self, tmp_path, ingested, pois_file, capsys):
        model_path = train_model(tmp_path, ingested, pois_file)
        record_path = tmp_path / "itinerary.txt"
        code = main(
            ["recommend", "--model", str(model_path), "--pois", str(pois_file),
             "--archive", str(ingested), "--start", "P1", "--budget-seconds", "7200",
             "--out", str(record_path)]
        )
        assert code == 0
        assert record_path.read_text().startswith("itinerary;start=P1")


class TestEvaluate:
    def test_single_cell_table(self, tmp_path, ingested, pois_file, capsys):
        out_path = tmp_path / "results.csv"
        code = main(
            ["evaluate", "--archive", str(ingested), "--pois", str(pois_file),
             "--dim", "8", "--epochs", "3", "--out", str(out_path)]
        )
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert lines[0] == "city;scorer;model;dim;window;epochs;avg_t_r;avg_t_p;avg_f1;n_folds"
        assert len(lines) == 3  # header + embedding + baseline
        assert lines[1].startswith("arch;embedding;skipgram;8;3;3;")
        assert lines[2].startswith("arch;baseline;-;0;0;0;")
        best = capsys.readouterr().out
        assert best.startswith("best;arch;skipgram;8;3;3;")

    def test_deterministic(self, tmp_path, ingested, pois_file, capsys):
        args = ["evaluate", "--archive", str(ingested), "--pois", str(pois_file),
                "--dim", "8", "--epochs", "3", "--seed", "5"]
        assert main(args) == 0
        first = capsys.readouterr().out
        assert main(args) == 0
        second = capsys.readouterr().out
        assert first == second

    def test_leaky_labels(self, tmp_path, ingested, pois_file, capsys):
        code = main(
            ["evaluate", "--archive", str(ingested), "--pois", str(pois_file),
             "--dim", "8", "--epochs", "3", "--leaky"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "leaky=true" in out

    def test_nothing_evaluable_exit_3(self, tmp_path, pois_file, capsys):
        sparse = tmp_path / "sparse.txt"
        sparse.write_text("u1;P1,100,100|P2,200,200\n")
        code = main(
            ["evaluate", "--archive", str(sparse), "--pois", str(pois_file)]
        )
        assert code == 3

    def test_metric_and_scope_flags(self, tmp_path, ingested, pois_file, capsys):
        code = main(
            ["evaluate", "--archive", str(ingested), "--pois", str(pois_file),
             "--dim", "8", "--epochs", "3", "--conventional-metrics", "--exclude-start"]
        )
        assert code == 0
        assert ";embedding;" in capsys.readouterr().out


def test_train_threads_flag(tmp_path, ingested, pois_file, capsys):
    code = main(
        ["train", "--archive", str(ingested), "--pois", str(pois_file),
         "--out", str(tmp_path / "m.txt"), "--dim", "8", "--epochs", "3", "--threads", "2"]
    )
    assert code == 0
    assert (tmp_path / "m.txt").exists()


class TestExportGeojson:
    def test_from_stdin(self, tmp_path, pois_file, capsys, monkeypatch):
        record = (
            "itinerary;start=P1;budget=3600.0;scorer=embedding;total_elapsed=1800.0\n"
            "stop;0;P1;0.0;900.0\n"
            "stop;1;P2;900.0;1800.0\n"
        )
        monkeypatch.setattr("sys.stdin", io.StringIO(record))
        out_path = tmp_path / "route.geojson"
        code = main(["export-geojson", "--pois", str(pois_file), "--out", str(out_path)])
        assert code == 0
        collection = json.loads(out_path.read_text())
        assert collection["type"] == "FeatureCollection"
        assert len(collection["features"]) == 3

    def test_stdout_default(self, pois_file, capsys, monkeypatch):
        record = (
            "itinerary;start=P1;budget=3600.0;scorer=baseline;total_elapsed=900.0\n"
            "stop;0;P1;0.0;900.0\n"
        )
        monkeypatch.setattr("sys.stdin", io.StringIO(record))
        code = main(["export-geojson", "--pois", str(pois_file)])
        assert code == 0
        collection = json.loads(capsys.readouterr().out)
        assert len(collection["features"]) == 2


def test_unknown_subcommand_exit_1(capsys):
    assert main(["frobnicate"]) == 1


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
