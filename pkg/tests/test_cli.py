import json

import pytest

from vscript.cli import main
from vscript.domain import Genre
from vscript.videostore import load_index


def run_cli(*argv):
    return main(list(argv))


class TestGenerate:
    def test_prints_script(self, capsys):
        assert run_cli("generate", "--genre", "crime",
                       "--start", "Chicago detective Frank Sheppard",
                       "--seed", "42") == 0
        out = capsys.readouterr().out
        assert "INT." in out or "EXT." in out

    def test_writes_artifacts(self, tmp_path, capsys):
        out_dir = tmp_path / "run"
        assert run_cli("generate", "--genre", "scifi", "--start", "The probe",
                       "--seed", "7", "--out", str(out_dir)) == 0
        assert (out_dir / "script.txt").is_file()
        script = json.loads((out_dir / "script.json").read_text("utf-8"))
        assert script["genre"] == "scifi"
        session = json.loads((out_dir / "session.json").read_text("utf-8"))
        assert session["status"] == "complete"
        presentation = json.loads(
            (out_dir / "presentation.json").read_text("utf-8"))
        assert "entries" in presentation

    def test_bad_genre_fails(self, capsys):
        with pytest.raises(SystemExit):
            run_cli("generate", "--genre")  # missing value


@pytest.fixture()
def corpus_dirs(tmp_path):
    captions = tmp_path / "captions"
    annotations = tmp_path / "annotations"
    captions.mkdir()
    annotations.mkdir()

    (captions / "vid1.json").write_text(json.dumps({
        "video_uri": "videos/vid1.mp4",
        "duration_s": 20.0,
        "caption": "the detective found the heist vault. the suspect ran away.",
    }), encoding="utf-8")
    (captions / "vid2.json").write_text(json.dumps({
        "video_uri": "videos/vid2.mp4",
        "duration_s": 10.0,
        "caption": "a starship drifts across the quiet nebula",
    }), encoding="utf-8")

    rows = []
    for second in range(20):
        rows.append(json.dumps({
            "second": second,
            "faces": [
                {"center_x": 0.3, "center_y": 0.4, "area_fraction": 0.1,
                 "gender": "M"},
                {"center_x": 0.7, "center_y": 0.4, "area_fraction": 0.1,
                 "gender": "F"},
            ],
            "location_label": "street",
            "time_of_day": "DAY",
        }))
    (annotations / "vid1.jsonl").write_text("\n".join(rows), encoding="utf-8")
    return captions, annotations


class TestDb:
    def test_build_and_query(self, corpus_dirs, tmp_path, capsys):
        captions, annotations = corpus_dirs
        index_dir = tmp_path / "index"
        assert run_cli("db", "build", "--captions", str(captions),
                       "--annotations", str(annotations),
                       "--out", str(index_dir)) == 0
        out = capsys.readouterr().out
        assert "indexed 3 clips" in out

        index = load_index(index_dir)
        assert len(index) == 3
        vid1_clips = [c for c in index.clips if c.id.startswith("vid1")]
        assert all(c.char_count == 2 for c in vid1_clips)
        assert all(c.location == "street" for c in vid1_clips)
        assert any(c.genre_tag is Genre.CRIME for c in vid1_clips)

        assert run_cli("db", "query", "--index", str(index_dir),
                       "--text", "the detective found the heist vault.",
                       "--top", "2") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        first = json.loads(lines[0])
        assert first["id"].startswith("vid1")
        assert first["score"] == pytest.approx(1.0, abs=1e-5)

    def test_query_with_constraints(self, corpus_dirs, tmp_path, capsys):
        captions, annotations = corpus_dirs
        index_dir = tmp_path / "index"
        run_cli("db", "build", "--captions", str(captions),
                "--annotations", str(annotations), "--out", str(index_dir))
        capsys.readouterr()
        assert run_cli("db", "query", "--index", str(index_dir),
                       "--text", "anything", "--genre", "crime",
                       "--min-chars", "2", "--top", "5") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines
        for line in lines:
            doc = json.loads(line)
            assert doc["id"].startswith("vid1")

    def test_query_corrupt_index_errors(self, tmp_path, capsys):
        assert run_cli("db", "query", "--index", str(tmp_path / "missing"),
                       "--text", "x") == 1
        assert "error:" in capsys.readouterr().err


class TestEval:
    def test_distinct_repeat_bleu(self, tmp_path, capsys):
        cand = tmp_path / "cand.txt"
        ref = tmp_path / "ref.txt"
        cand.write_text("a b c d\nw x y z\n", encoding="utf-8")
        ref.write_text("a b c d\nw x y q\n", encoding="utf-8")
        assert run_cli("eval", "--candidates", str(cand),
                       "--references", str(ref),
                       "--metrics", "distinct,repeat,bleu") == 0
        report = json.loads(capsys.readouterr().out)
        assert report["distinct"]["1"] == 1.0
        assert report["repeat_pct"] == 0.0
        assert 0.0 < report["bleu"] <= 1.0
        assert report["ppl"] is None

    def test_genreacc_and_sentsim(self, tmp_path, capsys):
        cand = tmp_path / "cand.txt"
        ref = tmp_path / "ref.txt"
        targets = tmp_path / "targets.txt"
        cand.write_text("the heist at the vault\nthe starship and nebula\n",
                        encoding="utf-8")
        ref.write_text("the heist at the vault\nthe starship and nebula\n",
                       encoding="utf-8")
        targets.write_text("crime\nsci-fi\n", encoding="utf-8")
        assert run_cli("eval", "--candidates", str(cand),
                       "--references", str(ref), "--targets", str(targets),
                       "--metrics", "sentsim,genreacc,ppl",
                       "--sent-sim-x100") == 0
        captured = capsys.readouterr()
        report = json.loads(captured.out)
        assert report["genre_acc"] == 1.0
        assert report["sent_sim"] == pytest.approx(1.0, abs=1e-6)
        assert report["ppl"] >= 1.0
        assert "sent_sim_x100: 100.00" in captured.err

    def test_unknown_metric_errors(self, tmp_path, capsys):
        cand = tmp_path / "cand.txt"
        cand.write_text("a b\n", encoding="utf-8")
        assert run_cli("eval", "--candidates", str(cand),
                       "--metrics", "nonsense") == 1


class TestServeParserOnly:
    def test_serve_registered(self):
        from vscript.cli import build_parser
        parser = build_parser()
        args = parser.parse_args(["serve", "--port", "0"])
        assert args.port == 0
        assert callable(args.func)
