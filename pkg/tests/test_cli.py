import json

import numpy as np
import pytest

from meshseq.cli import main
from meshseq.creation import grid_patch, icosphere, tetrahedron, triangle, wavy_patch
from meshseq.mesh_io import load_obj, normalize, save_obj
from meshseq.tokenizer import quantize


@pytest.fixture()
def tetra_obj(tmp_path):
    path = tmp_path / "tetra.obj"
    save_obj(tetrahedron(), path)
    return path


@pytest.fixture()
def sphere_obj(tmp_path):
    path = tmp_path / "sphere.obj"
    save_obj(icosphere(2), path)
    return path


class TestTokenizeRoundtrip:
    def test_tokenize_then_detokenize(self, tmp_path, sphere_obj, capsys):
        tokens = tmp_path / "tokens.txt"
        out = tmp_path / "back.obj"
        assert main(["tokenize", str(sphere_obj), "-o", str(tokens)]) == 0
        assert main(["detokenize", str(tokens), "-o", str(out)]) == 0
        lattice = quantize(normalize(load_obj(sphere_obj))).lattice
        back = quantize(load_obj(out)).lattice  # cell centers re-quantize exactly
        assert np.array_equal(lattice, back)

    def test_bad_token_file(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("12\nhello\n")
        assert main(["detokenize", str(bad), "-o", str(tmp_path / "x.obj")]) == 2

    def test_malformed_sequence_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("5\n")  # no START/END
        assert main(["detokenize", str(bad), "-o", str(tmp_path / "x.obj")]) == 2


class TestStats:
    def test_ratio_band(self, tmp_path, capsys):
        # the ~23% band is a property of production-sized meshes (V >= 500)
        path = tmp_path / "big.obj"
        save_obj(icosphere(3), path)
        assert main(["stats", str(path)]) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["n_tokens"] == stats["n_blocks"] + stats["n_vertices"] + 2
        assert 0.18 <= stats["ratio_vs_bpt"] <= 0.35


class TestMetrics:
    def test_self_distance_zero(self, sphere_obj, capsys):
        assert main(["metrics", str(sphere_obj), str(sphere_obj), "--points", "500"]) == 0
        scores = json.loads(capsys.readouterr().out)
        assert scores["cd"] == 0.0 and scores["hd"] == 0.0

    def test_missing_file(self, sphere_obj, tmp_path):
        assert main(["metrics", str(sphere_obj), str(tmp_path / "nope.obj")]) == 2


class TestFidelity:
    def test_report_and_artifacts(self, tmp_path, sphere_obj, capsys):
        qout = tmp_path / "q.obj"
        eout = tmp_path / "e.obj"
        code = main(
            ["fidelity", str(sphere_obj), "--points", "400",
             "--out-quantized", str(qout), "--out-enhanced", str(eout)]
        )
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["cd_enhanced"] <= report["cd_quantized"]
        assert qout.exists() and eout.exists()


class TestTrainScore:
    def test_train_then_score(self, tmp_path, capsys):
        data = tmp_path / "data"
        data.mkdir()
        save_obj(grid_patch(4, 4), data / "grid.obj")
        save_obj(wavy_patch(4, 4, 0.2, 1, 1), data / "wavy.obj")
        model = tmp_path / "model.json"
        curve = tmp_path / "curve.csv"
        code = main(
            ["train-edge", str(data), "-o", str(model), "--curve", str(curve),
             "--epochs", "20", "--json"]
        )
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["final_loss"] < summary["initial_loss"]
        assert curve.read_text().startswith("epoch,loss")
        adj = tmp_path / "adj.txt"
        save_obj(grid_patch(4, 4), tmp_path / "target.obj")
        assert main(["score", str(model), str(tmp_path / "target.obj"), "-o", str(adj)]) == 0
        assert adj.read_text().splitlines()[0] == "16"

    def test_empty_dir(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["train-edge", str(empty), "-o", str(tmp_path / "m.json")]) == 2


class TestReconstructFilter:
    def test_reconstruct_oracle_recovers_faces(self, tmp_path, tetra_obj):
        out = tmp_path / "recon.obj"
        assert main(["reconstruct", str(tetra_obj), "-o", str(out), "--scorer", "oracle"]) == 0
        recon = load_obj(out)
        faces = {tuple(sorted(f)) for f in recon.faces.tolist()}
        for f in tetrahedron().faces.tolist():
            assert tuple(sorted(f)) in faces

    def test_filter_writes_stats(self, tmp_path, sphere_obj):
        out = tmp_path / "filtered.obj"
        stats = tmp_path / "steps.json"
        adj = tmp_path / "adj.txt"
        code = main(
            ["filter", str(sphere_obj), "-o", str(out), "--scorer", "oracle",
             "--stats", str(stats), "--adjacency", str(adj)]
        )
        assert code == 0
        steps = json.loads(stats.read_text())
        assert len(steps) == 5
        assert steps[0]["mask_kind"] == "none"
        assert steps[4]["mask_kind"] == "candidate"

    def test_unknown_scorer_is_usage_error(self, tmp_path, tetra_obj):
        assert main(["reconstruct", str(tetra_obj), "-o", str(tmp_path / "x.obj"), "--scorer", "nope"]) == 1


class TestFilterDataset:
    def test_report(self, tmp_path, capsys):
        save_obj(tetrahedron(), tmp_path / "tetra.obj")
        save_obj(triangle(), tmp_path / "tri.obj")
        manifest = tmp_path / "manifest.txt"
        manifest.write_text(f"{tmp_path}/tetra.obj\n{tmp_path}/tri.obj\n")
        report = tmp_path / "report.json"
        assert main(["filter-dataset", "--manifest", str(manifest), "--out", str(report)]) == 0
        entries = json.loads(report.read_text())
        assert entries[0]["accepted"] is True
        assert entries[1]["accepted"] is False

    def test_unreadable_entry_fails_batch(self, tmp_path):
        manifest = tmp_path / "manifest.txt"
        manifest.write_text(f"{tmp_path}/missing.obj\n")
        report = tmp_path / "report.json"
        assert main(["filter-dataset", "--manifest", str(manifest), "--out", str(report)]) == 2
        assert "error" in json.loads(report.read_text())[0]


class TestPipeline:
    def test_tetra_oracle_snap_is_lossless(self, tmp_path, tetra_obj, capsys):
        outdir = tmp_path / "run"
        code = main(
            ["pipeline", str(tetra_obj), "--outdir", str(outdir),
             "--scorer", "oracle", "--enhancer", "snap_oracle", "--points", "400"]
        )
        assert code == 0
        summary = json.loads((outdir / "summary.json").read_text())
        assert summary["shape_scores"]["cd"] == 0.0
        recon = load_obj(outdir / "reconstructed.obj")
        faces = {tuple(sorted(f)) for f in recon.faces.tolist()}
        for f in tetrahedron().faces.tolist():
            assert tuple(sorted(f)) in faces
        for name in ("tokens.txt", "adjacency.txt", "filter_steps.json"):
            assert (outdir / name).exists()

    def test_missing_input_leaves_no_outputs(self, tmp_path):
        outdir = tmp_path / "run"
        assert main(["pipeline", str(tmp_path / "nope.obj"), "--outdir", str(outdir)]) == 2
        assert not outdir.exists()

    def test_deterministic_summary(self, tmp_path, sphere_obj):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        for outdir in (out1, out2):
            code = main(
                ["pipeline", str(sphere_obj), "--outdir", str(outdir),
                 "--seed", "11", "--points", "500"]
            )
            assert code == 0
        assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()

    def test_config_file_with_unknown_key(self, tmp_path, tetra_obj):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"scorer": "oracle", "wat": 3}')
        assert main(["pipeline", str(tetra_obj), "--outdir", str(tmp_path / "o"), "--config", str(cfg)]) == 1

    def test_config_bits_must_be_seven(self, tmp_path, tetra_obj):
        assert main(["pipeline", str(tetra_obj), "--outdir", str(tmp_path / "o"), "--bits", "8"]) == 1

    def test_config_file_flags_override(self, tmp_path, tetra_obj):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"enhancer": "cell_center", "points": 300}')
        outdir = tmp_path / "o"
        assert main(
            ["pipeline", str(tetra_obj), "--outdir", str(outdir),
             "--config", str(cfg), "--enhancer", "snap_oracle"]
        ) == 0
        summary = json.loads((outdir / "summary.json").read_text())
        assert summary["config"]["enhancer"] == "snap_oracle"
        assert summary["config"]["points"] == 300


class TestUsage:
    def test_unknown_command(self):
        assert main(["frobnicate"]) == 1

    def test_missing_required_flag(self, tetra_obj):
        assert main(["tokenize", str(tetra_obj)]) == 1
