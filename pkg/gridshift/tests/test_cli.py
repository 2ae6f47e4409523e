"""
Tests for the bin/gridshift.py command-line entry point.

The script is loaded as a module so subcommands run in-process; exit codes
are the return values of _main().
"""

import importlib.util
import json
from pathlib import Path

import numpy as np
import pytest

from gridshift.models.imaging import ImageBuffer
from gridshift.utils import image_io

_SCRIPT = Path(__file__).resolve().parents[2] / "bin" / "gridshift.py"


@pytest.fixture(scope="module")
def cli():
    spec = importlib.util.spec_from_file_location("gridshift_cli", _SCRIPT)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


@pytest.fixture
def blobs_csv(tmp_path, two_blobs):
    X, labels = two_blobs
    lines = ["x,y,label"] + [f"{a:.6f},{b:.6f},{int(c)}" for (a, b), c in zip(X, labels)]
    path = tmp_path / "blobs.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


class TestCluster:
    def test_writes_json(self, cli, blobs_csv, tmp_path):
        out = tmp_path / "result.json"
        code = cli._main(["cluster", str(blobs_csv), "--h", "0.1", "--label-col", "label",
                          "--no-timings", "-q", "-o", str(out)])

        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["n_clusters"] == 2
        assert len(payload["labels"]) == 80
        assert payload["converged"] is True
        assert payload["runtime_ms"] is None
        assert payload["ari"] == pytest.approx(1.0)

    def test_stdout_is_deterministic(self, cli, blobs_csv, capsys):
        argv = ["cluster", str(blobs_csv), "--h", "0.1", "--label-col", "2", "--no-timings", "-q"]
        assert cli._main(argv) == 0
        first = capsys.readouterr().out
        assert cli._main(argv) == 0
        assert capsys.readouterr().out == first

    def test_tune(self, cli, blobs_csv, capsys):
        code = cli._main(["cluster", str(blobs_csv), "--tune", "--h-grid", "0.05,0.1,0.2",
                          "--label-col", "2", "-q"])

        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["tuning"]["best_h"] in (0.05, 0.1, 0.2)
        assert payload["h"] == payload["tuning"]["best_h"]

    @pytest.mark.parametrize("h", ["0", "-0.5", "nan"])
    def test_invalid_bandwidth(self, cli, blobs_csv, h):
        assert cli._main(["cluster", str(blobs_csv), f"--h={h}", "-q"]) == 3

    def test_ragged_csv(self, cli, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1,2\n3,4\n5\n")
        assert cli._main(["cluster", str(path), "--h", "0.1", "-q"]) == 2

    def test_non_numeric_feature(self, cli, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3,abc\n")
        assert cli._main(["cluster", str(path), "--h", "0.1", "-q"]) == 2

    def test_missing_file(self, cli, tmp_path):
        assert cli._main(["cluster", str(tmp_path / "none.csv"), "--h", "0.1", "-q"]) == 5

    def test_bundled_iris(self, cli, capsys):
        assert cli._main(["cluster", "iris", "--h", "0.78", "--label-col", "4", "-q", "--no-timings"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["labels"]) == 150
        assert payload["n_clusters"] == 3
        assert 0.5646 <= payload["ari"] <= 0.6846

    def test_prnn_from_data_path(self, cli, tmp_path, monkeypatch, capsys):
        (tmp_path / "synth.tr").write_text(
            "        xs        ys yc\n"
            " 0.05100797  0.16086164  0\n"
            "-0.74807425  0.08904024  0\n"
            "-0.77293371  0.26317168  1\n"
        )
        monkeypatch.setenv("GRIDSHIFT_DATA_PATH", str(tmp_path))

        assert cli._main(["cluster", "prnn", "--h", "0.43", "--label-col", "2", "-q"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["labels"]) == 3

    def test_prnn_missing_from_data_path(self, cli, tmp_path, monkeypatch):
        monkeypatch.setenv("GRIDSHIFT_DATA_PATH", str(tmp_path))
        assert cli._main(["cluster", "prnn", "--h", "0.43", "--label-col", "2", "-q"]) == 5

    def test_iteration_cap_exits_with_convergence_code(self, cli, tmp_path, monkeypatch):
        path = tmp_path / "line.csv"
        path.write_text("\n".join(repr(float(v)) for v in np.linspace(0.0, 2.0, 41)) + "\n")
        out = tmp_path / "result.json"
        monkeypatch.setenv("GRIDSHIFT_MAX_ITERATIONS", "1")

        code = cli._main(["cluster", str(path), "--h", "0.1", "--no-normalize", "-q", "-o", str(out)])

        assert code == 4
        payload = json.loads(out.read_text())
        assert payload["converged"] is False
        assert payload["iterations"] == 1
        assert len(payload["labels"]) == 41

    def test_h_and_tune_are_exclusive(self, cli, blobs_csv):
        with pytest.raises(SystemExit):
            cli._main(["cluster", str(blobs_csv), "--h", "0.1", "--tune"])


def test_tune_subcommand(cli, blobs_csv, capsys):
    code = cli._main(["tune", str(blobs_csv), "--h-grid", "0.1,0.2", "--label-col", "2",
                      "--algorithm", "mspp", "-q"])

    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["algorithm"] == "mspp"
    assert [e["h"] for e in payload["entries"]] == [0.1, 0.2]
    assert "best" in payload


class TestSegment:
    def test_outputs(self, cli, quadrant_image, tmp_path):
        image_path = image_io.save_image(quadrant_image, tmp_path / "quad.png")
        gt = np.zeros((8, 8), dtype=np.int64)
        gt[:4, 4:], gt[4:, :4], gt[4:, 4:] = 1, 2, 3
        gt_path = image_io.save_label_map(gt, tmp_path / "gt.csv")
        out_dir = tmp_path / "seg"

        code = cli._main(["segment", str(image_path), "--h", "0.1", "--ground-truth", str(gt_path),
                          "--no-timings", "-q", "-o", str(out_dir)])

        assert code == 0
        sidecar = json.loads((out_dir / "quad.json").read_text())
        assert sidecar["n_segments"] == 4
        assert sidecar["runtime_ms"] is None
        assert sidecar["ari"] == pytest.approx(1.0)
        rendered = image_io.load_image(out_dir / "quad_render.png")
        assert np.array_equal(rendered.pixels, quadrant_image.pixels)
        assert image_io.load_label_map(out_dir / "quad_labels.pgm").shape == (8, 8)

    def test_missing_image(self, cli, tmp_path):
        assert cli._main(["segment", str(tmp_path / "none.png"), "--h", "0.1", "-q",
                          "-o", str(tmp_path / "seg")]) == 5


def test_track(cli, tmp_path):
    frames_dir = tmp_path / "frames"
    frames_dir.mkdir()
    for i, sx in enumerate([10, 12, 14]):
        pixels = np.zeros((30, 40, 3), dtype=np.uint8)
        pixels[10:18, sx:sx + 8] = (255, 0, 0)
        image_io.save_image(ImageBuffer(pixels), frames_dir / f"frame_{i:05d}.png")
    out = tmp_path / "track.csv"

    code = cli._main(["track", str(frames_dir), "--center", "13.5,13.5", "--length", "8", "--width", "8",
                      "--h", "0.25", "-q", "-o", str(out), "--annotate", str(tmp_path / "annotated")])

    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "frame,cx,cy,l,w,lost"
    assert len(lines) == 4
    assert len(list((tmp_path / "annotated").glob("*.png"))) == 3


def test_track_bad_selection(cli, tmp_path):
    frames_dir = tmp_path / "frames"
    frames_dir.mkdir()
    for i in range(2):
        image_io.save_image(ImageBuffer.solid(10, 10, (0, 0, 0)), frames_dir / f"frame_{i:05d}.png")
    code = cli._main(["track", str(frames_dir), "--center", "5,5", "--length", "4", "--width", "4",
                      "--h", "0.25", "--select", "largest", "-q"])
    assert code == 3


class TestBench:
    def test_generator_timing(self, cli, capsys):
        code = cli._main(["bench", "--generator", "gmm:n=500,d=2,k=3", "--h", "0.1", "--seed", "3",
                          "--repeats", "2", "-q"])

        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["n"] == 500
        assert report["seed"] == 3
        assert [r["algorithm"] for r in report["results"]] == ["gridshift", "mspp"]
        assert "mspp/gridshift" in report["speedups"]

    def test_profile(self, cli, capsys):
        code = cli._main(["bench", "--generator", "gmm:n=300,d=2,k=3", "--h-grid", "0.1,0.2",
                          "--algos", "gridshift", "-q"])

        assert code == 0
        profile = json.loads(capsys.readouterr().out)["profile"]
        assert [e["h"] for e in profile] == [0.1, 0.2]

    def test_needs_bandwidth(self, cli):
        assert cli._main(["bench", "--generator", "gmm:n=100,d=2,k=2", "-q"]) == 3

    def test_bad_generator(self, cli):
        assert cli._main(["bench", "--generator", "gmm:n=ten", "--h", "0.1", "-q"]) == 3


def test_theory_stdout(cli, capsys):
    code = cli._main(["theory", "--n", "2000", "--d", "2", "--s", "1.0", "--h", "0.5", "--seed", "1", "-q"])

    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,k,k_hat,s_emp_axis0,s_emp_axis1,s_hat_axis0,s_hat_axis1"
    assert lines[1].startswith("0,")


def test_theory_descent_sweep(cli, tmp_path):
    out = tmp_path / "theory.csv"
    code = cli._main(["theory", "--n", "1000", "--h", "0.5", "--descent-seeds", "2", "-q", "-o", str(out)])
    assert code == 0
    assert out.read_text().startswith("t,k,k_hat,s_emp_axis0,s_hat_axis0")


def test_theory_kernel_variance(cli, capsys):
    code = cli._main(["theory", "--n", "2000", "--h", "0.5", "--kernel-variance", "0.75", "--seed", "1", "-q"])

    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    s0 = float(lines[1].split(",")[3])
    s1_hat = float(lines[2].split(",")[4])
    assert s1_hat == pytest.approx(s0 / (1 + 0.75 * 0.25 / s0**2), rel=1e-8)


def test_theory_rejects_non_positive_kernel_variance(cli):
    assert cli._main(["theory", "--n", "1000", "--h", "0.5", "--kernel-variance", "0", "-q"]) == 3


class TestRunConfig:
    def test_built_from_args(self, cli, blobs_csv):
        from gridshift.config.settings import get_settings

        args = cli._parse_args(["cluster", str(blobs_csv), "--tune", "--h-grid", "0.1,0.2", "--no-normalize"])
        run_config = cli._run_config(args, get_settings())

        assert run_config.inputs == [str(blobs_csv)]
        assert run_config.tune and run_config.h is None
        assert run_config.h_grid == [0.1, 0.2]
        assert run_config.normalize is False

    @pytest.mark.parametrize("kwargs", [
        {"subcommand": "cluster", "inputs": ["a.csv"]},
        {"subcommand": "cluster", "inputs": ["a.csv"], "h": 0.1, "tune": True},
        {"subcommand": "segment", "inputs": ["a.png"]},
        {"subcommand": "bench", "h_grid": []},
        {"subcommand": "track", "inputs": [], "h": 0.2},
    ])
    def test_inconsistent_flags(self, kwargs):
        from pydantic import ValidationError

        from gridshift.models.reports import RunConfig

        with pytest.raises(ValidationError):
            RunConfig(**kwargs)

    def test_empty_grid_exit_code(self, cli, blobs_csv):
        assert cli._main(["tune", str(blobs_csv), "--h-grid", ",", "-q"]) == 3
