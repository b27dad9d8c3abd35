# tests/test_scan_controller.py
"""スキャン制御のテスト"""

import io
import json

import numpy as np
import pytest

from app.core.errors import ConfigError
from app.core.scan_controller import (
    ScanConfig,
    ScanController,
    detected_counts,
    grid_values,
    load_scan_config,
    parse_grid,
    resolve_scan_config,
    upb_thresholds,
    werner_thresholds,
)


def werner_config(**kwargs):
    base = dict(
        experiment="werner",
        dims=[2, 3],
        grids={"phi": "-1:1:21"},
        t_values=[0.5, 1.0],
        h_values=[0.0, 2.0],
    )
    base.update(kwargs)
    return ScanConfig(**base)


class TestScanConfig:
    def test_parse_grid(self):
        assert parse_grid("0:1:5") == (0.0, 1.0, 5)
        assert parse_grid([-1, 1, 201]) == (-1.0, 1.0, 201)
        assert list(grid_values((0.5, 0.9, 1))) == [0.5]

    @pytest.mark.parametrize("spec", ["0:1", "a:b:c", "0:1:0", None])
    def test_bad_grid(self, spec):
        with pytest.raises(ConfigError):
            parse_grid(spec)

    def test_validation(self):
        with pytest.raises(ConfigError):
            ScanConfig(experiment="mandelbrot")
        with pytest.raises(ConfigError):
            werner_config(samples=0)
        with pytest.raises(ConfigError):
            werner_config(grids={})
        with pytest.raises(ConfigError):
            werner_config(dims=[1, 3])
        with pytest.raises(ConfigError):
            ScanConfig(experiment="chessboard", t_values=["sic"])
        with pytest.raises(ConfigError):
            ScanConfig(experiment="random", dims=[2], t_values=[1.0])

    def test_trace_labels(self):
        config = ScanConfig(experiment="chessboard", t_values=["CCNR", "1.5", 2])
        assert config.t_values == ["ccnr", 1.5, 2.0]

    def test_resolve_defaults(self):
        config = resolve_scan_config("chessboard")
        assert config.samples == 5000
        assert config.t_values == ["ccnr", 1.2, 1.5, "esic"]
        config = resolve_scan_config("horodecki", {"grid": {"p": [0, 1, 3]}, "seed": None})
        assert config.grids["p"] == (0.0, 1.0, 3)
        assert config.grids["s"] == (0.0, 1.0, 101)
        assert config.seed == 2024

    def test_load_json_and_yaml(self, tmp_path):
        (tmp_path / "scan.json").write_text(json.dumps({"samples": 10, "t": ["esic"]}), encoding="utf-8")
        (tmp_path / "scan.yaml").write_text("samples: 12\nt:\n  - ccnr\n  - 1.5\n", encoding="utf-8")
        assert load_scan_config(tmp_path / "scan.json")["samples"] == 10
        assert load_scan_config(tmp_path / "scan.yaml")["t"] == ["ccnr", 1.5]

    def test_load_errors(self, tmp_path):
        (tmp_path / "list.yaml").write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_scan_config(tmp_path / "list.yaml")
        with pytest.raises(ConfigError):
            load_scan_config(tmp_path / "missing.json")


class TestWernerScan:
    @pytest.fixture(scope="class")
    def result(self):
        return ScanController(werner_config(), threads=1).run()

    def test_columns(self, result):
        assert list(result.columns) == ["d", "phi", "criterion", "param", "statistic", "bound", "margin", "detected"]
        assert len(result) == 2 * 21 * (2 + 2 + 2)

    def test_observation2_exact(self, result):
        rows = result[result["criterion"] == "obs2"]
        assert (rows["detected"] == (rows["phi"] < -1e-9)).all()

    def test_sarbicki_threshold(self, result):
        rows = result[result["criterion"] == "sarbicki"]
        threshold = -(rows["d"] - 2) / rows["d"]
        assert (rows["detected"] == (rows["phi"] < threshold - 1e-9)).all()

    def test_thresholds(self, result):
        table = werner_thresholds(result)
        obs2 = table[table["criterion"] == "obs2"]
        assert np.allclose(obs2["phi_max"], -0.1)

    def test_threads_do_not_change_output(self):
        one = ScanController(werner_config(), threads=1, version="t").write_csv()
        four = ScanController(werner_config(), threads=4, version="t").write_csv()
        assert one == four


class TestOtherScans:
    def test_horodecki(self):
        config = ScanConfig(
            experiment="horodecki", grids={"s": "0:1:3", "p": "0:1:3"}, t_values=["ccnr", "esic"]
        )
        df = ScanController(config, threads=2).run()
        assert len(df) == 3 * 3 * 2
        assert not df[df["p"] == 0.0]["detected"].any()
        counts = detected_counts(df)
        assert list(counts.index) == ["ccnr", "esic"]

    def test_upb(self):
        config = ScanConfig(experiment="upb", grids={"p": "0:1:11"}, t_values=["ccnr", "esic"])
        df = ScanController(config).run()
        p_star = upb_thresholds(df)
        assert list(p_star.index) == ["ccnr", "esic"]
        assert not df[df["p"] == 0.0]["detected"].any()
        if not np.isnan(p_star["ccnr"]):
            assert p_star["esic"] <= p_star["ccnr"]

    def test_chessboard(self):
        config = ScanConfig(experiment="chessboard", samples=30, t_values=["ccnr", 1.5, "esic"])
        controller = ScanController(config, threads=2)
        df = controller.run()
        assert list(df["t_label"]) == ["ccnr", "1.5", "esic"]
        assert (df["N"] == 30).all()
        assert ((df["fraction"] >= 0) & (df["fraction"] <= 1)).all()
        assert controller.summary() is df

    def test_random(self):
        config = ScanConfig(experiment="random", samples=20, dims=[2, 3], t_values=[0.0, 5.0], h_values=[5.0])
        df = ScanController(config).run()
        assert len(df) == 2 * 3
        assert set(df["criterion"]) == {"obs1", "sarbicki"}
        assert (df["detected"] <= 20).all()


class TestCsv:
    def test_metadata_line(self):
        controller = ScanController(werner_config(dims=[2]), threads=1, version="1.2.3")
        buffer = io.StringIO()
        text = controller.write_csv(buffer)
        lines = text.splitlines()
        assert lines[0].startswith("# version=1.2.3 experiment=werner seed=2024")
        assert "grid.phi=-1:1:21" in lines[0]
        assert lines[1] == "d,phi,criterion,param,statistic,bound,margin,detected"
        assert buffer.getvalue() == text

    def test_upb_threshold_lines(self):
        """UPB の CSV はメタデータの直後に t ごとの p* を持つ"""
        config = ScanConfig(experiment="upb", grids={"p": "0:1:5"}, t_values=["ccnr", 1.5, "esic"])
        controller = ScanController(config, threads=1)
        lines = controller.write_csv(io.StringIO()).splitlines()
        expected = upb_thresholds(controller.result)
        p_lines = lines[1:4]
        assert [line.split()[2] for line in p_lines] == ["t=ccnr", "t=1.5", "t=esic"]
        for line, label in zip(p_lines, ["ccnr", "1.5", "esic"]):
            assert line.startswith(f"# p_star t={label} value=")
            value = float(line.rsplit("=", 1)[1])
            if np.isnan(expected[label]):
                assert np.isnan(value)
            else:
                assert value == expected[label]
        assert lines[4] == "p,t_label,t,statistic,bound,margin,detected"

    def test_no_threshold_lines_for_other_experiments(self):
        lines = ScanController(werner_config(dims=[2]), threads=1).write_csv(io.StringIO()).splitlines()
        assert not any(line.startswith("# p_star") for line in lines)

    def test_writes_file(self, tmp_path):
        out = tmp_path / "nested" / "werner.csv"
        controller = ScanController(werner_config(dims=[2], out=str(out)), threads=1)
        text = controller.write_csv()
        assert out.read_text(encoding="utf-8") == text

    def test_summary_requires_run(self):
        with pytest.raises(RuntimeError):
            ScanController(werner_config()).summary()
