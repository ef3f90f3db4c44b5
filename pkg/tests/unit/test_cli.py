"""
单元测试 - 命令行入口与退出码
"""

import pandas as pd
import pytest

from tsfex_core import __version__
from tsfex_core.cli import main


class TestExitCodes:
    """退出码映射测试"""

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_unknown_command(self):
        assert main(["bogus"]) == 1

    def test_missing_config_file(self, tmp_path):
        assert main(["--config", str(tmp_path / "absent.ini"), "gen"]) == 1

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[pipeline]\nrouting = triple\n", encoding="utf-8")
        assert main(["--config", str(path), "gen"]) == 1

    def test_invalid_event_count(self, tmp_path):
        assert main(["gen", "--data", str(tmp_path), "--n-events", "0"]) == 1

    def test_empty_corpus_is_data_error(self, tmp_path):
        (tmp_path / "data").mkdir()
        argv = ["--out", str(tmp_path / "out"), "featurize", "--data", str(tmp_path / "data")]
        assert main(argv) == 2

    def test_missing_bundle_is_data_error(self, tmp_path):
        argv = ["predict", "--bundle", str(tmp_path / "none.npz"), "--data", str(tmp_path)]
        assert main(["--out", str(tmp_path), *argv]) == 2


class TestGen:
    def test_writes_corpus(self, tmp_path, capsys):
        data = tmp_path / "data"
        assert main(["--seed", "3", "gen", "--data", str(data), "--n-events", "5"]) == 0
        assert len(list(data.glob("*.txt"))) == 5
        assert (data / "key.csv").exists()
        assert "5" in capsys.readouterr().out

    def test_seed_controls_output(self, tmp_path):
        for name, seed in (("a", "1"), ("b", "1"), ("c", "2")):
            argv = ["--seed", seed, "gen", "--data", str(tmp_path / name), "--n-events", "3"]
            assert main(argv) == 0
        a = (tmp_path / "a" / "ev000000.txt").read_bytes()
        assert a == (tmp_path / "b" / "ev000000.txt").read_bytes()
        assert a != (tmp_path / "c" / "ev000000.txt").read_bytes()

    @pytest.mark.parametrize("sd", ["-1"])
    def test_negative_noise(self, tmp_path, sd):
        assert main(["gen", "--data", str(tmp_path), "--n-events", "2", "--sd", sd]) == 1


class TestScore:
    def test_evaluation_section_applies(self, tmp_path):
        """测试 [evaluation] 节的阈值与权重用于评分"""
        (tmp_path / "key.csv").write_text(
            "event_id,grain,distance_m\na,fine,1.2\nb,fine,4.5\nc,coarse,1.8\nd,coarse,4.5\n",
            encoding="utf-8",
        )
        (tmp_path / "pred.csv").write_text(
            "event_id,predicted_distance_m\na,1.2\nb,1.2\nc,1.8\nd,4.5\n", encoding="utf-8"
        )
        config = tmp_path / "eval.ini"
        config.write_text(
            "[evaluation]\nfine_thresholds = 1.2\ncoarse_thresholds = 1.8\nw_false = 2.0\n",
            encoding="utf-8",
        )
        argv = ["--config", str(config), "--out", str(tmp_path / "out"), "score"]
        argv += ["--predictions", str(tmp_path / "pred.csv"), "--key", str(tmp_path / "key.csv")]
        assert main(argv) == 0
        report = pd.read_csv(tmp_path / "out" / "report.csv")
        assert report["subset"].tolist() == ["fine", "coarse", "mean"]
        assert report["ndcf"].tolist() == pytest.approx([2.0, 0.0, 1.0])
