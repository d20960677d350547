from pathlib import Path

import numpy as np
import pytest

from corrgame.cli import main
from corrgame.config import (
    ConfigError,
    DatasetSpec,
    RunConfig,
    config_to_text,
    parse_config,
    parse_config_text,
)
from corrgame.core import HyperParams
from corrgame.data_io import checkpoint_load
from corrgame.training import run_eval, run_training

PRESETS = Path(__file__).resolve().parent.parent / "presets"


class TestConfigGrammar:
    def test_basic_parse(self):
        cfg = parse_config_text(
            """
            # a comment
            dataset.kind = synthetic
            dataset.n_inputs = 12
            dataset.noise = 0.25    # trailing comment
            params.p = 0.02
            params.variant = rectified-analog
            run.steps = 42
            run.shuffle = true
            run.out = somewhere
            """
        )
        assert cfg.dataset.kind == "synthetic"
        assert cfg.dataset.n_inputs == 12
        assert cfg.dataset.noise == 0.25
        assert cfg.params.p == 0.02
        assert cfg.params.variant == "rectified-analog"
        assert cfg.n_steps == 42
        assert cfg.shuffle is True
        assert cfg.out_dir == "somewhere"

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config_text("params.learning_rate = 3")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("run.steps = 1\nrun.steps = 2")

    def test_malformed_line_rejected(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config_text("this is not an assignment")

    def test_embedded_invariants_propagate(self):
        with pytest.raises(ConfigError):
            parse_config_text("run.steps = 0")
        with pytest.raises(Exception):
            parse_config_text("params.p = 0.5\nparams.q = 0.1")

    def test_round_trip_through_text(self):
        cfg = RunConfig(
            dataset=DatasetSpec(kind="synthetic", n_inputs=9, n_steps=50,
                                n_clusters=3, noise=0.05),
            params=HyperParams(p=0.01, q=0.2, variant="sigmoid", eta_theta=0.2),
            n_outputs=4, n_steps=77, seed=5, shuffle=True,
            density_window=10, similarity_window=20,
            checkpoint_interval=25, out_dir="out/xyz",
        )
        again = parse_config_text(config_to_text(cfg))
        assert again == cfg

    def test_all_presets_parse(self):
        expected = {
            "fig2_p001": (0.01, 0.1, "rectified-bounded"),
            "fig2_p003": (0.03, 0.1, "rectified-bounded"),
            "fig2_p005": (0.05, 0.1, "rectified-bounded"),
            "fig3_rho_omega10": (0.03, 0.1, "rectified-bounded"),
            "fig3_rho_omega20": (0.03, 0.05, "rectified-bounded"),
            "fig5_gamma01": (0.03, 0.1, "rectified-analog"),
            "fig5_gamma05": (0.03, 0.1, "rectified-analog"),
        }
        for name, (p, omega, variant) in expected.items():
            cfg = parse_config(PRESETS / f"{name}.cfg")
            assert cfg.params.p == p
            assert cfg.params.omega == omega
            assert cfg.params.variant == variant
            assert cfg.n_steps == 60000
            assert cfg.params.q == 0.09
        assert parse_config(PRESETS / "fig3_rho_omega10.cfg").params.eta_l == 0.01
        assert parse_config(PRESETS / "fig5_gamma05.cfg").params.gamma == 0.5


def write_tiny_config(path, out_dir, steps=1, density_window=1, extra=""):
    path.write_text(
        f"""
        dataset.kind = synthetic
        dataset.n_inputs = 16
        dataset.n_steps = 64
        dataset.n_clusters = 4
        params.p = 0.05
        params.q = 0.15
        run.n_outputs = 4
        run.steps = {steps}
        run.seed = 7
        run.density_window = {density_window}
        run.similarity_window = 8
        run.out = {out_dir}
        {extra}
        """
    )
    return path


class TestTrainCommand:
    def test_single_step_emits_all_artifacts(self, tmp_path, capsys):
        cfg = write_tiny_config(tmp_path / "run.cfg", tmp_path / "out")
        assert main(["train", "--config", str(cfg)]) == 0
        out = tmp_path / "out"
        for name in ("density.csv", "similarity.csv", "survival.csv",
                     "inhibition_similarity.csv", "summary.csv",
                     "final.ckpt", "config.cfg", "weights.pgm"):
            assert (out / name).exists(), name
        assert (out / "density.csv").read_text().splitlines()[0] == "step,density"
        assert "trained 1 steps" in capsys.readouterr().out

    def test_identical_seed_and_config_reproduce_artifacts(self, tmp_path):
        cfg = write_tiny_config(tmp_path / "run.cfg", tmp_path / "a", steps=50)
        assert main(["train", "--config", str(cfg)]) == 0
        assert main(["train", "--config", str(cfg), "--out",
                     str(tmp_path / "b")]) == 0
        for name in ("final.ckpt", "density.csv", "similarity.csv",
                     "survival.csv", "inhibition_similarity.csv",
                     "weights.pgm"):
            assert (tmp_path / "a" / name).read_bytes() \
                == (tmp_path / "b" / name).read_bytes(), name

    def test_seed_override_changes_artifacts(self, tmp_path):
        cfg = write_tiny_config(tmp_path / "run.cfg", tmp_path / "a", steps=20)
        main(["train", "--config", str(cfg)])
        main(["train", "--config", str(cfg), "--seed", "8", "--out",
              str(tmp_path / "b")])
        assert (tmp_path / "a" / "final.ckpt").read_bytes() \
            != (tmp_path / "b" / "final.ckpt").read_bytes()

    def test_checkpoint_interval_and_steps_override(self, tmp_path):
        cfg = write_tiny_config(tmp_path / "run.cfg", tmp_path / "out",
                                steps=10, extra="run.checkpoint_interval = 4")
        main(["train", "--config", str(cfg), "--steps", "9"])
        names = sorted(p.name for p in (tmp_path / "out").glob("*.ckpt"))
        assert names == ["checkpoint_00000004.ckpt",
                         "checkpoint_00000008.ckpt", "final.ckpt"]
        assert checkpoint_load(tmp_path / "out" / "final.ckpt").step == 9

    def test_missing_config_is_usage_error(self, capsys):
        assert main(["train", "--config", "/nonexistent.cfg"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_shuffle_order_logged_and_seed_derived(self, tmp_path):
        cfg = write_tiny_config(tmp_path / "run.cfg", tmp_path / "out",
                                steps=30, extra="run.shuffle = true")
        main(["train", "--config", str(cfg)])
        order = np.loadtxt(tmp_path / "out" / "order.csv", skiprows=1, dtype=int)
        assert len(order) == 30
        assert order.max() < 64 and order.min() >= 0
        assert not np.array_equal(order, np.arange(30) % 64)


class TestEvalCommand:
    def test_eval_matches_trailing_train_density(self, tmp_path):
        cfg_path = write_tiny_config(tmp_path / "run.cfg", tmp_path / "out",
                                     steps=3000, density_window=100)
        config = parse_config(cfg_path)
        result = run_training(config)
        dataset = config.dataset.load(seed=config.seed)
        log = run_eval(checkpoint_load(tmp_path / "out" / "final.ckpt"),
                       dataset, density_window=dataset.n_steps)
        train_final = result.log.density_series[-1][1]
        eval_mean = np.mean([d for _, d in log.density_series])
        assert abs(eval_mean - train_final) <= 0.05

    def test_eval_of_zero_dataset_gives_zero_density(self, tmp_path):
        from corrgame.core import Dataset
        cfg_path = write_tiny_config(tmp_path / "run.cfg", tmp_path / "out",
                                     steps=5)
        config = parse_config(cfg_path)
        run_training(config)
        cp = checkpoint_load(tmp_path / "out" / "final.ckpt")
        log = run_eval(cp, Dataset(np.zeros((16, 12))), density_window=3)
        assert all(d == 0.0 for _, d in log.density_series)

    def test_eval_twice_produces_identical_files(self, tmp_path, capsys):
        cfg_path = write_tiny_config(tmp_path / "run.cfg", tmp_path / "out",
                                     steps=40)
        main(["train", "--config", str(cfg_path)])
        ckpt = str(tmp_path / "out" / "final.ckpt")
        assert main(["eval", "--checkpoint", ckpt, "--config", str(cfg_path),
                     "--out", str(tmp_path / "e1")]) == 0
        assert main(["eval", "--checkpoint", ckpt, "--config", str(cfg_path),
                     "--out", str(tmp_path / "e2")]) == 0
        for name in ("density.csv", "similarity.csv", "summary.csv"):
            assert (tmp_path / "e1" / name).read_bytes() \
                == (tmp_path / "e2" / name).read_bytes()


class TestSolveCommand:
    def test_topk_form(self, tmp_path, capsys):
        cfile = tmp_path / "c.txt"
        cfile.write_text("3 2 1\n")
        code = main(["solve", "--c-file", str(cfile), "--form", "topk",
                     "--rho", "2", "--omega", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert "value = 5.0" in out
        assert "k = 2" in out

    def test_analog_form_with_output_file(self, tmp_path, capsys):
        cfile = tmp_path / "c.txt"
        cfile.write_text("1.0\n0.5\n")
        solution = tmp_path / "sol.txt"
        code = main(["solve", "--c-file", str(cfile), "--form", "analog",
                     "--gamma", "1", "--kappa", "1", "--rho", "1",
                     "--out", str(solution)])
        assert code == 0
        text = solution.read_text()
        assert "k = 2" in text
        assert "0.16666666666666666" in text  # threshold 1/6

    def test_frobenius_limit_value(self, tmp_path, capsys):
        cfile = tmp_path / "c.txt"
        cfile.write_text("1 2\n")
        main(["solve", "--c-file", str(cfile), "--form", "analog",
              "--gamma", "1", "--kappa", "0", "--rho", "1"])
        assert "value = 2.5" in capsys.readouterr().out

    def test_non_integral_ratio_is_usage_error(self, tmp_path, capsys):
        cfile = tmp_path / "c.txt"
        cfile.write_text("1 2 3\n")
        assert main(["solve", "--c-file", str(cfile), "--form", "topk",
                     "--rho", "1", "--omega", "0.4"]) == 2
        assert "integer" in capsys.readouterr().err

    def test_missing_file_is_usage_error(self, capsys):
        assert main(["solve", "--c-file", "/nope.txt", "--form", "topk"]) == 2


class TestSigmoidVariantTraining:
    def test_full_harness_with_sigmoid_variant(self, tmp_path):
        from corrgame.training import run_training
        config = parse_config_text(
            f"""
            dataset.kind = synthetic
            dataset.n_inputs = 12
            dataset.n_steps = 200
            dataset.n_clusters = 3
            params.p = 0.2
            params.q = 0.25
            params.variant = sigmoid
            params.eta_theta = 0.05
            run.n_outputs = 5
            run.steps = 600
            run.seed = 1
            run.density_window = 50
            run.similarity_window = 200
            run.out = {tmp_path / 'out'}
            """
        )
        result = run_training(config)
        assert result.state.theta.any()  # threshold homeostasis ran
        np.testing.assert_array_equal(np.diag(result.state.L), np.ones(5))
        # sigmoid densities use the 0.5 activity convention, so they can
        # legitimately be 0 while every neuron is weakly active
        assert all(0.0 <= d <= 1.0 for _, d in result.log.density_series)
        assert (tmp_path / "out" / "final.ckpt").exists()
        cp = checkpoint_load(tmp_path / "out" / "final.ckpt")
        assert cp.params.variant == "sigmoid"
        np.testing.assert_array_equal(cp.state.theta, result.state.theta)


class TestRandomSweepOrder:
    def test_config_driven_random_order_is_deterministic(self, tmp_path):
        text = f"""
            dataset.kind = synthetic
            dataset.n_inputs = 10
            dataset.n_steps = 50
            dataset.n_clusters = 2
            params.p = 0.05
            params.q = 0.15
            dynamics.order = random
            dynamics.seed = 9
            run.n_outputs = 6
            run.steps = 120
            run.seed = 2
            run.density_window = 20
            run.similarity_window = 50
            run.out = {tmp_path / 'a'}
            """
        from corrgame.training import run_training
        first = run_training(parse_config_text(text))
        second = run_training(parse_config_text(text))
        np.testing.assert_array_equal(first.state.W, second.state.W)
        np.testing.assert_array_equal(first.state.L, second.state.L)


class TestPresetSmoke:
    @pytest.mark.parametrize("name,expect", [
        ("fig3_rho_omega10", 10), ("fig3_rho_omega20", 20), ("fig5_gamma01", None),
    ])
    def test_short_preset_run_respects_variant_bounds(self, tmp_path, name, expect):
        from dataclasses import replace
        from corrgame.data_io import synthetic_correlated
        from corrgame.training import run_training
        config = replace(
            parse_config(PRESETS / f"{name}.cfg"),
            n_steps=200, n_outputs=8, checkpoint_interval=0,
            out_dir=str(tmp_path / name), similarity_window=100,
        )
        dataset = synthetic_correlated(49, 300, 7, seed=0)
        result = run_training(config, dataset=dataset)
        if expect is not None:  # bounded variant: cap = rho / k
            assert result.state.W.max() <= config.params.rho / expect + 1e-12
            assert result.log.weight_survival.saturated is not None
        else:
            assert config.params.variant == "rectified-analog"
            assert result.log.weight_survival.saturated is None
        result.state.validate(config.params)


class TestVerifyCommand:
    def test_small_sizes_pass(self, capsys):
        code = main(["verify", "--seed", "1", "--instances", "40",
                     "--topk-cases", "40", "--grad-draws", "10",
                     "--duality-instances", "2"])
        out = capsys.readouterr().out
        assert code == 0
        assert "all suites passed" in out
        assert out.count("PASS") == 6

    def test_usage_error_exit_code(self):
        assert main(["frobnicate"]) == 2
