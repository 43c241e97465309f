import math

import pytest
import yaml

from eigennet.config import apply_override, build_config, parse_config, save_resolved, write_template
from eigennet.errors import InvalidConfigError
from eigennet.models import ProblemMode


def _write(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


class TestDefaults:
    def test_multi_pair_defaults(self):
        cfg = parse_config(mode="multi-pair")
        assert cfg.problem.mode is ProblemMode.MULTI_PAIR
        assert cfg.problem.num_outputs == 3
        assert (cfg.problem.a, cfg.problem.b) == (0.0, pytest.approx(math.pi))
        w = cfg.weights
        assert (w.alpha, w.mu, w.delta, w.beta, w.c) == (0.1, 0.1, 0.5, 1.5, 1.0)
        assert (w.reg, w.nu, w.top_k) == (1e-8, 2.0, 40)
        assert w.gamma == pytest.approx([1.0, 0.5, 1.0 / 3.0])
        s = cfg.schedule
        assert (s.lr0, s.decay, s.period, s.lr_min) == (4e-3, 0.7, 100, 5e-5)
        assert cfg.network.hidden_widths == [20, 20]
        assert w.boundary_reduction == "sum"

    def test_empty_config_is_single_pair_dirichlet(self):
        cfg = parse_config()
        assert cfg.problem.name == "dirichlet"
        assert cfg.problem.mode is ProblemMode.SINGLE_PAIR
        assert cfg.weights.gamma == [1.0]

    def test_batches_cover_the_dataset(self):
        cfg = parse_config(overrides=["training.interior_batch=4096"])
        assert cfg.training.batches_per_epoch == 11

    def test_fixed_lambda_preset(self):
        cfg = parse_config(preset="fig1")
        assert cfg.problem.mode is ProblemMode.FIXED_LAMBDA
        assert cfg.problem.eigenvalue == 4.0
        assert cfg.weights.c == pytest.approx(math.pi / 4)


class TestPrecedence:
    def test_file_overrides_defaults(self, tmp_path):
        path = _write(tmp_path / "c.yaml", {"weights": {"nu": 3.0}, "training": {"epochs": 7}})
        cfg = parse_config(path)
        assert cfg.weights.nu == 3.0
        assert cfg.training.epochs == 7

    def test_set_overrides_file(self, tmp_path):
        path = _write(tmp_path / "c.yaml", {"training": {"epochs": 7}})
        cfg = parse_config(path, ["training.epochs=9"])
        assert cfg.training.epochs == 9

    def test_flag_wins_over_file_and_set(self, tmp_path):
        path = _write(tmp_path / "c.yaml", {"training": {"epochs": 7, "seed": 1}})
        cfg = parse_config(path, ["training.epochs=9"], epochs=11, seed=None)
        assert cfg.training.epochs == 11
        assert cfg.training.seed == 1

    def test_output_dir_flag(self, tmp_path):
        path = _write(tmp_path / "c.yaml", {"output_dir": "from-file"})
        assert parse_config(path).output_dir == "from-file"
        assert parse_config(path, output_dir="from-flag").output_dir == "from-flag"

    def test_explicit_problem_overrides_preset(self):
        cfg = parse_config(overrides=["problem.preset=fig3", "weights.c=0.4"])
        assert cfg.problem.name == "fig3"
        assert cfg.weights.c == 0.4

    def test_list_override(self):
        cfg = parse_config(overrides=["network.hidden_widths=[4, 4]"])
        assert cfg.network.hidden_widths == [4, 4]


class TestErrors:
    def test_unknown_key_names_field(self, tmp_path):
        path = _write(tmp_path / "c.yaml", {"weights": {"nuu": 1.0}})
        with pytest.raises(InvalidConfigError) as exc:
            parse_config(path)
        assert exc.value.field == "weights.nuu"

    def test_unknown_section(self, tmp_path):
        path = _write(tmp_path / "c.yaml", {"optimizer": {"lr": 1.0}})
        with pytest.raises(InvalidConfigError) as exc:
            parse_config(path)
        assert exc.value.field == "optimizer"

    def test_negative_nu(self):
        with pytest.raises(InvalidConfigError) as exc:
            parse_config(overrides=["weights.nu=-1"])
        assert exc.value.field == "weights.nu"

    def test_conflicting_mode(self):
        with pytest.raises(InvalidConfigError) as exc:
            parse_config(preset="fig2", mode="multi-pair")
        assert exc.value.field == "problem.eigenvalue"

    def test_single_pair_with_many_outputs(self):
        with pytest.raises(InvalidConfigError) as exc:
            parse_config(mode="single-pair", num_outputs=3)
        assert exc.value.field == "problem.num_outputs"

    def test_bad_widths(self):
        with pytest.raises(InvalidConfigError) as exc:
            parse_config(overrides=["network.hidden_widths=[8, 0]"])
        assert exc.value.field == "network.hidden_widths"

    def test_gamma_length(self):
        with pytest.raises(InvalidConfigError) as exc:
            parse_config(mode="multi-pair", overrides=["weights.gamma=[1.0, 0.5]"])
        assert exc.value.field == "weights.gamma"

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidConfigError):
            parse_config(str(tmp_path / "missing.yaml"))

    def test_malformed_override(self):
        with pytest.raises(InvalidConfigError):
            apply_override({}, "training.epochs")

    def test_boundary_away_from_endpoints(self):
        raw = {"problem": {"a": 0.0, "b": 1.0, "mode": "single-pair",
                           "boundary": [{"x": 0.5, "value": 0.0}]}}
        with pytest.raises(InvalidConfigError) as exc:
            build_config(raw)
        assert exc.value.field == "problem.boundary"

    def test_type_errors_become_config_errors(self):
        with pytest.raises(InvalidConfigError):
            parse_config(overrides=["training.epochs=many"])


class TestResolved:
    @pytest.mark.parametrize("flags", [
        {"mode": "multi-pair"},
        {"preset": "fig3"},
        {"mode": "single-pair", "seed": 4},
    ])
    def test_round_trip(self, tmp_path, flags):
        cfg = parse_config(**flags)
        path = tmp_path / "config.resolved"
        save_resolved(cfg, str(path))
        assert parse_config(str(path)) == cfg

    def test_custom_problem(self):
        raw = {"problem": {"a": -1.0, "b": 2.0, "mode": "multi-pair", "num_outputs": 2,
                           "boundary": [[-1.0, 0.0], {"x": 2.0, "value": 0.0}]}}
        cfg = build_config(raw)
        assert cfg.problem.name == "custom"
        assert cfg.problem.length == 3.0
        assert cfg.weights.gamma == [1.0, 0.5]

    def test_template(self, tmp_path):
        path = tmp_path / "starter.yaml"
        written = write_template(str(path), "dirichlet", 3)
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
        assert data["problem"] == {"preset": "dirichlet", "mode": "multi-pair", "num_outputs": 3}
        assert parse_config(str(path)) == written


class TestTrainingValidation:
    def test_negative_seed_names_field(self):
        with pytest.raises(InvalidConfigError) as exc:
            parse_config(seed=-1)
        assert exc.value.field == "training.seed"

    @pytest.mark.parametrize("value", [1.5, "many", True])
    def test_fractional_epochs_name_field(self, value):
        with pytest.raises(InvalidConfigError) as exc:
            build_config({"training": {"epochs": value}})
        assert exc.value.field == "training.epochs"

    def test_whole_float_epochs_become_int(self):
        cfg = build_config({"training": {"epochs": 20.0}})
        assert cfg.training.epochs == 20
        assert isinstance(cfg.training.epochs, int)

    @pytest.mark.parametrize("points", [0, 1])
    def test_eval_grid_needs_two_points(self, points):
        with pytest.raises(InvalidConfigError) as exc:
            parse_config(overrides=[f"training.eval_points={points}"])
        assert exc.value.field == "training.eval_points"

    def test_grad_clip_written_in_exponent_form(self, tmp_path):
        # PyYAML reads 1e3 (no dot) as a string
        path = tmp_path / "clip.yaml"
        path.write_text("training:\n  grad_clip: 1e3\n", encoding="utf-8")
        cfg = parse_config(str(path))
        assert cfg.training.grad_clip == 1000.0

    @pytest.mark.parametrize("value", [0.0, -2.0, "loose"])
    def test_bad_grad_clip_names_field(self, value):
        with pytest.raises(InvalidConfigError) as exc:
            build_config({"training": {"grad_clip": value}})
        assert exc.value.field == "training.grad_clip"

    def test_unknown_boundary_reduction(self):
        with pytest.raises(InvalidConfigError) as exc:
            parse_config(overrides=["weights.boundary_reduction=max"])
        assert exc.value.field == "weights.boundary_reduction"
