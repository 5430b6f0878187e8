"""Configuration grammar tests: the flat ``section.key = value`` file
format, the echo round-trip contract, and cross-field validation."""

import math
from fractions import Fraction

import pytest

from mipsim import (
    ConfigError,
    ExperimentConfig,
    KernelSpec,
    config_echo,
    parse_config,
    parse_config_text,
)

FULL_TEXT = """\
# vortex rate sweep
kernel.family = biot-savart
kernel.d = 2

mollifier.radius = 1.0
mollifier.alpha = 1/6        # rational exponents stay exact
grid.g = 256
grid.l = 4.0

particles.n = 256, 1024, 4096
particles.dt = 0.005
particles.t_final = 0.2
particles.seed = 37
particles.reps = 10
particles.cutoff_a = auto

init.weights = 0.5, 0.5
init.means = -1.0, 1.0
init.sigma2 = 0.25, 0.25

pde.dt = 0.001
pde.snapshot_times = 0.0, 0.1, 0.2
experiment.kind = rate
experiment.norm = l1
output.dir = runs/vortex
"""


def violations(excinfo) -> str:
    return "\n".join(excinfo.value.violations)


class TestGrammar:
    def test_full_example(self):
        cfg = parse_config_text(FULL_TEXT)
        assert cfg.kernel == KernelSpec("biot-savart", 2)
        assert cfg.alpha == Fraction(1, 6)
        assert isinstance(cfg.alpha, Fraction)
        assert cfg.n_list == (256, 1024, 4096)
        assert cfg.init == ((0.5, -1.0, 0.25), (0.5, 1.0, 0.25))
        assert cfg.snapshot_times == (0.0, 0.1, 0.2)
        assert cfg.cutoff_a == "auto"
        assert cfg.experiment == "rate"
        assert cfg.out_dir == "runs/vortex"
        cfg.validate()

    def test_keys_are_case_insensitive(self):
        cfg = parse_config_text("KERNEL.FAMILY = zero\nKernel.D = 1\n")
        assert cfg.kernel == KernelSpec("zero", 1)

    def test_hash_inside_token_is_not_a_comment(self):
        cfg = parse_config_text("kernel.family = zero\nkernel.d = 1\noutput.dir = out#1\n")
        assert cfg.out_dir == "out#1"

    def test_comment_lines_and_blanks_skipped(self):
        cfg = parse_config_text("\n# header\nkernel.family = zero\n   # indented comment\nkernel.d = 1\n")
        assert cfg.kernel.family == "zero"

    def test_all_problems_reported_at_once(self):
        text = (
            "kernel.family = zero\n"
            "kernel.d = 1\n"
            "bogus.key = 3\n"
            "grid.g = twelve\n"
            "grid.g = 64\n"
            "just some words\n"
            "particles.dt =\n"
        )
        with pytest.raises(ConfigError) as exc:
            parse_config_text(text)
        msgs = violations(exc)
        assert "line 3" in msgs and "unknown key" in msgs
        assert "line 4" in msgs and "grid.g" in msgs
        assert "line 5" in msgs and "duplicate" in msgs
        assert "line 6" in msgs and "section.key = value" in msgs
        assert "line 7" in msgs and "empty value" in msgs
        assert len(exc.value.violations) == 5

    def test_missing_kernel_reported(self):
        with pytest.raises(ConfigError) as exc:
            parse_config_text("grid.g = 64\n")
        msgs = violations(exc)
        assert "kernel.family is required" in msgs
        assert "kernel.d is required" in msgs

    def test_unknown_family_reported(self):
        with pytest.raises(ConfigError) as exc:
            parse_config_text("kernel.family = gravity\nkernel.d = 2\n")
        assert "kernel" in violations(exc)

    def test_infinity_accepted_for_r(self):
        cfg = parse_config_text("kernel.family = zero\nkernel.d = 1\npde.r = inf\n")
        assert cfg.r == math.inf


def roundtrip(cfg: ExperimentConfig) -> ExperimentConfig:
    return parse_config(config_echo(cfg))


class TestEchoRoundTrip:
    def test_defaults(self):
        cfg = ExperimentConfig(kernel=KernelSpec("zero", 1))
        assert roundtrip(cfg) == cfg

    def test_full_example(self):
        cfg = parse_config_text(FULL_TEXT)
        back = roundtrip(cfg)
        assert back == cfg
        assert isinstance(back.alpha, Fraction)

    def test_float_alpha_stays_float(self):
        cfg = ExperimentConfig(kernel=KernelSpec("zero", 1), alpha=0.25)
        back = roundtrip(cfg)
        assert back == cfg
        assert isinstance(back.alpha, float)

    def test_rational_zeta_stays_exact(self):
        cfg = ExperimentConfig(kernel=KernelSpec("zero", 1), zeta=Fraction(3, 4))
        back = roundtrip(cfg)
        assert back.zeta == Fraction(3, 4)
        assert isinstance(back.zeta, Fraction)

    def test_float_zeta_stays_float(self):
        cfg = ExperimentConfig(kernel=KernelSpec("zero", 1), zeta=0.75)
        back = roundtrip(cfg)
        assert back == cfg
        assert isinstance(back.zeta, float)

    @pytest.mark.parametrize("cutoff", ["auto", None, 5.0])
    def test_cutoff_variants(self, cutoff):
        cfg = ExperimentConfig(kernel=KernelSpec("zero", 1), cutoff_a=cutoff)
        assert roundtrip(cfg) == cfg

    def test_awkward_floats_survive(self):
        cfg = ExperimentConfig(
            kernel=KernelSpec("riesz", 2, s=0.5, attractive=True),
            dt=1.0 / 3.0,
            t_final=0.30000000000000004,
            L=2.0 ** 0.5,
            r=math.inf,
            heun=True,
            norm="kr",
            n_list=(64,),
            init_weights=(0.3, 0.7),
            init_means=(-1.5, 2.5),
            init_sigma2=(0.1, 0.2),
            experiment="simulate",
            alpha=Fraction(2, 7),
        )
        assert roundtrip(cfg) == cfg

    def test_two_power_kernel_parameters(self):
        cfg = ExperimentConfig(
            kernel=KernelSpec("attractive-repulsive", 3, a=1.5, b=0.5, va=2.0, vb=1.0),
        )
        assert roundtrip(cfg) == cfg

    def test_echo_omits_unset_optionals(self):
        echo = config_echo(ExperimentConfig(kernel=KernelSpec("zero", 1)))
        assert "particles.dt" not in echo
        assert "pde.heun" not in echo
        assert "kernel.attractive" not in echo
        assert "mollifier.alpha" not in echo


def base(**kw) -> ExperimentConfig:
    defaults = dict(
        kernel=KernelSpec("zero", 1),
        dt=0.01,
        t_final=0.1,
        alpha=0.25,
        n_list=(64,),
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestValidate:
    def test_ok(self):
        base(experiment="simulate").validate()

    def test_experiment_override_argument(self):
        cfg = base()
        cfg.validate("simulate")
        with pytest.raises(ConfigError):
            cfg.validate("rate")  # needs two n values

    def test_collects_multiple_violations(self):
        cfg = base(G=100, L=-1.0, reps=0, seed=-3)
        with pytest.raises(ConfigError) as exc:
            cfg.validate("simulate")
        msgs = violations(exc)
        assert "grid.g" in msgs
        assert "grid.l" in msgs
        assert "particles.reps" in msgs
        assert "particles.seed" in msgs
        assert len(exc.value.violations) >= 4

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError) as exc:
            base().validate("teleport")
        assert "experiment.kind" in violations(exc)

    def test_simulate_takes_single_n(self):
        with pytest.raises(ConfigError) as exc:
            base(n_list=(64, 128)).validate("simulate")
        assert "single particles.n" in violations(exc)

    def test_rate_needs_two_n(self):
        with pytest.raises(ConfigError) as exc:
            base(n_list=(64,)).validate("rate")
        assert "at least two" in violations(exc)

    def test_rate_rejects_inadmissible_scaling(self):
        # the 2-d standard window at the L1 norm is (0, 1/2)
        cfg = base(kernel=KernelSpec("biot-savart", 2), n_list=(64, 128),
                   alpha=0.6, G=1024)
        with pytest.raises(ConfigError) as exc:
            cfg.validate("rate")
        assert "admissible scaling window" in violations(exc)

    def test_dynamics_need_time_step(self):
        with pytest.raises(ConfigError) as exc:
            base(dt=None).validate("simulate")
        assert "particles.dt" in violations(exc)

    def test_pde_accepts_dedicated_step(self):
        base(dt=None, pde_dt=0.001).validate("pde")

    def test_bump_resolution_gate(self):
        # n = 4096 at alpha = 0.5 gives support 1/64 < 2 dx on a G = 256 box
        cfg = base(n_list=(4096,), alpha=0.5, G=256, L=4.0)
        with pytest.raises(ConfigError) as exc:
            cfg.validate("simulate")
        assert "fewer than two grid cells" in violations(exc)

    def test_chaos_snapshot_spacing_gate(self):
        cfg = base(snapshot_times=(0.0, 0.1), dt=0.01)
        with pytest.raises(ConfigError) as exc:
            cfg.validate("chaos")
        assert "8 * dt" in violations(exc)
        base(snapshot_times=(0.0, 0.05, 0.1), dt=0.01).validate("chaos")

    def test_snapshot_times_inside_horizon(self):
        with pytest.raises(ConfigError) as exc:
            base(snapshot_times=(0.0, 0.5)).validate("pde")
        assert "snapshot_times" in violations(exc)

    def test_grid_drift_rejected_for_two_power_kernel(self):
        cfg = base(
            kernel=KernelSpec("attractive-repulsive", 3, a=1.5, b=0.5, va=1.0, vb=1.0),
            drift_path="grid",
        )
        with pytest.raises(ConfigError) as exc:
            cfg.validate("simulate")
        assert "Fourier symbol" in violations(exc)

    def test_weight_sum_checked(self):
        cfg = base(init_weights=(0.5, 0.4), init_means=(0.0, 1.0), init_sigma2=(0.25, 0.25))
        with pytest.raises(ConfigError) as exc:
            cfg.validate("simulate")
        assert "sum to 1" in violations(exc)

    def test_init_lists_must_align(self):
        cfg = base(init_weights=(1.0,), init_means=(0.0, 1.0), init_sigma2=(0.25,))
        with pytest.raises(ConfigError) as exc:
            cfg.validate("simulate")
        assert "equal length" in violations(exc)

    def test_with_helpers(self):
        cfg = base()
        assert cfg.with_experiment("pde").experiment == "pde"
        assert cfg.with_seed(99).seed == 99
        assert cfg.experiment is None and cfg.seed == 0
