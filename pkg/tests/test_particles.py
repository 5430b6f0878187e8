"""Particle system tests: Euler-Maruyama stepping, mixture sampling,
pairwise vs grid drift, the smooth drift clamp, and trajectory
determinism of the full run."""

import math

import numpy as np
import pytest

from mipsim import (
    BadMixture,
    CutoffFn,
    DomainError,
    KernelSpec,
    MollifierSpec,
    ParticleState,
    build_force_table,
    drift_direct,
    drift_grid,
    em_step,
    eval_cutoff,
    sample_initial,
    simulate,
    stream,
)

ZERO1 = KernelSpec("zero", 1)
BS = KernelSpec("biot-savart", 2)
AR3 = KernelSpec("attractive-repulsive", 3, a=1.5, b=0.5, va=1.0, vb=1.0)


class TestEmStep:
    def test_noise_free_step_is_exact(self):
        pos = np.array([[0.0, 1.0], [2.0, -1.0]])
        drift = np.array([[1.0, 0.0], [0.0, -2.0]])
        st = em_step(ParticleState(pos, 0.5, 3), 0.25, drift, None)
        assert np.array_equal(st.positions, pos + 0.25 * drift)
        assert st.t == 0.75
        assert st.rng_epoch == 4

    def test_shape_mismatch_rejected(self):
        st = ParticleState(np.zeros((4, 2)), 0.0, 0)
        with pytest.raises(DomainError):
            em_step(st, 0.1, np.zeros((4, 3)), None)

    def test_nonpositive_dt_rejected(self):
        st = ParticleState(np.zeros((4, 2)), 0.0, 0)
        with pytest.raises(DomainError):
            em_step(st, 0.0, np.zeros((4, 2)), None)

    def test_noise_statistics(self):
        # increments are N(0, 2 dt) per coordinate
        n, dt = 200_000, 0.125
        st = ParticleState(np.zeros((n, 1)), 0.0, 0)
        new = em_step(st, dt, np.zeros((n, 1)), stream(7, "noise-test"))
        inc = new.positions[:, 0]
        se = math.sqrt(2.0 * dt / n)
        assert abs(float(np.mean(inc))) < 4.0 * se
        assert float(np.var(inc)) == pytest.approx(2.0 * dt, rel=0.02)


class TestSampleInitial:
    def test_scalar_mean_broadcasts(self):
        x = sample_initial(((1.0, 0.5, 0.25),), 100, stream(1, "init"), d=2)
        assert x.shape == (100, 2)
        assert abs(float(np.mean(x)) - 0.5) < 0.2

    def test_vector_mean_sets_dimension(self):
        x = sample_initial(((1.0, np.array([1.0, -1.0, 0.0]), 0.1),), 50, stream(1))
        assert x.shape == (50, 3)

    def test_vector_mean_dimension_mismatch(self):
        with pytest.raises(BadMixture):
            sample_initial(((1.0, np.array([1.0, -1.0]), 0.1),), 10, stream(1), d=3)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(BadMixture):
            sample_initial(((0.5, 0.0, 1.0), (0.4, 1.0, 1.0)), 10, stream(1), d=1)

    def test_negative_weight_rejected(self):
        with pytest.raises(BadMixture):
            sample_initial(((1.5, 0.0, 1.0), (-0.5, 1.0, 1.0)), 10, stream(1), d=1)

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(BadMixture):
            sample_initial(((1.0, 0.0, 0.0),), 10, stream(1), d=1)

    def test_needs_at_least_one_sample(self):
        with pytest.raises(DomainError):
            sample_initial(((1.0, 0.0, 1.0),), 0, stream(1), d=1)

    def test_mixture_fractions_and_moments(self):
        comps = ((0.25, -3.0, 0.04), (0.75, 3.0, 0.04))
        x = sample_initial(comps, 100_000, stream(9, "mix"), d=1)[:, 0]
        frac_left = float(np.mean(x < 0.0))
        assert frac_left == pytest.approx(0.25, abs=0.01)
        assert float(np.mean(x)) == pytest.approx(0.25 * -3.0 + 0.75 * 3.0, abs=0.05)


class TestDrift:
    def test_single_particle_feels_nothing(self):
        moll = MollifierSpec(d=2, R=1.0, alpha=0.25, N=1)
        table = build_force_table(BS, moll, resolution=64)
        st = ParticleState(np.array([[0.3, -0.7]]), 0.0, 0)
        assert np.array_equal(drift_direct(st, table), np.zeros((1, 2)))

    def test_pair_center_of_mass_is_conserved(self):
        # exact oddness of the tabulated force makes the two drifts
        # cancel bitwise
        moll = MollifierSpec(d=2, R=1.0, alpha=0.25, N=2)
        table = build_force_table(BS, moll, resolution=64)
        rng = stream(42, "pair")
        for _ in range(50):
            pos = rng.uniform(-2.0, 2.0, size=(2, 2))
            dr = drift_direct(ParticleState(pos, 0.0, 0), table)
            assert np.array_equal(dr[0], -dr[1])

    def test_grid_drift_converges_to_direct(self):
        n = 256
        rng = stream(2024, "driftcmp")
        pos = 0.5 * rng.standard_normal((n, 2))
        st = ParticleState(pos, 0.0, 0)
        moll = MollifierSpec(d=2, R=1.0, alpha=1.0 / 6.0, N=n)
        table = build_force_table(BS, moll)
        exact = drift_direct(st, table)
        scale = float(np.max(np.linalg.norm(exact, axis=1)))
        errs = []
        for G, L in ((256, 8.0), (512, 16.0)):
            approx = drift_grid(st, moll, BS, G, L)
            errs.append(float(np.max(np.linalg.norm(approx - exact, axis=1))) / scale)
        assert errs[0] < 4e-2
        assert errs[1] < errs[0]


class TestCutoff:
    def test_level_must_be_positive(self):
        with pytest.raises(DomainError):
            CutoffFn(0.0)
        with pytest.raises(DomainError):
            CutoffFn(-1.0)

    def test_identity_saturation_bridge(self):
        c = CutoffFn(2.0)
        inside = np.array([-2.0, -0.5, 0.0, 1.0, 2.0])
        assert np.array_equal(eval_cutoff(c, inside), inside)
        far = np.array([3.0, 5.0, -3.0, -100.0])
        assert np.array_equal(eval_cutoff(c, far), np.array([2.0, 2.0, -2.0, -2.0]))
        # the bridge stays within (A, A + 1) and peaks at A + 16/81
        t = np.linspace(2.0, 3.0, 1001)
        y = eval_cutoff(c, t)
        assert np.all(y >= 2.0) and np.all(y <= 2.0 + 16.0 / 81.0 + 1e-12)
        assert float(np.max(y)) == pytest.approx(2.0 + 16.0 / 81.0, abs=1e-6)

    def test_infinite_level_is_identity_copy(self):
        v = np.array([1.0, -7.0, 100.0])
        c = CutoffFn(math.inf)
        out = eval_cutoff(c, v)
        assert np.array_equal(out, v)
        assert out is not v

    def test_exactly_odd(self):
        c = CutoffFn(1.5)
        v = stream(3, "odd").uniform(-5.0, 5.0, size=1000)
        assert np.array_equal(eval_cutoff(c, -v), -eval_cutoff(c, v))

    def test_hard_bound(self):
        c = CutoffFn(0.7)
        v = np.linspace(-10.0, 10.0, 100_001)
        assert float(np.max(np.abs(eval_cutoff(c, v)))) <= c.bound + 1e-15
        assert c.bound < 0.7 + 1.0

    def test_derivative_bound(self):
        c = CutoffFn(1.0)
        v = np.linspace(-4.0, 4.0, 200_001)
        y = eval_cutoff(c, v)
        slopes = np.diff(y) / np.diff(v)
        assert float(np.max(np.abs(slopes))) <= 1.0 + 1e-9


class TestSimulate:
    def test_bitwise_deterministic(self):
        kw = dict(n=32, t_final=0.1, dt=0.02, seed=5, deposit_fields=False)
        a = simulate(ZERO1, None, **kw)
        b = simulate(ZERO1, None, **kw)
        assert np.array_equal(a.final.positions, b.final.positions)
        c = simulate(ZERO1, None, rep=1, **kw)
        assert not np.array_equal(a.final.positions, c.final.positions)

    def test_zero_kernel_matches_manual_stepping(self):
        n, dt, steps, seed, rep = 50, 0.025, 4, 11, 3
        res = simulate(
            ZERO1, None, n=n, t_final=dt * steps, dt=dt, seed=seed, rep=rep,
            deposit_fields=False,
        )
        st = ParticleState(sample_initial(((1.0, 0.0, 1.0),), n, stream(seed, rep, "init"), 1), 0.0, 0)
        for step in range(steps):
            st = em_step(st, dt, np.zeros((n, 1)), stream(seed, rep, "em", step))
        assert np.array_equal(res.final.positions, st.positions)
        assert res.final.t == pytest.approx(dt * steps)

    def test_snapshots_and_fields(self):
        res = simulate(
            ZERO1, None, n=64, t_final=0.1, dt=0.025, seed=2,
            snapshot_times=[0.0, 0.05, 0.1], G=1024, L=8.0,
        )
        assert [t for t, _ in res.snapshots] == pytest.approx([0.0, 0.05, 0.1])
        assert all(p.shape == (64, 1) for _, p in res.snapshots)
        assert len(res.fields) == 3
        # node evaluation of the bump gives mass 1 up to midpoint
        # quadrature error over its ~23-cell support
        for _, fld in res.fields:
            assert fld.mass() == pytest.approx(1.0, abs=1e-6)

    def test_clipping_is_counted(self):
        moll = MollifierSpec(d=2, R=1.0, alpha=0.25, N=64)
        table = build_force_table(BS, moll, resolution=64)
        kw = dict(n=64, t_final=0.02, dt=0.01, seed=8, table=table, deposit_fields=False)
        tight = simulate(BS, moll, cutoff=CutoffFn(0.01), **kw)
        loose = simulate(BS, moll, cutoff=CutoffFn(1e6), **kw)
        assert tight.clip_fraction > 0.0
        assert loose.clip_fraction == 0.0

    def test_interacting_kernel_requires_mollifier(self):
        with pytest.raises(DomainError):
            simulate(BS, None, n=8, t_final=0.01, dt=0.01, seed=0)

    def test_drift_path_resolution(self):
        # zero force: always the trivial direct path
        res = simulate(ZERO1, None, n=4096, t_final=0.01, dt=0.01, seed=0,
                       deposit_fields=False)
        assert res.drift_path == "direct"
        # large interacting runs with a spectral symbol go through the grid
        moll = MollifierSpec(d=2, R=1.0, alpha=0.25, N=2049)
        res = simulate(BS, moll, n=2049, t_final=0.01, dt=0.01, seed=0,
                       G=256, L=8.0, deposit_fields=False)
        assert res.drift_path == "grid"
        # small runs stay on the exact pairwise path
        moll64 = MollifierSpec(d=2, R=1.0, alpha=0.25, N=64)
        table = build_force_table(BS, moll64, resolution=64)
        res = simulate(BS, moll64, n=64, t_final=0.01, dt=0.01, seed=0,
                       table=table, deposit_fields=False)
        assert res.drift_path == "direct"
        # no Fourier symbol: pairwise regardless of size
        moll_ar = MollifierSpec(d=3, R=1.0, alpha=0.25, N=2049)
        table_ar = build_force_table(AR3, moll_ar, resolution=64)
        res = simulate(AR3, moll_ar, n=2049, t_final=0.01, dt=0.01, seed=0,
                       table=table_ar, deposit_fields=False)
        assert res.drift_path == "direct"

    def test_invalid_drift_path(self):
        with pytest.raises(DomainError):
            simulate(ZERO1, None, n=8, t_final=0.01, dt=0.01, seed=0,
                     drift_path="warp", deposit_fields=False)

    def test_invalid_horizon(self):
        with pytest.raises(DomainError):
            simulate(ZERO1, None, n=8, t_final=0.0, dt=0.01, seed=0)
