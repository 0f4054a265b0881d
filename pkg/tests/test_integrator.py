import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpelab.core import (DEFAULT_GRID, Grid1D, WaveFunction, density,
                         expectation_energy, gaussian_packet, norm_sq,
                         position_mean, position_width)
from gpelab.integrator import (ConvergenceError, PropagationError, StepperConfig,
                               apply_rhs, cross_validate, evolve, ground_state,
                               propagate, step, step_sizes)
from gpelab.pipeline import preset, run_experiment, with_stage_duration
from gpelab.schedules import (Constant, Harmonic, Sinusoidal, SinusoidalMod, Sum,
                              Zero, sample_nonlinearity, sample_potential)

# RMS width of the Cn = 20 ground state (V = x^2/2) before and after 1 pi of
# free expansion, from a run at dt / 10 on twice the points (scripts/derive_oracles.py)
EXPANSION_WIDTH_0 = 1.428492185444
EXPANSION_WIDTH_PI = 5.255901102171

G = DEFAULT_GRID
X = np.asarray(G.x)
HO = Harmonic(0.5)


def l2(a, b, dx):
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) * dx))


class TestApplyRhs:
    def test_plane_wave(self):
        q = 5 * G.dk
        psi = WaveFunction(G, np.exp(1j * q * X))
        out = apply_rhs(psi, 0.0, 0.0)
        np.testing.assert_allclose(out, -1j * (q**2 / 2) * psi.amplitudes, atol=1e-10)

    def test_oscillator_eigenstate(self):
        psi = gaussian_packet(G, 0, 1)
        out = apply_rhs(psi, 0.5 * X**2, 0.0)
        assert np.max(np.abs(out + 0.5j * psi.amplitudes)) <= 1e-8

    def test_uniform_state(self):
        psi = WaveFunction(G, np.full(G.n_points, 0.3 + 0.1j))
        out = apply_rhs(psi, 0.0, 4.0)
        np.testing.assert_allclose(out, -1j * 4.0 * 0.1 * psi.amplitudes, rtol=1e-12)


class TestStep:
    @pytest.mark.parametrize("dt", [1e-3, 1e-4, 1e-5])
    @pytest.mark.parametrize("method", ["rk4", "splitstep"])
    def test_free_step_norm(self, dt, method):
        psi = gaussian_packet(G, 0, 1)
        out = step(psi, 0.0, 0.0, StepperConfig(dt=dt, method=method))
        assert abs(norm_sq(out) - 1) <= 1e-12

    def test_not_renormalised(self):
        # an oversized step is rejected rather than silently renormalised
        psi = gaussian_packet(G, 0, 1, 20)
        with pytest.raises(PropagationError, match="reduce dt"):
            step(psi, 0.0, 0.0, StepperConfig(dt=2e-3))

    def test_nan_detected(self):
        psi = gaussian_packet(G, 0, 1)
        with np.errstate(invalid="ignore"), pytest.raises(PropagationError):
            step(psi, np.full(G.n_points, np.inf), 0.0, StepperConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            StepperConfig(dt=0)
        with pytest.raises(ValueError):
            StepperConfig(method="euler")


def test_step_sizes():
    assert step_sizes(0.0, 1e-4) == (0, 0.0)
    assert step_sizes(0.3 * math.pi, 1e-4)[0] == 9424
    n, tail = step_sizes(0.3 * math.pi, 1e-4)
    assert n * 1e-4 + tail == pytest.approx(0.3 * math.pi, abs=1e-15)
    assert step_sizes(1.0, 1e-4) == (10000, 0.0)
    with pytest.raises(ValueError):
        step_sizes(-1.0, 1e-4)


class TestPropagate:
    def test_zero_duration_is_identity(self):
        psi = gaussian_packet(G, 0, 1)
        frames = propagate(psi, HO, Constant(0), 0.0)
        assert len(frames) == 1
        np.testing.assert_array_equal(frames[0][1].amplitudes, psi.amplitudes)

    def test_snapshot_times(self):
        frames = propagate(gaussian_packet(G, 0, 1), HO, Constant(0), 0.1, snapshot_every=250)
        assert [round(t, 12) for t, _ in frames] == [0.0, 0.025, 0.05, 0.075, 0.1]

    def test_partial_step_lands_on_duration(self):
        cfg = StepperConfig(dt=1e-3)
        frames = propagate(gaussian_packet(G, 0, 1), Zero(), Constant(0), 0.0105, cfg)
        assert frames[-1][0] == 0.0105

    def test_boundary_breach(self):
        g = Grid1D(-10, 10, 256)
        psi = gaussian_packet(g, 0, 1)
        with pytest.raises(PropagationError, match="boundary") as info:
            propagate(psi, Zero(), Constant(0), 5.0, StepperConfig(dt=1e-3), snapshot_every=100)
        assert info.value.time is not None

    def test_coherent_state_period(self):
        psi = gaussian_packet(G, 3, 1)
        out = evolve(psi, HO, Constant(0), 2 * math.pi)
        assert abs(position_mean(out) - 3) <= 1e-6
        assert abs(norm_sq(out) - 1) <= 1e-8

    @pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
    def test_free_gaussian_width(self, t):
        psi = gaussian_packet(G, 0, 1)
        out = evolve(psi, Zero(), Constant(0), t)
        ratio = position_width(out) / position_width(psi)
        assert abs(ratio - math.sqrt(1 + t * t)) <= 1e-6

    def test_galilean_boost(self):
        p, t = 2.0, 1.25  # shift p * t = 2.5 = 32 dx
        rest = evolve(gaussian_packet(G, 0, 1), Zero(), Constant(0), t)
        moving = evolve(gaussian_packet(G, 0, 1, p), Zero(), Constant(0), t)
        shift = int(round(p * t / G.dx))
        np.testing.assert_allclose(density(moving), np.roll(density(rest), shift), atol=1e-6)

    def test_interacting_expansion_regression(self):
        psi = ground_state(HO, Constant(20.0), G)
        assert abs(position_width(psi) - EXPANSION_WIDTH_0) <= 1e-6
        frames = propagate(psi, Zero(), Constant(20.0), math.pi, snapshot_every=3142)
        widths = [position_width(f) for _, f in frames]
        assert all(b > a for a, b in zip(widths, widths[1:]))
        assert abs(widths[-1] - EXPANSION_WIDTH_PI) <= 1e-6 * EXPANSION_WIDTH_PI

    def test_energy_conserved_in_stage(self):
        psi = ground_state(HO, Constant(20.0), G)
        cn = SinusoidalMod(20, 2, 0)
        frames = propagate(psi, Zero(), cn, 0.3 * math.pi, snapshot_every=1000)
        V, C = 0.0, sample_nonlinearity(cn, G)
        e0 = expectation_energy(frames[0][1], V, C)
        drift = max(abs(expectation_energy(f, V, C) - e0) for _, f in frames)
        assert drift <= 1e-6 * abs(e0)


def test_rk4_order():
    psi = gaussian_packet(G, -2, 1, 8)
    T = 0.2
    ref = evolve(psi, HO, Constant(20.0), T, StepperConfig(dt=1e-5)).amplitudes
    errs = [l2(evolve(psi, HO, Constant(20.0), T, StepperConfig(dt=dt)).amplitudes, ref, G.dx)
            for dt in (4e-4, 2e-4, 1e-4)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 3.5, orders


class TestCrossValidate:
    def test_linear_case(self):
        psi = gaussian_packet(G, 1, 1, 1)
        V = Sum((HO, Sinusoidal(1.0, 2.0)))
        d = cross_validate(psi, V, Constant(0), 1.0, StepperConfig(),
                           StepperConfig(method="splitstep"))
        assert d <= 1e-8

    def test_requires_one_of_each(self):
        psi = gaussian_packet(G, 0, 1)
        with pytest.raises(ValueError):
            cross_validate(psi, HO, Constant(0), 0.1, StepperConfig(), StepperConfig())

    def test_modulated_potential_stage(self):
        plan = preset("fig5")
        s = plan.stages[1]
        psi = run_experiment(with_stage_duration(plan, 1, 0.0)).final
        args = (psi, s.potential, s.nonlinearity, s.duration)
        d1 = cross_validate(*args, StepperConfig(dt=1e-4),
                            StepperConfig(dt=1e-4, method="splitstep"), plan.kinetic)
        d2 = cross_validate(*args, StepperConfig(dt=5e-5),
                            StepperConfig(dt=5e-5, method="splitstep"), plan.kinetic)
        assert d1 <= 1e-5
        assert d1 / d2 >= 4.0 * 0.99, (d1, d2)


class TestGroundState:
    def test_oscillator(self):
        psi = ground_state(HO, Constant(0), G)
        assert abs(expectation_energy(psi, 0.5 * X**2, 0.0) - 0.5) <= 1e-6
        # energy is second order in the state error, the width only first order
        assert abs(position_width(psi) * math.sqrt(2) - 1) <= 1e-5

    def test_repulsion_broadens(self):
        free = ground_state(HO, Constant(0), G)
        psi = ground_state(HO, Constant(20.0), G)
        n = density(psi)
        assert 0.5 * 20.0 * np.sum(n**2) * G.dx > 0
        assert position_width(psi) > position_width(free)

    def test_real_positive_even(self):
        psi = ground_state(HO, Constant(20.0), G)
        a = psi.amplitudes
        assert np.all(a.imag == 0) and np.all(a.real >= 0)
        assert np.max(np.abs(a[1:] - G.mirror(a)[1:])) <= 1e-10

    def test_resolution_independent(self):
        fine = Grid1D(-40, 40, 2048)
        n1 = density(ground_state(HO, Constant(20.0), G))
        n2 = density(ground_state(HO, Constant(20.0), fine))
        # every second fine sample is a coarse sample
        assert np.max(np.abs(n2[::2] - n1)) <= 1e-6

    def test_stationary(self):
        psi = ground_state(HO, Constant(20.0), G)
        out = evolve(psi, HO, Constant(20.0), 0.1 * math.pi)
        assert np.max(np.abs(density(out) - density(psi))) <= 1e-6

    def test_stationary_scaled_units(self):
        psi = ground_state(Harmonic(0.25), Constant(20.0), G, kinetic=1.0)
        out = evolve(psi, Harmonic(0.25), Constant(20.0), 0.1 * math.pi, kinetic=1.0)
        assert np.max(np.abs(density(out) - density(psi))) <= 1e-6

    def test_needs_confinement(self):
        with pytest.raises(ValueError):
            ground_state(Zero(), Constant(20.0), G)

    def test_step_budget(self):
        with pytest.raises(ConvergenceError):
            ground_state(HO, Constant(20.0), Grid1D(-40, 40, 512), tol=1e-14, max_steps=200)


@given(st.floats(-3, 3), st.floats(-10, 30), st.sampled_from(["rk4", "splitstep"]))
@settings(max_examples=10, deadline=None)
def test_parity_preserved(a, cn, method):
    g = Grid1D(-20, 20, 512)
    x = np.asarray(g.x)
    psi = WaveFunction(g, np.exp(-x**2 / 2) * (1 + 0.2 * x**2))
    V = Sum((Harmonic(0.5), Sinusoidal(a, 2.0)))
    frames = propagate(psi, V, Constant(cn), 0.5, StepperConfig(dt=2.5e-4, method=method),
                       snapshot_every=400)
    for _, f in frames:
        n = density(f)
        assert np.max(np.abs(n[1:] - g.mirror(n)[1:])) <= 1e-8 * n.max()


@given(st.floats(-2, 2), st.floats(0.7, 2), st.floats(-2, 2), st.floats(0, 30))
@settings(max_examples=10, deadline=None)
def test_norm_conserved(center, width, p, cn):
    g = Grid1D(-20, 20, 512)
    psi = gaussian_packet(g, center, width, p)
    out = evolve(psi, HO, Constant(cn), 0.5, StepperConfig(dt=1e-4))
    assert abs(norm_sq(out) - 1) <= 1e-8


def test_potential_sampling_used_by_propagate():
    # schedules are sampled on the state's grid
    psi = gaussian_packet(G, 0, 1)
    a = evolve(psi, HO, Constant(0), 0.1)
    b = propagate(psi, HO, Constant(0), 0.1)[-1][1]
    np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
    assert sample_potential(HO, G).shape == (G.n_points,)
