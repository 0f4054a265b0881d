import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpelab.core import DEFAULT_GRID, Grid1D
from gpelab.schedules import (Constant, Harmonic, ParabolicMod, Sinusoidal,
                              SinusoidalMod, Sum, Zero, effective_minima,
                              effective_shape, is_confining, is_nonstandard,
                              sample_nonlinearity, sample_potential,
                              scale_modulation, set_wavenumber)

# brentq root of x/2 - 20 sin x on [2.5, 3.5] (scripts/derive_oracles.py)
EFFECTIVE_MINIMUM = 3.064895102403

G = DEFAULT_GRID
X = np.asarray(G.x)


def at(values, x0):
    return values[int(np.argmin(np.abs(X - x0)))]


def test_zero():
    assert not sample_potential(Zero(), G).any()


def test_harmonic():
    g = Grid1D(-4, 4, 64)
    assert sample_potential(Harmonic(0.5), g)[48] == 2.0  # x = 2


def test_sinusoidal():
    v = sample_potential(Sinusoidal(1.0, 2.0), G)
    assert at(v, 0.0) == 1.0
    g = Grid1D(-math.pi, math.pi, 64)
    v = sample_potential(Sinusoidal(1.0, 2.0), g)
    assert v[48] == pytest.approx(-1.0, abs=1e-15)  # x = pi/2


def test_sinusoidal_mod_range():
    n = sample_nonlinearity(SinusoidalMod(20, 2, 0), G)
    assert at(n, 0.0) == 20.0
    # the true minimum lies at most dx/2 from a sample
    assert -20.0 <= n.min() <= -20.0 * math.cos(G.dx)


def test_offset_mod_nonnegative():
    n = sample_nonlinearity(SinusoidalMod(20, 2, 1), G)
    assert -1e-12 <= n.min() <= 20.0 * (1 - math.cos(G.dx))


def test_parabolic_mod():
    n = sample_nonlinearity(ParabolicMod(20, 400), G)
    assert at(n, 0.0) == 0.0
    assert at(n, 20.0) == pytest.approx(20.0)
    assert at(n, -20.0) == pytest.approx(20.0)


def test_constant():
    assert np.all(sample_nonlinearity(Constant(7.5), G) == 7.5)


@pytest.mark.parametrize("bad", [lambda: Harmonic(-1), lambda: Sinusoidal(1, 0),
                                 lambda: SinusoidalMod(1, -2), lambda: ParabolicMod(1, 0),
                                 lambda: Sum(())])
def test_invalid_parameters(bad):
    with pytest.raises(ValueError):
        bad()


def test_confinement():
    assert is_confining(Harmonic(0.25))
    assert is_confining(Sum((Sinusoidal(1, 2), Harmonic(0.5))))
    assert not is_confining(Zero())
    assert not is_confining(Harmonic(0.0))
    assert not is_confining(Sinusoidal(1, 2))


def test_attractive_is_flagged():
    assert is_nonstandard(Constant(-1))
    assert not is_nonstandard(Constant(20))


def test_effective_shape_superposes():
    shape = effective_shape(Harmonic(0.25), SinusoidalMod(20, 1, 0), G)
    np.testing.assert_allclose(shape, X**2 / 4 + 20 * np.cos(X), rtol=1e-14, atol=1e-12)


def test_effective_shape_zero_modulation_is_parabola():
    shape = effective_shape(Harmonic(0.25), SinusoidalMod(0, 1, 0), G)
    np.testing.assert_array_equal(shape, X**2 / 4)


def test_effective_shape_drops_offset():
    a = effective_shape(Harmonic(0.25), SinusoidalMod(20, 1, 0), G)
    b = effective_shape(Harmonic(0.25), SinusoidalMod(20, 1, 3), G)
    np.testing.assert_array_equal(a, b)


def test_effective_shape_needs_trap():
    with pytest.raises(ValueError):
        effective_shape(Zero(), SinusoidalMod(20, 1, 0), G)


def test_effective_minima_regression():
    m = effective_minima(Harmonic(0.25), SinusoidalMod(20, 1, 0), G)
    np.testing.assert_allclose(m, [-EFFECTIVE_MINIMUM, EFFECTIVE_MINIMUM], atol=1e-8)


def test_scale_and_wavenumber():
    assert scale_modulation(SinusoidalMod(20, 2, 1), 2) == SinusoidalMod(40, 2, 1)
    assert scale_modulation(Sinusoidal(1, 2), 2) == Sinusoidal(2, 2)
    assert scale_modulation(Constant(20), 2) is None
    assert scale_modulation(Harmonic(0.25), 2) is None
    assert set_wavenumber(SinusoidalMod(20, 2), 1) == SinusoidalMod(20, 1)
    s = set_wavenumber(Sum((Harmonic(0.25), Sinusoidal(1, 2))), 3)
    assert s == Sum((Harmonic(0.25), Sinusoidal(1, 3)))
    assert set_wavenumber(Zero(), 3) is None


_amp = st.floats(-50, 50, allow_nan=False)
_k = st.floats(0.1, 5)


@given(_amp, _k, st.floats(0, 2))
@settings(max_examples=50)
def test_sum_is_additive(a, k, h):
    parts = (Sinusoidal(a, k), Harmonic(h))
    total = sample_potential(Sum(parts), G)
    np.testing.assert_allclose(total, sum(sample_potential(p, G) for p in parts),
                               rtol=0, atol=1e-12 * (1 + np.abs(total).max()))


@given(_amp, _k, st.floats(-2, 2), st.floats(0, 2))
@settings(max_examples=50)
def test_schedules_are_even(c, k, d, h):
    for values in (sample_nonlinearity(SinusoidalMod(c, k, d), G),
                   sample_potential(Sum((Sinusoidal(c, k), Harmonic(h))), G)):
        np.testing.assert_allclose(values[1:], G.mirror(values)[1:],
                                   atol=1e-12 * (1 + np.abs(values).max()))


@given(st.floats(0, 100), _k)
@settings(max_examples=50)
def test_unit_offset_never_negative(c, k):
    assert sample_nonlinearity(SinusoidalMod(c, k, 1.0), G).min() >= -1e-12 * (1 + c)


@given(_amp)
@settings(max_examples=30)
def test_commensurate_modulation_has_zero_mean(c):
    # k = 2 pi m / L puts whole periods on the grid
    k = 2 * math.pi * 7 / G.length
    n = sample_nonlinearity(SinusoidalMod(c, k, 0), G)
    assert abs(n.mean()) <= 1e-12 * (1 + abs(c))
