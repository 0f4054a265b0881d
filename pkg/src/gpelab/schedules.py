"""Static spatial schedules for the external potential and the nonlinearity."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np
from scipy.optimize import minimize_scalar

from .core import Grid1D


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Harmonic:
    """V = half_strength * x^2."""

    half_strength: float

    def __post_init__(self):
        if not self.half_strength >= 0:
            raise ValueError(f"half_strength must be >= 0, got {self.half_strength}")


@dataclass(frozen=True)
class Sinusoidal:
    """V = amplitude * cos(k x)."""

    amplitude: float
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"wavenumber must be > 0, got {self.k}")


@dataclass(frozen=True)
class Sum:
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("Sum needs at least one term")


PotentialSpec = Union[Zero, Harmonic, Sinusoidal, Sum]


@dataclass(frozen=True)
class Constant:
    cn: float


@dataclass(frozen=True)
class SinusoidalMod:
    """Cn(x) = c * (cos(k x) + d)."""

    c: float
    k: float
    d: float = 0.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"wavenumber must be > 0, got {self.k}")


@dataclass(frozen=True)
class ParabolicMod:
    """Cn(x) = cn * x^2 / x_scale."""

    cn: float
    x_scale: float

    def __post_init__(self):
        if not self.x_scale > 0:
            raise ValueError(f"x_scale must be > 0, got {self.x_scale}")


NonlinearitySpec = Union[Constant, SinusoidalMod, ParabolicMod]


def _potential_at(spec, x: np.ndarray) -> np.ndarray:
    if isinstance(spec, Zero):
        return np.zeros_like(x)
    if isinstance(spec, Harmonic):
        return spec.half_strength * x**2
    if isinstance(spec, Sinusoidal):
        return spec.amplitude * np.cos(spec.k * x)
    if isinstance(spec, Sum):
        out = _potential_at(spec.terms[0], x)
        for term in spec.terms[1:]:
            out = out + _potential_at(term, x)
        return out
    raise TypeError(f"not a potential schedule: {spec!r}")


def _nonlinearity_at(spec, x: np.ndarray) -> np.ndarray:
    if isinstance(spec, Constant):
        return np.full_like(x, spec.cn)
    if isinstance(spec, SinusoidalMod):
        return spec.c * (np.cos(spec.k * x) + spec.d)
    if isinstance(spec, ParabolicMod):
        return spec.cn * x**2 / spec.x_scale
    raise TypeError(f"not a nonlinearity schedule: {spec!r}")


def sample_potential(spec: PotentialSpec, grid: Grid1D) -> np.ndarray:
    return _potential_at(spec, np.asarray(grid.x))


def sample_nonlinearity(spec: NonlinearitySpec, grid: Grid1D) -> np.ndarray:
    return _nonlinearity_at(spec, np.asarray(grid.x))


def harmonic_terms(spec: PotentialSpec) -> list:
    if isinstance(spec, Harmonic):
        return [spec]
    if isinstance(spec, Sum):
        return [h for t in spec.terms for h in harmonic_terms(t)]
    return []


def is_confining(spec: PotentialSpec) -> bool:
    return any(h.half_strength > 0 for h in harmonic_terms(spec))


def is_nonstandard(spec: NonlinearitySpec) -> bool:
    """True for a uniform attractive nonlinearity (every preset is repulsive)."""
    return isinstance(spec, Constant) and spec.cn < 0


def _effective_fn(trap: PotentialSpec, nonlin: SinusoidalMod):
    if not harmonic_terms(trap):
        raise ValueError("effective_shape needs a harmonic trap")
    if not isinstance(nonlin, SinusoidalMod):
        raise ValueError("effective_shape needs a SinusoidalMod nonlinearity")

    def f(x):
        return _potential_at(trap, x) + nonlin.c * np.cos(nonlin.k * x)

    return f


def effective_shape(trap: PotentialSpec, nonlin: SinusoidalMod, grid: Grid1D) -> np.ndarray:
    """Trap plus the sinusoidal part of Cn read as a potential.

    Diagnostic only (never used in propagation); the offset ``d`` is dropped
    since it just shifts the curve.
    """
    return _effective_fn(trap, nonlin)(np.asarray(grid.x))


def effective_minima(trap: PotentialSpec, nonlin: SinusoidalMod, grid: Grid1D,
                     count: int = 2) -> np.ndarray:
    """Positions of the ``count`` deepest local minima of the effective shape, sorted."""
    f = _effective_fn(trap, nonlin)
    x = np.asarray(grid.x)
    y = f(x)
    idx = [i for i in range(1, len(x) - 1) if y[i] <= y[i - 1] and y[i] < y[i + 1]]
    refined = []
    for i in idx:
        res = minimize_scalar(f, bounds=(x[i - 1], x[i + 1]), method="bounded",
                              options={"xatol": 1e-12})
        refined.append((float(res.fun), float(res.x)))
    refined.sort()
    return np.sort(np.array([p for _, p in refined[:count]]))


def scale_modulation(spec, factor: float):
    """Scale the modulated amplitude of a schedule; None if it has none."""
    if isinstance(spec, Sinusoidal):
        return replace(spec, amplitude=spec.amplitude * factor)
    if isinstance(spec, SinusoidalMod):
        return replace(spec, c=spec.c * factor)
    if isinstance(spec, Sum):
        terms = [scale_modulation(t, factor) for t in spec.terms]
        if all(t is None for t in terms):
            return None
        return Sum(tuple(n if n is not None else o for n, o in zip(terms, spec.terms)))
    return None


def set_wavenumber(spec, k: float):
    """Replace the modulation wavenumber; None if the schedule has none."""
    if isinstance(spec, (Sinusoidal, SinusoidalMod)):
        return replace(spec, k=k)
    if isinstance(spec, Sum):
        terms = [set_wavenumber(t, k) for t in spec.terms]
        if all(t is None for t in terms):
            return None
        return Sum(tuple(n if n is not None else o for n, o in zip(terms, spec.terms)))
    return None
