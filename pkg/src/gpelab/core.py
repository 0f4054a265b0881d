"""Spatial grid, condensate wavefunction and basic observables.

Everything is dimensionless.  Time is measured in units of 1/omega.  The
Hamiltonian is ``H = -kinetic * d^2/dx^2 + V(x) + Cn(x) |psi|^2``; with
``kinetic = 0.5`` lengths are in units of sqrt(hbar/(m omega)) and the trap is
x^2/2, with ``kinetic = 1.0`` lengths are in units of sqrt(hbar/(2 m omega))
and the trap is x^2/4.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy import constants

OSCILLATOR_KINETIC = 0.5
SCALED_KINETIC = 1.0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid; ``x_max`` is the wrap point and is not sampled."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            raise ValueError(f"n_points must be an integer, got {n!r}")
        if n < 16 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 16, got {n}")
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if self.x_max <= self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + np.arange(self.n_points) * self.dx
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        k = 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        k.flags.writeable = False
        return k

    @property
    def dk(self) -> float:
        return 2 * np.pi / self.length

    def is_symmetric(self) -> bool:
        # sample i mirrors to N - i, so a symmetric periodic grid has x_min = -x_max
        return np.isclose(self.x_min, -self.x_max)

    def mirror(self, values: np.ndarray) -> np.ndarray:
        """Reflect a sampled field through x = 0 (symmetric grids only)."""
        if not self.is_symmetric():
            raise ValueError("mirror needs a grid symmetric about 0")
        return np.roll(values[::-1], 1)


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), n_points)


DEFAULT_GRID = Grid1D(-40.0, 40.0, 1024)


class WaveFunction:
    """Complex samples of the condensate wavefunction on a grid.

    Instances are mutable only through ``amplitudes`` being replaced by the
    propagators; the constructor always copies.
    """

    def __init__(self, grid: Grid1D, amplitudes):
        amps = np.array(amplitudes, dtype=np.complex128, copy=True)
        if amps.shape != (grid.n_points,):
            raise ValueError(
                f"amplitudes have shape {amps.shape}, grid needs ({grid.n_points},)")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes contain NaN or Inf")
        self.grid = grid
        self.amplitudes = amps

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes)

    def __repr__(self):
        return f"WaveFunction(grid={self.grid}, norm_sq={norm_sq(self):.12g})"


def norm_sq(psi: WaveFunction) -> float:
    a = psi.amplitudes
    return float(np.sum(a.real**2 + a.imag**2) * psi.grid.dx)


def normalize(psi: WaveFunction) -> WaveFunction:
    n = norm_sq(psi)
    if n == 0.0:
        raise ValueError("cannot normalize a zero wavefunction")
    return WaveFunction(psi.grid, psi.amplitudes / np.sqrt(n))


def density(psi: WaveFunction) -> np.ndarray:
    a = psi.amplitudes
    return a.real**2 + a.imag**2


def momentum_amplitudes(psi: WaveFunction) -> np.ndarray:
    """Continuum-normalised momentum amplitudes, so sum |phi|^2 dk = sum |psi|^2 dx."""
    g = psi.grid
    return sfft.fft(psi.amplitudes) * g.dx / np.sqrt(2 * np.pi)


def position_mean(psi: WaveFunction) -> float:
    n = density(psi)
    return float(np.sum(psi.grid.x * n) / np.sum(n))


def position_width(psi: WaveFunction) -> float:
    """RMS width sqrt(<x^2> - <x>^2)."""
    n = density(psi)
    x = psi.grid.x
    mean = np.sum(x * n) / np.sum(n)
    return float(np.sqrt(np.sum((x - mean) ** 2 * n) / np.sum(n)))


def momentum_mean(psi: WaveFunction) -> float:
    phi = momentum_amplitudes(psi)
    w = phi.real**2 + phi.imag**2
    return float(np.sum(psi.grid.k * w) / np.sum(w))


def gaussian_packet(grid: Grid1D, center: float, width: float,
                    momentum: float = 0.0) -> WaveFunction:
    """Normalised exp(-(x-c)^2 / (2 w^2) + i p x)."""
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    x = grid.x
    amps = np.exp(-((x - center) ** 2) / (2 * width**2) + 1j * momentum * x)
    psi = normalize(WaveFunction(grid, amps))
    edge = max(abs(psi.amplitudes[0]), abs(psi.amplitudes[-1]))
    if edge >= 1e-10:
        raise ValueError(
            f"packet touches the grid boundary (|psi| = {edge:.3g} at the edge)")
    return psi


def second_derivative(psi: WaveFunction) -> np.ndarray:
    k = psi.grid.k
    return sfft.ifft(-(k**2) * sfft.fft(psi.amplitudes))


def _check_field(name: str, arr, grid: Grid1D) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 0:
        arr = np.full(grid.n_points, float(arr))
    if arr.shape != (grid.n_points,):
        raise ValueError(f"{name} has shape {arr.shape}, grid needs ({grid.n_points},)")
    return arr


def expectation_energy(psi: WaveFunction, V, Cn,
                       kinetic: float = OSCILLATOR_KINETIC) -> float:
    """Gross-Pitaevskii energy functional with a spectral kinetic term."""
    V = _check_field("V", V, psi.grid)
    Cn = _check_field("Cn", Cn, psi.grid)
    a = psi.amplitudes
    n = density(psi)
    kin = np.sum(np.conj(a) * (-kinetic) * second_derivative(psi))
    e = (kin + np.sum(V * n + 0.5 * Cn * n**2)) * psi.grid.dx
    return float(e.real)


@dataclass(frozen=True)
class PhysicalParams:
    """SI parameters for converting dimensionless results.

    ``transverse_area`` (m^2) is only needed to reduce the 3D coupling to the
    1D equation; ``kinetic`` selects the length unit (see module docstring).
    """

    atom_mass: float
    trap_omega: float
    n_atoms: int
    a_intrinsic: float
    a_induced: float = 0.0
    transverse_area: float | None = None
    kinetic: float = OSCILLATOR_KINETIC

    def __post_init__(self):
        if not self.atom_mass > 0:
            raise ValueError("atom_mass must be positive")
        if not self.trap_omega > 0:
            raise ValueError("trap_omega must be positive")
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be at least 1")
        if not self.kinetic > 0:
            raise ValueError("kinetic must be positive")
        if self.transverse_area is not None and not self.transverse_area > 0:
            raise ValueError("transverse_area must be positive")

    @property
    def scattering_length(self) -> float:
        return self.a_intrinsic + self.a_induced

    @property
    def coupling_si(self) -> float:
        """4 pi N hbar^2 a / m in J m^3."""
        return 4 * np.pi * self.n_atoms * constants.hbar**2 * self.scattering_length / self.atom_mass

    @property
    def length_unit(self) -> float:
        return float(np.sqrt(constants.hbar / (2 * self.kinetic * self.atom_mass * self.trap_omega)))

    @property
    def time_unit(self) -> float:
        return 1.0 / self.trap_omega


SODIUM_23_MASS = 22.98976928 * constants.atomic_mass
