"""Real- and imaginary-time propagation of the 1D Gross-Pitaevskii equation.

RK4 with a spectral Laplacian is the production method.  Strang split-step
is kept alongside it as an independent check; both share nothing but the
FFT library.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .core import (OSCILLATOR_KINETIC, Grid1D, WaveFunction, _check_field,
                   expectation_energy)
from .schedules import (harmonic_terms, is_confining, sample_nonlinearity,
                        sample_potential)

METHODS = ("rk4", "splitstep")
_EDGE = 4


class PropagationError(RuntimeError):
    """A propagation tolerance was breached; carries where and by how much."""

    def __init__(self, message: str, time: float | None = None, drift: float | None = None):
        super().__init__(message)
        self.time = time
        self.drift = drift


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class StepperConfig:
    dt: float = 1e-4
    method: str = "rk4"
    norm_drift_tol: float = 1e-8
    boundary_density_tol: float = 1e-6

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.norm_drift_tol > 0:
            raise ValueError("norm_drift_tol must be positive")
        if not self.boundary_density_tol > 0:
            raise ValueError("boundary_density_tol must be positive")


class _Kernel:
    """Precomputed operators for one (grid, V, Cn, kinetic) combination."""

    def __init__(self, grid: Grid1D, V, Cn, kinetic: float):
        self.grid = grid
        self.kinetic = kinetic
        self.V = _check_field("V", V, grid)
        self.Cn = _check_field("Cn", Cn, grid)
        self.k2 = np.asarray(grid.k) ** 2
        self._mik2 = -1j * kinetic * self.k2
        self._miV = -1j * self.V
        self._miC = -1j * self.Cn

    # d psi/dt = -i H psi
    def rhs(self, a: np.ndarray) -> np.ndarray:
        lap = sfft.ifft(self._mik2 * sfft.fft(a), overwrite_x=True)
        n = a.real * a.real + a.imag * a.imag
        return lap + (self._miV + self._miC * n) * a

    def h_apply(self, a: np.ndarray) -> np.ndarray:
        lap = sfft.ifft(self.kinetic * self.k2 * sfft.fft(a), overwrite_x=True)
        n = a.real * a.real + a.imag * a.imag
        return lap + (self.V + self.Cn * n) * a

    def rk4(self, a: np.ndarray, h: float) -> np.ndarray:
        k1 = self.rhs(a)
        k2 = self.rhs(a + (0.5 * h) * k1)
        k3 = self.rhs(a + (0.5 * h) * k2)
        k4 = self.rhs(a + h * k3)
        k2 += k3
        k2 *= 2.0
        k1 += k2
        k1 += k4
        k1 *= h / 6.0
        return a + k1

    def split(self, a: np.ndarray, h: float) -> np.ndarray:
        half = np.exp((-0.5j * h * self.kinetic) * self.k2)
        b = sfft.ifft(half * sfft.fft(a), overwrite_x=True)
        n = b.real * b.real + b.imag * b.imag
        b *= np.exp(-1j * h * (self.V + self.Cn * n))
        return sfft.ifft(half * sfft.fft(b, overwrite_x=True), overwrite_x=True)

    def advance(self, a: np.ndarray, h: float, method: str) -> np.ndarray:
        return self.rk4(a, h) if method == "rk4" else self.split(a, h)

    def spectral_radius(self, n_max: float) -> float:
        return float(self.kinetic * self.k2.max() + np.abs(self.V).max()
                     + np.abs(self.Cn).max() * n_max)


def apply_rhs(psi: WaveFunction, V, Cn, kinetic: float = OSCILLATOR_KINETIC) -> np.ndarray:
    """-i (-kinetic d^2/dx^2 + V + Cn |psi|^2) psi with a spectral derivative."""
    return _Kernel(psi.grid, V, Cn, kinetic).rhs(psi.amplitudes)


def _norm(a: np.ndarray, dx: float) -> float:
    return float(np.sum(a.real * a.real + a.imag * a.imag) * dx)


def _boundary_ratio(a: np.ndarray) -> float:
    n = a.real * a.real + a.imag * a.imag
    peak = n.max()
    if peak == 0.0:
        return 0.0
    return float(max(n[:_EDGE].max(), n[-_EDGE:].max()) / peak)


def step(psi: WaveFunction, V, Cn, cfg: StepperConfig,
         kinetic: float = OSCILLATOR_KINETIC, dt: float | None = None) -> WaveFunction:
    """One step of size ``dt`` (default ``cfg.dt``); the result is not renormalised."""
    h = cfg.dt if dt is None else dt
    kern = _Kernel(psi.grid, V, Cn, kinetic)
    before = _norm(psi.amplitudes, psi.grid.dx)
    out = kern.advance(psi.amplitudes, h, cfg.method)
    after = _norm(out, psi.grid.dx)
    if not math.isfinite(after):
        raise PropagationError("NaN/Inf in wavefunction after step", time=h)
    if abs(after - before) > cfg.norm_drift_tol:
        raise PropagationError(
            f"norm changed by {after - before:.3e} in one step; reduce dt",
            time=h, drift=after - before)
    return WaveFunction(psi.grid, out)


def step_sizes(duration: float, dt: float) -> tuple[int, float]:
    """Number of full steps and the size of the trailing partial step (0 if none)."""
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    ratio = duration / dt
    nearest = round(ratio)
    if abs(ratio - nearest) <= 1e-9 * max(1.0, ratio):
        return int(nearest), 0.0
    n = int(math.floor(ratio))
    return n, duration - n * dt


def propagate(psi: WaveFunction, V_spec, Cn_spec, duration: float,
              cfg: StepperConfig = StepperConfig(), snapshot_every: int = 0,
              kinetic: float = OSCILLATOR_KINETIC, t0: float = 0.0):
    """Evolve ``psi`` for ``duration`` under static schedules.

    Returns ``[(t, WaveFunction), ...]`` with absolute times (offset ``t0``):
    the initial state, one snapshot every ``snapshot_every`` steps (0 means
    none in between) and the final state.  Norm drift and boundary density
    are checked throughout; a breach raises PropagationError.
    """
    grid = psi.grid
    V = sample_potential(V_spec, grid)
    Cn = sample_nonlinearity(Cn_spec, grid)
    return propagate_arrays(psi, V, Cn, duration, cfg, snapshot_every, kinetic, t0)


def propagate_arrays(psi: WaveFunction, V, Cn, duration: float,
                     cfg: StepperConfig = StepperConfig(), snapshot_every: int = 0,
                     kinetic: float = OSCILLATOR_KINETIC, t0: float = 0.0):
    grid = psi.grid
    dx = grid.dx
    kern = _Kernel(grid, V, Cn, kinetic)
    n_full, partial = step_sizes(duration, cfg.dt)
    a = psi.amplitudes.copy()
    norm0 = _norm(a, dx)
    frames = [(t0, WaveFunction(grid, a))]

    def check(a, steps_done, t, snapshot):
        nrm = _norm(a, dx)
        if not math.isfinite(nrm):
            raise PropagationError(f"NaN/Inf at t={t:.6g}", time=t)
        drift = nrm - norm0
        if abs(drift) > cfg.norm_drift_tol:
            raise PropagationError(
                f"norm drift {drift:.3e} exceeds {cfg.norm_drift_tol:.1e} at t={t:.6g}",
                time=t, drift=drift)
        if snapshot:
            ratio = _boundary_ratio(a)
            if ratio > cfg.boundary_density_tol:
                raise PropagationError(
                    f"boundary density {ratio:.3e} of peak exceeds "
                    f"{cfg.boundary_density_tol:.1e} at t={t:.6g}; enlarge the grid",
                    time=t, drift=drift)

    prev = norm0
    for i in range(1, n_full + 1):
        a = kern.advance(a, cfg.dt, cfg.method)
        t = t0 + i * cfg.dt
        # cheap per-step check; full check only at snapshots
        nrm = _norm(a, dx)
        if not math.isfinite(nrm) or abs(nrm - prev) > cfg.norm_drift_tol:
            raise PropagationError(
                f"single-step norm change {nrm - prev:.3e} at t={t:.6g}; reduce dt",
                time=t, drift=nrm - norm0)
        prev = nrm
        last = i == n_full and partial == 0.0
        snap = last or (snapshot_every > 0 and i % snapshot_every == 0)
        if snap:
            check(a, i, t, True)
            frames.append((t0 + duration if last else t, WaveFunction(grid, a)))
    if partial > 0.0:
        a = kern.advance(a, partial, cfg.method)
        check(a, n_full + 1, t0 + duration, True)
        frames.append((t0 + duration, WaveFunction(grid, a)))
    return frames


def evolve(psi: WaveFunction, V_spec, Cn_spec, duration: float,
           cfg: StepperConfig = StepperConfig(),
           kinetic: float = OSCILLATOR_KINETIC) -> WaveFunction:
    """Final state of ``propagate`` without intermediate snapshots."""
    return propagate(psi, V_spec, Cn_spec, duration, cfg, 0, kinetic)[-1][1]


def cross_validate(psi0: WaveFunction, V_spec, Cn_spec, duration: float,
                   cfg_rk4: StepperConfig, cfg_split: StepperConfig,
                   kinetic: float = OSCILLATOR_KINETIC) -> float:
    """L2 distance between the RK4 and split-step results at ``duration``."""
    if cfg_rk4.method != "rk4" or cfg_split.method != "splitstep":
        raise ValueError("cross_validate needs one rk4 and one splitstep config")
    a = evolve(psi0, V_spec, Cn_spec, duration, cfg_rk4, kinetic).amplitudes
    b = evolve(psi0, V_spec, Cn_spec, duration, cfg_split, kinetic).amplitudes
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) * psi0.grid.dx))


# -- imaginary time ---------------------------------------------------------

def _oscillator_guess(grid: Grid1D, V_spec, kinetic: float) -> np.ndarray:
    s = sum(h.half_strength for h in harmonic_terms(V_spec))
    w2 = math.sqrt(kinetic / s)
    return np.exp(-np.asarray(grid.x) ** 2 / (2 * w2)).astype(np.complex128)


def _renorm(a: np.ndarray, dx: float) -> np.ndarray:
    return a / math.sqrt(_norm(a, dx))


def ground_state(V_spec, Cn_spec, grid: Grid1D, tol: float = 1e-10,
                 kinetic: float = OSCILLATOR_KINETIC,
                 max_steps: int = 1_000_000) -> WaveFunction:
    """Lowest stationary state by normalised imaginary-time relaxation.

    A coarse split-step relaxation gets close cheaply; RK4 on the projected
    flow ``-(H - <H>) psi`` then converges until the energy drops by less than
    ``tol`` per unit imaginary time.  The projected flow's fixed point is an
    exact discrete eigenstate, independent of the step size.
    """
    amps = _ground_state_cached(V_spec, Cn_spec, grid, float(tol), float(kinetic), int(max_steps))
    return WaveFunction(grid, amps)


@functools.lru_cache(maxsize=32)
def _ground_state_cached(V_spec, Cn_spec, grid, tol, kinetic, max_steps):
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not is_confining(V_spec):
        raise ValueError("ground_state needs a confining (harmonic) potential")
    V = sample_potential(V_spec, grid)
    Cn = sample_nonlinearity(Cn_spec, grid)
    kern = _Kernel(grid, V, Cn, kinetic)
    dx = grid.dx
    a = _renorm(_oscillator_guess(grid, V_spec, kinetic), dx)
    steps = 0

    def energy(a):
        return expectation_energy(WaveFunction(grid, a), V, Cn, kinetic)

    # coarse stage: Strang splitting in imaginary time
    tau = 1e-2
    half = np.exp(-0.5 * tau * kinetic * kern.k2)
    e_prev = energy(a)
    block = 50
    while steps < max_steps:
        for _ in range(block):
            b = sfft.ifft(half * sfft.fft(a))
            n = b.real**2 + b.imag**2
            b = b * np.exp(-tau * (V + Cn * n))
            a = _renorm(sfft.ifft(half * sfft.fft(b)), dx)
        steps += block
        e = energy(a)
        if abs(e_prev - e) / (block * tau) < 1e-6:
            break
        e_prev = e

    # fine stage: RK4 on the norm-preserving gradient flow
    n_max = float((np.abs(a) ** 2).max())
    h = min(1e-2, 2.0 / kern.spectral_radius(2 * n_max))

    def flow(b):
        hb = kern.h_apply(b)
        mu = np.vdot(b, hb).real / np.vdot(b, b).real
        return mu * b - hb

    e_prev = energy(a)
    while True:
        for _ in range(block):
            k1 = flow(a)
            k2 = flow(a + 0.5 * h * k1)
            k3 = flow(a + 0.5 * h * k2)
            k4 = flow(a + h * k3)
            a = _renorm(a + (h / 6.0) * (k1 + 2 * (k2 + k3) + k4), dx)
        steps += block
        e = energy(a)
        if abs(e_prev - e) / (block * h) < tol:
            break
        if steps >= max_steps:
            raise ConvergenceError(
                f"imaginary-time relaxation did not converge in {max_steps} steps "
                f"(last energy change {abs(e_prev - e):.3e})")
        e_prev = e

    # nodeless: fix the global phase so the state is real and positive
    a = a * np.exp(-1j * np.angle(a[np.argmax(np.abs(a))]))
    a = np.abs(a.real) + 0j
    a = _renorm(a, dx)
    a.flags.writeable = False
    return a
