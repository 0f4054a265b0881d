"""Peak census, fringe visibility, peak-height series and unit conversions."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import constants
from scipy.signal import find_peaks

from .core import Grid1D, PhysicalParams, density


class AnalysisError(ValueError):
    pass


class ValidityWarning(UserWarning):
    """An estimate was used outside the regime it is derived for."""


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    fwhm: float
    area: float  # fraction of the total atom number


@dataclass
class AnalysisReport:
    peaks: list
    visibility: float | None
    max_height: float
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_peaks": len(self.peaks),
            "max_height": self.max_height,
            "visibility": self.visibility,
            "peaks": [vars(p) for p in self.peaks],
            "notes": list(self.notes),
        }


def _half_crossing(n, i, half, direction, stop):
    """Interpolated index where n falls below ``half`` walking from peak ``i``,
    never passing the valley at ``stop``."""
    j = i
    while j != stop and n[j + direction] >= half:
        j += direction
    if j == stop:
        return float(j)
    a, b = n[j], n[j + direction]
    return j + direction * (a - half) / (a - b)


def _outer_valley(n, i, direction):
    j = i
    last = len(n) - 1
    while 0 < j < last and n[j + direction] <= n[j]:
        j += direction
    return j


def _split_point(n, a, b):
    # midway between the first and last (near-)tied minima keeps mirror symmetry
    seg = n[a:b + 1]
    ties = np.flatnonzero(seg <= seg.min() * (1 + 1e-9) + 1e-300)
    return a + (int(ties[0]) + int(ties[-1])) // 2


def detect_peaks(n, grid: Grid1D, rel_threshold: float = 0.25,
                 min_separation: float = 1.0) -> list[Peak]:
    """Local maxima above ``rel_threshold * max(n)``, at least ``min_separation`` apart.

    Of two peaks closer than ``min_separation`` the higher is kept.  Widths are
    full widths at half the peak's own height (linear interpolation); areas
    run between the valleys separating neighbouring peaks, and outward to the
    first local minimum for the outermost ones.
    """
    n = np.asarray(n, dtype=float)
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    if not min_separation > 0:
        raise ValueError("min_separation must be positive")
    top = n.max()
    if not top > 0:
        raise AnalysisError("density is identically zero")
    dx = grid.dx
    distance = max(1, math.ceil(min_separation / dx - 1e-9))
    # the grid is periodic: pad by wrapping so a maximum on the first sample counts
    pad = min(distance, len(n) - 1)
    wrapped = np.concatenate([n[-pad:], n, n[:pad]])
    idx, _ = find_peaks(wrapped, height=rel_threshold * top, distance=distance)
    idx = idx[(idx >= pad) & (idx < pad + len(n))] - pad
    if len(idx) == 0:
        # flat top or a maximum sitting on the grid edge
        idx = np.array([int(np.argmax(n))])
    total = n.sum()
    valleys = [_outer_valley(n, idx[0], -1)]
    for a, b in zip(idx[:-1], idx[1:]):
        valleys.append(_split_point(n, a, b))
    valleys.append(_outer_valley(n, idx[-1], +1))
    x = np.asarray(grid.x)
    peaks = []
    for m, i in enumerate(idx):
        half = 0.5 * n[i]
        lo, hi = valleys[m], valleys[m + 1]
        left = _half_crossing(n, i, half, -1, lo)
        right = _half_crossing(n, i, half, +1, hi)
        # a shared valley sample counts half to each side
        area = n[lo:hi + 1].sum()
        if m > 0:
            area -= 0.5 * n[lo]
        if m < len(idx) - 1:
            area -= 0.5 * n[hi]
        area /= total
        peaks.append(Peak(float(x[i]), float(n[i]), float((right - left) * dx), float(area)))
    return peaks


def _valleys(n, idx):
    return [float(n[a:b + 1].min()) for a, b in zip(idx[:-1], idx[1:])]


def fringe_visibility(n, grid: Grid1D, region=None, rel_threshold: float = 0.25,
                      min_separation: float = 1.0) -> float:
    """(P_max - P_min) / (P_max + P_min) of the fringe pattern.

    ``region`` selects which fringes are measured:

    * ``None`` (default): the brightest fringe, i.e. the highest peak and the
      deeper of the two valleys flanking it;
    * ``"outer"``: everything between the outermost peaks, P_min being the
      lowest valley anywhere in that span;
    * ``(lo, hi)``: peaks whose positions fall inside the interval.
    """
    n = np.asarray(n, dtype=float)
    peaks = detect_peaks(n, grid, rel_threshold, min_separation)
    if len(peaks) < 2:
        raise AnalysisError(f"visibility needs at least 2 peaks, found {len(peaks)}")
    x = np.asarray(grid.x)
    idx = np.array([int(round((p.position - grid.x_min) / grid.dx)) for p in peaks])
    if region is None:
        m = int(np.argmax(n[idx]))
        sel = idx[max(0, m - 1):m + 2]
    elif region == "outer":
        sel = idx
    else:
        lo, hi = region
        sel = idx[(x[idx] >= lo) & (x[idx] <= hi)]
        if len(sel) < 2:
            raise AnalysisError(f"fewer than 2 peaks inside region {region}")
    p_max = float(n[sel].max())
    p_min = min(_valleys(n, sel))
    return (p_max - p_min) / (p_max + p_min)


def analyze_density(n, grid: Grid1D, rel_threshold: float = 0.25,
                    min_separation: float = 1.0) -> AnalysisReport:
    n = np.asarray(n, dtype=float)
    peaks = detect_peaks(n, grid, rel_threshold, min_separation)
    notes = []
    try:
        vis = fringe_visibility(n, grid, None, rel_threshold, min_separation)
        notes.append(f"visibility over all fringes: "
                     f"{fringe_visibility(n, grid, 'outer', rel_threshold, min_separation):.6g}")
    except AnalysisError as e:
        vis = None
        notes.append(f"visibility undefined: {e}")
    return AnalysisReport(peaks, vis, max(p.height for p in peaks), notes)


def analyze_wavefunction(psi, rel_threshold: float = 0.25,
                         min_separation: float = 1.0) -> AnalysisReport:
    return analyze_density(density(psi), psi.grid, rel_threshold, min_separation)


class HeightSample(NamedTuple):
    t: float
    h: float


def max_height_series(traj) -> list[HeightSample]:
    if not traj.snapshots:
        raise AnalysisError("empty trajectory")
    return [HeightSample(s.t, float(density(s.psi).max())) for s in traj.snapshots]


def oscillation_maxima(series, rel_prominence: float = 0.25) -> list[HeightSample]:
    """Interior local maxima of a height series that stand out by at least
    ``rel_prominence`` of the series range (drops ripples on the slopes)."""
    h = np.array([s.h for s in series])
    if len(h) < 3:
        return []
    span = h.max() - h.min()
    idx, _ = find_peaks(h, prominence=rel_prominence * span if span > 0 else None)
    return [series[i] for i in idx]


def is_monotone(values) -> bool:
    d = np.diff(np.asarray(values, dtype=float))
    return bool(np.all(d >= 0) or np.all(d <= 0))


UNIT_KINDS = ("length", "time", "cn")


def unit_convert(params: PhysicalParams, value: float, kind: str) -> float:
    """Convert a dimensionless value to SI, or an SI coupling to dimensionless.

    ``length``: value in length units -> metres.
    ``time``: value in units of 1/omega -> seconds.
    ``cn``: 3D coupling 4 pi N hbar^2 a / m in J m^3 -> dimensionless 1D Cn,
    dividing by ``params.transverse_area`` to reduce to one dimension.
    """
    if kind == "Cn_SI_to_HO":
        kind = "cn"
    if kind == "length":
        return value * params.length_unit
    if kind == "time":
        return value * params.time_unit
    if kind == "cn":
        if params.transverse_area is None:
            raise ValueError("cn conversion needs params.transverse_area")
        energy = constants.hbar * params.trap_omega
        return value / (params.transverse_area * params.length_unit * energy)
    raise ValueError(f"kind must be one of {UNIT_KINDS}, got {kind!r}")


def heating_rate(gamma: float, rabi: float, detuning: float) -> float:
    """Photon-recoil heating rate gamma (rabi / detuning)^2 for large detuning."""
    if detuning == 0:
        raise ValueError("detuning must be nonzero")
    if abs(detuning) < 10 * abs(rabi) or abs(detuning) < 10 * abs(gamma):
        warnings.warn(
            f"heating_rate assumes |detuning| >> rabi, gamma; got detuning={detuning}, "
            f"rabi={rabi}, gamma={gamma}", ValidityWarning, stacklevel=2)
    return gamma * rabi**2 / detuning**2
