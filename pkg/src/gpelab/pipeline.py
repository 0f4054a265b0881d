"""Staged experiment plans: release / interaction region / free fall, and in-trap runs.

Presets are written in the scaled units of the original simulations
(``kinetic = 1``, trap x^2/4, lengths in sqrt(hbar / 2 m omega)), which is
what the quoted peak heights and widths refer to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .core import (DEFAULT_GRID, OSCILLATOR_KINETIC, SCALED_KINETIC, Grid1D,
                   WaveFunction, gaussian_packet)
from .integrator import PropagationError, StepperConfig, ground_state, propagate
from .schedules import (Constant, Harmonic, ParabolicMod, Sinusoidal,
                        SinusoidalMod, Zero, is_confining, scale_modulation,
                        set_wavenumber)

PI = math.pi


@dataclass(frozen=True)
class Stage:
    name: str
    duration: float
    potential: object = Zero()
    nonlinearity: object = Constant(0.0)
    snapshot_every: int = 0

    def __post_init__(self):
        if not (self.duration >= 0 and math.isfinite(self.duration)):
            raise ValueError(f"stage duration must be >= 0, got {self.duration}")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be >= 0")

    @property
    def modulated(self) -> bool:
        return (scale_modulation(self.potential, 1.0) is not None
                or isinstance(self.nonlinearity, (SinusoidalMod, ParabolicMod)))


@dataclass(frozen=True)
class GroundStateInit:
    potential: object
    nonlinearity: object
    tol: float = 1e-10

    def __post_init__(self):
        if not is_confining(self.potential):
            raise ValueError("ground-state init needs a confining potential")


@dataclass(frozen=True)
class GaussianInit:
    center: float = 0.0
    width: float = 1.0
    momentum: float = 0.0


@dataclass(frozen=True)
class ExperimentPlan:
    grid: Grid1D
    init: object
    stages: tuple
    stepper: StepperConfig = StepperConfig()
    label: str = "plan"
    kinetic: float = OSCILLATOR_KINETIC

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ValueError("a plan needs at least one stage")
        if not self.kinetic > 0:
            raise ValueError("kinetic must be positive")

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.stages)

    def interaction_index(self) -> int | None:
        for i, s in enumerate(self.stages):
            if s.modulated:
                return i
        return None


@dataclass(frozen=True)
class Snapshot:
    t: float
    stage_index: int
    psi: WaveFunction


@dataclass
class Trajectory:
    plan_label: str
    snapshots: list = field(default_factory=list)
    # ("init", psi) followed by (stage name, psi at the end of that stage)
    stage_states: list = field(default_factory=list)
    plan: ExperimentPlan | None = None

    @property
    def initial(self) -> WaveFunction:
        return self.stage_states[0][1]

    @property
    def final(self) -> WaveFunction:
        return self.stage_states[-1][1]

    def after_stage(self, index: int) -> WaveFunction:
        return self.stage_states[index + 1][1]

    def _interaction(self) -> int:
        idx = self.plan.interaction_index() if self.plan else None
        if idx is None:
            raise ValueError("plan has no interaction stage")
        return idx

    @property
    def pre_interaction(self) -> WaveFunction:
        return self.stage_states[self._interaction()][1]

    @property
    def post_interaction(self) -> WaveFunction:
        return self.after_stage(self._interaction())


def initial_state(plan: ExperimentPlan) -> WaveFunction:
    init = plan.init
    if isinstance(init, GroundStateInit):
        return ground_state(init.potential, init.nonlinearity, plan.grid, init.tol,
                            kinetic=plan.kinetic)
    if isinstance(init, GaussianInit):
        return gaussian_packet(plan.grid, init.center, init.width, init.momentum)
    raise TypeError(f"unknown init {init!r}")


def run_experiment(plan: ExperimentPlan, psi0: WaveFunction | None = None) -> Trajectory:
    psi = initial_state(plan) if psi0 is None else psi0
    traj = Trajectory(plan.label, [Snapshot(0.0, 0, psi)], [("init", psi)], plan)
    t = 0.0
    for i, stage in enumerate(plan.stages):
        try:
            frames = propagate(psi, stage.potential, stage.nonlinearity, stage.duration,
                               plan.stepper, stage.snapshot_every, plan.kinetic, t0=t)
        except PropagationError as e:
            raise PropagationError(f"stage '{stage.name}': {e}", e.time, e.drift) from e
        for ft, fpsi in frames[1:]:
            traj.snapshots.append(Snapshot(ft, i, fpsi))
        psi = frames[-1][1]
        t += stage.duration
        traj.stage_states.append((stage.name, psi))
    return traj


def amplitude_variant(plan: ExperimentPlan, factor: float) -> ExperimentPlan:
    """Scale the modulation amplitude (A or C) of the interaction stage."""
    idx = plan.interaction_index()
    if idx is None:
        raise ValueError(f"plan {plan.label!r} has no modulated stage")
    if factor == 1:
        return plan
    s = plan.stages[idx]
    pot = scale_modulation(s.potential, factor)
    nl = scale_modulation(s.nonlinearity, factor)
    s = replace(s, potential=pot if pot is not None else s.potential,
                nonlinearity=nl if nl is not None else s.nonlinearity)
    stages = plan.stages[:idx] + (s,) + plan.stages[idx + 1:]
    return replace(plan, stages=stages, label=f"{plan.label}_x{factor:g}")


def wavenumber_variant(plan: ExperimentPlan, k: float) -> ExperimentPlan:
    """Replace the modulation wavenumber of the interaction stage."""
    idx = plan.interaction_index()
    if idx is None:
        raise ValueError(f"plan {plan.label!r} has no modulated stage")
    s = plan.stages[idx]
    pot = set_wavenumber(s.potential, k)
    nl = set_wavenumber(s.nonlinearity, k)
    if pot is None and nl is None:
        raise ValueError(f"interaction stage of {plan.label!r} has no wavenumber")
    s = replace(s, potential=pot if pot is not None else s.potential,
                nonlinearity=nl if nl is not None else s.nonlinearity)
    stages = plan.stages[:idx] + (s,) + plan.stages[idx + 1:]
    return replace(plan, stages=stages, label=f"{plan.label}_k{k:g}")


def with_stage_duration(plan: ExperimentPlan, index: int, duration: float) -> ExperimentPlan:
    stages = list(plan.stages)
    stages[index] = replace(stages[index], duration=duration)
    return replace(plan, stages=tuple(stages))


# -- presets ------------------------------------------------------------------

CN = 20.0
TRAP = Harmonic(0.25)
TRAP_GRID = Grid1D(-20.0, 20.0, 512)
# long falls spread past +-40; same spacing as the default grid
WIDE_GRID = Grid1D(-80.0, 80.0, 2048)
DT = 1e-4
EVERY = 0.1 * PI


def _every(interval: float, dt: float = DT) -> int:
    return int(round(interval / dt))


def _gs(cn: float = CN) -> GroundStateInit:
    return GroundStateInit(TRAP, Constant(cn))


def _plan(label, stages, init=None, grid=DEFAULT_GRID, dt=DT) -> ExperimentPlan:
    return ExperimentPlan(grid=grid, init=init or _gs(), stages=tuple(stages),
                          stepper=StepperConfig(dt=dt), label=label,
                          kinetic=SCALED_KINETIC)


def _free(name, duration, cn=CN):
    return Stage(name, duration, Zero(), Constant(cn), _every(EVERY))


def _cn_mod(c=CN, k=2.0, d=0.0, duration=0.3 * PI):
    return Stage("interact", duration, Zero(), SinusoidalMod(c, k, d), _every(EVERY))


def _v_mod(a=1.0, k=2.0, duration=0.2 * PI, cn=CN):
    return Stage("interact", duration, Sinusoidal(a, k), Constant(cn), _every(EVERY))


# dense cadence for the peak-height series; longer in-trap runs use a coarser dt
FIG8_DT = 2.5e-4
FIG8_EVERY = 0.01 * PI
FIG8_BEAT_DURATION = 30 * PI


def _preset_table():
    expand = _free("expand", 1.0 * PI)
    return {
        "fig2": lambda: _plan("fig2", [expand, _cn_mod()]),
        "fig3": lambda: _plan("fig3", [expand, _cn_mod(), _free("fall", 0.3 * PI)]),
        "fig3_recur": lambda: _plan("fig3_recur", [expand, _cn_mod(), _free("fall", 0.8 * PI)],
                                    grid=WIDE_GRID),
        "fig4": lambda: _plan("fig4", [expand, _cn_mod(d=1.0), _free("fall", 0.3 * PI)]),
        "fig4_double": lambda: _plan("fig4_double",
                                     [expand, _cn_mod(c=2 * CN, d=1.0), _free("fall", 0.3 * PI)]),
        "fig5": lambda: _plan("fig5", [expand, _v_mod()]),
        "fig6": lambda: _plan("fig6", [expand, _v_mod(), _free("fall", 0.3 * PI)]),
        "fig6_recur": lambda: _plan("fig6_recur", [expand, _v_mod(), _free("fall", 0.9 * PI)],
                                    grid=WIDE_GRID),
        "fig6_double": lambda: _plan("fig6_double",
                                     [expand, _v_mod(a=2.0), _free("fall", 0.4 * PI)]),
        "fig7": lambda: _plan("fig7", [Stage("trap", 0.5 * PI, TRAP, ParabolicMod(CN, 400.0),
                                             _every(0.05 * PI))], grid=TRAP_GRID),
        "fig8": lambda: _plan("fig8", [Stage("trap", 3 * PI, TRAP, ParabolicMod(CN, 400.0),
                                             _every(FIG8_EVERY, FIG8_DT))],
                              grid=TRAP_GRID, dt=FIG8_DT),
        "fig8_beat": lambda: _plan("fig8_beat",
                                   [Stage("trap", FIG8_BEAT_DURATION, TRAP, ParabolicMod(CN, 100.0),
                                          _every(FIG8_EVERY, FIG8_DT))],
                                   grid=TRAP_GRID, dt=FIG8_DT),
        "fig9": lambda: _plan("fig9", [Stage("trap", 0.4 * PI, TRAP, SinusoidalMod(CN, 1.0, 0.0),
                                             _every(0.05 * PI))], grid=TRAP_GRID),
        "vis_cn150": lambda: _plan("vis_cn150",
                                   [_free("expand", 0.5 * PI, 150.0), _v_mod(cn=150.0),
                                    _free("fall", 0.3 * PI, 150.0)], init=_gs(150.0)),
    }


PRESETS = tuple(_preset_table())


def preset(name: str) -> ExperimentPlan:
    table = _preset_table()
    if name not in table:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(table)}")
    return table[name]()


def parabolic_cn_demo(plan: ExperimentPlan | None = None, tail: float = 12.0,
                      factor: float = 20.0) -> ExperimentPlan:
    """Swap the interaction-stage Cn for a steep parabola reaching ``factor`` * Cn at ``tail``.

    The focusing attempt that needs an unrealistically large scattering length
    change; kept as a demo, not a preset.
    """
    plan = plan or preset("fig3")
    idx = plan.interaction_index()
    if idx is None:
        raise ValueError("plan has no interaction stage")
    s = plan.stages[idx]
    steep = ParabolicMod(factor * CN, tail**2)
    stages = list(plan.stages)
    stages[idx] = replace(s, potential=Zero(), nonlinearity=steep)
    return replace(plan, stages=tuple(stages), label=f"{plan.label}_parabolic_demo")
