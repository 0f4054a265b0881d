"""1D Gross-Pitaevskii toolkit for condensate focusing and splitting experiments."""

from .analysis import (AnalysisReport, Peak, analyze_density, analyze_wavefunction,
                       detect_peaks, fringe_visibility, heating_rate, max_height_series,
                       unit_convert)
from .core import (DEFAULT_GRID, OSCILLATOR_KINETIC, SCALED_KINETIC, Grid1D,
                   PhysicalParams, WaveFunction, density, expectation_energy,
                   gaussian_packet, make_grid, norm_sq, normalize)
from .integrator import (PropagationError, StepperConfig, apply_rhs, cross_validate,
                         ground_state, propagate, step)
from .pipeline import (ExperimentPlan, GaussianInit, GroundStateInit, Stage, Trajectory,
                       amplitude_variant, preset, run_experiment)
from .schedules import (Constant, Harmonic, ParabolicMod, Sinusoidal, SinusoidalMod, Sum,
                        Zero, effective_shape, sample_nonlinearity, sample_potential)

__version__ = "0.1.0"
