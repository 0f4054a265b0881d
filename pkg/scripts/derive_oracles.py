"""Independent oracle values frozen into the test suite.

Each value is computed by a route that shares no code with the path it checks:

* Cn = 20 ground-state energy (V = x^2/2, kinetic 1/2): finite-difference
  energy minimised directly (L-BFGS), Richardson-extrapolated
  over two mesh sizes.
* minima of x^2/4 + 20 cos x: root of the derivative by Brent's method.
* width after 1 pi of free expansion of the Cn = 20 ground state: RK4 at
  dt / 10 on a grid with twice the points.

    python scripts/derive_oracles.py
"""

import math

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq, minimize


def fd_ground_energy(cn, half_width=20.0, n=4001):
    """Minimise the finite-difference GP energy over normalised real states."""
    x = np.linspace(-half_width, half_width, n)
    h = x[1] - x[0]
    lap = (sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n)) / h**2).tocsr()
    V = 0.5 * x**2

    def energy_and_grad(u):
        s = math.sqrt(np.sum(u**2) * h)
        psi = u / s
        lp = lap @ psi
        e = (-0.5 * psi @ lp + np.sum(V * psi**2 + 0.5 * cn * psi**4)) * h
        g = (-lp + 2 * V * psi + 2 * cn * psi**3) * h
        g = (g - (g @ psi) * psi * h) / s
        return e, g

    res = minimize(energy_and_grad, np.exp(-x**2 / 8), jac=True, method="L-BFGS-B",
                   options={"maxiter": 100000, "maxcor": 50, "ftol": 1e-16, "gtol": 1e-12})
    return res.fun


def energy_cn20():
    e1 = fd_ground_energy(20.0, n=4001)
    e2 = fd_ground_energy(20.0, n=8001)
    # second-order scheme: halving h quarters the error
    return e2 + (e2 - e1) / 3.0, e1, e2


def effective_minimum():
    return brentq(lambda x: 0.5 * x - 20.0 * math.sin(x), 2.5, 3.5)


def expansion_width():
    from gpelab.core import Grid1D, position_width
    from gpelab.integrator import StepperConfig, evolve, ground_state
    from gpelab.schedules import Constant, Harmonic, Zero

    grid = Grid1D(-40.0, 40.0, 2048)
    psi = ground_state(Harmonic(0.5), Constant(20.0), grid)
    out = evolve(psi, Zero(), Constant(20.0), math.pi, StepperConfig(dt=1e-5))
    return position_width(psi), position_width(out)


if __name__ == "__main__":
    e, e1, e2 = energy_cn20()
    print(f"Cn=20 ground energy: {e:.12f}  (h: {e1:.12f}, h/2: {e2:.12f})")
    print(f"effective-shape minimum: +-{effective_minimum():.12f}")
    w0, w1 = expansion_width()
    print(f"expansion width: {w0:.12f} -> {w1:.12f}")
