"""allee_dyn: thresholds, probability lower bounds, and seeded Monte Carlo
for the truncated stochastic difference equation

    x_{n+1} = max(f(x_n) + l * chi_{n+1}, 0)

where f is a population map with an Allee effect and chi is bounded noise
supported on [-1, 1].

Typical use::

    from allee_dyn import analysis, bounds, maps, montecarlo, noise

    m = maps.builtin("example-6-1")
    regime = analysis.analyze_regime(m, a=1.8, H=6.5, l=0.2)
    est = montecarlo.estimate(m, noise.uniform(), regime, x0=1.5,
                              trials=10_000, n_max=100_000, base_seed=20177)
    report = bounds.improved_bounds(m, noise.uniform(), regime, 1.5)
    montecarlo.verify_bounds(est, [report])

The command-line entry point is ``allee-dyn`` (or ``python -m allee_dyn``).
"""

from . import analysis, bounds, maps, montecarlo, noise, rng, simulate
from ._backend import compiled_available
from .analysis import RegimeAnalysis, analyze_regime
from .bounds import BoundReport
from .maps import MapSpec, StructuralParams, builtin, from_script
from .montecarlo import McEstimate, estimate, verify_bounds
from .noise import NoiseSpec
from .simulate import TrajectoryResult

__version__ = "0.1.0"

__all__ = [
    "analysis", "bounds", "maps", "montecarlo", "noise", "rng", "simulate",
    "RegimeAnalysis", "analyze_regime", "BoundReport", "MapSpec",
    "StructuralParams", "builtin", "from_script", "McEstimate", "estimate",
    "verify_bounds", "NoiseSpec", "TrajectoryResult", "compiled_available",
]
