"""Population maps and the displacement function F(x) = f(x) - x.

A map is a continuous f: [0, inf) -> [0, inf) with f(0) = 0, given either as
one of the built-in models or as a user piecewise definition over the small
expression language in :mod:`allee_dyn.expr`.  Built-ins carry three mutually
cross-checked representations: a direct scalar evaluator (the one the
simulation kernels replicate bit-for-bit), a vectorized evaluator for grid
analysis, and an expression-tree definition exercising the same code path as
user maps.

Structural assumptions on (a, H, b1) and on multistability windows are
verified numerically by :func:`validate_assumptions`: each sub-condition is
checked on a uniform grid with one level of x100 local refinement wherever
the margin falls below 1e-3.  Failures are reported as data, never raised.

Built-in ids
------------
``example-6-1`` / ``boukal-hop``
    f(x) = 4x / (2 + (x-3)^2)
``example-6-2`` / ``boukal-burgman``
    f(x) = 4x^2 / (2+x) * exp(2(1-x))
``demo-4-3``
    three pieces: 3x/(3+(x-2)^2) on [0,1), x - sin(pi(x-1)) - 1/4 on [1,5),
    8.55x/(8+(x-6)^2) beyond
``demo-4-4``
    three pieces: 16x/(15+(x-3)^2) on [0,2), x - sin(pi x/2)/(4x) on [2,12),
    (x-10)/(1+(x-13)^2) + 11 beyond
``sine``
    f(x) = x - sin(x), a multistability ladder

User piecewise format (one piece per line, blank lines and ``#`` comments
ignored; the last piece must extend to ``inf``)::

    piece 0 1   3*x/(3+(x-2)^2)
    piece 1 5   x - sin(pi*(x-1)) - 0.25
    piece 5 inf 8.55*x/(8+(x-6)^2)
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr
from ._num import refine_max
from .errors import DomainError, EvaluationError, ParseError

__all__ = [
    "Piece",
    "MapSpec",
    "StructuralParams",
    "ConditionCheck",
    "ValidationReport",
    "builtin",
    "builtin_ids",
    "from_script",
    "eval_f",
    "eval_F",
    "eval_f_vec",
    "eval_F_vec",
    "validate_assumptions",
]


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    node: expr.Node
    source: str


@dataclass(frozen=True)
class MapSpec:
    """Evaluable one-dimensional map on [0, inf) plus metadata."""

    kind: str                      # "builtin" | "piecewise"
    name: str
    pieces: tuple[Piece, ...]
    scalar_fn: Callable[[float], float] | None = None
    vector_fn: Callable[[np.ndarray], np.ndarray] | None = None
    kernel_id: int = -1            # compiled-kernel dispatch id, -1 = none
    suggested: dict = field(default_factory=dict)

    @property
    def breakpoints(self) -> list[float]:
        return [p.lo for p in self.pieces[1:]]

    def piece_at(self, x: float) -> Piece:
        i = bisect_right(self.breakpoints, x)
        return self.pieces[i]


@dataclass(frozen=True)
class StructuralParams:
    """Interval data (a, H), optional trap point b1, optional windows."""

    a: float
    H: float
    b1: float | None = None
    multistability_windows: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not (self.a > 0.0 and self.H > 0.0):
            raise DomainError("a and H must be positive")
        if not self.a < self.H:
            raise DomainError("a < H is required")
        if self.b1 is not None and self.b1 <= 0.0:
            raise DomainError("b1 must be positive")
        prev_hi = None
        for (ai, hi) in self.multistability_windows:
            if not (0.0 < ai < hi):
                raise DomainError("window bounds must satisfy 0 < a_i < H_i")
            if prev_hi is not None and hi is not None and ai <= prev_hi:
                raise DomainError("windows must be disjoint and increasing")
            prev_hi = hi


# ----------------------------------------------------------------------
# evaluation


def _tree_eval(m: MapSpec, x: float) -> float:
    return m.piece_at(x).node.eval(x)


def eval_f(m: MapSpec, x: float) -> float:
    """f(x); DomainError for x < 0, EvaluationError for invalid results."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    if x < 0.0:
        raise DomainError(f"x must be non-negative, got {x}")
    try:
        v = m.scalar_fn(x) if m.scalar_fn is not None else _tree_eval(m, x)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvaluationError(f"map {m.name!r} failed at x={x}: {exc}") from exc
    if not math.isfinite(v):
        raise EvaluationError(f"map {m.name!r} produced {v} at x={x}")
    if v < 0.0:
        raise EvaluationError(f"map {m.name!r} is negative ({v}) at x={x}")
    return v


def eval_F(m: MapSpec, x: float) -> float:
    """Displacement F(x) = f(x) - x."""
    return eval_f(m, x) - float(x)


def eval_f_vec(m: MapSpec, xs: np.ndarray) -> np.ndarray:
    """Vectorized f for grids; same domain rules as :func:`eval_f`."""
    xs = np.asarray(xs, dtype=float)
    if xs.size and (not np.all(np.isfinite(xs)) or xs.min() < 0.0):
        raise DomainError("grid must be finite and non-negative")
    # non-finite results are rejected below; keep numpy quiet about the
    # intermediate inf/nan a bad user expression can produce
    with np.errstate(all="ignore"):
        if m.vector_fn is not None:
            out = m.vector_fn(xs)
        else:
            out = np.empty_like(xs)
            edges = m.breakpoints
            idx = np.searchsorted(edges, xs, side="right")
            for i, piece in enumerate(m.pieces):
                mask = idx == i
                if np.any(mask):
                    out[mask] = piece.node.eval_vec(xs[mask])
    if not np.all(np.isfinite(out)):
        raise EvaluationError(f"map {m.name!r} produced non-finite values")
    if out.size and out.min() < 0.0:
        raise EvaluationError(f"map {m.name!r} produced negative values")
    return out


def eval_F_vec(m: MapSpec, xs: np.ndarray) -> np.ndarray:
    return eval_f_vec(m, xs) - np.asarray(xs, dtype=float)


# ----------------------------------------------------------------------
# built-ins
#
# The scalar closures are written operation-for-operation like the compiled
# kernel (squares as products, same association) so both produce identical
# doubles.


def _f61(x: float) -> float:
    return 4.0 * x / (2.0 + (x - 3.0) * (x - 3.0))


def _f61_vec(x):
    return 4.0 * x / (2.0 + (x - 3.0) * (x - 3.0))


def _f62(x: float) -> float:
    return 4.0 * x * x / (2.0 + x) * math.exp(2.0 * (1.0 - x))


def _f62_vec(x):
    return 4.0 * x * x / (2.0 + x) * np.exp(2.0 * (1.0 - x))


def _f43(x: float) -> float:
    if x < 1.0:
        return 3.0 * x / (3.0 + (x - 2.0) * (x - 2.0))
    if x < 5.0:
        return x - math.sin(math.pi * (x - 1.0)) - 0.25
    return 8.55 * x / (8.0 + (x - 6.0) * (x - 6.0))


def _f43_vec(x):
    out = np.empty_like(x)
    m1 = x < 1.0
    m3 = x >= 5.0
    m2 = ~(m1 | m3)
    x1, x2, x3 = x[m1], x[m2], x[m3]
    out[m1] = 3.0 * x1 / (3.0 + (x1 - 2.0) * (x1 - 2.0))
    out[m2] = x2 - np.sin(np.pi * (x2 - 1.0)) - 0.25
    out[m3] = 8.55 * x3 / (8.0 + (x3 - 6.0) * (x3 - 6.0))
    return out


def _f44(x: float) -> float:
    if x < 2.0:
        return 16.0 * x / (15.0 + (x - 3.0) * (x - 3.0))
    if x < 12.0:
        return x - math.sin(0.5 * math.pi * x) / (4.0 * x)
    return (x - 10.0) / (1.0 + (x - 13.0) * (x - 13.0)) + 11.0


def _f44_vec(x):
    out = np.empty_like(x)
    m1 = x < 2.0
    m3 = x >= 12.0
    m2 = ~(m1 | m3)
    x1, x2, x3 = x[m1], x[m2], x[m3]
    out[m1] = 16.0 * x1 / (15.0 + (x1 - 3.0) * (x1 - 3.0))
    out[m2] = x2 - np.sin(0.5 * np.pi * x2) / (4.0 * x2)
    out[m3] = (x3 - 10.0) / (1.0 + (x3 - 13.0) * (x3 - 13.0)) + 11.0
    return out


def _fsine(x: float) -> float:
    return x - math.sin(x)


def _fsine_vec(x):
    return x - np.sin(x)


def _pieces(*specs: tuple[float, float, str]) -> tuple[Piece, ...]:
    return tuple(Piece(lo, hi, expr.parse(src), src) for lo, hi, src in specs)


_BUILTINS: dict[str, MapSpec] = {}


def _register(spec: MapSpec, *aliases: str):
    _BUILTINS[spec.name] = spec
    for alias in aliases:
        _BUILTINS[alias] = MapSpec(
            kind="builtin", name=alias, pieces=spec.pieces,
            scalar_fn=spec.scalar_fn, vector_fn=spec.vector_fn,
            kernel_id=spec.kernel_id, suggested=spec.suggested,
        )


_register(MapSpec(
    kind="builtin", name="example-6-1",
    pieces=_pieces((0.0, math.inf, "4*x/(2+(x-3)^2)")),
    scalar_fn=_f61, vector_fn=_f61_vec, kernel_id=1,
    suggested={"a": 1.8, "H": 6.5, "b1": 0.907},
), "boukal-hop")

_register(MapSpec(
    kind="builtin", name="example-6-2",
    pieces=_pieces((0.0, math.inf, "4*x^2/(2+x)*exp(2*(1-x))")),
    scalar_fn=_f62, vector_fn=_f62_vec, kernel_id=2,
    suggested={"a": 0.2, "H": 1.8, "b1": 0.0392},
), "boukal-burgman")

_register(MapSpec(
    kind="builtin", name="demo-4-3",
    pieces=_pieces(
        (0.0, 1.0, "3*x/(3+(x-2)^2)"),
        (1.0, 5.0, "x - sin(pi*(x-1)) - 0.25"),
        (5.0, math.inf, "8.55*x/(8+(x-6)^2)"),
    ),
    scalar_fn=_f43, vector_fn=_f43_vec, kernel_id=3,
    suggested={"a": 5.2, "H": 7.0, "b1": 2.0},
))

_register(MapSpec(
    kind="builtin", name="demo-4-4",
    pieces=_pieces(
        (0.0, 2.0, "16*x/(15+(x-3)^2)"),
        (2.0, 12.0, "x - sin(pi*x/2)/(4*x)"),
        (12.0, math.inf, "(x-10)/(1+(x-13)^2) + 11"),
    ),
    scalar_fn=_f44, vector_fn=_f44_vec, kernel_id=4,
    suggested={"a": 12.3, "H": 14.5, "b1": 1.8},
))

_register(MapSpec(
    kind="builtin", name="sine",
    pieces=_pieces((0.0, math.inf, "x - sin(x)")),
    scalar_fn=_fsine, vector_fn=_fsine_vec, kernel_id=5,
    suggested={"windows": ((3.5, 9.0),)},
))


def builtin_ids() -> list[str]:
    return sorted(_BUILTINS)


def builtin(name: str) -> MapSpec:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise DomainError(
            f"unknown built-in map {name!r}; choose from {builtin_ids()}"
        ) from None


# ----------------------------------------------------------------------
# user piecewise maps


def from_script(text: str, name: str = "user-map") -> MapSpec:
    """Parse a ``piece lo hi <expr>`` script into a MapSpec."""
    rows: list[tuple[float, float, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(maxsplit=3)
        if len(parts) != 4 or parts[0] != "piece":
            raise ParseError(f"line {lineno}: expected 'piece lo hi <expr>', got {raw!r}")
        try:
            lo = float(parts[1])
            hi = math.inf if parts[2] in ("inf", "Inf", "INF") else float(parts[2])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad bounds: {exc}") from None
        rows.append((lo, hi, parts[3]))
    if not rows:
        raise ParseError("map script defines no pieces")
    rows.sort(key=lambda r: r[0])
    if rows[0][0] != 0.0:
        raise ParseError("pieces must start at 0")
    for (lo, hi, _), (lo2, _, _) in zip(rows, rows[1:]):
        if hi != lo2:
            raise ParseError(f"pieces must tile [0, inf): gap or overlap at {hi} vs {lo2}")
    for lo, hi, _ in rows:
        if not hi > lo:
            raise ParseError(f"empty piece [{lo}, {hi})")
    if rows[-1][1] != math.inf:
        raise ParseError("last piece must extend to inf")
    return MapSpec(kind="piecewise", name=name, pieces=_pieces(*rows))


# ----------------------------------------------------------------------
# assumption validation


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    margin: float
    witness: float
    note: str = ""


@dataclass(frozen=True)
class ValidationReport:
    conditions: tuple[ConditionCheck, ...]
    grid_resolution: int

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failures(self) -> list[ConditionCheck]:
        return [c for c in self.conditions if not c.passed]


_REFINE_TRIGGER = 1e-3
_REFINE_FACTOR = 100


def _min_margin(margin_vec: Callable[[np.ndarray], np.ndarray],
                lo: float, hi: float, n: int) -> tuple[float, float]:
    """Minimum of a margin function on a grid, refined near near-violations."""
    xs = np.linspace(lo, hi, n + 1)
    vals = margin_vec(xs)
    i = int(np.argmin(vals))
    best_x, best_v = float(xs[i]), float(vals[i])
    if best_v < _REFINE_TRIGGER:
        rlo = xs[max(i - 1, 0)]
        rhi = xs[min(i + 1, n)]
        fine = np.linspace(rlo, rhi, 2 * _REFINE_FACTOR + 1)
        fvals = margin_vec(fine)
        j = int(np.argmin(fvals))
        if fvals[j] < best_v:
            best_x, best_v = float(fine[j]), float(fvals[j])
    return best_x, best_v


def _check_interval(m: MapSpec, a: float, H: float, n: int,
                    label: str) -> list[ConditionCheck]:
    """Assumption-2.2-style checks for one (a, H) pair."""
    out = []
    x_max, f_max = refine_max(lambda x: eval_f(m, x), lambda xs: eval_f_vec(m, xs),
                              0.0, H, n_grid=n)
    out.append(ConditionCheck(
        name=f"{label}: max f on [0,H] < H", passed=f_max < H,
        margin=H - f_max, witness=x_max,
        note=f"max f = {f_max:.6g} at x = {x_max:.6g}"))
    fa = eval_f(m, a)
    out.append(ConditionCheck(
        name=f"{label}: f(a) > a", passed=fa > a, margin=fa - a, witness=a,
        note=f"f(a) = {fa:.6g}"))
    wx, wm = _min_margin(lambda xs: eval_f_vec(m, xs) - fa, a, H, n)
    # exclude the left endpoint itself: the condition is on (a, H]
    if wx == a:
        step = (H - a) / (n * _REFINE_FACTOR)
        wx2 = a + step
        wm = float(eval_f(m, wx2) - fa)
        wx = wx2
    out.append(ConditionCheck(
        name=f"{label}: f > f(a) on (a,H]", passed=wm > 0.0, margin=wm,
        witness=wx, note=f"min (f - f(a)) = {wm:.6g} at x = {wx:.6g}"))
    return out


def validate_assumptions(m: MapSpec, params: StructuralParams,
                         grid_resolution: int = 10_001) -> ValidationReport:
    """Numerically check the structural assumptions for (map, params).

    Failures are recorded in the report and never raised.
    """
    n = max(grid_resolution - 1, 16)
    checks: list[ConditionCheck] = []
    f0 = eval_f(m, 0.0)
    checks.append(ConditionCheck(
        name="f(0) = 0", passed=abs(f0) <= 1e-12, margin=-abs(f0), witness=0.0))
    checks.extend(_check_interval(m, params.a, params.H, n, "interval (a,H)"))

    if params.b1 is not None:
        b1 = params.b1
        lo = b1 / n
        wx, wm = _min_margin(lambda xs: xs - eval_f_vec(m, xs), lo, b1 * (1 - 1e-12), n)
        checks.append(ConditionCheck(
            name="trap: f(x) < x on (0,b1)", passed=wm > 0.0, margin=wm,
            witness=wx))
        fb1 = eval_f(m, b1)
        wx2, wm2 = _min_margin(lambda xs: fb1 - eval_f_vec(m, xs), lo, b1, n)
        checks.append(ConditionCheck(
            name="trap: f(x) <= f(b1) on (0,b1)", passed=wm2 >= -1e-12,
            margin=wm2, witness=wx2))

    for i, (ai, hi) in enumerate(params.multistability_windows, start=1):
        label = f"window {i} ({ai},{hi})"
        x_max, f_max = refine_max(lambda x: eval_f(m, x),
                                  lambda xs: eval_f_vec(m, xs),
                                  hi / n, hi * (1 - 1e-12), n_grid=n)
        checks.append(ConditionCheck(
            name=f"{label}: max f on (0,H_i) < H_i", passed=f_max < hi,
            margin=hi - f_max, witness=x_max))
        checks.extend(c for c in _check_interval(m, ai, hi, n, label)[1:])

    return ValidationReport(conditions=tuple(checks),
                            grid_resolution=grid_resolution)
