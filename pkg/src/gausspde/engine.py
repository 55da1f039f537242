"""One-step Gaussian-integral operator and its Chernoff iteration on grids.

The step with coefficients (g, B, C) and diagonal A = diag(q) is

    (S_tau u)(x) = e^{tau C(x) - tau <A B(x), B(x)>/(4 g(x))}
                   * Integral u(x + y) e^{<B(x)/(2 g(x)), y>} dmu_{2 tau g(x) A}(y),

which is tangent to (L u)(x) = g(x) sum_i q_i u_ii + sum_i q_i B_i(x) u_i + C(x) u
as tau -> 0 and reduces to plain Gaussian smoothing times e^{tau C} when B = 0.
The measure is evaluated through the substitution y = sqrt(2 tau g(x)) z with
z ~ N(0, diag q), so Gauss-Hermite nodes and Monte Carlo draws are shared
across all grid points of one application.

Solutions of u'_t = L u are approximated by (S_{t/n})^n u0 on a truncated
grid: each step smooths over a Gaussian of scale sqrt(2 tau g q_1), so grid
bounds must exceed the region of interest by the accumulated margin
6 sqrt(2 t g_max q_1) (plus t q_1 B_0 under drift); assertions apply to
interior points only.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.ndimage as ndi

from .cylinder import Coefficients, CylFunction, OperatorL, apply_L
from .gauss import (
    GH_MAX_DIM,
    IntegrandError,
    QuadratureSpec,
    _gh_standard,
    philox_generator,
)

__all__ = [
    "ChernoffPlan",
    "ChernoffResult",
    "GridField",
    "TruncationError",
    "apply_S",
    "chernoff_solve",
    "coefficient_continuity_probe",
    "norm_bound_check",
    "tangency_residual",
]

_ORDERS = {"linear": 1, "cubic": 3}
_BOUNDARY_MODES = ("clamp", "constant")


class TruncationError(RuntimeError):
    """Grid bounds are too small for the Gaussian spread of the requested step."""


@dataclass(frozen=True, eq=False)
class GridField:
    """Sampled field on a closed rectangular box with a uniform tensor grid."""

    bounds: tuple
    values: np.ndarray
    boundary_mode: str = "clamp"
    boundary_value: float = 0.0

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        for lo, hi in bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"invalid axis bounds ({lo}, {hi})")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != len(bounds):
            raise ValueError(f"values have {vals.ndim} axes for {len(bounds)} bounds")
        sizes = set(vals.shape)
        if len(sizes) != 1 or min(vals.shape) < 2:
            raise ValueError("grid must have the same per-axis point count, at least 2")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        if self.boundary_mode not in _BOUNDARY_MODES:
            raise ValueError(f"boundary_mode must be one of {_BOUNDARY_MODES}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, bounds, points_per_axis: int, fn, boundary_mode="clamp", boundary_value=0.0):
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in bounds]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        vals = np.asarray(fn(pts), dtype=float).reshape([points_per_axis] * len(bounds))
        return cls(bounds=bounds, values=vals, boundary_mode=boundary_mode, boundary_value=boundary_value)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def points_per_axis(self) -> int:
        return self.values.shape[0]

    @property
    def axes(self) -> tuple:
        return tuple(np.linspace(lo, hi, self.points_per_axis) for lo, hi in self.bounds)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def meshpoints(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def interior_mask(self, margin: float) -> np.ndarray:
        """Boolean mask of grid points at least `margin` from every boundary."""
        eps = 1e-9 * max(hi - lo for lo, hi in self.bounds)
        mask = np.ones(self.values.shape, dtype=bool)
        for i, (ax, (lo, hi)) in enumerate(zip(self.axes, self.bounds)):
            m1 = (ax >= lo + margin - eps) & (ax <= hi - margin + eps)
            shape = [1] * self.dim
            shape[i] = -1
            mask &= m1.reshape(shape)
        return mask

    def sample(self, points: np.ndarray, interpolation: str = "cubic") -> np.ndarray:
        """Interpolated values at arbitrary points, honoring boundary_mode."""
        return _FieldEvaluator(self, interpolation)(np.asarray(points, dtype=float))


class _FieldEvaluator:
    """Spline evaluator for a GridField; prefilters once, then maps batches."""

    def __init__(self, fld: GridField, interpolation: str):
        if interpolation not in _ORDERS:
            raise ValueError(f"interpolation must be one of {tuple(_ORDERS)}")
        self.order = _ORDERS[interpolation]
        if fld.boundary_mode == "clamp":
            self.mode, self.cval = "nearest", 0.0
        else:
            self.mode, self.cval = "grid-constant", fld.boundary_value
        if self.order > 1:
            self.coeffs = ndi.spline_filter(fld.values, order=self.order, mode=self.mode, output=np.float64)
        else:
            self.coeffs = fld.values
        self.lo = np.array([lo for lo, _ in fld.bounds])
        self.dx = np.array([(hi - lo) / (fld.points_per_axis - 1) for lo, hi in fld.bounds])

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        idx = (pts - self.lo) / self.dx
        return ndi.map_coordinates(
            self.coeffs, idx.T, order=self.order, mode=self.mode, cval=self.cval, prefilter=False
        )


@dataclass(frozen=True, eq=False)
class ChernoffPlan:
    """Iteration plan: n steps of size t_final/n with a fixed backend."""

    t_final: float
    steps: int
    quad: QuadratureSpec
    op: OperatorL
    interpolation: str = "cubic"

    def __post_init__(self):
        if not (math.isfinite(self.t_final) and self.t_final > 0.0):
            raise ValueError("t_final must be positive")
        if self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if self.interpolation not in _ORDERS:
            raise ValueError(f"interpolation must be one of {tuple(_ORDERS)}")

    @property
    def tau(self) -> float:
        return self.t_final / self.steps

    def required_margin(self) -> float:
        """Grid margin consumed by the full chain: 6 sigma of accumulated spread plus drift reach."""
        return _margin(self.op, self.t_final)


def _margin(op: OperatorL, t: float) -> float:
    co = op.coeffs
    q1 = float(op.q[0])
    m = 6.0 * math.sqrt(2.0 * t * co.g_max * q1)
    if not co.drift_is_zero:
        m += t * q1 * co.drift_norm
    return m


def _one_step_values(
    op: OperatorL,
    tau: float,
    eval_fn: Callable[[np.ndarray], np.ndarray],
    pts: np.ndarray,
    quad: QuadratureSpec,
    stream: tuple = (),
) -> np.ndarray:
    """(S_tau f)(x) at the given points, f supplied as a vectorized evaluator."""
    co = op.coeffs
    q = op.q
    m, n = pts.shape
    g = co.g_at(pts)
    c = co.c_at(pts)
    b = co.b_at(pts)
    s = np.sqrt(2.0 * tau * g)

    if quad.backend == "gauss_hermite":
        if n > GH_MAX_DIM:
            raise ValueError(f"gauss_hermite backend supports dimension <= {GH_MAX_DIM}, got {n}")
        znodes, weights = _gh_standard(quad.nodes_per_dim, n)
        znodes = znodes * np.sqrt(q)
    else:
        rng = philox_generator(quad.rng_seed, stream)
        znodes = rng.standard_normal((quad.samples, n)) * np.sqrt(q)
        weights = np.full(quad.samples, 1.0 / quad.samples)

    beta = None if b is None else b / (2.0 * g)[:, None]
    acc = np.zeros(m)
    chunk = max(1, 4_000_000 // m)
    for k0 in range(0, znodes.shape[0], chunk):
        zc = znodes[k0 : k0 + chunk]
        wc = weights[k0 : k0 + chunk]
        pos = pts[None, :, :] + s[None, :, None] * zc[:, None, :]
        vals = eval_fn(pos.reshape(-1, n)).reshape(zc.shape[0], m)
        if beta is not None:
            vals = vals * np.exp(np.einsum("mn,kn->km", beta, zc) * s[None, :])
        acc += wc @ vals

    if b is None:
        out = np.exp(tau * c) * acc
    else:
        out = np.exp(tau * c - tau * ((b * b) @ q) / (4.0 * g)) * acc
    if not np.all(np.isfinite(out)):
        raise IntegrandError("one-step integral produced a non-finite value")
    return out


def _apply_S(op: OperatorL, tau: float, u: GridField, quad: QuadratureSpec, interpolation: str, stream: tuple) -> GridField:
    if not (math.isfinite(tau) and tau > 0.0):
        raise ValueError("tau must be positive")
    if u.dim != op.dim:
        raise ValueError(f"field dimension {u.dim} does not match operator dimension {op.dim}")
    reach = _margin(op, tau)
    for lo, hi in u.bounds:
        if reach >= hi - lo:
            raise TruncationError(
                f"one-step Gaussian reach {reach:.3g} exceeds domain width {hi - lo:.3g}; enlarge the grid"
            )
    evaluator = _FieldEvaluator(u, interpolation)
    vals = _one_step_values(op, tau, evaluator, u.meshpoints(), quad, stream)
    return GridField(
        bounds=u.bounds,
        values=vals.reshape(u.values.shape),
        boundary_mode=u.boundary_mode,
        boundary_value=u.boundary_value,
    )


def apply_S(op: OperatorL, tau: float, u: GridField, quad: QuadratureSpec, interpolation: str = "cubic") -> GridField:
    """One application of S_tau to a grid field."""
    return _apply_S(op, tau, u, quad, interpolation, stream=())


@dataclass(frozen=True, eq=False)
class ChernoffResult:
    """Final field of (S_{t/n})^n u0 plus per-step diagnostics."""

    field: GridField
    sup_norms: np.ndarray
    interior_sup_norms: np.ndarray
    checkpoints: dict


def chernoff_solve(plan: ChernoffPlan, u0: GridField, checkpoint_steps: Sequence[int] = ()) -> ChernoffResult:
    """Iterate S_{t/n} n times; records sup-norms per step and optional snapshots."""
    if u0.dim != plan.op.dim:
        raise ValueError(f"field dimension {u0.dim} does not match operator dimension {plan.op.dim}")
    margin = plan.required_margin()
    for lo, hi in u0.bounds:
        if 2.0 * margin >= hi - lo:
            raise TruncationError(
                f"chain margin {margin:.3g} leaves no interior in domain ({lo}, {hi}); enlarge the grid"
            )
    for k in checkpoint_steps:
        if not 1 <= int(k) <= plan.steps:
            raise ValueError(f"checkpoint step {k} outside 1..{plan.steps}")
    mask = u0.interior_mask(margin)
    sup_norms = np.empty(plan.steps)
    interior = np.empty(plan.steps)
    checkpoints: dict[int, GridField] = {}
    wanted = {int(k) for k in checkpoint_steps}
    u = u0
    for step in range(1, plan.steps + 1):
        u = _apply_S(plan.op, plan.tau, u, plan.quad, plan.interpolation, stream=(step - 1,))
        sup_norms[step - 1] = u.sup_norm
        interior[step - 1] = float(np.max(np.abs(u.values[mask])))
        if step in wanted:
            checkpoints[step] = u
    return ChernoffResult(field=u, sup_norms=sup_norms, interior_sup_norms=interior, checkpoints=checkpoints)


def tangency_residual(op: OperatorL, phi: CylFunction, tau: float, grid, quad: QuadratureSpec) -> float:
    """max over grid of |(S_tau phi - phi)/tau - L phi|; -> 0 as tau -> 0."""
    if phi.grad is None or phi.hess is None:
        raise ValueError("tangency check requires analytic grad and hess on phi")
    if not (math.isfinite(tau) and tau > 0.0):
        raise ValueError("tau must be positive")
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    if pts.shape[0] == 0 or pts.shape[1] != op.dim:
        raise ValueError(f"grid must be a nonempty (m, {op.dim}) array")
    s_vals = _one_step_values(op, tau, phi, pts, quad)
    l_vals = apply_L(op, phi, pts)
    return float(np.max(np.abs((s_vals - phi(pts)) / tau - l_vals)))


def norm_bound_check(
    op: OperatorL, tau: float, u: GridField, quad: QuadratureSpec, interpolation: str = "cubic"
) -> tuple[float, float]:
    """(||S_tau u|| / ||u||, exp((2 ||A|| B0^2 / g0 + ||C||) tau)) in sup-norm."""
    if u.sup_norm == 0.0:
        raise ValueError("norm bound check requires a nonzero input field")
    out = apply_S(op, tau, u, quad, interpolation)
    co = op.coeffs
    growth = 2.0 * op.A.operator_norm * co.drift_norm**2 / co.g_floor + co.c_norm
    return out.sup_norm / u.sup_norm, math.exp(growth * tau)


def _c_is_nonpositive(co: Coefficients) -> bool:
    if co.contractive:
        return True
    return co.C.is_constant and co.C.constant_value is not None and co.C.constant_value <= 0.0


def coefficient_continuity_probe(op0: OperatorL, op_j: OperatorL, plan: ChernoffPlan, u0: GridField) -> float:
    """Sup gap between the two solutions at t/4, t/2, t over shared interior points."""
    for name, op in (("op0", op0), ("op_j", op_j)):
        if not op.coeffs.drift_is_zero:
            raise ValueError(f"continuity probe requires drift-free coefficients ({name} has drift)")
        if not _c_is_nonpositive(op.coeffs):
            raise ValueError(f"continuity probe requires C <= 0 ({name} violates it)")
    if plan.steps % 4 != 0:
        raise ValueError("continuity probe needs steps divisible by 4 for the t/4, t/2, t checkpoints")
    marks = (plan.steps // 4, plan.steps // 2, plan.steps)
    res0 = chernoff_solve(dataclasses.replace(plan, op=op0), u0, checkpoint_steps=marks)
    res_j = chernoff_solve(dataclasses.replace(plan, op=op_j), u0, checkpoint_steps=marks)
    margin = max(_margin(op0, plan.t_final), _margin(op_j, plan.t_final))
    mask = u0.interior_mask(margin)
    gap = 0.0
    for k in marks:
        d = np.max(np.abs(res0.checkpoints[k].values[mask] - res_j.checkpoints[k].values[mask]))
        gap = max(gap, float(d))
    return gap
