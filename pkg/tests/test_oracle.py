"""Reference finite-difference solvers and closed-form solutions."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gausspde.cylinder import Coefficients, CylFunction, OperatorL
from gausspde.engine import GridField
from gausspde.gauss import TraceClassOperator
from gausspde.oracle import (
    FDProblem,
    assemble_operator,
    exact_constant_solution,
    fd_solve,
    resolvent_solve,
)


def const_coeffs(g=1.0, b=None, c=0.0, dim=1, contractive=False):
    B = None if b is None else [CylFunction.constant(bi, dim) for bi in b]
    return Coefficients(
        g=CylFunction.constant(g, dim),
        B=B,
        C=CylFunction.constant(c, dim),
        g_floor=g,
        contractive=contractive,
    )


def problem_1d(coeffs, *, q=(0.5,), pts=512, steps=2000, t=1.0, half=math.pi,
               scheme="crank_nicolson", boundary="periodic", boundary_value=0.0):
    return FDProblem(
        dim=1,
        coeffs=coeffs,
        A=TraceClassOperator(list(q)),
        bounds=((-half, half),),
        points_per_axis=pts,
        t_final=t,
        time_steps=steps,
        scheme=scheme,
        boundary=boundary,
        boundary_value=boundary_value,
    )


def cos_field(p):
    return GridField.from_function(p.bounds, p.points_per_axis, lambda x: np.cos(x[:, 0]))


# ---------------------------------------------------------------- closed form


def test_exact_constant_solution_examples():
    x = np.linspace(-3, 3, 7)
    assert_allclose(exact_constant_solution(1.0, 0.5, 0.0, 2.0, 0.0, x), np.cos(2 * x))
    assert_allclose(exact_constant_solution(1.0, 0.5, 0.0, 0.0, 3.7, x), np.ones_like(x))
    assert exact_constant_solution(1.0, 0.5, 0.0, 1.0, 1.0, 0.0) == pytest.approx(math.exp(-0.5), rel=1e-15)
    with pytest.raises(ValueError):
        exact_constant_solution(-1.0, 0.5, 0.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        exact_constant_solution(1.0, 0.5, 0.2, 1.0, 1.0, 0.0)


# ---------------------------------------------------------------- fd_solve


def test_fd_constant_coefficients_match_exact():
    p = problem_1d(const_coeffs(g=1.0, c=-0.3, contractive=True), pts=512, steps=2000, t=1.0)
    out = fd_solve(p, cos_field(p))
    x = out.axes[0]
    ref = exact_constant_solution(1.0, 0.5, -0.3, 1.0, 1.0, x)
    assert np.max(np.abs(out.values - ref)) < 1e-5


def test_fd_unit_field_is_fixed_point():
    p = problem_1d(const_coeffs(g=1.0, c=0.0), pts=128, steps=50, t=0.5)
    one = GridField.from_function(p.bounds, p.points_per_axis, lambda x: np.ones(x.shape[0]))
    out = fd_solve(p, one)
    assert np.max(np.abs(out.values - 1.0)) < 1e-12


def test_fd_richardson_self_convergence():
    g = CylFunction(dim=1, eval=lambda x: 1.0 + 0.5 * np.sin(x[:, 0]), sup_bound=1.5)
    co = Coefficients(g=g, B=None, C=CylFunction.constant(0.0, 1), g_floor=0.5)
    sols = {}
    for pts, steps in ((129, 100), (257, 200), (513, 400)):
        p = problem_1d(co, pts=pts, steps=steps, t=0.5)
        sols[pts] = fd_solve(p, cos_field(p)).values[:-1]
    d1 = np.max(np.abs(sols[129] - sols[257][::2]))
    d2 = np.max(np.abs(sols[257] - sols[513][::2]))
    assert 2.5 < d1 / d2 < 6.0


def test_fd_explicit_euler_guard_and_accuracy():
    co = const_coeffs(g=1.0, c=0.0)
    unstable = problem_1d(co, pts=128, steps=20, t=0.2, scheme="explicit_euler")
    with pytest.raises(ValueError):
        fd_solve(unstable, cos_field(unstable))
    stable = problem_1d(co, pts=128, steps=200, t=0.2, scheme="explicit_euler")
    out = fd_solve(stable, cos_field(stable))
    ref = exact_constant_solution(1.0, 0.5, 0.0, 1.0, 0.2, out.axes[0])
    assert np.max(np.abs(out.values - ref)) < 1e-3


def test_fd_2d_product_solution():
    co = const_coeffs(g=1.0, c=0.0, dim=2)
    p = FDProblem(
        dim=2,
        coeffs=co,
        A=TraceClassOperator([0.5, 0.25]),
        bounds=((-math.pi, math.pi), (-math.pi, math.pi)),
        points_per_axis=65,
        t_final=0.5,
        time_steps=200,
        scheme="crank_nicolson",
        boundary="periodic",
    )
    u0 = GridField.from_function(p.bounds, p.points_per_axis, lambda x: np.cos(x[:, 0]) * np.cos(x[:, 1]))
    out = fd_solve(p, u0)
    pts = u0.meshpoints()
    ref = math.exp(-0.5 * (0.5 + 0.25)) * np.cos(pts[:, 0]) * np.cos(pts[:, 1])
    assert np.max(np.abs(out.values.ravel() - ref)) < 5e-3


def test_fd_dirichlet_sine_decay():
    co = const_coeffs(g=1.0, c=0.0)
    p = FDProblem(
        dim=1,
        coeffs=co,
        A=TraceClassOperator([0.5]),
        bounds=((0.0, math.pi),),
        points_per_axis=257,
        t_final=0.5,
        time_steps=500,
        scheme="crank_nicolson",
        boundary="dirichlet",
        boundary_value=0.0,
    )
    u0 = GridField.from_function(p.bounds, p.points_per_axis, lambda x: np.sin(x[:, 0]))
    out = fd_solve(p, u0)
    ref = math.exp(-0.25) * np.sin(out.axes[0])
    assert abs(out.values[0]) < 1e-12 and abs(out.values[-1]) < 1e-12
    assert np.max(np.abs(out.values - ref)) < 1e-4


def test_fd_crank_nicolson_contractive_per_step():
    co = const_coeffs(g=1.0, c=-0.3, contractive=True)
    p = problem_1d(co, pts=128, steps=1, t=2e-3)
    u = GridField.from_function(p.bounds, p.points_per_axis, lambda x: np.cos(x[:, 0]) + 0.4 * np.sin(3 * x[:, 0]))
    sup = u.sup_norm
    for _ in range(10):
        u = fd_solve(p, u)
        assert u.sup_norm <= sup + 1e-10
        sup = u.sup_norm


def test_fd_validation():
    co = const_coeffs(g=1.0, c=0.0)
    with pytest.raises(ValueError):
        problem_1d(co, pts=512, steps=0)
    with pytest.raises(ValueError):
        FDProblem(
            dim=3,
            coeffs=const_coeffs(dim=3),
            A=TraceClassOperator([0.5, 0.4, 0.3]),
            bounds=((-1, 1),) * 3,
            points_per_axis=16,
            t_final=1.0,
            time_steps=10,
            scheme="crank_nicolson",
            boundary="periodic",
        )
    p = problem_1d(co)
    wrong = GridField.from_function([(-1.0, 1.0)], p.points_per_axis, lambda x: np.ones(x.shape[0]))
    with pytest.raises(ValueError):
        fd_solve(p, wrong)


# ---------------------------------------------------------------- resolvent


def test_resolvent_constant_rhs():
    p = problem_1d(const_coeffs(g=1.0, c=0.0), pts=128)
    lam = 0.7
    rhs = CylFunction.constant(lam * 2.5, dim=1)
    f = resolvent_solve(p, lam, rhs)
    assert np.max(np.abs(f.values - 2.5)) < 1e-12


def test_resolvent_cosine_identity():
    p = problem_1d(const_coeffs(g=1.0, c=0.0), pts=2049)
    lam, k = 1.0, 1.0
    rhs = CylFunction(
        dim=1,
        eval=lambda x: (lam + 1.0 * 0.5 * k * k) * np.cos(k * x[:, 0]),
        sup_bound=lam + 0.5,
    )
    f = resolvent_solve(p, lam, rhs)
    assert np.max(np.abs(f.values - np.cos(k * f.axes[0]))) < 1e-6


def test_resolvent_discrete_residual_and_max_principle():
    g = CylFunction(dim=1, eval=lambda x: 1.0 + 0.5 * np.sin(x[:, 0]), sup_bound=1.5)
    cfun = CylFunction(dim=1, eval=lambda x: -0.2 - 0.1 * np.cos(x[:, 0]), sup_bound=0.3)
    co = Coefficients(g=g, B=None, C=cfun, g_floor=0.5, contractive=True)
    p = problem_1d(co, pts=512)
    rhs = CylFunction(
        dim=1,
        eval=lambda x: 0.8 * np.cos(x[:, 0]) + 0.1 * np.sin(3 * x[:, 0]),
        sup_bound=0.9,
    )
    asm = assemble_operator(p)
    for lam in (0.5, 1.0, 2.0):
        f = resolvent_solve(p, lam, rhs)
        fv = f.values[:-1]
        rv = rhs(asm.points)
        residual = np.max(np.abs(lam * fv - asm.matrix @ fv - rv))
        assert residual < 1e-10
        # discrete maximum principle, and the dissipativity estimate it rearranges to
        assert np.max(np.abs(fv)) <= np.max(np.abs(rv)) / lam + 1e-8
        lhs = np.max(np.abs(asm.matrix @ fv - lam * fv))
        assert lhs >= lam * np.max(np.abs(fv)) - 1e-6


def test_resolvent_requires_positive_lambda():
    p = problem_1d(const_coeffs(g=1.0, c=0.0), pts=64)
    with pytest.raises(ValueError):
        resolvent_solve(p, 0.0, CylFunction.constant(1.0, 1))
