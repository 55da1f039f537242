"""Constant coefficients: the one-step operator already is the semigroup.

With g, C constant and no drift, one application of S_t equals the exact
solution operator e^{tL}, so iterating changes nothing beyond grid
interpolation noise: u(t, x) = e^{(c - g a k^2) t} cos(kx) for u0 = cos(kx).
The error table below is flat in n instead of shrinking - the signature of an
exact one-step kernel.
"""

import numpy as np

from gausspde import (
    ChernoffPlan,
    Coefficients,
    CylFunction,
    GridField,
    OperatorL,
    QuadratureSpec,
    TraceClassOperator,
    chernoff_solve,
    exact_constant_solution,
)

g_value, a_value, c_value, wavenumber, t_final = 1.0, 0.5, -1.0, 1.0, 1.0

coeffs = Coefficients(
    g=CylFunction.constant(g_value, 1),
    B=None,
    C=CylFunction.constant(c_value, 1),
    g_floor=g_value,
    contractive=True,
)
op = OperatorL(coeffs=coeffs, A=TraceClassOperator([a_value]))
quad = QuadratureSpec(backend="gauss_hermite", nodes_per_dim=32)

u0 = GridField.from_function(((-9.2, 9.2),), 512, lambda x: np.cos(wavenumber * x[:, 0]))
margin = ChernoffPlan(t_final=t_final, steps=1, quad=quad, op=op).required_margin()
mask = u0.interior_mask(margin)
exact = exact_constant_solution(g_value, a_value, c_value, wavenumber, t_final, u0.axes[0][mask])

print(f"u'_t = {g_value} * {a_value} * u'' {c_value:+} u,  u0 = cos(x),  t = {t_final}")
print(f"exact amplitude e^(c - g a k^2) t = {np.exp((c_value - g_value * a_value) * t_final):.6f}\n")
print("  n   sup error vs exact   per-step sup norm (last)")
for n in (1, 2, 4, 8, 16):
    plan = ChernoffPlan(t_final=t_final, steps=n, quad=quad, op=op)
    result = chernoff_solve(plan, u0)
    error = float(np.max(np.abs(result.field.values[mask] - exact)))
    print(f"{n:>3d}   {error:>14.3e}        {result.sup_norms[-1]:.6f}")
