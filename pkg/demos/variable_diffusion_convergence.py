"""Variable diffusion: the iterated kernel converges to the true solution.

For g(x) = 1 + sin(x)/2 the one-step operator is no longer exact, but its
n-fold composition at step t/n converges as n grows.  A refined
Crank-Nicolson run on the periodic cell [-pi, pi] serves as the reference;
the sup error over interior points decreases roughly linearly in 1/n.
"""

import math

import numpy as np

from gausspde import (
    ChernoffPlan,
    Coefficients,
    CylFunction,
    FDProblem,
    GridField,
    OperatorL,
    QuadratureSpec,
    TraceClassOperator,
    chernoff_solve,
    fd_solve,
)

coeffs = Coefficients(
    g=CylFunction(dim=1, eval=lambda x: 1.0 + 0.5 * np.sin(x[:, 0]), sup_bound=1.5),
    B=None,
    C=CylFunction.constant(0.0, 1),
    g_floor=0.5,
    contractive=True,
)
op = OperatorL(coeffs=coeffs, A=TraceClassOperator([0.5]))
quad = QuadratureSpec(backend="gauss_hermite", nodes_per_dim=32)
t_final = 0.5

# Reference: Crank-Nicolson, 2048 points, 8000 steps on the periodic cell.
problem = FDProblem(
    dim=1,
    coeffs=coeffs,
    A=TraceClassOperator([0.5]),
    bounds=((-math.pi, math.pi),),
    points_per_axis=2048,
    t_final=t_final,
    time_steps=8000,
)
reference = fd_solve(problem, GridField.from_function(problem.bounds, 2048, lambda x: np.cos(x[:, 0])))

# Engine grid: padded so the Gaussian averaging never reads past the edges.
u0 = GridField.from_function(((-8.4, 8.4),), 1024, lambda x: np.cos(x[:, 0]))
margin = ChernoffPlan(t_final=t_final, steps=4, quad=quad, op=op).required_margin()
mask = u0.interior_mask(margin) & (np.abs(u0.axes[0]) <= math.pi)
ref_values = reference.sample(u0.axes[0][mask][:, None])

print("g(x) = 1 + sin(x)/2, C = 0, u0 = cos(x), t = 0.5")
print(f"comparison on {int(mask.sum())} interior points inside [-pi, pi]\n")
print("  n    sup error    ratio to previous")
previous = None
for n in (4, 8, 16, 32, 64):
    plan = ChernoffPlan(t_final=t_final, steps=n, quad=quad, op=op)
    result = chernoff_solve(plan, u0)
    error = float(np.max(np.abs(result.field.values[mask] - ref_values)))
    ratio = "" if previous is None else f"{previous / error:.2f}"
    print(f"{n:>3d}   {error:>10.3e}    {ratio}")
    previous = error
