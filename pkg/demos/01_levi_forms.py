"""
Levi forms and q-plurisubharmonic verdicts
==========================================

Expressions are parsed once, differentiated symbolically in z and z-bar,
and classified by the inertia of their complex Hessian.
"""

import numpy as np

from levilab.calculus import jet2, validate_jet_fd
from levilab.expr import parse
from levilab.levi import classify_qpsh, holomorphic_tangent, inertia, restricted_levi

# %%
# The complex Hessian of |z1|^2 - |z2|^2 has one negative eigenvalue, so the
# function is 1-psh but not psh.
e = parse("abs2(z1) - abs2(z2)")
p = (0.3 + 0.1j, -0.2j)
jet = jet2(e, p)
print("Levi matrix:\n", jet.levi.real)
print("inertia (neg, zero, pos):", inertia(jet.levi).as_tuple())
for q in (0, 1):
    v = classify_qpsh(e, p, q)
    print(f"q = {q}: {v.verdict}, margin {v.margin}")

# %%
# Symbolic jets agree with central differences of the same expression.
rep = validate_jet_fd(parse("log(1 + abs2(z1*z2)) + re(z1^3)"), (0.4, 0.7j))
print("largest relative FD discrepancy:", rep.max_rel_error)

# %%
# On the unit sphere the Levi form restricted to the complex tangent space
# is the identity.
rho = parse("abs2(z1) + abs2(z2) + abs2(z3) - 1")
boundary_jet = jet2(rho, (1, 0, 0))
T = holomorphic_tangent([boundary_jet.grad_z])
print("tangent dimension:", T.dim)
print("restricted Levi form:\n", np.round(restricted_levi(boundary_jet.levi, T).real, 12))
