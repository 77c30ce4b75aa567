"""
CR graphs, foliation certificates and leaves
============================================

A graph over C^n x R^k is cut out by real defining functions.  At each
sample the certificate compares the complex tangent space with the null
space of the Levi forms, and certified graphs can be integrated along
their complex leaves.
"""

import numpy as np

from levilab.graphs import (
    ex58,
    foliation_certificate,
    fv_abs2,
    graph_point,
    leviflat_im_z2,
    trace_leaf,
)

# %%
flat = leviflat_im_z2()
cert = foliation_certificate(flat, 1, flat.sample(50, seed=0))
print("Im(z^2) graph:", cert.overall, cert.summary)

bowl = fv_abs2()
cert_bowl = foliation_certificate(bowl, 1, bowl.sample(50, seed=0))
w = cert_bowl.witness
print("|z|^2 graph:", cert_bowl.overall, "witness Levi value", round(w.levi_value, 6))

# %%
# The leaves of {Im w = Im z^2} are the curves w = z^2 + c.
tr = trace_leaf(flat, graph_point(flat, (0.2 + 0.1j, 0.3)), 100, 0.01, cert)
c = tr.points[:, 1] - tr.points[:, 0] ** 2
print("drift of w - z^2 along the leaf:", float(np.max(np.abs(c - c[0]))))
print("largest distance from the graph:", tr.max_residual)

# %%
# The guarded graph conj(z1) z2^4 / conj(z2) is foliated away from z2 = 0,
# but its complex tangent dimension jumps as z2 shrinks.
g = ex58()
pts = [[0.5 + 0.2j, 10.0 ** -j] for j in range(1, 9)] + [[0.5 + 0.2j, 0]]
near = foliation_certificate(g, 1, pts)
for r in near.records:
    print(f"z2 = {r['zu'][1][0]:.0e}: {r['verdict']:<12} dim H = {r['dim_H']}")
print("overall:", near.overall)
