"""
Boundary distance and -log d
============================

A domain is the sublevel set of a defining function.  The distance to its
boundary comes from ray bisection polished by Newton steps, and the complex
Hessian of -log d is estimated by finite differences with an error band.
"""

import numpy as np

from levilab.domains import (
    ball,
    boundary_distance,
    hartogs_pcv_via_distance,
    interior_samples,
    levi_pcv_at_boundary,
    shell,
)

# %%
B = ball(2)
d = boundary_distance(B, (0.3, 0.4))
print(f"distance from (0.3, 0.4) to the unit sphere: {d.distance:.15f} ({d.method})")

# %%
# -log d is plurisubharmonic on the ball at every interior sample.
Z = interior_samples(B, 100, seed=1, min_depth=0.05)
print("ball, q = 0:", hartogs_pcv_via_distance(B, 0, Z).counts)

# %%
# The spherical shell is not pseudoconvex near its inner sphere, and the
# probe sees this at index 0.  Allowing one negative direction removes it.
S = shell(2)
Z = np.array([[0.35, 0], [0.4, 0.1j], [0.9, 0], [0.5, 0.5]])
for q in (1, 0):
    verdicts = [r["verdict"] for r in hartogs_pcv_via_distance(S, q, Z).records]
    print(f"shell, q = {q}:", verdicts)

# %%
# At boundary points the Levi form of the defining function gives the same
# picture without any differencing.
print("outer sphere:", levi_pcv_at_boundary(S, (1, 0), 0).verdict)
print("inner sphere:", levi_pcv_at_boundary(S, (0.3, 0), 0).verdict)
