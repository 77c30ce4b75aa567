"""
Continuity-principle sweeps
===========================

A family of analytic discs moves inside a domain.  If the limit disc
touches the boundary while its rim stays inside, the domain fails the
continuity principle.
"""

from levilab.domains import ball
from levilab.hartogs import (
    build_thm41_family,
    complement,
    kontinuitaetssatz_sweep,
    r2_touching_family,
    real_plane_depth,
    thm41_model_domain,
)

# %%
# Discs avoiding R^2 in C^2 until they touch it at the origin.
fam = r2_touching_family()
for grid in ((32, 8, 32), (64, 16, 64)):
    rep = kontinuitaetssatz_sweep(real_plane_depth(), fam, *grid)
    print(grid, rep.verdict, "touching point", rep.touching_point)

# %%
# The same discs inside a large ball never reach its boundary.
rep = kontinuitaetssatz_sweep(ball(2, 2), r2_touching_family(0.4), 32, 8, 32)
print("ball:", rep.verdict, f"margin {rep.margin:.3f}")

# %%
# Flat discs of dimension n - q - 1 shrinking onto the origin detect the
# complement of a model domain whose Levi form has q negative directions.
for n, q in ((3, 1), (2, 0)):
    D = complement(thm41_model_domain(n, q))
    rep = kontinuitaetssatz_sweep(D, build_thm41_family(0.1, 0.2, n, q), 32, 8, 32)
    print(f"n = {n}, q = {q}:", rep.verdict)
