"""A flat germ that is not flat.

The metric delta + exp(-1/|x|^2) (1 1; 1 1) agrees with the Euclidean metric
to infinite order at the origin, so every covariant derivative of the
curvature vanishes there, yet the curvature is clearly nonzero along the
diagonal.  Jet data at a single point cannot tell this metric from the flat
one; the congruence report flags the missing analyticity.
"""
import numpy as np

from frenetgeo import congruence_test, load_curve, load_preset, riemann

bump = load_preset("bump_example2", {"m": 2}).chart
cv = riemann(bump, np.zeros(2), j_max=2)
for j, s in enumerate(cv.nabla_r):
    print(f"|nabla^{j} R(0)| = {np.linalg.norm(s):.2g}")
for t in (0.2, 0.3, 0.5):
    r = riemann(bump, np.array([t, t]), j_max=0).r
    print(f"R(d1, d2) d1 component 2 at ({t}, {t}) = {r[0, 1, 0, 1]:.6g}")

flat = load_preset("euclidean", {"m": 2}).chart
circle = load_curve("circle", {"r": 0.05})
rep = congruence_test(bump, circle, flat, circle, window=0.02, samples=5)
print("small circle at the origin:", rep.verdict, "| analyticity caveat:", rep.analyticity_caveat)
