"""Equal curvatures do not imply congruence.

The top circle of a torus of revolution and a plane circle of radius 2 have
the same curvatures, and the Gauss curvature of the torus vanishes along the
top circle.  The first covariant derivative of the curvature tensor does
not vanish there, and the congruence test picks that up.  The polar map
built from the two Frenet frames drifts away from the plane circle at a rate
that grows with the window.
"""
from frenetgeo import congruence_test, frenet, load_curve, load_preset, polar_isometry

torus = load_preset("torus_example1").chart
plane = load_preset("euclidean", {"m": 2}).chart
a = load_curve("torus_top_circle")
b = load_curve("plane_circle", {"k": 0.5})

rep = congruence_test(torus, a, plane, b, j_max=1)
print("verdict            ", rep.verdict)
print("kappa residuals    ", rep.kappa_residuals)
for j, r in rep.tensor_residuals.items():
    print(f"nabla^{j} R residual  {r['max']:.3g} at frame index {r['index']}")

fa, fb = frenet(torus, a.jet(0.0, 2)), frenet(plane, b.jet(0.0, 2))
pm = polar_isometry(torus, fa.point, fa.frame, plane, fb.point, fb.frame)
for w in (0.1, 0.2, 0.4, 0.8):
    print(f"transport error on |t| <= {w}: {pm.verify(a, b, 0.0, w):.3g}")
