"""Curvatures of a curve and the curve rebuilt from its curvatures.

A helix in Euclidean 3-space has constant curvatures.  Feeding those numbers
back into the Frenet system reproduces the helix up to a rigid motion.  The
same round trip on the round 3-sphere uses non-constant curvatures.
"""
import numpy as np

from frenetgeo import (CurvatureSpec, frenet, initial_data_from_vectors, load_curve, load_preset,
                       reconstruct)

e3 = load_preset("euclidean", {"m": 3})
helix = load_curve("helix", {"a": 1.0, "b": 0.5})

res = frenet(e3.chart, helix.jet(0.0, 3))
print("helix kappas          ", np.round(res.kappas, 12))
print("  expected            ", [np.sqrt(1.25), 1 / 1.25, 0.5 / 1.25])

# initial data from the covariant chain at t = 0, then integrate
spec = CurvatureSpec.constant(res.kappas)
frame0 = initial_data_from_vectors(e3.chart, res.point, res.chain, spec)
out = reconstruct(e3.chart, res.point, frame0, spec, (0.0, 2 * np.pi), step=1e-3)
print("max distance to helix ", np.abs(out.x - helix(out.t)).max())
print("frame drift           ", out.drift)

# on the sphere the metric enters through the Christoffel symbols
s3 = load_preset("sphere", {"k": 1.0, "m": 3})
spec = CurvatureSpec.polynomial([[1.0, 0.3], [0.8, -0.2], [0.5]])
out = reconstruct(s3.chart, np.zeros(3), np.eye(3) / 2, spec, (0.0, 2.0), step=1e-3)
print("sphere kappa error    ", out.kappa_error)
print("sphere drift per time ", out.drift_rate)
