"""Frenet apparatus, congruence and differential invariants of curves in
Riemannian manifolds, computed numerically in coordinate charts."""

from .geometry import (MetricChart, VectorField, christoffel, riemann, gaussian_curvature,
                       lie_derivative_metric, killing_residual, geodesic, exp_map,
                       log_map, normal_coordinates, curvature_operator)
from .curves import (CurveJet, CurveProvider, FrenetResult, covariant_chain,
                     gram_determinants, curvatures, frenet_frame, frenet,
                     f_table_from_kappas, is_frenet_jet, is_normal_position_jet,
                     normal_vectors)
from .reconstruction import (CurvatureSpec, ReconstructionState, frenet_rhs, reconstruct,
                             initial_data_from_vectors, measure_kappas)
from .congruence import (InvariantTuple, CongruenceReport, frame_invariants,
                         kappa_jet_residuals, congruence_test, polar_isometry, gram_map)
from .invariants import (JetFunction, ProlongedField, total_derivative, prolong,
                         distribution_rank, n_r, stability_and_counts, invariance_check,
                         surface_invariants, surface_invariant_functions,
                         homogeneous3_invariants, homogeneous3_functions,
                         maurer_cartan_invariants, random_jet, jet_jacobian)
from .presets import (PresetDescriptor, load_preset, load_curve, preset_names,
                      curve_names, preset_selfcheck)

__version__ = "0.1.0"
