"""Exact symbolic computation with quasi-homogeneous filtrations along
submanifolds in local coordinates: weighted filtrations of function algebras,
homogeneous approximations, truncated-jet prolongations, graded subbundles
with the weighting criterion, deformation and blow-up charts."""

from .expr import (App, Const, Expr, ParseError, Pow, Prod, Sum, Var, add, app,
                   const, differentiate, eval_numeric, expand, mul, parse_expr,
                   pow_, semantically_equal, simplify_canonical, substitute,
                   to_text, var, variables)
from .weights import (MultiWeight, WeightSequence, ideal_generators,
                      multi_degree, multi_filtration_degree, parse_multiweight,
                      parse_weight_assignments, total_weighting,
                      weight_sequence)
from .wpoly import (WeightedPoly, dilate, filtration_degree,
                    homogeneous_approx, homogeneous_part, poly_normal_form,
                    to_expr, weighted_taylor, wpoly_text)
from .fields import (DifferentialFormPoly, GradedLieAlgebra, PolyVectorField,
                     contract, coordinate_field, d_form, d_poly, euler_field,
                     form, form_filtration_degree, gla_bracket,
                     homogeneous_approx_vf, lie_bracket, lie_derivative_form,
                     nilpotent_frames, vf_apply, vf_filtration_degree,
                     vf_for_weights, vf_from_exprs)
from .jets import (JetPoint, JetPoly, JetScalar, JetVectorField,
                   Reparametrization, dilation, epsilon_shift, evaluate_jet,
                   jet_bracket, jet_lift, jet_point, jet_point_text,
                   jet_scalar, jetpoly, parse_jet_point,
                   parse_reparametrization, reparam, reparam_compose,
                   reparametrize, tm_translate, vf_lift)
from .subbundle import (AdaptedChange, DiffOpStandardForm, Frame,
                        GraphSubbundle, WeightingVerdict, adapted_coordinates,
                        apply_diffop, check_weighting, coefficient_q_weight,
                        derive_weights, diffop, frame, graph_subbundle,
                        induced_filtration_degree, k_membership, normal_order,
                        q_membership, quotient_to_normal, standard_q,
                        substitute_graph, verify_adapted)
from .spaces import (BlowupField, CoordinateChange, DeformationField,
                     DeformationFunction, RationalMonomialMap, ScalingReport,
                     blowup_chart, blowup_chart_inverse, blowup_lift_vf,
                     check_morphism, compose_rational, coordinate_change,
                     def_interpolant, def_vf_interpolant, euler_like_check,
                     nu_transition, scaling_order_estimate, theta_field)

__version__ = "0.1.0"
