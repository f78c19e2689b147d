"""Plane-wave spacetimes: forms, conversions, symmetry algebras, equivalence
decisions, and the shift-sequence family of vacuum waves."""

__version__ = "0.1.0"

from .errors import (ConversionError, DomainError, InconclusiveError,
                     IntegrationError, NotApplicableError, PairingError,
                     PlaneWaveError, SchemaError, SingularityError,
                     SymmetryError)
from .profiles import (CallableProfile, ConstantProfile, Interval,
                       MatrixProfile, PowerLawProfile, RotatingConstantProfile,
                       SampledProfile, ScalarTimesFixedProfile,
                       ShiftBumpProfile, SumProfile, TraceDecomposition,
                       bernoulli_family_profile, sampled_from, scalar_callable,
                       scalar_constant, seminorm, trace_decompose,
                       trace_free_part, trace_scalar)
from .metrics import (AlekseevskyMetric, BrinkmannMetric, RosenMetric,
                      SpacetimePoint, is_conformally_curved, is_flat,
                      is_vacuum, metric_components)
from .ode import (DEFAULT_CONFIG, LagrangianMatrix, OdeSolution, SolverConfig,
                  integrate_h_inverse, solve_jacobi_matrix,
                  solve_jacobi_vector, solve_sachs, solve_w_equation)
from .forms import (PointMap, alekseevsky_to_brinkmann, affine_rotation_map,
                    brinkmann_to_alekseevsky, brinkmannize, compose,
                    conformal_pullback_residual, conformal_reparam,
                    dilation_map, heisenberg_map, identity_map,
                    pullback_residual, rosenize, rotation_gauge_map)
from .symmetries import (ExtraSymmetryResult, LieAlgebraReport,
                         StructuredVectorField, centralizer_basis,
                         centralizer_dimension, commutant_automorphisms,
                         conformal_algebra, derived_algebra_and_center,
                         detect_extra_conformal, extra_isometry, fd_lie_bracket,
                         field_D, field_H, field_L, field_V, field_X,
                         heisenberg_basis, killing_residual, lie_bracket,
                         microcosm_normal_form, symplectic_pairing)
from .equivalence import (IsometryWitness, RosenEquivalence,
                          brinkmann_isometry, rosen_isomorphic,
                          rosen_transform, verify_conformal_factorization)
from .sequences import (ShiftSequence, bernoulli_shift, f_a, g_a,
                        hilbert_distance, p_alpha, shift_equivalent)
from .shift_family import (CrosscheckReport, family_isometry_crosscheck,
                           family_metric)
