"""Checkerboard patterns on quad nets.

Midpoint subdivision of a quad control net produces a checkerboard of
parallelogram ("black") faces inscribed in the control faces and "white"
faces around interior vertices. The package implements the discrete
differential geometry living on those patterns: orthogonal/conjugate/
principal classification, a shape operator with Steiner-compatible offsets
and mixed areas, Moebius transformations through orthogonal sphere
congruences in the (4,1) projective model, Koenigs characterizations with
dualization, and minimal surfaces built by dualizing isothermic Gauss nets.
"""

from .errors import (CheckernetError, CountMismatchError, DegenerateGeometryError,
                     GridTooSmallError, InconsistentCheckerboardError,
                     MalformedHeaderError, NonConjugatePatternError,
                     NonFiniteValueError, NonKoenigsPatternError,
                     NonOrthogonalPatternError, NotIsothermicError,
                     NotOnUnitSphereError, PreconditionError, QnetFormatError,
                     TransformDegeneracyError)
from .nets import (Checkerboard, Classification, DEFAULT_TOLERANCES, QuadNet,
                   Tolerances, build_checkerboard, classify, face_edge_vectors,
                   reconstruct_control)
from .curvature import (CurvatureTable, FundamentalForms, GaussNet, ShapeResult,
                        curvatures_via_mixed_area, face_normal_and_area,
                        fundamental_forms, measurable_faces, mixed_area,
                        principal_curvature_table, shape_operator,
                        steiner_residual, vertex_normals)
from .moebius import (E0, EINF, MINKOWSKI_METRIC, MoebiusTransform,
                      OrthogonalityCheck, Plane, PointAtInfinity,
                      PseudoPrincipalCheck, Sphere, SphereCongruence,
                      apply_moebius, build_congruence, is_pseudo_principal,
                      lift, lift_congruence, minkowski_inner, orthogonal,
                      principal_gauss_image, unlift)
from .koenigs import (DualizationResult, KoenigsVerdict, SixPoints,
                      conic_residual, dualize, hyperbola_inscribed_residual,
                      is_koenigs, koenigs_face_range, koenigs_generator_2d,
                      laplace_invariants, one_form, one_form_closure,
                      sine_ratio_product, six_points)
from .isothermic import (IsothermicVerdict, MinimalResult, UnitSphereFit,
                         goursat, is_isothermic, minimal_from_gauss,
                         on_unit_sphere)
from .samples import SampleSpec, generate, inverse_stereographic
from .qnetio import analysis_report, export_obj, read_qnet, write_qnet

__version__ = "0.1.0"
