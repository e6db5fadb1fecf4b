"""Grid-based envelope, conjugate and directional-derivative toolkit."""
from .certificate import Certificate, CertificateStatus, Check
from .conjugate import (
    DualGridSpec,
    apply_dent,
    biconjugate,
    certify_minimal_convex_majorant,
    convex_envelope,
    default_dual_spec,
    dual_range_truncated,
    extract_minimal_convex_majorant,
    is_convex_majorant,
    legendre_conjugate,
    pinned_cone_seed,
)
from .corpus import CorpusFn, corpus_names, eval_corpus, get_corpus, sample_to_grid
from .deriv import DiniEstimate, Side, TSchedule, dini_derivative, directional_profile, directional_profiles, hadamard_check
from .drcalc import (
    Kind,
    OptimalityReport,
    Verdict,
    Which,
    calculus_rules_check,
    dr_membership,
    fenchel_moreau_subdiff,
    hadamard_subdiff_filter,
    necessary_optimality,
    sufficient_optimality,
)
from .envelope import Direction, EnvelopeMode, KSchedule, pasch_hausdorff, saturation_warning, semicontinuous_closure
from .estimators import (
    ConvexEnvelope,
    LegendreConjugate,
    MinimalConvexMajorant,
    MinimalSublinearMajorant,
    PaschHausdorffEnvelope,
    SemicontinuousClosure,
)
from .exceptions import (
    ContractError,
    CorpusConsistencyError,
    DegenerateInputError,
    DomainError,
    InputError,
    NonsmoothError,
    ParseError,
    ProfileAssumptionError,
    RegistryError,
    SchemaError,
    UnsupportedError,
)
from .geom import (
    Cone1D,
    Interval,
    IntervalUnion,
    convex_complements_1d,
    convex_components_1d,
    parse_set,
    recession_cone_1d,
    recession_intersection_check,
)
from .grid import GridFn, GridSpec, NormTag, discrete_lipschitz_constant, is_midpoint_convex, lipschitz_estimate
from .homogeneous import (
    MaxMinForm,
    MinMaxForm,
    RayProfile,
    Role,
    SublinearForm,
    SuperlinearForm,
    certify_maximal_superlinear_minorant,
    certify_minimal_sublinear_majorant,
    extract_maximal_superlinear_minorant,
    extract_minimal_sublinear_majorant,
    greatest_sublinear_minorant,
    ph_majorant_minorant_test,
    subadditivity_check,
    unit_directions,
)
from .io import dumps, parse_form_json, parse_grid_csv, parse_profile_json, write_grid_csv
from .polygon import Polytope

__version__ = "0.1.0"
