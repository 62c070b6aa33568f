# models/__init__.py
from .lattice import (
    INF,
    LatticeParts,
    LatticeSpace,
    NormKind,
    NormSpec,
    as_vector,
    conjugate_exponent,
    family_is_disjoint,
    family_p_sum,
    format_exponent,
    is_disjoint,
    lattice_ops,
    p_sum,
    parse_exponent,
)
from .operator import LatticeOperator, identity, indicator, modulus, normalized, unit_vector
from .defect import DefectCertificate, DefectEstimate, DefectKind, FamilyWitness
from .approx import ApproxMethod, ApproxResult, SupportAssignment
from .instances import GraphInstance, PerturbedInstance, WalshInstance
from .reports import CheckReport, RunReport, SphereNet, SplitExpectation, to_plain
