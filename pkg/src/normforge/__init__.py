"""normforge: compile LegalRuleML norms into modal defeasible logic and reason over them."""

from .core import (
    Atom,
    CondRef,
    ConclusionTag,
    Constant,
    Modality,
    ModalLiteral,
    Rule,
    RuleType,
    Tag,
    Theory,
    Variable,
    comply_set,
    conflicts_with,
    format_literal,
    normalize_chain,
    parse_literal,
    validate_theory,
    violate_set,
)
from .errors import NormforgeError, NormforgeWarning, TransformError
from .lrml import LrmlDocument, parse_document
from .reasoner import Extension, brute_force_extension, compute_extension, ground, prove
from .render import parse_dfl, render_dfl, render_lrml
from .transform import TransformOptions, reduct, transform

__version__ = "0.1.0"

__all__ = [
    "Atom", "CondRef", "ConclusionTag", "Constant", "Modality", "ModalLiteral", "Rule", "RuleType",
    "Tag", "Theory", "Variable", "comply_set", "conflicts_with", "format_literal", "normalize_chain",
    "parse_literal", "validate_theory", "violate_set", "NormforgeError", "NormforgeWarning",
    "TransformError", "LrmlDocument", "parse_document", "Extension", "brute_force_extension",
    "compute_extension", "ground", "prove", "parse_dfl", "render_dfl", "render_lrml",
    "TransformOptions", "reduct", "transform",
]
