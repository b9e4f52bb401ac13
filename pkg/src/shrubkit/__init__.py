"""Bounded-height tree models, MSO logic tooling, and type-capping kernels."""

from .census import RecognitionResult, enumerate_trees, index_lower_bound, recognize
from .core import (
    Forest,
    Graph,
    LabeledTree,
    Signature,
    TreeModel,
    ValidationReport,
    Violation,
    canonical_encode,
    graph_from_text,
    graph_to_text,
    induced_subgraph,
    is_leaf_hereditary_subtree,
    leaf_hereditary_restrict,
    load_structure_file,
    require_valid,
    tree_from_json,
    tree_model_from_json,
    tree_model_to_json,
    tree_to_json,
    validate_tree_model,
)
from .ef import (
    TypePartition,
    canonical_structure_key,
    distinguish,
    ef_equivalent,
    game_equivalent,
    type_partition,
)
from .errors import (
    FormulaSyntaxError,
    KernelVerificationError,
    ResourceLimitError,
    ShrubkitError,
    StructuralError,
    UnboundVariableError,
    UsageError,
    ValidationError,
)
from .interp import Interpretation, interpret, interpretation_rank, translate_formula
from .logic import (
    Structure,
    Vocabulary,
    characteristic_formula,
    characteristic_sentence,
    evaluate,
    format_formula,
    free_vars,
    parse_formula,
    rank,
    sample_formula,
)
from .shrink import (
    Bound,
    Bounds,
    CapPolicy,
    ShrinkReport,
    TowerOverflow,
    bound_le,
    format_bound,
    lg,
    shrink_graph,
    shrink_graph_with_report,
    shrink_tree,
    shrink_tree_with_report,
    tower,
    verify_shrink,
)

__version__ = "0.1.0"

__all__ = [
    "Bound",
    "Bounds",
    "CapPolicy",
    "Forest",
    "FormulaSyntaxError",
    "Graph",
    "Interpretation",
    "KernelVerificationError",
    "LabeledTree",
    "RecognitionResult",
    "ResourceLimitError",
    "ShrinkReport",
    "ShrubkitError",
    "Signature",
    "StructuralError",
    "Structure",
    "TowerOverflow",
    "TreeModel",
    "TypePartition",
    "UnboundVariableError",
    "UsageError",
    "ValidationError",
    "ValidationReport",
    "Violation",
    "Vocabulary",
    "bound_le",
    "canonical_encode",
    "canonical_structure_key",
    "characteristic_formula",
    "characteristic_sentence",
    "distinguish",
    "ef_equivalent",
    "enumerate_trees",
    "evaluate",
    "format_bound",
    "format_formula",
    "free_vars",
    "game_equivalent",
    "graph_from_text",
    "graph_to_text",
    "index_lower_bound",
    "induced_subgraph",
    "interpret",
    "interpretation_rank",
    "is_leaf_hereditary_subtree",
    "leaf_hereditary_restrict",
    "lg",
    "load_structure_file",
    "parse_formula",
    "rank",
    "recognize",
    "require_valid",
    "sample_formula",
    "shrink_graph",
    "shrink_graph_with_report",
    "shrink_tree",
    "shrink_tree_with_report",
    "tower",
    "translate_formula",
    "tree_from_json",
    "tree_model_from_json",
    "tree_model_to_json",
    "tree_to_json",
    "type_partition",
    "validate_tree_model",
    "verify_shrink",
]
