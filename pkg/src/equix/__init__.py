"""equix: a search/query engine for repositories of XML documents.

Tree-pattern queries with content constraints, existential/universal
quantification and and/or logic are evaluated in polynomial time by a
two-pass table algorithm; every result set comes with a synthesized DTD
that enables iterative requerying.  Extensions add aggregation with
implicit grouping and ontology-scoped descendant-edge search.
"""

from .aggregation import (
    apply_agg_constraints,
    compute_aggregates,
    evaluate_document,
    evaluate_with_aggregation,
    grouping_node,
)
from .dtd import (
    ANY,
    EMPTY,
    NOTHING,
    PCDATA,
    AttDef,
    Choice,
    ContentModel,
    Dtd,
    DtdError,
    Name,
    Opt,
    Plus,
    Seq,
    Star,
    parse_dtd,
    render_content,
)
from .evaluator import (
    OutputSet,
    brute_force_output_set,
    edge_satisfied,
    enumerate_satisfying_matchings,
    evaluate,
    evaluate_catalog,
    is_matching,
    is_satisfying_matching,
    matches_proc,
    node_matches,
    project,
    query_evaluate,
    retrieval_function,
    union_matchings,
)
from .ontology import (
    Ontology,
    brute_force_output_set_reg,
    describable_by,
    load_ontology,
    query_evaluate_reg,
    validate_query_against_ontology,
)
from .query_model import (
    AbstractQuery,
    AggAtom,
    And,
    ConcreteNode,
    ConcreteQuery,
    ContainsPhrase,
    ContainsWord,
    Not,
    Or,
    QueryFormatError,
    QueryNode,
    Regex,
    TRUE,
    TrueMatcher,
    complement,
    eval_matcher,
    load_query,
    parse_query_file,
    parse_query_json,
    translate,
    validate_query_against_dtd,
)
from .result_dtd import (
    ResultDtd,
    create_content_definition,
    create_result_dtd,
    element_name_set,
    simplify,
)
from .xml_model import (
    Catalog,
    CatalogError,
    DocumentError,
    SEPARATOR,
    XmlDocument,
    XmlNode,
    conformance_diagnostics,
    indirect_children,
    load_catalog,
    parse_document,
    path_of,
    serialize_document,
    strictly_conforms,
    textual_content,
)

__version__ = "0.1.0"
