"""Result-DTD synthesis: a DTD every result document strictly conforms to.

For each element name that can appear in results, the content definition is
a disjunction: the original definition when the element lies inside a fully
projected output subtree, plus one definition per query occurrence on the
way to an output node, in which sub-elements that can survive projection
become optional and the rest are erased.  The synthesized DTD is compact
(linear in |DTD| x |query|) and deliberately not minimal.
"""

from __future__ import annotations

from dataclasses import dataclass

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
    element_names,
)
from .aggregation import AGG_ELEMENT, grouping_node
from .query_model import (
    AbstractQuery,
    classify_positions,
    subtree_nodes,
)


@dataclass
class ResultDtd:
    """Synthesized DTD plus provenance of the originating DTD and query."""

    dtd: Dtd
    origin: str = ""
    query_id: str = ""

    def render(self) -> str:
        return self.dtd.render()


# ---------------------------------------------------------------------------
# Simplification


def _reduce(model: ContentModel) -> ContentModel:
    """One bottom-up application of the rewrite rules; preserves ∅."""
    if isinstance(model, Seq):
        parts = [_reduce(p) for p in model.parts]
        if any(p == NOTHING for p in parts):
            # (t,∅) => t and (∅,t) => t; a sequence of nothing is nothing
            parts = [p for p in parts if p != NOTHING]
            if not parts:
                return NOTHING
        parts = [p for p in parts if p != EMPTY]
        if not parts:
            return EMPTY
        if len(parts) == 1:
            return parts[0]
        return Seq(tuple(parts))
    if isinstance(model, Choice):
        parts = []
        for p in model.parts:
            r = _reduce(p)
            if r not in parts:  # merge structurally identical disjuncts
                parts.append(r)
        had_nothing = any(p == NOTHING for p in parts)
        parts = [p for p in parts if p != NOTHING]
        if not parts:
            return NOTHING
        had_empty = any(p == EMPTY for p in parts)
        parts = [p for p in parts if p != EMPTY]
        if not parts:
            return EMPTY
        inner = parts[0] if len(parts) == 1 else Choice(tuple(parts))
        if had_nothing or had_empty:
            # (t|∅) => t? ; a branch accepting no content also makes t optional
            return Opt(inner)
        return inner
    if isinstance(model, Opt):
        item = _reduce(model.item)
        if item in (NOTHING, EMPTY):
            return item
        return Opt(item)
    if isinstance(model, Star):
        item = _reduce(model.item)
        if item in (NOTHING, EMPTY):
            return item
        return Star(item)
    if isinstance(model, Plus):
        item = _reduce(model.item)
        if item in (NOTHING, EMPTY):
            return item
        return Plus(item)
    return model


def reduce_model(model: ContentModel) -> ContentModel:
    """Apply the rewrite rules to fixpoint, keeping ∅ distinct."""
    while True:
        reduced = _reduce(model)
        if reduced == model:
            return reduced
        model = reduced


def simplify(model: ContentModel) -> ContentModel:
    """Fixpoint rewriting; a fully erased definition becomes EMPTY."""
    reduced = reduce_model(model)
    return EMPTY if reduced == NOTHING else reduced


# ---------------------------------------------------------------------------
# Element name set


def _query_shape(q: AbstractQuery, d: Dtd):
    positions = classify_positions(q, d)
    reaches_output = {
        n: any(m.output for m in subtree_nodes(n)) for n in q.nodes()
    }
    return positions, reaches_output


def element_name_set(q: AbstractQuery, d: Dtd) -> set[str]:
    """Element names that may occur in result documents.

    Element-position output labels contribute themselves plus their DTD
    ancestors and descendants; attribute-position outputs anchor to the
    owning element (which appears with its ancestors, but not its element
    content).
    """
    positions, _ = _query_shape(q, d)
    parent_q = q.parent_map()
    names: set[str] = set()
    for n in q.output_nodes():
        if positions.get(n) == "element" and n.label in d.elements:
            names.add(n.label)
            names.update(d.dtd_ancestors(n.label))
            names.update(d.dtd_descendants(n.label))
        elif positions.get(n) == "attribute":
            owner = parent_q[n].label
            names.add(owner)
            names.update(d.dtd_ancestors(owner))
    return names


# ---------------------------------------------------------------------------
# Content definitions


def _replace_names(
    model: ContentModel, mapping: dict[str, ContentModel]
) -> ContentModel:
    if isinstance(model, Name):
        return mapping.get(model.name, model)
    if isinstance(model, Seq):
        return Seq(tuple(_replace_names(p, mapping) for p in model.parts))
    if isinstance(model, Choice):
        return Choice(tuple(_replace_names(p, mapping) for p in model.parts))
    if isinstance(model, Opt):
        return Opt(_replace_names(model.item, mapping))
    if isinstance(model, Star):
        return Star(_replace_names(model.item, mapping))
    if isinstance(model, Plus):
        return Plus(_replace_names(model.item, mapping))
    return model


def create_content_definition(
    e: str, q: AbstractQuery, d: Dtd
) -> ContentModel:
    """Content definition of element `e` in the result DTD."""
    phi_e = d.elements.get(e)
    if phi_e is None:
        raise DtdError(f"element '{e}' is not defined in the originating DTD")

    positions, reaches_output = _query_shape(q, d)
    qpaths = q.path_map()

    disjuncts: list[ContentModel] = []
    # Full original definition when e itself (or an element containing it
    # transitively below an output) is projected wholesale.
    for n in q.output_nodes():
        if positions.get(n) != "element":
            continue
        if n.label == e or e in d.dtd_descendants(n.label):
            disjuncts.append(phi_e)
            break

    element_nodes = [
        n
        for n in q.nodes()
        if positions.get(n) == "element" and n.label == e and reaches_output[n]
    ]
    for nq in element_nodes:
        same_path = [n for n in q.nodes() if qpaths[n] == qpaths[nq]]
        mapping: dict[str, ContentModel] = {}
        for child_name in element_names(phi_e):
            qualified = any(
                child.label == child_name
                and positions.get(child) == "element"
                and reaches_output[child]
                for n in same_path
                for _, child in n.edges
            )
            mapping[child_name] = Opt(Name(child_name)) if qualified else NOTHING
        candidate = _replace_names(phi_e, mapping)
        if candidate not in disjuncts:
            disjuncts.append(candidate)

    if not disjuncts:
        return simplify(NOTHING)
    phi = disjuncts[0] if len(disjuncts) == 1 else Choice(tuple(disjuncts))
    return simplify(phi)


# ---------------------------------------------------------------------------
# Whole result DTD


def _with_aggregate_slot(model: ContentModel) -> ContentModel:
    agg = Star(Name(AGG_ELEMENT))
    if model == EMPTY:
        return agg
    if model in (PCDATA, ANY):
        # Mixed content is outside the DTD subset; such groups carry no
        # inline aggregate element.
        return model
    return Seq((model, agg))


def create_result_dtd(
    q: AbstractQuery, d: Dtd, origin: str = "", query_id: str = ""
) -> ResultDtd:
    """DTD every result of `q` over documents of `d` strictly conforms to.

    Attribute lists are copied with every default relaxed to #IMPLIED; the
    root element name is preserved.  Queries with aggregation annotations
    additionally declare the inline aggregate element and allow it under
    the grouping elements.
    """
    names = element_name_set(q, d)
    elements: dict[str, ContentModel] = {}
    for e in d.elements:  # originating declaration order, deterministic
        if e in names:
            elements[e] = create_content_definition(e, q, d)
    attlists: dict[str, list[AttDef]] = {}
    for e, defs in d.attlists.items():
        if e in names:
            attlists[e] = [AttDef(a.name, a.type, "#IMPLIED") for a in defs]

    if q.has_aggregates():
        group_labels = {
            grouping_node(q, n).label
            for n in q.nodes()
            if n.agg or n.having
        }
        for label in sorted(group_labels):
            if label in elements:
                elements[label] = _with_aggregate_slot(elements[label])
        elements[AGG_ELEMENT] = EMPTY
        attlists[AGG_ELEMENT] = [
            AttDef("fn", "CDATA", "#IMPLIED"),
            AttDef("path", "CDATA", "#IMPLIED"),
            AttDef("value", "CDATA", "#IMPLIED"),
        ]

    dtd = Dtd(root_element=d.root_element, elements=elements, attlists=attlists)
    return ResultDtd(dtd=dtd, origin=origin, query_id=query_id)
