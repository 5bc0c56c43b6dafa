"""Aggregation over matched content: count/min/max/sum/avg, HAVING-style
constraints, and the implicit grouping heuristic.

Grouping is not user-specified: an annotated node is grouped by its lowest
proper ancestor that is projected or leads to a projected node.  Aggregates
are computed over the retrieval function and never change which matchings
are satisfying; constraints only filter group instances out of the output.
"""

from __future__ import annotations

import operator
from typing import Mapping

from .evaluator import EvalResult, OutputSet, _close_outputs, evaluate, project
from .query_model import AbstractQuery, QueryNode
from .xml_model import XmlDocument, ancestors, textual_content

AGG_ELEMENT = "equix-agg"

_OPS = {
    "<": operator.lt,
    "<=": operator.le,
    "=": operator.eq,
    "!=": operator.ne,
    ">=": operator.ge,
    ">": operator.gt,
}

AggKey = tuple[int, QueryNode, str]  # (group instance, query node, function)
AggValue = int | float | str | None  # None encodes "undefined"


def _annotated(q: AbstractQuery) -> list[QueryNode]:
    return [n for n in q.nodes() if n.agg or n.having]


def grouping_node(q: AbstractQuery, nq: QueryNode) -> QueryNode:
    """Deepest proper ancestor of `nq` that is projected or leads to output."""
    parent_map = q.parent_map()
    outputs = set(q.output_nodes())

    def leads_to_output(n: QueryNode) -> bool:
        stack = [c for _, c in n.edges]
        while stack:
            m = stack.pop()
            if m in outputs:
                return True
            stack.extend(c for _, c in m.edges)
        return False

    cur = parent_map.get(nq)
    while cur is not None:
        if cur in outputs or leads_to_output(cur):
            return cur
        cur = parent_map.get(cur)
    raise ValueError(f"no grouping node above {nq.label!r} (empty output set?)")


def _numeric(text: str) -> int | float | None:
    s = text.strip()
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return None


def _apply_function(fn: str, values: list[str]) -> AggValue:
    if fn == "count":
        return len(values)
    numbers = [_numeric(v) for v in values]
    all_numeric = values and all(n is not None for n in numbers)
    if fn == "sum":
        if not values:
            return 0
        return sum(numbers) if all_numeric else None  # type: ignore[arg-type]
    if fn == "avg":
        if not values or not all_numeric:
            return None
        return sum(numbers) / len(numbers)  # type: ignore[arg-type]
    # min/max: numeric when every member parses, else lexicographic
    if not values:
        return None
    if all_numeric:
        return min(numbers) if fn == "min" else max(numbers)  # type: ignore[type-var]
    return min(values) if fn == "min" else max(values)


def compute_aggregates(
    doc: XmlDocument,
    q: AbstractQuery,
    retrieval: Mapping[QueryNode, frozenset[int]],
) -> dict[AggKey, AggValue]:
    """Aggregate values per (group instance, annotated node, function)."""
    table: dict[AggKey, AggValue] = {}
    for nq in _annotated(q):
        group = grouping_node(q, nq)
        functions = list(dict.fromkeys(list(nq.agg) + [a.fn for a in nq.having]))
        members = retrieval.get(nq, frozenset())
        for gx in retrieval.get(group, frozenset()):
            values = [
                textual_content(doc, m)
                for m in sorted(members)
                if gx in ancestors(doc, m)
            ]
            for fn in functions:
                table[(gx, nq, fn)] = _apply_function(fn, values)
    return table


def _compare(value: int | float | str, op: str, rhs) -> bool:
    try:
        return _OPS[op](float(value), float(rhs))
    except (TypeError, ValueError):
        return _OPS[op](str(value), str(rhs))


def failing_group_instances(
    q: AbstractQuery,
    retrieval: Mapping[QueryNode, frozenset[int]],
    aggregates: Mapping[AggKey, AggValue],
) -> set[int]:
    """Group instances whose constraint conjunction fails (undefined fails)."""
    failing: set[int] = set()
    for nq in _annotated(q):
        if not nq.having:
            continue
        group = grouping_node(q, nq)
        for gx in retrieval.get(group, frozenset()):
            for atom in nq.having:
                value = aggregates.get((gx, nq, atom.fn))
                if value is None or not _compare(value, atom.op, atom.value):
                    failing.add(gx)
                    break
    return failing


def apply_agg_constraints(
    doc: XmlDocument,
    q: AbstractQuery,
    retrieval: Mapping[QueryNode, frozenset[int]],
    aggregates: Mapping[AggKey, AggValue],
) -> OutputSet:
    """Output set with failing groups' own subtree contributions removed."""
    failing = failing_group_instances(q, retrieval, aggregates)
    outs: set[int] = set()
    for nq in q.output_nodes():
        outs.update(retrieval.get(nq, frozenset()))
    if failing:
        outs = {
            nx
            for nx in outs
            if nx not in failing and not (ancestors(doc, nx) & failing)
        }
    if not outs:
        return OutputSet()
    return _close_outputs(doc, outs)


def _format_value(value: AggValue) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, float) and value == int(value):
        return str(int(value))
    return str(value)


def aggregate_children(
    doc: XmlDocument,
    q: AbstractQuery,
    retrieval: Mapping[QueryNode, frozenset[int]],
    aggregates: Mapping[AggKey, AggValue],
    failing: set[int],
) -> dict[int, list[tuple[str, list[tuple[str, str]]]]]:
    """Synthetic inline aggregate elements per surviving group instance."""
    qpaths = q.path_map()
    extra: dict[int, list[tuple[str, list[tuple[str, str]]]]] = {}
    for nq in _annotated(q):
        if not nq.agg:
            continue
        group = grouping_node(q, nq)
        path = "/".join(qpaths[nq])
        for gx in sorted(retrieval.get(group, frozenset())):
            if gx in failing:
                continue
            for fn in nq.agg:
                attrs = [
                    ("fn", fn),
                    ("path", path),
                    ("value", _format_value(aggregates[(gx, nq, fn)])),
                ]
                extra.setdefault(gx, []).append((AGG_ELEMENT, attrs))
    return extra


def evaluate_document(
    doc: XmlDocument, q: AbstractQuery, dtd=None
) -> tuple[XmlDocument | None, OutputSet]:
    """Strict-mode evaluation pipeline honoring aggregation annotations.

    Without annotations this is exactly plain evaluation followed by
    projection; with them, constraints filter the output set and aggregate
    values are injected as inline elements under surviving groups.
    Returns the projected document (None when nothing is output) and the
    output set it was built from.
    """
    result: EvalResult = evaluate(doc, q)
    if not q.has_aggregates():
        if not result.output_set:
            return None, result.output_set
        return project(doc, result.output_set), result.output_set
    aggregates = compute_aggregates(doc, q, result.retrieval)
    failing = failing_group_instances(q, result.retrieval, aggregates)
    output_set = apply_agg_constraints(doc, q, result.retrieval, aggregates)
    if not output_set:
        return None, output_set
    extra = aggregate_children(doc, q, result.retrieval, aggregates, failing)
    # Aggregates attach only where the result DTD can carry an element
    # child: groups with character-data or ANY content get no inline value.
    if dtd is not None:
        from .dtd import ANY, PCDATA

        skip = {
            nx
            for nq in _annotated(q)
            for nx in result.retrieval.get(grouping_node(q, nq), frozenset())
            if dtd.elements.get(grouping_node(q, nq).label) in (PCDATA, ANY)
        }
        extra = {nx: rows for nx, rows in extra.items() if nx not in skip}
    keep = output_set.all_nodes
    extra = {nx: rows for nx, rows in extra.items() if nx in keep}
    return project(doc, output_set, extra or None), output_set


def evaluate_with_aggregation(
    doc: XmlDocument, q: AbstractQuery, dtd=None
) -> XmlDocument | None:
    return evaluate_document(doc, q, dtd)[0]
