"""Ontology-scoped search with descendant-edge semantics.

A query over an ontology (a named term set) runs against every document
some of whose element/attribute names appear in the ontology.  Query edges
are read as "one or more document edges": candidates pair by label rather
than by path, connectivity relaxes to "some proper ancestor is matched to
the parent", and edge quantifiers range over matching-labeled descendants.
No result DTD exists in this mode; results carry the ontology name.
"""

from __future__ import annotations

import itertools
import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .evaluator import EvalResult, OutputSet, _close_outputs
from .query_model import AND, EXISTS, AbstractQuery, QueryNode, eval_matcher
from .xml_model import ATOMIC, XmlDocument, ancestors, textual_content


@dataclass(frozen=True)
class Ontology:
    name: str
    terms: frozenset[str]

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("an ontology needs a nonempty term set")


def load_ontology(source: str | Path | dict) -> Ontology:
    """Load an ontology manifest: {"name": ..., "terms": [...]}."""
    if isinstance(source, (str, Path)):
        source = json.loads(Path(source).read_text())
    if not isinstance(source, dict) or "name" not in source or "terms" not in source:
        raise ValueError("ontology manifest needs 'name' and 'terms'")
    return Ontology(name=source["name"], terms=frozenset(source["terms"]))


def describable_by(doc: XmlDocument, ontology: Ontology) -> bool:
    """True when some element or attribute name of the document is a term."""
    return bool(doc.names() & ontology.terms)


def validate_query_against_ontology(q: AbstractQuery, ontology: Ontology) -> list[str]:
    diags = []
    for node in q.nodes():
        if node.label not in ontology.terms:
            diags.append(f"label '{node.label}' is not a term of '{ontology.name}'")
    if not any(n.output for n in q.nodes()):
        diags.append("query marks no output nodes")
    return diags


# ---------------------------------------------------------------------------
# Descendant machinery: one tree pass gives entry/exit intervals per node
# and a per-label list sorted by entry time.


def _label_intervals(doc: XmlDocument):
    tin: dict[int, int] = {}
    tout: dict[int, int] = {}
    clock = 0
    stack: list[tuple[int, bool]] = [(doc.root, False)]
    while stack:
        nid, done = stack.pop()
        if done:
            tout[nid] = clock
            clock += 1
            continue
        tin[nid] = clock
        clock += 1
        stack.append((nid, True))
        for c in reversed(doc.children(nid)):
            if doc.kind(c) != ATOMIC:
                stack.append((c, False))
    by_label: dict[str, list[tuple[int, int]]] = {}
    for nid in tin:
        by_label.setdefault(doc.label(nid), []).append((tin[nid], nid))
    for rows in by_label.values():
        rows.sort()
    return tin, tout, by_label


def _descendants_with_label(tin, tout, by_label, nx: int, label: str) -> list[int]:
    rows = by_label.get(label, [])
    lo = bisect_right(rows, (tin[nx], float("inf")))
    hi = bisect_left(rows, (tout[nx], -1))
    return [nid for _, nid in rows[lo:hi]]


# ---------------------------------------------------------------------------
# Evaluation


def evaluate_reg(doc: XmlDocument, q: AbstractQuery) -> EvalResult:
    """Two-pass table algorithm under descendant-edge semantics."""
    qnodes = q.nodes()
    depths = q.depth_map()
    parents_q = q.parent_map()
    tin, tout, by_label = _label_intervals(doc)
    candidates: dict[QueryNode, list[int]] = {}
    for nq in qnodes:
        if nq is q.root:
            # Root matching stays exact (the root pairs with the root).
            candidates[nq] = [doc.root] if doc.label(doc.root) == nq.label else []
        else:
            candidates[nq] = [nid for _, nid in by_label.get(nq.label, [])]

    text_cache: dict[int, str] = {}

    def text_of(nx: int) -> str:
        t = text_cache.get(nx)
        if t is None:
            t = textual_content(doc, nx)
            text_cache[nx] = t
        return t

    match_array: dict[QueryNode, dict[int, bool]] = {}
    for nq in sorted(qnodes, key=lambda n: -depths[n]):
        row = {}
        for nx in candidates[nq]:
            tc = eval_matcher(nq.matcher, text_of(nx))
            if not nq.edges:
                row[nx] = tc
                continue
            statuses = []
            for quant, child in nq.edges:
                crow = match_array[child]
                group = _descendants_with_label(tin, tout, by_label, nx, child.label)
                if quant == EXISTS:
                    statuses.append(any(crow.get(c, False) for c in group))
                else:
                    statuses.append(all(crow.get(c, False) for c in group))
            if nq.operator == AND:
                row[nx] = tc and all(statuses)
            else:
                row[nx] = tc or any(statuses)
        match_array[nq] = row

    outs: set[int] = set()
    for nq in sorted(qnodes, key=lambda n: depths[n]):
        row = match_array[nq]
        if nq is not q.root:
            parent_row = match_array[parents_q[nq]]
            for nx in row:
                if row[nx] and not any(
                    parent_row.get(a, False) for a in ancestors(doc, nx)
                ):
                    row[nx] = False
        if nq.output:
            outs.update(nx for nx, ok in row.items() if ok)

    output_set = _close_outputs(doc, outs) if outs else OutputSet()
    retrieval = {
        nq: frozenset(nx for nx, ok in row.items() if ok)
        for nq, row in match_array.items()
    }
    return EvalResult(output_set=output_set, retrieval=retrieval)


def query_evaluate_reg(doc: XmlDocument, q: AbstractQuery) -> OutputSet:
    return evaluate_reg(doc, q).output_set


# ---------------------------------------------------------------------------
# Brute-force oracle under the modified definitions


def edge_satisfied_reg(
    doc: XmlDocument,
    q: AbstractQuery,
    mu: Mapping[QueryNode, frozenset[int]],
    nx: int,
    edge: tuple[str, QueryNode],
    _intervals=None,
) -> bool:
    quant, child = edge
    tin, tout, by_label = _intervals or _label_intervals(doc)
    assigned = mu.get(child, frozenset())
    group = _descendants_with_label(tin, tout, by_label, nx, child.label)
    if quant == EXISTS:
        return any(c in assigned for c in group)
    return all(c in assigned for c in group)


def is_satisfying_matching_reg(
    doc: XmlDocument,
    q: AbstractQuery,
    mu: Mapping[QueryNode, frozenset[int]],
    text_of: Callable[[int], str] | None = None,
    _intervals=None,
) -> bool:
    if text_of is None:
        text_of = lambda nx: textual_content(doc, nx)
    intervals = _intervals or _label_intervals(doc)
    for nq in q.nodes():
        for nx in mu.get(nq, frozenset()):
            content_ok = eval_matcher(nq.matcher, text_of(nx))
            if not nq.edges:
                if not content_ok:
                    return False
                continue
            edges_ok = (
                edge_satisfied_reg(doc, q, mu, nx, edge, intervals)
                for edge in nq.edges
            )
            if nq.operator == AND:
                if not (content_ok and all(edges_ok)):
                    return False
            else:
                if not (content_ok or any(edges_ok)):
                    return False
    return True


def enumerate_satisfying_matchings_reg(
    doc: XmlDocument,
    q: AbstractQuery,
    max_doc_nodes: int = 14,
    max_query_nodes: int = 7,
) -> list[dict[QueryNode, frozenset[int]]]:
    qnodes = q.nodes()
    if len(doc.nodes) > max_doc_nodes or len(qnodes) > max_query_nodes:
        raise ValueError("bound exceeded")
    parents_q = q.parent_map()
    intervals = _label_intervals(doc)
    _, _, by_label = intervals
    candidates = {
        nq: [nid for _, nid in by_label.get(nq.label, [])] for nq in qnodes
    }

    found: list[dict[QueryNode, frozenset[int]]] = []
    assignment: dict[QueryNode, frozenset[int]] = {}
    text_cache: dict[int, str] = {}

    def text_of(nx: int) -> str:
        t = text_cache.get(nx)
        if t is None:
            t = textual_content(doc, nx)
            text_cache[nx] = t
        return t

    def rec(i: int) -> None:
        if i == len(qnodes):
            if is_satisfying_matching_reg(
                doc, q, assignment, text_of, _intervals=intervals
            ):
                found.append(dict(assignment))
            return
        nq = qnodes[i]
        if nq is q.root:
            allowed = [doc.root] if doc.label(doc.root) == nq.label else []
        else:
            parent_set = assignment[parents_q[nq]]
            allowed = [
                c
                for c in candidates[nq]
                if ancestors(doc, c) & parent_set
            ]
        # Failing content disqualifies members of leaves and and-nodes.
        if not nq.edges or nq.operator == AND:
            allowed = [
                c for c in allowed if eval_matcher(nq.matcher, text_of(c))
            ]
        if nq is q.root:
            if not allowed:
                return
            options: Iterable[frozenset[int]] = [frozenset({doc.root})]
        else:
            options = (
                frozenset(combo)
                for r in range(len(allowed) + 1)
                for combo in itertools.combinations(allowed, r)
            )
        for opt in options:
            assignment[nq] = opt
            rec(i + 1)
        del assignment[nq]

    rec(0)
    return found


def brute_force_output_set_reg(
    doc: XmlDocument,
    q: AbstractQuery,
    max_doc_nodes: int = 14,
    max_query_nodes: int = 7,
) -> OutputSet:
    matchings = enumerate_satisfying_matchings_reg(
        doc, q, max_doc_nodes, max_query_nodes
    )
    outs: set[int] = set()
    for mu in matchings:
        for nq in q.output_nodes():
            outs.update(mu.get(nq, frozenset()))
    if not outs:
        return OutputSet()
    return _close_outputs(doc, outs)
