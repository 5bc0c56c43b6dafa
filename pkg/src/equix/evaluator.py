"""Query evaluation: satisfying matchings, the two-pass table algorithm,
brute-force enumeration oracle, and document projection.

The table algorithm fills a (query node, document node) boolean array
bottom-up over path-equal candidate pairs, then sweeps top-down clearing
entries whose parent entry is false; surviving entries at output nodes
contribute the node plus its ancestors and descendants to the output set.
The final array is the retrieval function: the union of all satisfying
matchings.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .query_model import (
    AND,
    EXISTS,
    AbstractQuery,
    QueryNode,
    eval_matcher,
)
from .xml_model import (
    ATOMIC,
    ATTRIBUTE,
    COMPLEX,
    Catalog,
    XmlDocument,
    XmlNode,
    _Temp,
    ancestors,
    descendants,
    path_of,
    textual_content,
)

Matching = Mapping[QueryNode, frozenset[int]]


@dataclass(frozen=True)
class OutputSet:
    """Matched output nodes plus their ancestors and descendants."""

    out: frozenset[int] = frozenset()
    anc: frozenset[int] = frozenset()
    desc: frozenset[int] = frozenset()

    @property
    def all_nodes(self) -> frozenset[int]:
        return self.out | self.anc | self.desc

    def __bool__(self) -> bool:
        return bool(self.out)


@dataclass
class EvalResult:
    output_set: OutputSet
    retrieval: dict[QueryNode, frozenset[int]]


# ---------------------------------------------------------------------------
# Matching definitions


def node_matches(doc: XmlDocument, nx: int, nq: QueryNode) -> bool:
    """Label equality; atomic nodes never match (query labels are names)."""
    node = doc.node(nx)
    return node.kind != ATOMIC and node.label == nq.label


def _matching_children(doc: XmlDocument, nx: int, label: str) -> list[int]:
    return [
        c
        for c in doc.children(nx)
        if doc.kind(c) != ATOMIC and doc.label(c) == label
    ]


def edge_satisfied(
    doc: XmlDocument,
    q: AbstractQuery,
    mu: Matching,
    nx: int,
    edge: tuple[str, QueryNode],
) -> bool:
    """Whether document node `nx` satisfies a query edge w.r.t. a matching."""
    quant, child = edge
    assigned = mu.get(child, frozenset())
    candidates = _matching_children(doc, nx, child.label)
    if quant == EXISTS:
        return any(c in assigned for c in candidates)
    return all(c in assigned for c in candidates)


def is_matching(doc: XmlDocument, q: AbstractQuery, mu: Matching) -> bool:
    """The structural conditions: root, label equality, connectivity."""
    if mu.get(q.root, frozenset()) != frozenset({doc.root}):
        return False
    parent_q = q.parent_map()
    for nq, nodes in mu.items():
        for nx in nodes:
            if not node_matches(doc, nx, nq):
                return False
            if nx != doc.root:
                pq = parent_q.get(nq)
                px = doc.parent_of(nx)
                if pq is None or px is None or px not in mu.get(pq, frozenset()):
                    return False
    return True


def is_satisfying_matching(
    doc: XmlDocument,
    q: AbstractQuery,
    mu: Matching,
    text_of: Callable[[int], str] | None = None,
) -> bool:
    """Content and quantifier conditions of a satisfying matching."""
    if text_of is None:
        text_of = lambda nx: textual_content(doc, nx)
    for nq in q.nodes():
        for nx in mu.get(nq, frozenset()):
            content_ok = eval_matcher(nq.matcher, text_of(nx))
            if not nq.edges:
                if not content_ok:
                    return False
                continue
            edges_ok = (
                edge_satisfied(doc, q, mu, nx, edge) for edge in nq.edges
            )
            if nq.operator == AND:
                if not (content_ok and all(edges_ok)):
                    return False
            else:
                if not (content_ok or any(edges_ok)):
                    return False
    return True


def union_matchings(
    m1: Matching, m2: Matching
) -> dict[QueryNode, frozenset[int]]:
    out: dict[QueryNode, frozenset[int]] = {}
    for nq in set(m1) | set(m2):
        out[nq] = m1.get(nq, frozenset()) | m2.get(nq, frozenset())
    return out


# ---------------------------------------------------------------------------
# The two-pass table algorithm


def matches_proc(
    doc: XmlDocument,
    nq: QueryNode,
    nx: int,
    match_array: Mapping[QueryNode, Mapping[int, bool]],
    text_of: Callable[[int], str] | None = None,
) -> bool:
    """Bottom-up satisfiability of `nx` for `nq` given finalized child rows."""
    if text_of is None:
        text_of = lambda i: textual_content(doc, i)
    tc = eval_matcher(nq.matcher, text_of(nx))
    if not nq.edges:
        return tc
    statuses = []
    for quant, child in nq.edges:
        row = match_array.get(child, {})
        group = _matching_children(doc, nx, child.label)
        if quant == EXISTS:
            statuses.append(any(row.get(c, False) for c in group))
        else:
            statuses.append(all(row.get(c, False) for c in group))
    if nq.operator == AND:
        return tc and all(statuses)
    return tc or any(statuses)


def _path_index(doc: XmlDocument) -> dict[tuple[str, ...], list[int]]:
    index: dict[tuple[str, ...], list[int]] = {}
    paths: dict[int, tuple[str, ...]] = {doc.root: (doc.label(doc.root),)}
    stack = [doc.root]
    while stack:
        nid = stack.pop()
        index.setdefault(paths[nid], []).append(nid)
        for c in doc.children(nid):
            if doc.kind(c) == ATOMIC:
                continue
            paths[c] = paths[nid] + (doc.label(c),)
            stack.append(c)
    for nodes in index.values():
        nodes.sort()
    return index


def evaluate(doc: XmlDocument, q: AbstractQuery) -> EvalResult:
    """Run the table algorithm; exposes the retrieval function as well."""
    qnodes = q.nodes()
    depths = q.depth_map()
    parents_q = q.parent_map()
    qpaths = q.path_map()
    index = _path_index(doc)
    candidates = {nq: index.get(qpaths[nq], []) for nq in qnodes}

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
            row[nx] = matches_proc(doc, nq, nx, match_array, text_of)
        match_array[nq] = row

    outs: set[int] = set()
    for nq in sorted(qnodes, key=lambda n: depths[n]):
        row = match_array[nq]
        if nq is not q.root:
            parent_row = match_array[parents_q[nq]]
            for nx in row:
                if row[nx] and not parent_row.get(doc.parent_of(nx), False):
                    row[nx] = False
        if nq.output:
            outs.update(nx for nx, ok in row.items() if ok)

    anc: set[int] = set()
    desc: set[int] = set()
    for nx in outs:
        anc.update(ancestors(doc, nx))
        desc.update(descendants(doc, nx))
    output_set = OutputSet(
        out=frozenset(outs), anc=frozenset(anc - outs), desc=frozenset(desc - outs)
    )
    retrieval = {
        nq: frozenset(nx for nx, ok in row.items() if ok)
        for nq, row in match_array.items()
    }
    return EvalResult(output_set=output_set, retrieval=retrieval)


def query_evaluate(doc: XmlDocument, q: AbstractQuery) -> OutputSet:
    return evaluate(doc, q).output_set


def retrieval_function(doc: XmlDocument, q: AbstractQuery) -> dict[QueryNode, frozenset[int]]:
    return evaluate(doc, q).retrieval


# ---------------------------------------------------------------------------
# Projection


def project(
    doc: XmlDocument,
    output_set: OutputSet,
    extra_children: Mapping[int, list[tuple[str, list[tuple[str, str]]]]] | None = None,
) -> XmlDocument:
    """The subtree induced by the output set, in original sibling order.

    `extra_children` appends synthetic elements (label, attribute pairs)
    under retained original nodes; used for inline aggregate values.
    """
    if not output_set:
        raise ValueError("cannot project an empty output set")
    keep = output_set.all_nodes

    def build(nid: int) -> _Temp:
        node = doc.node(nid)
        t = _Temp(node.kind, node.label, node.attr_type)
        for c in node.children:
            if c in keep:
                t.children.append(build(c))
        if extra_children:
            for label, attrs in extra_children.get(nid, []):
                synth = _Temp(COMPLEX, label)
                for aname, avalue in attrs:
                    a = _Temp(ATTRIBUTE, aname, "CDATA")
                    a.children.append(_Temp(ATOMIC, avalue))
                    synth.children.append(a)
                t.children.append(synth)
        return t

    root_tmp = build(doc.root)

    non_atomic: list[_Temp] = []
    atomic: list[_Temp] = []
    queue = deque([root_tmp])
    while queue:
        t = queue.popleft()
        (atomic if t.kind == ATOMIC else non_atomic).append(t)
        queue.extend(t.children)
    ids = {id(t): i for i, t in enumerate(non_atomic + atomic)}
    nodes = {
        ids[id(t)]: XmlNode(
            id=ids[id(t)],
            kind=t.kind,
            label=t.label,
            attr_type=t.attr_type,
            children=tuple(ids[id(c)] for c in t.children),
        )
        for t in non_atomic + atomic
    }
    projected = XmlDocument(nodes=nodes, root=0, id_index={})
    for node in nodes.values():
        if node.kind == ATTRIBUTE and node.attr_type == "ID":
            value = nodes[node.children[0]].label
            projected.id_index.setdefault(value, projected.parents[node.id])
    return projected


def evaluate_catalog(q: AbstractQuery, catalog: Catalog) -> list[XmlDocument]:
    """One projected result document per catalog document with output."""
    results = []
    for doc in catalog.documents:
        out = query_evaluate(doc, q)
        if out:
            results.append(project(doc, out))
    return results


# ---------------------------------------------------------------------------
# Brute-force oracle


def enumerate_satisfying_matchings(
    doc: XmlDocument,
    q: AbstractQuery,
    max_doc_nodes: int = 14,
    max_query_nodes: int = 7,
) -> list[dict[QueryNode, frozenset[int]]]:
    """Every satisfying matching, by explicit enumeration.

    Enumerates all assignments of path-equal candidate subsets respecting
    root and connectivity, then filters by the satisfying conditions.
    Intentionally independent of the table algorithm.
    """
    qnodes = q.nodes()
    if len(doc.nodes) > max_doc_nodes or len(qnodes) > max_query_nodes:
        raise ValueError(
            f"bound exceeded: document {len(doc.nodes)}/{max_doc_nodes} nodes, "
            f"query {len(qnodes)}/{max_query_nodes} nodes"
        )
    qpaths = q.path_map()
    parents_q = q.parent_map()
    index = _path_index(doc)
    candidates = {nq: index.get(qpaths[nq], []) for nq in qnodes}

    order = qnodes  # pre-order: parents first
    found: list[dict[QueryNode, frozenset[int]]] = []
    assignment: dict[QueryNode, frozenset[int]] = {}

    text_cache: dict[int, str] = {}

    def text_of(nx: int) -> str:
        t = text_cache.get(nx)
        if t is None:
            t = textual_content(doc, nx)
            text_cache[nx] = t
        return t

    def content_ok(nq: QueryNode, nx: int) -> bool:
        return eval_matcher(nq.matcher, text_of(nx))

    def rec(i: int) -> None:
        if i == len(order):
            if is_satisfying_matching(doc, q, assignment, text_of):
                found.append(dict(assignment))
            return
        nq = order[i]
        if nq is q.root:
            allowed = list(candidates[nq])
        else:
            allowed = [
                c
                for c in candidates[nq]
                if doc.parent_of(c) in assignment[parents_q[nq]]
            ]
        # Members with failing content can never satisfy a leaf or and-node;
        # dropping them up front only prunes assignments that cannot satisfy.
        if not nq.edges or nq.operator == AND:
            allowed = [c for c in allowed if content_ok(nq, c)]
        if nq is q.root:
            if not allowed:
                return  # root label mismatch (or root content unsatisfiable)
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


def _close_outputs(doc: XmlDocument, outs: set[int]) -> OutputSet:
    anc: set[int] = set()
    desc: set[int] = set()
    for nx in outs:
        anc.update(ancestors(doc, nx))
        desc.update(descendants(doc, nx))
    return OutputSet(
        out=frozenset(outs), anc=frozenset(anc - outs), desc=frozenset(desc - outs)
    )


def brute_force_output_set(
    doc: XmlDocument,
    q: AbstractQuery,
    max_doc_nodes: int = 14,
    max_query_nodes: int = 7,
) -> OutputSet:
    """Output set per the definition: union over all satisfying matchings."""
    matchings = enumerate_satisfying_matchings(doc, q, max_doc_nodes, max_query_nodes)
    outs: set[int] = set()
    for mu in matchings:
        for nq in q.output_nodes():
            outs.update(mu.get(nq, frozenset()))
    if not outs:
        return OutputSet()
    return _close_outputs(doc, outs)
