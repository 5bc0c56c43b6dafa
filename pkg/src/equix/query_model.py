"""Queries: string matchers, concrete/abstract query trees, negation propagation.

Concrete queries are what the form UI produces: every node is implicitly a
conjunction and edges carry one of the four user-facing quantifiers
(one-is, none-is, all-are, not-all-are).  Translation pushes the negated
quantifiers downward, flipping and/or operators and complementing matchers,
yielding an abstract query over {exists, for-all} x {and, or} only.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

from .dtd import Dtd
from .xml_model import SEPARATOR

AND = "and"
OR = "or"

EXISTS = "exists"
FOR_ALL = "for-all"

ONE_IS = "one-is"
NONE_IS = "none-is"
ALL_ARE = "all-are"
NOT_ALL_ARE = "not-all-are"

# concrete quantifier -> (base abstract quantifier, carries negation)
_CONCRETE_QUANTIFIERS = {
    ONE_IS: (EXISTS, False),
    NONE_IS: (EXISTS, True),
    ALL_ARE: (FOR_ALL, False),
    NOT_ALL_ARE: (FOR_ALL, True),
}

AGG_FUNCTIONS = ("count", "min", "max", "sum", "avg")
AGG_OPS = ("<", "<=", "=", "!=", ">=", ">")


class QueryFormatError(ValueError):
    """Schema violation in query JSON, with a JSON-pointer location."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{message} (at {pointer or '/'})")
        self.pointer = pointer


# ---------------------------------------------------------------------------
# String matchers

_WORD_RE = re.compile(r"\w+")


def _words(text: str) -> list[str]:
    return _WORD_RE.findall(text.replace(SEPARATOR, " ").casefold())


class StringMatcher:
    """Boolean predicate on character sequences; closed under complement."""

    __slots__ = ()

    def matches(self, text: str) -> bool:
        raise NotImplementedError

    def to_json(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class TrueMatcher(StringMatcher):
    def matches(self, text: str) -> bool:
        return True

    def to_json(self) -> dict[str, Any]:
        return {"op": "true"}


TRUE = TrueMatcher()


@dataclass(frozen=True)
class ContainsWord(StringMatcher):
    word: str

    def matches(self, text: str) -> bool:
        return self.word.casefold() in _words(text)

    def to_json(self) -> dict[str, Any]:
        return {"op": "word", "value": self.word}


@dataclass(frozen=True)
class ContainsPhrase(StringMatcher):
    phrase: str

    def matches(self, text: str) -> bool:
        needle = _words(self.phrase)
        if not needle:
            return True
        hay = _words(text)
        span = len(needle)
        return any(hay[i:i + span] == needle for i in range(len(hay) - span + 1))

    def to_json(self) -> dict[str, Any]:
        return {"op": "phrase", "value": self.phrase}


@dataclass(frozen=True)
class Regex(StringMatcher):
    pattern: str

    def __post_init__(self) -> None:
        # Invalid patterns are rejected here, never at evaluation time.
        object.__setattr__(self, "_compiled", re.compile(self.pattern))

    def matches(self, text: str) -> bool:
        return self._compiled.search(text) is not None  # type: ignore[attr-defined]

    def to_json(self) -> dict[str, Any]:
        return {"op": "regex", "value": self.pattern}


@dataclass(frozen=True)
class And(StringMatcher):
    parts: tuple[StringMatcher, ...]

    def matches(self, text: str) -> bool:
        return all(p.matches(text) for p in self.parts)

    def to_json(self) -> dict[str, Any]:
        return {"op": "and", "args": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class Or(StringMatcher):
    parts: tuple[StringMatcher, ...]

    def matches(self, text: str) -> bool:
        return any(p.matches(text) for p in self.parts)

    def to_json(self) -> dict[str, Any]:
        return {"op": "or", "args": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class Not(StringMatcher):
    inner: StringMatcher

    def matches(self, text: str) -> bool:
        return not self.inner.matches(text)

    def to_json(self) -> dict[str, Any]:
        return {"op": "not", "arg": self.inner.to_json()}


def eval_matcher(matcher: StringMatcher, text: str) -> bool:
    return matcher.matches(text)


def complement(matcher: StringMatcher) -> StringMatcher:
    """A matcher evaluating to the negation of `matcher` on every input."""
    if isinstance(matcher, Not):
        return matcher.inner
    return Not(matcher)


def matcher_from_json(obj: Any, pointer: str = "") -> StringMatcher:
    if not isinstance(obj, dict) or "op" not in obj:
        raise QueryFormatError("matcher must be an object with an 'op' key", pointer)
    op = obj["op"]
    if op == "true":
        return TRUE
    if op in ("word", "phrase", "regex"):
        value = obj.get("value")
        if not isinstance(value, str):
            raise QueryFormatError(f"'{op}' matcher needs a string 'value'", pointer)
        if op == "word":
            return ContainsWord(value)
        if op == "phrase":
            return ContainsPhrase(value)
        try:
            return Regex(value)
        except re.error as exc:
            raise QueryFormatError(f"invalid regex: {exc}", pointer) from exc
    if op in ("and", "or"):
        args = obj.get("args")
        if not isinstance(args, list) or not args:
            raise QueryFormatError(f"'{op}' matcher needs a non-empty 'args' list", pointer)
        parts = tuple(
            matcher_from_json(a, f"{pointer}/args/{i}") for i, a in enumerate(args)
        )
        return And(parts) if op == "and" else Or(parts)
    if op == "not":
        if "arg" not in obj:
            raise QueryFormatError("'not' matcher needs an 'arg'", pointer)
        return Not(matcher_from_json(obj["arg"], f"{pointer}/arg"))
    raise QueryFormatError(f"unknown matcher op {op!r}", pointer)


# ---------------------------------------------------------------------------
# Query trees


@dataclass(frozen=True)
class AggAtom:
    """One HAVING-style constraint: fn op value."""

    fn: str
    op: str
    value: Any


@dataclass(eq=False)
class ConcreteNode:
    label: str
    matcher: StringMatcher = TRUE
    output: bool = False
    children: list[tuple[str, "ConcreteNode"]] = field(default_factory=list)
    agg: tuple[str, ...] = ()
    having: tuple[AggAtom, ...] = ()


@dataclass(eq=False)
class ConcreteQuery:
    root: ConcreteNode
    mode: str = "strict"  # strict | ontology
    ontology: str | None = None


@dataclass(eq=False)
class QueryNode:
    """Abstract query node: label, matcher, and/or operator, output mark."""

    label: str
    matcher: StringMatcher = TRUE
    operator: str = AND
    output: bool = False
    edges: list[tuple[str, "QueryNode"]] = field(default_factory=list)
    agg: tuple[str, ...] = ()
    having: tuple[AggAtom, ...] = ()


@dataclass(eq=False)
class AbstractQuery:
    root: QueryNode
    mode: str = "strict"
    ontology: str | None = None

    def nodes(self) -> list[QueryNode]:
        """All nodes in pre-order."""
        out: list[QueryNode] = []
        stack = [self.root]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(child for _, child in reversed(n.edges))
        return out

    def parent_map(self) -> dict[QueryNode, QueryNode]:
        return {
            child: node for node in self.nodes() for _, child in node.edges
        }

    def depth_map(self) -> dict[QueryNode, int]:
        depth = {self.root: 0}
        stack = [self.root]
        while stack:
            n = stack.pop()
            for _, child in n.edges:
                depth[child] = depth[n] + 1
                stack.append(child)
        return depth

    def path_map(self) -> dict[QueryNode, tuple[str, ...]]:
        paths = {self.root: (self.root.label,)}
        stack = [self.root]
        while stack:
            n = stack.pop()
            for _, child in n.edges:
                paths[child] = paths[n] + (child.label,)
                stack.append(child)
        return paths

    def output_nodes(self) -> list[QueryNode]:
        return [n for n in self.nodes() if n.output]

    def find(self, label: str) -> QueryNode:
        """The unique node with this label (test convenience)."""
        hits = [n for n in self.nodes() if n.label == label]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} nodes labeled {label!r}")
        return hits[0]

    def has_aggregates(self) -> bool:
        return any(n.agg or n.having for n in self.nodes())


def subtree_nodes(node: QueryNode) -> list[QueryNode]:
    out: list[QueryNode] = []
    stack = [node]
    while stack:
        n = stack.pop()
        out.append(n)
        stack.extend(child for _, child in n.edges)
    return out


# ---------------------------------------------------------------------------
# Translation (negation propagation)


def translate(cq: ConcreteQuery) -> AbstractQuery:
    """Turn a concrete query into the negation-free abstract normal form.

    Nodes start as and-nodes with the user conditions.  A negated quantifier
    introduces a negation that travels downward: through a node it flips
    and/or and complements the matcher, through an edge it flips the
    quantifier.  Output marks are preserved.
    """

    def build(cn: ConcreteNode, negated: bool) -> QueryNode:
        node = QueryNode(
            label=cn.label,
            matcher=complement(cn.matcher) if negated else cn.matcher,
            operator=OR if negated else AND,
            output=cn.output,
            agg=cn.agg,
            having=cn.having,
        )
        for quant, child in cn.children:
            base, carries = _CONCRETE_QUANTIFIERS[quant]
            neg = negated != carries
            abstract = base
            if neg:
                abstract = FOR_ALL if base == EXISTS else EXISTS
            node.edges.append((abstract, build(child, neg)))
        return node

    return AbstractQuery(build(cq.root, False), mode=cq.mode, ontology=cq.ontology)


# ---------------------------------------------------------------------------
# Validation against a DTD


def validate_query_against_dtd(aq: AbstractQuery, dtd: Dtd) -> list[str]:
    """Diagnostics; empty when the query fits the DTD and projects something."""
    diags: list[str] = []
    if aq.root.label != dtd.root_element:
        diags.append(
            f"root label '{aq.root.label}' does not match the DTD root "
            f"'{dtd.root_element}'"
        )
    if not any(n.output for n in aq.nodes()):
        diags.append("query marks no output nodes")
    for node in aq.nodes():
        if not node.edges:
            continue
        if node.label not in dtd.elements:
            diags.append(
                f"'{node.label}' is not a declared element; its child edges "
                "are not realizable"
            )
            continue
        allowed = set(dtd.element_children(node.label))
        allowed.update(a.name for a in dtd.attribute_defs(node.label))
        for _, child in node.edges:
            if child.label not in allowed:
                diags.append(
                    f"'{child.label}' cannot occur under '{node.label}' "
                    "per the DTD"
                )
    return diags


def classify_positions(aq: AbstractQuery, dtd: Dtd) -> dict[QueryNode, str]:
    """Whether each query node sits at an element or attribute position."""
    kinds: dict[QueryNode, str] = {}

    def walk(node: QueryNode, kind: str) -> None:
        kinds[node] = kind
        for _, child in node.edges:
            if kind == "element" and node.label in dtd.elements:
                if child.label in dtd.element_children(node.label):
                    walk(child, "element")
                    continue
                if any(
                    a.name == child.label for a in dtd.attribute_defs(node.label)
                ):
                    walk(child, "attribute")
                    continue
            walk(child, "unknown")

    walk(aq.root, "element" if aq.root.label in dtd.elements else "unknown")
    return kinds


# ---------------------------------------------------------------------------
# JSON serialization

_MODES = ("strict", "ontology")


def _parse_agg(obj: dict, pointer: str) -> tuple[tuple[str, ...], tuple[AggAtom, ...]]:
    agg: tuple[str, ...] = ()
    having: tuple[AggAtom, ...] = ()
    if "agg" in obj:
        raw = obj["agg"]
        if not isinstance(raw, list) or not all(f in AGG_FUNCTIONS for f in raw):
            raise QueryFormatError(
                f"'agg' must be a list drawn from {AGG_FUNCTIONS}", f"{pointer}/agg"
            )
        agg = tuple(raw)
    if "having" in obj:
        raw = obj["having"]
        if not isinstance(raw, list):
            raise QueryFormatError("'having' must be a list", f"{pointer}/having")
        atoms = []
        for i, atom in enumerate(raw):
            ptr = f"{pointer}/having/{i}"
            if not isinstance(atom, dict):
                raise QueryFormatError("having entry must be an object", ptr)
            fn, op = atom.get("fn"), atom.get("op")
            if fn not in AGG_FUNCTIONS:
                raise QueryFormatError(f"unknown aggregation function {fn!r}", ptr)
            if op not in AGG_OPS:
                raise QueryFormatError(f"unknown comparison operator {op!r}", ptr)
            if "value" not in atom:
                raise QueryFormatError("having entry needs a 'value'", ptr)
            atoms.append(AggAtom(fn, op, atom["value"]))
        having = tuple(atoms)
    return agg, having


def _node_common(obj: Any, pointer: str) -> tuple[str, StringMatcher, bool]:
    if not isinstance(obj, dict):
        raise QueryFormatError("query node must be an object", pointer)
    label = obj.get("label")
    if not isinstance(label, str) or not label:
        raise QueryFormatError("node needs a non-empty string 'label'", pointer)
    if "matcher" in obj and "contains" in obj:
        raise QueryFormatError("'matcher' and 'contains' are mutually exclusive", pointer)
    if "contains" in obj:
        phrase = obj["contains"]
        if not isinstance(phrase, str):
            raise QueryFormatError("'contains' must be a string", pointer)
        matcher: StringMatcher = ContainsPhrase(phrase)
    elif "matcher" in obj:
        matcher = matcher_from_json(obj["matcher"], f"{pointer}/matcher")
    else:
        matcher = TRUE
    output = obj.get("output", False)
    if not isinstance(output, bool):
        raise QueryFormatError("'output' must be a boolean", pointer)
    return label, matcher, output


def _concrete_node(obj: Any, pointer: str) -> ConcreteNode:
    label, matcher, output = _node_common(obj, pointer)
    agg, having = _parse_agg(obj, pointer)
    node = ConcreteNode(label=label, matcher=matcher, output=output, agg=agg, having=having)
    for i, entry in enumerate(obj.get("children", [])):
        ptr = f"{pointer}/children/{i}"
        if not isinstance(entry, dict) or "node" not in entry:
            raise QueryFormatError("child entry must be {'quantifier', 'node'}", ptr)
        quant = entry.get("quantifier", ONE_IS)
        if quant not in _CONCRETE_QUANTIFIERS:
            raise QueryFormatError(f"unknown quantifier {quant!r}", f"{ptr}/quantifier")
        node.children.append((quant, _concrete_node(entry["node"], f"{ptr}/node")))
    return node


def _abstract_node(obj: Any, pointer: str) -> QueryNode:
    label, matcher, output = _node_common(obj, pointer)
    agg, having = _parse_agg(obj, pointer)
    operator = obj.get("operator", AND)
    if operator not in (AND, OR):
        raise QueryFormatError(f"unknown operator {operator!r}", f"{pointer}/operator")
    node = QueryNode(
        label=label, matcher=matcher, operator=operator, output=output,
        agg=agg, having=having,
    )
    for i, entry in enumerate(obj.get("children", [])):
        ptr = f"{pointer}/children/{i}"
        if not isinstance(entry, dict) or "node" not in entry:
            raise QueryFormatError("child entry must be {'quantifier', 'node'}", ptr)
        quant = entry.get("quantifier", EXISTS)
        if quant not in (EXISTS, FOR_ALL):
            raise QueryFormatError(f"unknown quantifier {quant!r}", f"{ptr}/quantifier")
        node.edges.append((quant, _abstract_node(entry["node"], f"{ptr}/node")))
    return node


def _top_level(obj: Any) -> tuple[str, dict, str, str | None]:
    if not isinstance(obj, dict):
        raise QueryFormatError("query must be a JSON object")
    if "label" in obj and "root" not in obj:
        # Bare node shorthand: an implied concrete query.
        return "concrete", obj, "strict", None
    form = obj.get("form", "concrete")
    if form not in ("concrete", "abstract"):
        raise QueryFormatError(f"unknown form {form!r}", "/form")
    mode = obj.get("mode", "strict")
    if mode not in _MODES:
        raise QueryFormatError(f"unknown mode {mode!r}", "/mode")
    ontology = obj.get("ontology")
    if ontology is not None and not isinstance(ontology, str):
        raise QueryFormatError("'ontology' must be a string", "/ontology")
    if mode == "ontology" and not ontology:
        raise QueryFormatError("ontology mode needs an 'ontology' name", "/mode")
    if "root" not in obj:
        raise QueryFormatError("query needs a 'root' node", "/root")
    return form, obj["root"], mode, ontology


def parse_query_json(obj: Any) -> ConcreteQuery | AbstractQuery:
    form, root, mode, ontology = _top_level(obj)
    if form == "concrete":
        return ConcreteQuery(_concrete_node(root, "/root"), mode=mode, ontology=ontology)
    return AbstractQuery(_abstract_node(root, "/root"), mode=mode, ontology=ontology)


def parse_query_file(text: str) -> ConcreteQuery:
    """Parse the JSON query format into a ConcreteQuery."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QueryFormatError(f"invalid JSON: {exc}") from exc
    parsed = parse_query_json(obj)
    if isinstance(parsed, AbstractQuery):
        raise QueryFormatError("expected a concrete query, found form=abstract", "/form")
    return parsed


def load_query(obj_or_text: Any) -> AbstractQuery:
    """Parse either query form and return the abstract query to evaluate."""
    if isinstance(obj_or_text, str):
        try:
            obj_or_text = json.loads(obj_or_text)
        except json.JSONDecodeError as exc:
            raise QueryFormatError(f"invalid JSON: {exc}") from exc
    parsed = parse_query_json(obj_or_text)
    if isinstance(parsed, ConcreteQuery):
        return translate(parsed)
    return parsed


def _agg_json(node: ConcreteNode | QueryNode, obj: dict) -> None:
    if node.agg:
        obj["agg"] = list(node.agg)
    if node.having:
        obj["having"] = [
            {"fn": a.fn, "op": a.op, "value": a.value} for a in node.having
        ]


def concrete_query_to_json(cq: ConcreteQuery) -> dict:
    def conv(node: ConcreteNode) -> dict:
        obj: dict[str, Any] = {"label": node.label}
        if node.matcher != TRUE:
            obj["matcher"] = node.matcher.to_json()
        if node.output:
            obj["output"] = True
        _agg_json(node, obj)
        if node.children:
            obj["children"] = [
                {"quantifier": q, "node": conv(c)} for q, c in node.children
            ]
        return obj

    out: dict[str, Any] = {"form": "concrete", "root": conv(cq.root)}
    if cq.mode != "strict":
        out["mode"] = cq.mode
    if cq.ontology:
        out["ontology"] = cq.ontology
    return out


def abstract_query_to_json(aq: AbstractQuery) -> dict:
    def conv(node: QueryNode) -> dict:
        obj: dict[str, Any] = {"label": node.label, "operator": node.operator}
        if node.matcher != TRUE:
            obj["matcher"] = node.matcher.to_json()
        if node.output:
            obj["output"] = True
        _agg_json(node, obj)
        if node.edges:
            obj["children"] = [
                {"quantifier": q, "node": conv(c)} for q, c in node.edges
            ]
        return obj

    out: dict[str, Any] = {"form": "abstract", "root": conv(aq.root)}
    if aq.mode != "strict":
        out["mode"] = aq.mode
    if aq.ontology:
        out["ontology"] = aq.ontology
    return out
