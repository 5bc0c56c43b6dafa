"""Random instance generators and independent oracles shared by the suites.

Instances are kept small enough for exhaustive matching enumeration: the
generator resamples until the total number of path-equal candidate pairs is
modest, so the brute-force oracle stays fast across thousand-instance
batteries.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from equix.dtd import (
    EMPTY,
    PCDATA,
    AttDef,
    Choice,
    Dtd,
    Name,
    Opt,
    Plus,
    Seq,
    Star,
)
from equix.query_model import (
    ALL_ARE,
    AND,
    EXISTS,
    FOR_ALL,
    NONE_IS,
    NOT_ALL_ARE,
    ONE_IS,
    OR,
    AbstractQuery,
    And,
    ConcreteNode,
    ConcreteQuery,
    ContainsPhrase,
    ContainsWord,
    Not,
    Or,
    QueryNode,
    Regex,
    TRUE,
    eval_matcher,
)
from equix.xml_model import (
    ATOMIC,
    XmlDocument,
    parse_document,
    path_of,
    textual_content,
)

VOCAB = ["wild", "west", "villain", "hero", "gold", "moon", "dust", "rain"]


# ---------------------------------------------------------------------------
# Random DTDs and conforming documents


def random_dtd(rng: random.Random) -> Dtd:
    """A small layered DTD: distinct names per level keep candidate sets tame."""
    depth = rng.randint(2, 3)
    level_names = [["r"]]
    letters = "abcdefgh"
    k = 0
    for _ in range(depth):
        width = rng.randint(1, 2)
        level_names.append([letters[k + i] for i in range(width)])
        k += width

    elements = {}
    attlists = {}
    counter = 0
    for lvl, names in enumerate(level_names):
        child_names = level_names[lvl + 1] if lvl + 1 < len(level_names) else []
        for name in names:
            if not child_names:
                elements[name] = rng.choice([PCDATA, EMPTY])
            else:
                parts = []
                for c in child_names:
                    wrap = rng.choice([None, Opt, Star, Plus])
                    parts.append(Name(c) if wrap is None else wrap(Name(c)))
                if len(parts) > 1 and rng.random() < 0.25:
                    elements[name] = Opt(Choice(tuple(parts)))
                elif len(parts) == 1:
                    elements[name] = parts[0] if rng.random() < 0.5 else Star(parts[0])
                else:
                    elements[name] = Seq(tuple(parts))
            if rng.random() < 0.3:
                counter += 1
                atype = rng.choice(["CDATA", "CDATA", "ID", "IDREF"])
                attlists[name] = [
                    AttDef(f"k{counter}", atype, rng.choice(["#REQUIRED", "#IMPLIED"]))
                ]
    return Dtd(root_element="r", elements=elements, attlists=attlists)


@dataclass
class _DocBuilder:
    rng: random.Random
    dtd: Dtd
    max_nodes: int
    count: int = 0
    id_values: list[str] = field(default_factory=list)
    pieces: list[str] = field(default_factory=list)

    def text(self) -> str:
        return " ".join(
            self.rng.choice(VOCAB) for _ in range(self.rng.randint(1, 2))
        )

    def emit(self, name: str, depth: int) -> bool:
        """Append one element; False when the node budget ran out."""
        self.count += 1
        if self.count > self.max_nodes:
            return False
        attrs = ""
        for a in self.dtd.attribute_defs(name):
            if a.default == "#REQUIRED" or self.rng.random() < 0.5:
                if a.type == "ID":
                    value = f"i{len(self.id_values)}"
                    self.id_values.append(value)
                elif a.type == "IDREF":
                    value = (
                        self.rng.choice(self.id_values)
                        if self.id_values and self.rng.random() < 0.7
                        else "dangling"
                    )
                else:
                    value = self.text()
                attrs += f' {a.name}="{value}"'
                self.count += 2  # attribute node + its value
        model = self.dtd.elements[name]
        if model == EMPTY:
            self.pieces.append(f"<{name}{attrs}/>")
            return True
        if model == PCDATA:
            self.count += 1
            self.pieces.append(f"<{name}{attrs}>{self.text()}</{name}>")
            return True
        self.pieces.append(f"<{name}{attrs}>")
        ok = self.sample(model, depth + 1)
        self.pieces.append(f"</{name}>")
        return ok

    def sample(self, model, depth: int) -> bool:
        if isinstance(model, Name):
            return self.emit(model.name, depth)
        if isinstance(model, Seq):
            return all(self.sample(p, depth) for p in model.parts)
        if isinstance(model, Choice):
            return self.sample(self.rng.choice(model.parts), depth)
        if isinstance(model, Opt):
            if self.rng.random() < 0.6:
                return self.sample(model.item, depth)
            return True
        if isinstance(model, Star):
            for _ in range(self.rng.randint(0, 2)):
                if not self.sample(model.item, depth):
                    return False
            return True
        if isinstance(model, Plus):
            for _ in range(self.rng.randint(1, 2)):
                if not self.sample(model.item, depth):
                    return False
            return True
        return True  # EMPTY / PCDATA handled by emit


def random_document(rng: random.Random, dtd: Dtd, max_nodes: int = 12) -> XmlDocument | None:
    """One document strictly conforming to the DTD, or None when too big."""
    for _ in range(12):
        builder = _DocBuilder(rng=rng, dtd=dtd, max_nodes=max_nodes)
        ok = builder.emit(dtd.root_element, 0)
        if ok and builder.count <= max_nodes:
            try:
                return parse_document("".join(builder.pieces), dtd)
            except ValueError:
                continue
    return None


# ---------------------------------------------------------------------------
# Random matchers and queries


def random_matcher(rng: random.Random, depth: int = 0):
    roll = rng.random()
    if roll < 0.35 or depth >= 2:
        choice = rng.random()
        if choice < 0.4:
            return TRUE
        if choice < 0.7:
            return ContainsWord(rng.choice(VOCAB))
        if choice < 0.85:
            return ContainsPhrase(" ".join(rng.sample(VOCAB, 2)))
        return Regex(rng.choice(["wi.d", "g.ld", "moon|rain", "^dust"]))
    if roll < 0.55:
        return Not(random_matcher(rng, depth + 1))
    parts = tuple(random_matcher(rng, depth + 1) for _ in range(2))
    return And(parts) if roll < 0.8 else Or(parts)


def _query_skeleton(rng: random.Random, dtd: Dtd, max_nodes: int):
    """Label tree realizable under the DTD: list of (label, parent_index)."""
    labels = [(dtd.root_element, None)]

    def grow(index: int, label: str, depth: int) -> None:
        if len(labels) >= max_nodes or depth >= 4:
            return
        options = list(dtd.element_children(label)) if label in dtd.elements else []
        options += [a.name for a in dtd.attribute_defs(label)]
        if not options:
            return
        for _ in range(rng.randint(0, 2)):
            if len(labels) >= max_nodes:
                return
            child = rng.choice(options)
            labels.append((child, index))
            grow(len(labels) - 1, child, depth + 1)

    grow(0, dtd.root_element, 0)
    return labels


def random_concrete_query(
    rng: random.Random,
    dtd: Dtd,
    max_nodes: int = 6,
    quantifiers=(ONE_IS, NONE_IS, ALL_ARE, NOT_ALL_ARE),
) -> ConcreteQuery:
    labels = _query_skeleton(rng, dtd, max_nodes)
    nodes = [
        ConcreteNode(label=label, matcher=random_matcher(rng)) for label, _ in labels
    ]
    for i, (_, parent) in enumerate(labels):
        if parent is not None:
            nodes[parent].children.append((rng.choice(quantifiers), nodes[i]))
    marked = rng.sample(nodes, rng.randint(1, len(nodes)))
    for n in marked:
        n.output = True
    return ConcreteQuery(nodes[0])


def random_abstract_query(rng: random.Random, dtd: Dtd, max_nodes: int = 6) -> AbstractQuery:
    labels = _query_skeleton(rng, dtd, max_nodes)
    nodes = [
        QueryNode(
            label=label,
            matcher=random_matcher(rng),
            operator=rng.choice([AND, AND, OR]),
        )
        for label, _ in labels
    ]
    for i, (_, parent) in enumerate(labels):
        if parent is not None:
            nodes[parent].edges.append((rng.choice([EXISTS, FOR_ALL]), nodes[i]))
    for n in rng.sample(nodes, rng.randint(1, len(nodes))):
        n.output = True
    return AbstractQuery(nodes[0])


def candidate_pairs(doc: XmlDocument, q: AbstractQuery) -> int:
    """Total path-equal candidate pairs; bounds the oracle's search space."""
    qpaths = q.path_map()
    doc_paths: dict[tuple[str, ...], int] = {}
    for nid in doc.non_atomic_ids():
        p = path_of(doc, nid)
        doc_paths[p] = doc_paths.get(p, 0) + 1
    return sum(doc_paths.get(p, 0) for p in qpaths.values())


def random_instance(
    rng: random.Random,
    max_doc_nodes: int = 12,
    max_query_nodes: int = 6,
    max_pairs: int = 13,
):
    """(dtd, document, abstract query) kept small enough for enumeration."""
    while True:
        dtd = random_dtd(rng)
        doc = random_document(rng, dtd, max_doc_nodes)
        if doc is None:
            continue
        q = random_abstract_query(rng, dtd, max_query_nodes)
        if candidate_pairs(doc, q) <= max_pairs:
            return dtd, doc, q


def random_concrete_instance(
    rng: random.Random,
    max_doc_nodes: int = 12,
    max_query_nodes: int = 6,
    max_pairs: int = 13,
):
    from equix.query_model import translate

    while True:
        dtd = random_dtd(rng)
        doc = random_document(rng, dtd, max_doc_nodes)
        if doc is None:
            continue
        cq = random_concrete_query(rng, dtd, max_query_nodes)
        if not any(
            quant in (NONE_IS, NOT_ALL_ARE)
            for node in _concrete_nodes(cq.root)
            for quant, _ in node.children
        ):
            continue  # the negation battery wants negated quantifiers
        if candidate_pairs(doc, translate(cq)) <= max_pairs:
            return dtd, doc, cq


def _concrete_nodes(root: ConcreteNode) -> list[ConcreteNode]:
    out = [root]
    stack = [root]
    while stack:
        n = stack.pop()
        for _, c in n.children:
            out.append(c)
            stack.append(c)
    return out


# ---------------------------------------------------------------------------
# Direct concrete-semantics oracle (independent of translation)


def concrete_sat(doc: XmlDocument, cnode: ConcreteNode, nx: int, memo=None) -> bool:
    """Recursive concrete satisfaction: every node is a conjunction of its
    content condition and its quantified edge conditions."""
    if memo is None:
        memo = {}
    key = (id(cnode), nx)
    if key in memo:
        return memo[key]
    result = eval_matcher(cnode.matcher, textual_content(doc, nx))
    if result:
        for quant, child in cnode.children:
            group = [
                c
                for c in doc.children(nx)
                if doc.kind(c) != ATOMIC and doc.label(c) == child.label
            ]
            sats = [concrete_sat(doc, child, c, memo) for c in group]
            if quant == ONE_IS:
                ok = any(sats)
            elif quant == NONE_IS:
                ok = not any(sats)
            elif quant == ALL_ARE:
                ok = all(sats)
            else:  # NOT_ALL_ARE: some matching child fails
                ok = not all(sats)
            if not ok:
                result = False
                break
    memo[key] = result
    return result


def concrete_output_nodes(doc: XmlDocument, cq: ConcreteQuery) -> set[int]:
    """Output nodes under concrete semantics.

    A document node is output when, along the (path-equal) chain from the
    root, every pair agrees with the recursive evaluator modulo negation
    parity: below an odd number of negated quantifiers a node is retrieved
    exactly when it fails its positive condition (those are the witnesses
    that make the enclosing none-is / not-all-are hold).
    """
    memo: dict = {}
    root = cq.root
    if doc.label(doc.root) != root.label or not concrete_sat(doc, root, doc.root, memo):
        return set()

    def collect(cnode: ConcreteNode, chain, acc):
        chain = chain + [cnode]
        if cnode.output:
            acc.append(chain)
        for _, child in cnode.children:
            collect(child, chain, acc)

    acc: list[list[ConcreteNode]] = []
    collect(root, [], acc)

    parity: dict[int, bool] = {id(root): False}

    def mark(cnode: ConcreteNode) -> None:
        for quant, child in cnode.children:
            negates = quant in (NONE_IS, NOT_ALL_ARE)
            parity[id(child)] = parity[id(cnode)] != negates
            mark(child)

    mark(root)

    outs: set[int] = set()
    for chain in acc:
        for nx in doc.non_atomic_ids():
            if path_of(doc, nx) != tuple(c.label for c in chain):
                continue
            x_chain = [nx]
            cur = nx
            while doc.parent_of(cur) is not None:
                cur = doc.parent_of(cur)
                x_chain.append(cur)
            x_chain.reverse()
            if all(
                concrete_sat(doc, qn, xn, memo) != parity[id(qn)]
                for qn, xn in zip(chain, x_chain)
            ):
                outs.add(nx)
    return outs


# ---------------------------------------------------------------------------
# Reg-mode instances


def random_reg_instance(
    rng: random.Random,
    max_doc_nodes: int = 12,
    max_query_nodes: int = 6,
    max_pairs: int = 13,
):
    """(document, query) whose labels come from the document's own names."""
    while True:
        dtd = random_dtd(rng)
        doc = random_document(rng, dtd, max_doc_nodes)
        if doc is None:
            continue
        names = sorted(doc.names())
        root_label = doc.label(doc.root)
        size = rng.randint(1, max_query_nodes)
        nodes = [
            QueryNode(
                label=root_label if i == 0 else rng.choice(names),
                matcher=random_matcher(rng),
                operator=rng.choice([AND, AND, OR]),
            )
            for i in range(size)
        ]
        for i in range(1, size):
            parent = nodes[rng.randint(0, i - 1)]
            parent.edges.append((rng.choice([EXISTS, FOR_ALL]), nodes[i]))
        for n in rng.sample(nodes, rng.randint(1, len(nodes))):
            n.output = True
        q = AbstractQuery(nodes[0])
        label_counts: dict[str, int] = {}
        for nid in doc.non_atomic_ids():
            label_counts[doc.label(nid)] = label_counts.get(doc.label(nid), 0) + 1
        pairs = sum(label_counts.get(n.label, 0) for n in nodes)
        if pairs <= max_pairs:
            return doc, q
