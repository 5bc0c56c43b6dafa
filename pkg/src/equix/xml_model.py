"""XML documents as rooted labeled trees of complex/atomic/attribute nodes.

Attributes are first-class nodes: an attribute node carries the attribute
name as its label, a declared type (CDATA/ID/IDREF), and exactly one atomic
child holding the value.  Attribute nodes precede element children in
sibling order, which makes the textual content of an element read its
attribute values first.

Node ids are assigned level by level over the element/attribute skeleton,
with text/value atomics numbered afterwards; matchable nodes therefore get
the dense low ids that matching tables reference.  The root is always id 0.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .dtd import ANY, EMPTY, PCDATA, Dtd, parse_dtd

COMPLEX = "complex"
ATOMIC = "atomic"
ATTRIBUTE = "attribute"

# Dividing symbol between concatenated text segments; matchers treat it
# as whitespace.
SEPARATOR = ""

DEFAULT_WRAPPER = "equix-root"


class DocumentError(ValueError):
    """Malformed document or model-invariant violation (e.g. duplicate ID)."""


@dataclass(frozen=True)
class XmlNode:
    id: int
    kind: str  # complex | atomic | attribute
    label: str  # element/attribute name, or text for atomic nodes
    attr_type: str | None = None  # CDATA/ID/IDREF, attribute nodes only
    children: tuple[int, ...] = ()


@dataclass
class XmlDocument:
    nodes: dict[int, XmlNode]
    root: int
    id_index: dict[str, int]  # ID value -> owning element node
    parents: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.parents:
            self.parents = {
                c: n.id for n in self.nodes.values() for c in n.children
            }

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, nid: int) -> XmlNode:
        try:
            return self.nodes[nid]
        except KeyError:
            raise KeyError(f"unknown node {nid}") from None

    def label(self, nid: int) -> str:
        return self.node(nid).label

    def kind(self, nid: int) -> str:
        return self.node(nid).kind

    def children(self, nid: int) -> tuple[int, ...]:
        return self.node(nid).children

    def parent_of(self, nid: int) -> int | None:
        self.node(nid)
        return self.parents.get(nid)

    def non_atomic_ids(self) -> list[int]:
        return [n.id for n in self.nodes.values() if n.kind != ATOMIC]

    def names(self) -> set[str]:
        """Element and attribute names occurring in the document."""
        return {n.label for n in self.nodes.values() if n.kind != ATOMIC}


# ---------------------------------------------------------------------------
# Navigation and textual content


def path_of(doc: XmlDocument, nid: int) -> tuple[str, ...]:
    """Labels on the path from the root to `nid`, inclusive."""
    labels = [doc.label(nid)]
    cur = nid
    while True:
        parent = doc.parent_of(cur)
        if parent is None:
            break
        labels.append(doc.label(parent))
        cur = parent
    return tuple(reversed(labels))


def ancestors(doc: XmlDocument, nid: int) -> set[int]:
    out: set[int] = set()
    cur = doc.parent_of(nid)
    while cur is not None:
        out.add(cur)
        cur = doc.parents.get(cur)
    return out


def descendants(doc: XmlDocument, nid: int) -> set[int]:
    out: set[int] = set()
    stack = list(doc.children(nid))
    while stack:
        c = stack.pop()
        out.add(c)
        stack.extend(doc.children(c))
    return out


def indirect_children(doc: XmlDocument, nid: int) -> frozenset[int]:
    """Elements referenced by an IDREF attribute node; empty otherwise."""
    node = doc.node(nid)
    if node.kind != ATTRIBUTE or node.attr_type != "IDREF":
        return frozenset()
    value = doc.label(node.children[0]) if node.children else ""
    target = doc.id_index.get(value)
    return frozenset() if target is None else frozenset({target})


def textual_content(doc: XmlDocument, nid: int) -> str:
    """Concatenated data below a node, IDREF-aware and cycle-safe.

    Direct children come first, then the referenced element when the node
    is an IDREF attribute.  Every node is visited at most once per call and
    ID-typed attribute nodes contribute nothing.  Segments are joined with
    the U+001F dividing symbol.
    """
    doc.node(nid)
    segments: list[str] = []
    visited: set[int] = set()
    stack = [nid]
    while stack:
        cur = stack.pop()
        if cur in visited:
            continue
        visited.add(cur)
        node = doc.nodes[cur]
        if node.kind == ATOMIC:
            segments.append(node.label)
            continue
        if node.kind == ATTRIBUTE and node.attr_type == "ID":
            continue
        follow: list[int] = list(node.children)
        if node.kind == ATTRIBUTE and node.attr_type == "IDREF":
            follow.extend(sorted(indirect_children(doc, cur)))
        stack.extend(reversed(follow))
    return SEPARATOR.join(segments)


# ---------------------------------------------------------------------------
# Parsing


class _Temp:
    __slots__ = ("kind", "label", "attr_type", "children")

    def __init__(self, kind: str, label: str, attr_type: str | None = None):
        self.kind = kind
        self.label = label
        self.attr_type = attr_type
        self.children: list[_Temp] = []


_XML_DECL_RE = re.compile(r"\s*<\?xml.*?\?>", re.S)
_DOCTYPE_RE = re.compile(r"\s*<!DOCTYPE[^>[]*(?:\[[^\]]*\])?[^>]*>", re.S)


def _strip_prolog(text: str) -> str:
    m = _XML_DECL_RE.match(text)
    if m:
        text = text[m.end():]
    m = _DOCTYPE_RE.match(text)
    if m:
        text = text[m.end():]
    return text


def _from_etree(el: ET.Element, dtd: Dtd | None) -> _Temp:
    t = _Temp(COMPLEX, el.tag)
    for name, value in el.attrib.items():
        atype = dtd.attr_type(el.tag, name) if dtd else None
        attr = _Temp(ATTRIBUTE, name, atype or "CDATA")
        attr.children.append(_Temp(ATOMIC, value))
        t.children.append(attr)
    if el.text and el.text.strip():
        t.children.append(_Temp(ATOMIC, el.text))
    for child in el:
        t.children.append(_from_etree(child, dtd))
        if child.tail and child.tail.strip():
            t.children.append(_Temp(ATOMIC, child.tail))
    return t


def parse_document(
    text: str,
    dtd: Dtd | None = None,
    wrapper_label: str = DEFAULT_WRAPPER,
) -> XmlDocument:
    """Parse XML text into an XmlDocument.

    Attribute types and the ID index come from the bound DTD; without one
    every attribute is CDATA.  A document with multiple top-level elements
    is wrapped in a synthetic root labeled `wrapper_label`.
    """
    src = _strip_prolog(text)
    try:
        root_el = ET.fromstring(src)
    except ET.ParseError as exc:
        if "junk after document element" in str(exc):
            root_el = ET.fromstring(f"<{wrapper_label}>{src}</{wrapper_label}>")
        else:
            raise DocumentError(f"malformed XML: {exc}") from exc

    root_tmp = _from_etree(root_el, dtd)

    # Level-order numbering: element/attribute nodes first, atomics after.
    non_atomic: list[_Temp] = []
    atomic: list[_Temp] = []
    queue = deque([root_tmp])
    while queue:
        t = queue.popleft()
        (atomic if t.kind == ATOMIC else non_atomic).append(t)
        queue.extend(t.children)

    ids: dict[int, int] = {}
    for i, t in enumerate(non_atomic + atomic):
        ids[id(t)] = i

    nodes: dict[int, XmlNode] = {}
    for t in non_atomic + atomic:
        nodes[ids[id(t)]] = XmlNode(
            id=ids[id(t)],
            kind=t.kind,
            label=t.label,
            attr_type=t.attr_type,
            children=tuple(ids[id(c)] for c in t.children),
        )

    doc = XmlDocument(nodes=nodes, root=0, id_index={})
    for node in nodes.values():
        if node.kind == ATTRIBUTE and node.attr_type == "ID":
            value = nodes[node.children[0]].label
            if value in doc.id_index:
                raise DocumentError(f"duplicate ID value {value!r}")
            doc.id_index[value] = doc.parents[node.id]
    return doc


# ---------------------------------------------------------------------------
# Serialization


def _escape_text(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(s: str) -> str:
    return _escape_text(s).replace('"', "&quot;")


def _split_children(doc: XmlDocument, nid: int) -> tuple[list[int], list[int]]:
    attrs, content = [], []
    for c in doc.children(nid):
        (attrs if doc.kind(c) == ATTRIBUTE else content).append(c)
    return attrs, content


def _open_tag(doc: XmlDocument, nid: int, attrs: list[int]) -> str:
    parts = [doc.label(nid)]
    for a in attrs:
        value = doc.label(doc.children(a)[0]) if doc.children(a) else ""
        parts.append(f'{doc.label(a)}="{_escape_attr(value)}"')
    return " ".join(parts)


def _inline(doc: XmlDocument, nid: int) -> str:
    if doc.kind(nid) == ATOMIC:
        return _escape_text(doc.label(nid))
    attrs, content = _split_children(doc, nid)
    tag = _open_tag(doc, nid, attrs)
    if not content:
        return f"<{tag}/>"
    inner = "".join(_inline(doc, c) for c in content)
    return f"<{tag}>{inner}</{doc.label(nid)}>"


def _write(doc: XmlDocument, nid: int, depth: int, out: list[str]) -> None:
    pad = "  " * depth
    attrs, content = _split_children(doc, nid)
    tag = _open_tag(doc, nid, attrs)
    if not content:
        out.append(f"{pad}<{tag}/>")
    elif any(doc.kind(c) == ATOMIC for c in content):
        inner = "".join(_inline(doc, c) for c in content)
        out.append(f"{pad}<{tag}>{inner}</{doc.label(nid)}>")
    else:
        out.append(f"{pad}<{tag}>")
        for c in content:
            _write(doc, c, depth + 1, out)
        out.append(f"{pad}</{doc.label(nid)}>")


def serialize_document(doc: XmlDocument) -> str:
    """Deterministic pretty serialization; whitespace-only text never appears."""
    out: list[str] = []
    _write(doc, doc.root, 0, out)
    return "\n".join(out) + "\n"


def same_tree(a: XmlDocument, b: XmlDocument) -> bool:
    """Structural equality: labels, kinds and child order, ignoring ids."""

    def eq(na: int, nb: int) -> bool:
        xa, xb = a.node(na), b.node(nb)
        if (xa.kind, xa.label, xa.attr_type) != (xb.kind, xb.label, xb.attr_type):
            return False
        if len(xa.children) != len(xb.children):
            return False
        return all(eq(ca, cb) for ca, cb in zip(xa.children, xb.children))

    return eq(a.root, b.root)


# ---------------------------------------------------------------------------
# Conformance


def conformance_diagnostics(doc: XmlDocument, dtd: Dtd) -> list[str]:
    """Per-node content-model and attribute-list violations (root name aside)."""
    diags: list[str] = []
    for node in doc.nodes.values():
        if node.kind != COMPLEX:
            continue
        model = dtd.elements.get(node.label)
        if model is None:
            diags.append(f"node {node.id}: element '{node.label}' is not declared")
            continue

        attrs, content = _split_children(doc, node.id)
        declared = {a.name: a for a in dtd.attribute_defs(node.label)}
        present = set()
        for a in attrs:
            name = doc.label(a)
            present.add(name)
            if name not in declared:
                diags.append(
                    f"node {node.id}: attribute '{name}' not declared for '{node.label}'"
                )
        for a in declared.values():
            if a.default == "#REQUIRED" and a.name not in present:
                diags.append(
                    f"node {node.id}: required attribute '{a.name}' missing on '{node.label}'"
                )

        if model == ANY:
            continue
        if model == EMPTY:
            if content:
                diags.append(f"node {node.id}: '{node.label}' must be EMPTY")
            continue
        if model == PCDATA:
            if any(doc.kind(c) != ATOMIC for c in content):
                diags.append(
                    f"node {node.id}: '{node.label}' allows character data only"
                )
            continue
        if any(doc.kind(c) == ATOMIC for c in content):
            diags.append(f"node {node.id}: text not allowed inside '{node.label}'")
            continue
        encoded = "".join(doc.label(c) + "\x00" for c in content)
        if not dtd.content_regex(node.label).match(encoded):
            got = ",".join(doc.label(c) for c in content) or "(empty)"
            diags.append(
                f"node {node.id}: children ({got}) do not match the content "
                f"model of '{node.label}'"
            )
    return diags


def strictly_conforms(doc: XmlDocument, dtd: Dtd) -> bool:
    """Ordinary conformance plus the root bearing the DTD's root element name."""
    if doc.label(doc.root) != dtd.root_element:
        return False
    return not conformance_diagnostics(doc, dtd)


# ---------------------------------------------------------------------------
# Catalogs


class CatalogError(ValueError):
    pass


@dataclass
class Catalog:
    """A DTD paired with documents that strictly conform to it."""

    name: str
    dtd: Dtd
    documents: list[XmlDocument]
    document_names: list[str] = field(default_factory=list)


def load_catalog(manifest_path: str | Path, strict: bool = True) -> Catalog:
    """Load a catalog manifest: {"name", "dtd", "root", "documents": [...]}.

    Paths are relative to the manifest file.  With strict=True a document
    that fails strict conformance raises CatalogError.
    """
    path = Path(manifest_path)
    try:
        manifest = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CatalogError(f"cannot read manifest {path}: {exc}") from exc
    for key in ("name", "dtd", "root", "documents"):
        if key not in manifest:
            raise CatalogError(f"manifest {path} lacks required key '{key}'")

    base = path.parent
    dtd = parse_dtd((base / manifest["dtd"]).read_text(), manifest["root"])
    documents: list[XmlDocument] = []
    names: list[str] = []
    for rel in manifest["documents"]:
        doc_path = base / rel
        doc = parse_document(doc_path.read_text(), dtd)
        if strict and not strictly_conforms(doc, dtd):
            problems = conformance_diagnostics(doc, dtd)
            if doc.label(doc.root) != dtd.root_element:
                problems.insert(
                    0,
                    f"root '{doc.label(doc.root)}' is not the DTD root "
                    f"'{dtd.root_element}'",
                )
            raise CatalogError(
                f"document {doc_path} does not strictly conform: "
                + "; ".join(problems[:5])
            )
        documents.append(doc)
        names.append(Path(rel).name)
    return Catalog(
        name=manifest["name"], dtd=dtd, documents=documents, document_names=names
    )
