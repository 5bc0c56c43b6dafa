"""DTD subset: content-model expressions, declaration parsing and rendering.

The supported grammar is the XML 1.0 declaration subset used by catalogs:
ELEMENT declarations with sequences, choices and the ?/*/+ modifiers plus
the EMPTY, ANY and (#PCDATA) content specs, and ATTLIST declarations with
CDATA/ID/IDREF types and #REQUIRED/#IMPLIED defaults.  Mixed content,
entities and notations are out of scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class DtdError(ValueError):
    """Malformed or inconsistent DTD text."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# Content-model expressions


class ContentModel:
    """Base class of content-definition expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Name(ContentModel):
    name: str


@dataclass(frozen=True)
class Seq(ContentModel):
    parts: tuple[ContentModel, ...]


@dataclass(frozen=True)
class Choice(ContentModel):
    parts: tuple[ContentModel, ...]


@dataclass(frozen=True)
class Opt(ContentModel):
    item: ContentModel


@dataclass(frozen=True)
class Star(ContentModel):
    item: ContentModel


@dataclass(frozen=True)
class Plus(ContentModel):
    item: ContentModel


@dataclass(frozen=True)
class _Leaf(ContentModel):
    token: str


PCDATA = _Leaf("#PCDATA")
EMPTY = _Leaf("EMPTY")  # no content (the empty word)
ANY = _Leaf("ANY")
# The empty expression: matches nothing.  It never appears in parsed DTDs
# and only exists transiently while result DTDs are being synthesized.
NOTHING = _Leaf("∅")


def element_names(model: ContentModel) -> list[str]:
    """Element names referenced by a content model, in first-appearance order."""
    seen: dict[str, None] = {}

    def walk(m: ContentModel) -> None:
        if isinstance(m, Name):
            seen.setdefault(m.name)
        elif isinstance(m, (Seq, Choice)):
            for p in m.parts:
                walk(p)
        elif isinstance(m, (Opt, Star, Plus)):
            walk(m.item)

    walk(model)
    return list(seen)


def _cp(model: ContentModel) -> str:
    """Render a content particle (inner position)."""
    if isinstance(model, Name):
        return model.name
    if isinstance(model, Seq):
        return "(" + ",".join(_cp(p) for p in model.parts) + ")"
    if isinstance(model, Choice):
        return "(" + "|".join(_cp(p) for p in model.parts) + ")"
    if isinstance(model, (Opt, Star, Plus)):
        suffix = {"Opt": "?", "Star": "*", "Plus": "+"}[type(model).__name__]
        inner = _cp(model.item)
        # A suffixed particle must itself be a name or parenthesized group.
        if not (isinstance(model.item, (Name, Seq, Choice))):
            inner = "(" + inner + ")"
        return inner + suffix
    if isinstance(model, _Leaf):
        return model.token
    raise TypeError(f"not a content model: {model!r}")


def render_content(model: ContentModel) -> str:
    """Render a content spec as it appears in an ELEMENT declaration."""
    if model == EMPTY:
        return "EMPTY"
    if model == ANY:
        return "ANY"
    if model == PCDATA:
        return "(#PCDATA)"
    text = _cp(model)
    if not text.startswith("("):
        text = "(" + text + ")"
    return text


# ---------------------------------------------------------------------------
# DTD


ATTR_TYPES = ("CDATA", "ID", "IDREF")
ATTR_DEFAULTS = ("#REQUIRED", "#IMPLIED")


@dataclass(frozen=True)
class AttDef:
    name: str
    type: str  # CDATA | ID | IDREF
    default: str  # "#REQUIRED" | "#IMPLIED"


@dataclass
class Dtd:
    """Element content models, attribute lists and the designated root name."""

    root_element: str
    elements: dict[str, ContentModel]
    attlists: dict[str, list[AttDef]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._desc: dict[str, frozenset[str]] | None = None
        self._anc: dict[str, frozenset[str]] | None = None
        self._regex: dict[str, re.Pattern[str]] = {}

    def attribute_defs(self, element: str) -> list[AttDef]:
        return self.attlists.get(element, [])

    def attr_type(self, element: str, attr: str) -> str | None:
        for a in self.attribute_defs(element):
            if a.name == attr:
                return a.type
        return None

    def element_children(self, element: str) -> list[str]:
        """Element names that may occur directly inside `element`."""
        model = self.elements.get(element)
        if model is None:
            return []
        if model == ANY:
            return list(self.elements)
        return element_names(model)

    def _closure(self) -> None:
        direct = {e: set(self.element_children(e)) for e in self.elements}
        desc: dict[str, set[str]] = {}
        for e in self.elements:
            seen: set[str] = set()
            stack = list(direct[e])
            while stack:
                c = stack.pop()
                if c in seen:
                    continue
                seen.add(c)
                stack.extend(direct.get(c, ()))
            desc[e] = seen
        anc: dict[str, set[str]] = {e: set() for e in self.elements}
        for e, ds in desc.items():
            for d in ds:
                if d in anc:
                    anc[d].add(e)
        self._desc = {e: frozenset(s) for e, s in desc.items()}
        self._anc = {e: frozenset(s) for e, s in anc.items()}

    def dtd_descendants(self, element: str) -> frozenset[str]:
        """Element names that may be nested (at any depth) within `element`."""
        if self._desc is None:
            self._closure()
        return self._desc.get(element, frozenset())

    def dtd_ancestors(self, element: str) -> frozenset[str]:
        if self._anc is None:
            self._closure()
        return self._anc.get(element, frozenset())

    def content_regex(self, element: str) -> re.Pattern[str]:
        pat = self._regex.get(element)
        if pat is None:
            pat = re.compile(_model_regex(self.elements[element]) + r"\Z")
            self._regex[element] = pat
        return pat

    def render(self) -> str:
        """Serialize back to declaration text (deterministic order)."""
        lines = []
        for name, model in self.elements.items():
            lines.append(f"<!ELEMENT {name} {render_content(model)}>")
            atts = self.attlists.get(name)
            if atts:
                parts = " ".join(f"{a.name} {a.type} {a.default}" for a in atts)
                lines.append(f"<!ATTLIST {name} {parts}>")
        return "\n".join(lines) + "\n"

    def with_wrapper(self, label: str) -> "Dtd":
        """Adjusted DTD whose root is a synthetic wrapper element.

        Matches the parser's handling of non-rooted documents: the former
        top-level elements become children of the wrapper.
        """
        if label in self.elements:
            raise DtdError(f"wrapper '{label}' collides with a declared element")
        elements = {label: Plus(Name(self.root_element)), **self.elements}
        return Dtd(root_element=label, elements=elements, attlists=dict(self.attlists))


def _model_regex(model: ContentModel) -> str:
    """Regex over child-label sequences encoded as 'label\\x00label\\x00...'."""
    if isinstance(model, Name):
        return re.escape(model.name) + "\x00"
    if isinstance(model, Seq):
        return "".join(_model_regex(p) for p in model.parts)
    if isinstance(model, Choice):
        return "(?:" + "|".join(_model_regex(p) for p in model.parts) + ")"
    if isinstance(model, Opt):
        return "(?:" + _model_regex(model.item) + ")?"
    if isinstance(model, Star):
        return "(?:" + _model_regex(model.item) + ")*"
    if isinstance(model, Plus):
        return "(?:" + _model_regex(model.item) + ")+"
    if model == EMPTY:
        return ""
    if model == NOTHING:
        return "(?!)"
    raise DtdError(f"content model {model!r} has no sequence form")


# ---------------------------------------------------------------------------
# Parsing


_COMMENT_RE = re.compile(r"<!--.*?-->", re.S)
_NAME_RE = re.compile(r"[A-Za-z_:][-A-Za-z0-9._:]*\Z")
_CONTENT_TOKEN_RE = re.compile(r"\(|\)|,|\||\?|\*|\+|#PCDATA|[^\s()|,?*+>]+")


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, column


class _ContentParser:
    def __init__(self, tokens: list[str], err: "_Err"):
        self.tokens = tokens
        self.pos = 0
        self.err = err

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            self.err("unexpected end of content model")
        self.pos += 1
        return tok

    def parse(self) -> ContentModel:
        tok = self.peek()
        if tok == "EMPTY":
            self.take()
            model: ContentModel = EMPTY
        elif tok == "ANY":
            self.take()
            model = ANY
        elif tok == "(":
            model = self.group()
        else:
            self.err(f"expected content spec, found {tok!r}")
        if self.peek() is not None:
            self.err(f"trailing token {self.peek()!r} in content model")
        return model

    def group(self) -> ContentModel:
        self.take()  # "("
        if self.peek() == "#PCDATA":
            self.take()
            if self.take() != ")":
                self.err("mixed content is not supported")
            return PCDATA
        items = [self.item()]
        sep = None
        while self.peek() in (",", "|"):
            tok = self.take()
            if sep is None:
                sep = tok
            elif tok != sep:
                self.err("cannot mix ',' and '|' at one level")
            items.append(self.item())
        if self.take() != ")":
            self.err("expected ')'")
        if len(items) == 1:
            inner: ContentModel = items[0]
        elif sep == ",":
            inner = Seq(tuple(items))
        else:
            inner = Choice(tuple(items))
        return self.suffixed(inner)

    def item(self) -> ContentModel:
        tok = self.peek()
        if tok == "(":
            return self.group()
        tok = self.take()
        if tok is None or not _NAME_RE.match(tok):
            self.err(f"expected element name, found {tok!r}")
        return self.suffixed(Name(tok))

    def suffixed(self, model: ContentModel) -> ContentModel:
        tok = self.peek()
        if tok == "?":
            self.take()
            return Opt(model)
        if tok == "*":
            self.take()
            return Star(model)
        if tok == "+":
            self.take()
            return Plus(model)
        return model


def parse_dtd(text: str, root_element: str | None = None) -> Dtd:
    """Parse ELEMENT/ATTLIST declarations into a Dtd.

    The root element name is an engine-level annotation carried by the
    catalog manifest; when omitted it defaults to the first declared
    element so standalone DTDs remain usable.
    """
    clean = _COMMENT_RE.sub(lambda m: " " * len(m.group(0)), text)
    elements: dict[str, ContentModel] = {}
    attlists: dict[str, list[AttDef]] = {}
    order: list[str] = []

    pos = 0
    n = len(clean)
    while True:
        while pos < n and clean[pos].isspace():
            pos += 1
        if pos >= n:
            break
        line, col = _position(text, pos)

        def err(message: str, _l=line, _c=col):
            raise DtdError(message, _l, _c)

        if not clean.startswith("<!", pos):
            err(f"expected declaration, found {clean[pos:pos + 12]!r}")
        end = clean.find(">", pos)
        if end == -1:
            err("unterminated declaration")
        body = clean[pos + 2:end]
        pos = end + 1

        words = body.split(None, 1)
        if len(words) != 2:
            err("empty declaration")
        keyword, rest = words[0], words[1]
        if keyword == "ELEMENT":
            parts = rest.split(None, 1)
            if len(parts) != 2:
                err("ELEMENT declaration needs a name and a content spec")
            name, spec = parts
            if not _NAME_RE.match(name):
                err(f"invalid element name {name!r}")
            if name in elements:
                err(f"duplicate definition of element '{name}'")
            tokens = _CONTENT_TOKEN_RE.findall(spec)
            elements[name] = _ContentParser(tokens, err).parse()
            order.append(name)
        elif keyword == "ATTLIST":
            tokens = rest.split()
            if not tokens:
                err("ATTLIST declaration needs an element name")
            name = tokens[0]
            if (len(tokens) - 1) % 3 != 0:
                err("ATTLIST entries must be (name type default) triples")
            defs = attlists.setdefault(name, [])
            for i in range(1, len(tokens), 3):
                aname, atype, adefault = tokens[i:i + 3]
                if atype not in ATTR_TYPES:
                    err(f"unsupported attribute type {atype!r}")
                if adefault not in ATTR_DEFAULTS:
                    err(f"unsupported attribute default {adefault!r}")
                if all(a.name != aname for a in defs):  # first binding wins
                    defs.append(AttDef(aname, atype, adefault))
        else:
            err(f"unknown declaration <!{keyword} ...>")

    if not elements:
        raise DtdError("no element declarations found")
    for name, model in elements.items():
        for ref in element_names(model):
            if ref not in elements:
                raise DtdError(f"element '{name}' references undefined element '{ref}'")
    for name in attlists:
        if name not in elements:
            raise DtdError(f"ATTLIST for undefined element '{name}'")

    root = root_element if root_element is not None else order[0]
    if root not in elements:
        raise DtdError(f"root element '{root}' is not defined")
    return Dtd(root_element=root, elements=elements, attlists=attlists)
