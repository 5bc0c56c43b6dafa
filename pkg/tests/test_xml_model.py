"""Document model: parsing, numbering, conformance, textual content."""

import pytest

from equix import (
    DocumentError,
    DtdError,
    SEPARATOR,
    conformance_diagnostics,
    indirect_children,
    parse_document,
    parse_dtd,
    path_of,
    serialize_document,
    strictly_conforms,
    textual_content,
)
from equix.dtd import EMPTY, PCDATA, Name, Plus, Seq
from equix.xml_model import ATOMIC, ATTRIBUTE, COMPLEX, same_tree

from conftest import FIXTURES

MOVIES_DTD = (FIXTURES / "movies" / "movies.dtd").read_text()


class TestParseDtd:
    def test_movies_dtd(self):
        dtd = parse_dtd(MOVIES_DTD, "movieInfo")
        assert len(dtd.elements) == 7
        assert dtd.root_element == "movieInfo"
        actor = {a.name: a for a in dtd.attribute_defs("actor")}
        assert actor["id"].type == "ID" and actor["id"].default == "#REQUIRED"
        character = {a.name: a for a in dtd.attribute_defs("character")}
        assert character["role"].type == "CDATA"
        assert character["star"].type == "IDREF"

    def test_minimal_declaration(self):
        dtd = parse_dtd("<!ELEMENT a EMPTY>")
        assert dtd.elements == {"a": EMPTY}
        assert dtd.root_element == "a"

    def test_undefined_reference(self):
        with pytest.raises(DtdError, match="undefined element 'b'"):
            parse_dtd("<!ELEMENT a (b)>")

    def test_duplicate_element(self):
        with pytest.raises(DtdError, match="duplicate"):
            parse_dtd("<!ELEMENT a EMPTY>\n<!ELEMENT a EMPTY>")

    def test_syntax_error_reports_position(self):
        with pytest.raises(DtdError, match=r"line 2"):
            parse_dtd("<!ELEMENT a EMPTY>\n<!ELEMENT b (>")

    def test_structure(self):
        dtd = parse_dtd(MOVIES_DTD, "movieInfo")
        assert dtd.elements["movieInfo"] == Seq((Plus(Name("movie")), Plus(Name("actor"))))
        assert dtd.elements["descr"] == PCDATA
        assert dtd.elements["character"] == EMPTY

    def test_render_reparses(self):
        dtd = parse_dtd(MOVIES_DTD, "movieInfo")
        again = parse_dtd(dtd.render(), "movieInfo")
        assert again.elements == dtd.elements
        assert again.attlists == dtd.attlists


class TestParseDocument:
    def test_fixture_numbering(self, movies_doc):
        doc = movies_doc
        assert doc.root == 0
        assert len(doc.non_atomic_ids()) == 31
        assert len(doc.nodes) == 51
        assert doc.label(0) == "movieInfo"
        assert [doc.label(i) for i in (1, 2, 3)] == ["movie"] * 3
        assert [doc.label(i) for i in (4, 5)] == ["actor"] * 2
        # movie 2 and movie 3 per the matching table
        assert doc.children(2) == (10, 11, 12, 13)
        assert doc.children(3) == (14, 15, 16)
        assert doc.label(10) == "descr" and doc.label(11) == "title"
        assert {doc.label(i) for i in (25, 27, 29)} == {"role"}
        assert {doc.label(i) for i in (26, 28, 30)} == {"star"}
        assert doc.kind(25) == ATTRIBUTE
        assert doc.kind(24) == ATTRIBUTE and doc.label(24) == "star"

    def test_single_element(self):
        doc = parse_document("<a/>")
        assert len(doc.nodes) == 1
        assert doc.node(0).kind == COMPLEX and doc.node(0).children == ()

    def test_duplicate_id(self, movies_catalog):
        text = """<movieInfo>
            <movie><descr>d</descr><title>t</title>
              <character role="x" star="436"/></movie>
            <actor id="436"><name>a</name></actor>
            <actor id="436"><name>b</name></actor>
        </movieInfo>"""
        with pytest.raises(DocumentError, match="duplicate ID"):
            parse_document(text, movies_catalog.dtd)

    def test_malformed(self):
        with pytest.raises(DocumentError, match="malformed"):
            parse_document("<a><b></a>")

    def test_multi_root_wrapped(self):
        doc = parse_document("<a/><a/>")
        assert doc.label(0) == "equix-root"
        assert [doc.label(c) for c in doc.children(0)] == ["a", "a"]

    def test_wrapped_document_conforms_to_adjusted_dtd(self):
        dtd = parse_dtd("<!ELEMENT a EMPTY>")
        doc = parse_document("<a/><a/>", dtd)
        assert strictly_conforms(doc, dtd.with_wrapper("equix-root"))

    def test_custom_wrapper_label(self):
        doc = parse_document("<a/><a/>", wrapper_label="bundle")
        assert doc.label(0) == "bundle"

    def test_attr_order_precedes_children(self):
        doc = parse_document('<a x="1" y="2"><b/></a>')
        kinds = [doc.kind(c) for c in doc.children(0)]
        assert kinds == [ATTRIBUTE, ATTRIBUTE, COMPLEX]
        assert [doc.label(c) for c in doc.children(0)] == ["x", "y", "b"]

    def test_tree_property(self, movies_doc):
        doc = movies_doc
        edges = sum(len(doc.children(i)) for i in doc.nodes)
        assert edges == len(doc.nodes) - 1
        seen = set()
        stack = [doc.root]
        while stack:
            n = stack.pop()
            seen.add(n)
            stack.extend(doc.children(n))
        assert seen == set(doc.nodes)

    def test_roundtrip_identity(self, movies_doc, movies_catalog):
        text = serialize_document(movies_doc)
        again = parse_document(text, movies_catalog.dtd)
        assert same_tree(movies_doc, again)
        assert serialize_document(again) == text


class TestConformance:
    def test_fixture_conforms(self, movies_doc, movies_catalog):
        assert strictly_conforms(movies_doc, movies_catalog.dtd)

    def test_root_label_mismatch(self, movies_catalog):
        doc = parse_document("<movie/>")
        assert not strictly_conforms(doc, movies_catalog.dtd)

    def test_missing_title_rejected(self, movies_catalog):
        text = """<movieInfo>
            <movie><descr>d</descr><character role="x" star="1"/></movie>
            <actor id="1"><name>a</name></actor>
        </movieInfo>"""
        doc = parse_document(text, movies_catalog.dtd)
        assert not strictly_conforms(doc, movies_catalog.dtd)
        assert any("content" in d for d in conformance_diagnostics(doc, movies_catalog.dtd))

    def test_missing_required_attribute(self, movies_catalog):
        text = """<movieInfo>
            <movie><descr>d</descr><title>t</title><character role="x"/></movie>
            <actor id="1"><name>a</name></actor>
        </movieInfo>"""
        doc = parse_document(text, movies_catalog.dtd)
        diags = conformance_diagnostics(doc, movies_catalog.dtd)
        assert any("required attribute 'star'" in d for d in diags)


class TestTextualContent:
    def test_character_nine(self, movies_doc):
        # role value, star value, then the referenced actor's name
        assert textual_content(movies_doc, 9) == f"villain{SEPARATOR}436{SEPARATOR}Jack Redford"

    def test_star_attribute_includes_referenced_actor(self, movies_doc):
        assert "Jack Redford" in textual_content(movies_doc, 24)

    def test_atomic_node_is_own_label(self, movies_doc):
        atomic = movies_doc.children(10)[0]
        assert movies_doc.kind(atomic) == ATOMIC
        assert textual_content(movies_doc, atomic) == movies_doc.label(atomic)

    def test_id_attribute_contributes_nothing(self, movies_doc):
        # actor 5's id value 436 is reference plumbing, not content
        assert textual_content(movies_doc, 5) == "Jack Redford"

    def test_cycle_safe(self):
        dtd = parse_dtd(
            "<!ELEMENT pair (node,node)>"
            "<!ELEMENT node (#PCDATA)>"
            "<!ATTLIST node id ID #IMPLIED ref IDREF #IMPLIED>",
            "pair",
        )
        text = (
            '<pair><node id="1" ref="2">one</node>'
            '<node id="2" ref="1">two</node></pair>'
        )
        doc = parse_document(text, dtd)
        content = textual_content(doc, doc.root)
        segments = content.split(SEPARATOR)
        assert len(segments) <= len(doc.nodes)
        assert "one" in segments and "two" in segments

    def test_unknown_node(self, movies_doc):
        with pytest.raises(KeyError):
            textual_content(movies_doc, 999)


class TestPaths:
    def test_descr_under_movie_two(self, movies_doc):
        assert path_of(movies_doc, 10) == ("movieInfo", "movie", "descr")

    def test_root(self, movies_doc):
        assert path_of(movies_doc, 0) == ("movieInfo",)

    def test_role_attribute(self, movies_doc):
        assert path_of(movies_doc, 25) == ("movieInfo", "movie", "character", "role")

    def test_parent_path_is_prefix(self, movies_doc):
        doc = movies_doc
        for nid in doc.nodes:
            parent = doc.parent_of(nid)
            if parent is not None:
                assert path_of(doc, parent) == path_of(doc, nid)[:-1]


class TestIndirectChildren:
    def test_star_resolves_to_actor(self, movies_doc):
        assert indirect_children(movies_doc, 24) == frozenset({5})

    def test_cdata_attribute(self, movies_doc):
        assert indirect_children(movies_doc, 25) == frozenset()

    def test_dangling_idref(self, movies_catalog):
        text = """<movieInfo>
            <movie><descr>d</descr><title>t</title>
              <character role="x" star="999"/></movie>
            <actor id="1"><name>a</name></actor>
        </movieInfo>"""
        doc = parse_document(text, movies_catalog.dtd)
        star = next(
            n.id for n in doc.nodes.values()
            if n.kind == ATTRIBUTE and n.label == "star"
        )
        assert indirect_children(doc, star) == frozenset()
