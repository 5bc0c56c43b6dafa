"""CLI subcommands: query, validate, dtd; parity with the service."""

import json

from equix.cli import main

from conftest import FIXTURES

MANIFEST = str(FIXTURES / "movies" / "manifest.json")
QUERY = str(FIXTURES / "movies" / "redford_query.json")


class TestQueryCommand:
    def test_writes_results_and_dtd(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["query", MANIFEST, QUERY, "-o", str(out)])
        assert code == 0
        files = sorted(p.name for p in out.iterdir())
        assert files == ["result-0001.xml", "result.dtd", "summary.json"]
        summary = json.loads((out / "summary.json").read_text())
        assert summary["documents"] == 1
        assert summary["results"][0]["output_nodes"] == 4
        printed = json.loads(capsys.readouterr().out)
        assert printed == summary

    def test_root_mismatch_exits_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"label": "movie", "output": True}))
        code = main(["query", MANIFEST, str(bad), "-o", str(tmp_path / "o")])
        assert code == 2
        assert "root label" in capsys.readouterr().err

    def test_oracle_flag(self, tmp_path, capsys):
        # the full fixture exceeds the oracle bound and reports a skip
        code = main(["query", MANIFEST, QUERY, "-o", str(tmp_path / "o"), "--oracle"])
        assert code == 0
        assert "oracle: SKIPPED" in capsys.readouterr().out

    def test_oracle_match_on_small_catalog(self, tmp_path, capsys):
        (tmp_path / "mini.xml").write_text(
            "<movieInfo><movie>wild west</movie><movie>moon</movie></movieInfo>"
        )
        (tmp_path / "mini.dtd").write_text(
            "<!ELEMENT movieInfo (movie+)>\n<!ELEMENT movie (#PCDATA)>\n"
        )
        manifest = tmp_path / "mini.json"
        manifest.write_text(
            json.dumps(
                {
                    "name": "mini",
                    "dtd": "mini.dtd",
                    "root": "movieInfo",
                    "documents": ["mini.xml"],
                }
            )
        )
        query = tmp_path / "q.json"
        query.write_text(
            json.dumps(
                {
                    "label": "movieInfo",
                    "children": [
                        {
                            "quantifier": "one-is",
                            "node": {
                                "label": "movie",
                                "matcher": {"op": "word", "value": "wild"},
                                "output": True,
                            },
                        }
                    ],
                }
            )
        )
        code = main(["query", str(manifest), str(query), "-o", str(tmp_path / "o"), "--oracle"])
        assert code == 0
        assert "oracle: MATCH" in capsys.readouterr().out

    def test_xml_summary(self, tmp_path, capsys):
        code = main(["query", MANIFEST, QUERY, "-o", str(tmp_path / "o"), "--format", "xml"])
        assert code == 0
        printed = capsys.readouterr().out
        assert printed.startswith("<summary")
        assert 'output-nodes="4"' in printed

    def test_agg_flag(self, tmp_path, capsys):
        obj = json.loads((FIXTURES / "movies" / "redford_query.json").read_text())
        char = obj["root"]["children"][0]["node"]["children"][2]["node"]
        char["agg"] = ["count"]
        qfile = tmp_path / "agg.json"
        qfile.write_text(json.dumps(obj))

        out_plain = tmp_path / "plain"
        assert main(["query", MANIFEST, str(qfile), "-o", str(out_plain)]) == 0
        assert "equix-agg" not in (out_plain / "result-0001.xml").read_text()

        out_agg = tmp_path / "agg"
        assert main(["query", MANIFEST, str(qfile), "-o", str(out_agg), "--agg"]) == 0
        assert "equix-agg" in (out_agg / "result-0001.xml").read_text()

    def test_ontology_mode(self, tmp_path, capsys):
        qfile = tmp_path / "q.json"
        qfile.write_text(
            json.dumps(
                {
                    "form": "concrete",
                    "mode": "ontology",
                    "ontology": "cinema",
                    "root": {
                        "label": "movieInfo",
                        "children": [
                            {"quantifier": "one-is",
                             "node": {"label": "descr", "output": True}}
                        ],
                    },
                }
            )
        )
        out = tmp_path / "o"
        code = main(
            ["query", MANIFEST, str(qfile), "-o", str(out), "--ontology-file",
             str(FIXTURES / "ontologies" / "cinema.json")]
        )
        assert code == 0
        assert (out / "result-0001.xml").is_file()
        assert not (out / "result.dtd").exists()


class TestValidateCommand:
    def test_conforming_catalog(self, capsys):
        assert main(["validate", MANIFEST]) == 0
        assert "movies.xml: OK" in capsys.readouterr().out

    def test_nonconforming_document(self, tmp_path, capsys):
        (tmp_path / "bad.xml").write_text("<movieInfo><movie/></movieInfo>")
        (tmp_path / "movies.dtd").write_text(
            (FIXTURES / "movies" / "movies.dtd").read_text()
        )
        manifest = tmp_path / "m.json"
        manifest.write_text(
            json.dumps(
                {
                    "name": "bad",
                    "dtd": "movies.dtd",
                    "root": "movieInfo",
                    "documents": ["bad.xml"],
                }
            )
        )
        assert main(["validate", str(manifest)]) == 2
        assert "bad.xml: FAIL" in capsys.readouterr().out


class TestDtdCommand:
    def test_text(self, capsys):
        assert main(["dtd", MANIFEST]) == 0
        assert "<!ELEMENT movieInfo (movie+,actor+)>" in capsys.readouterr().out

    def test_json(self, capsys):
        assert main(["dtd", MANIFEST, "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["root"] == "movieInfo"


class TestServiceParity:
    def test_cli_and_service_results_byte_identical(self, tmp_path, data_dir):
        from fastapi.testclient import TestClient

        from equix.service import create_app

        out = tmp_path / "out"
        assert main(["query", MANIFEST, QUERY, "-o", str(out)]) == 0
        cli_doc = (out / "result-0001.xml").read_text()

        client = TestClient(create_app(data_dir))
        query = json.loads((FIXTURES / "movies" / "redford_query.json").read_text())
        rid = client.post("/catalogs/movies/query", json=query).json()["id"]
        service_doc = client.get(f"/results/{rid}/docs").json()["documents"][0]
        assert cli_doc == service_doc

        cli_dtd = (out / "result.dtd").read_text()
        service_dtd = client.get(f"/results/{rid}").json()["result_dtd"]
        assert cli_dtd == service_dtd
