import json
import shutil
import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

sys.path.insert(0, str(Path(__file__).parent))

from equix import load_catalog, parse_query_file, translate  # noqa: E402


@pytest.fixture(scope="session")
def movies_catalog():
    return load_catalog(FIXTURES / "movies" / "manifest.json")


@pytest.fixture(scope="session")
def movies_doc(movies_catalog):
    return movies_catalog.documents[0]


@pytest.fixture(scope="session")
def redford_concrete():
    return parse_query_file((FIXTURES / "movies" / "redford_query.json").read_text())


@pytest.fixture()
def redford_query(redford_concrete):
    return translate(redford_concrete)


@pytest.fixture()
def data_dir(tmp_path):
    """A service data directory seeded with the movies catalog + ontology."""
    catalogs = tmp_path / "catalogs"
    catalogs.mkdir()
    for name in ("movies.dtd", "movies.xml"):
        shutil.copy(FIXTURES / "movies" / name, catalogs / name)
    manifest = json.loads((FIXTURES / "movies" / "manifest.json").read_text())
    (catalogs / "movies.json").write_text(json.dumps(manifest))
    ontologies = tmp_path / "ontologies"
    ontologies.mkdir()
    shutil.copy(FIXTURES / "ontologies" / "cinema.json", ontologies / "cinema.json")
    return tmp_path
