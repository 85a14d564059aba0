# tests/test_serialization.py

import pytest

from src.modules.structure.serialization import HEADER, dumps, loads, read_structure, write_structure
from src.modules.vocabulary.presets import preset
from src.utils.errors import StructureFormatError


def test_file_roundtrip_keeps_vertex_ids(tmp_path, triangle_with_tail):
    path = tmp_path / "h.txt"
    write_structure(triangle_with_tail, path)
    text = path.read_text()
    assert "vertices 0 1 2 3 4 9" in text
    assert read_structure(path) == triangle_with_tail


def test_contiguous_vertices_need_no_vertex_line(path4):
    text = dumps(path4)
    assert "vertices" not in text
    assert text.splitlines()[:3] == [HEADER, "vocabulary graph", "n 4"]


def test_isolated_vertices_are_kept():
    H = loads(f"{HEADER}\nvocabulary graph\nn 5\nE 0 1\n")
    assert H.order == 5
    assert H.num_edges == 1


@pytest.mark.parametrize("text", [
    "vocabulary graph\nn 2\n",
    f"{HEADER}\nn 2\nE 0 1\n",
    f"{HEADER}\nvocabulary graph\nn 2\nF 0 1\n",
    f"{HEADER}\nvocabulary graph\nn 3\nE 0 1 2\n",
    f"{HEADER}\nvocabulary graph\nn 2\nE 0 x\n",
    f"{HEADER}\nvocabulary graph\nn 2\nE 0 1\nE 0 1\n",
    f"{HEADER}\nvocabulary graph\nn 3\nvertices 0 1\n",
])
def test_malformed_files(text):
    with pytest.raises(StructureFormatError):
        loads(text)


def test_vocabulary_mismatch(path4):
    with pytest.raises(StructureFormatError):
        loads(dumps(path4), preset("digraph"))


def test_missing_file(tmp_path):
    with pytest.raises(StructureFormatError):
        read_structure(tmp_path / "nope.txt")
