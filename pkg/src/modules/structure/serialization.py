# src/modules/structure/serialization.py

import logging
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Tuple

import numpy as np

from src.modules.vocabulary.presets import load_vocabulary
from src.modules.vocabulary.service import Vocabulary
from src.utils.errors import StructureFormatError

from .service import Hypergraph

logger = logging.getLogger(__name__)

HEADER = "# sparselimit structure v1"


def dumps(H: Hypergraph) -> str:
    lines = [HEADER, f"vocabulary {H.vocabulary.name}", f"n {H.order}"]
    ids = H.vertex_array
    if not np.array_equal(ids, np.arange(H.order)):
        lines.append("vertices " + " ".join(map(str, ids.tolist())))
    for name, t in H.edges():
        lines.append(f"{name} " + " ".join(map(str, t)))
    return "\n".join(lines) + "\n"


def loads(text: str, vocabulary: Optional[Vocabulary] = None) -> Hypergraph:
    """Parses the line format written by `dumps`. The vocabulary is resolved from the header
    unless given; a given vocabulary must carry the same name."""
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line]
    if not lines or lines[0] != HEADER:
        raise StructureFormatError(f"Missing header line '{HEADER}'")
    fields: Dict[str, str] = {}
    body: List[Tuple[int, str]] = []
    for number, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key in ("vocabulary", "n", "vertices") and not body:
            fields[key] = rest.strip()
        else:
            body.append((number, line))
    if "vocabulary" not in fields or "n" not in fields:
        raise StructureFormatError("Header must declare 'vocabulary' and 'n'")
    if vocabulary is None:
        vocabulary = load_vocabulary(fields["vocabulary"])
    elif vocabulary.name != fields["vocabulary"]:
        raise StructureFormatError(f"File is over '{fields['vocabulary']}', expected '{vocabulary.name}'")
    try:
        n = int(fields["n"])
        vertices = [int(x) for x in fields["vertices"].split()] if "vertices" in fields else list(range(n))
    except ValueError as e:
        raise StructureFormatError(f"Bad vertex header: {e}")
    if len(vertices) != n or len(set(vertices)) != n:
        raise StructureFormatError(f"Declared n={n} but vertex list has {len(set(vertices))} distinct ids")
    rows: Dict[str, List[Tuple[int, ...]]] = {name: [] for name in vocabulary.names}
    for number, line in body:
        name, *values = line.split()
        if name not in rows:
            raise StructureFormatError(f"Line {number}: unknown relation '{name}'")
        try:
            t = tuple(int(v) for v in values)
        except ValueError:
            raise StructureFormatError(f"Line {number}: vertex ids must be integers")
        if len(t) != vocabulary.relation(name).arity:
            raise StructureFormatError(f"Line {number}: {name} expects {vocabulary.relation(name).arity} vertices")
        rows[name].append(t)
    edges = {name: np.asarray(ts, dtype=np.int64) for name, ts in rows.items() if ts}
    H = Hypergraph(vocabulary, vertices, edges, check=True)
    if H.num_edges != len(body):
        raise StructureFormatError(f"Duplicate edge lines: {len(body)} lines, {H.num_edges} distinct edges")
    return H


def write_structure(H: Hypergraph, path: Path) -> None:
    Path(path).write_text(dumps(H), encoding="utf-8")
    logger.info(f"Structure with |V|={H.order}, |E|={H.num_edges} written to {path}")


def read_structure(path: Path, vocabulary: Optional[Vocabulary] = None) -> Hypergraph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise StructureFormatError(f"Cannot read structure file {path}: {e}")
    return loads(text, vocabulary)


def dump(H: Hypergraph, stream: TextIO) -> None:
    stream.write(dumps(H))
