"""Benchmark loaders, the canonical graph file format, and an SBM generator."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, build_graph

log = logging.getLogger(__name__)

CANONICAL_MAGIC = "attrikernel-graph"
CANONICAL_VERSION = "v1"


class DatasetError(ValueError):
    """Malformed or unexpected dataset content."""


@dataclass(frozen=True)
class DatasetDescriptor:
    name: str
    n: int
    m: int
    d: int
    classes: int
    stem: str  # basename of the .content / .cites files


DESCRIPTORS = {
    "washington": DatasetDescriptor("washington", 230, 446, 1703, 5, "washington"),
    "wisconsin": DatasetDescriptor("wisconsin", 265, 530, 1703, 5, "wisconsin"),
    "cornell": DatasetDescriptor("cornell", 195, 304, 1703, 5, "cornell"),
    "texas": DatasetDescriptor("texas", 187, 328, 1703, 5, "texas"),
    "citeseer": DatasetDescriptor("citeseer", 3312, 4732, 3703, 6, "citeseer"),
    "cora": DatasetDescriptor("cora", 2708, 5429, 1433, 7, "cora"),
}
WEBKB = ("washington", "wisconsin", "cornell", "texas")
BENCHMARKS = WEBKB + ("citeseer", "cora")


@dataclass(frozen=True)
class CitationData:
    """A parsed content/cites pair plus the bookkeeping around it."""

    graph: Graph
    node_ids: tuple[str, ...]
    class_names: tuple[str, ...]
    cite_lines: int  # citation lines read
    dropped: int  # citations naming an id missing from the content file


def read_citation(content_path, cites_path, name: str = "") -> CitationData:
    """Parse the LINQS ``.content`` / ``.cites`` text format.

    Content lines are ``<id> <d feature values> <class>``; cites lines are
    ``<cited-id> <citing-id>``. Nodes keep content-file order and class ids
    follow first appearance.
    """
    ids: list[str] = []
    rows: list[list[float]] = []
    label_names: list[str] = []
    class_index: dict[str, int] = {}
    labels: list[int] = []
    d = None
    with open(content_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3:
                raise DatasetError(f"{content_path}:{lineno}: expected id, features, label")
            if d is None:
                d = len(parts) - 2
            elif len(parts) - 2 != d:
                raise DatasetError(
                    f"{content_path}:{lineno}: {len(parts) - 2} features, expected {d}"
                )
            try:
                rows.append([float(v) for v in parts[1:-1]])
            except ValueError as exc:
                raise DatasetError(f"{content_path}:{lineno}: {exc}") from None
            ids.append(parts[0])
            cls = parts[-1]
            if cls not in class_index:
                class_index[cls] = len(label_names)
                label_names.append(cls)
            labels.append(class_index[cls])
    if not ids:
        raise DatasetError(f"{content_path}: no nodes")
    index = {node: i for i, node in enumerate(ids)}
    if len(index) != len(ids):
        raise DatasetError(f"{content_path}: duplicate node ids")

    edges = []
    lines = dropped = 0
    with open(cites_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DatasetError(f"{cites_path}:{lineno}: expected two ids")
            lines += 1
            a, b = parts
            if a in index and b in index:
                edges.append((index[a], index[b]))
            else:
                dropped += 1
    if dropped:
        log.info("%s: dropped %d citations to unknown ids", name or cites_path, dropped)

    graph = build_graph(edges, n=len(ids), attributes=np.array(rows), labels=labels, name=name)
    return CitationData(graph, tuple(ids), tuple(label_names), lines, dropped)


def load_citation(content_path, cites_path, name: str = "") -> Graph:
    return read_citation(content_path, cites_path, name).graph


def check_descriptor(data: CitationData, desc: DatasetDescriptor) -> None:
    """Fail on n/d/class mismatches; only log an edge-count mismatch."""
    g = data.graph
    got = (g.n, g.d, len(data.class_names))
    want = (desc.n, desc.d, desc.classes)
    if got != want:
        raise DatasetError(
            f"{desc.name}: loaded (n, d, classes) = {got}, expected {want}"
        )
    if data.cite_lines != desc.m or g.m != desc.m:
        log.warning(
            "%s: %d citation lines, %d undirected edges after symmetrization; expected m=%d",
            desc.name, data.cite_lines, g.m, desc.m,
        )


def find_files(root, stem: str) -> tuple[Path, Path]:
    """Locate ``<stem>.content`` and ``<stem>.cites`` anywhere under ``root``."""
    root = Path(root)
    if root.is_file():
        root = root.parent
    for content in sorted(root.rglob("*.content")):
        if content.stem.lower() == stem.lower():
            cites = content.with_suffix(".cites")
            if cites.exists():
                return content, cites
    raise DatasetError(f"no {stem}.content/{stem}.cites pair under {root}")


def load_named(name: str, data_dir) -> Graph:
    """Load one of the benchmark corpora by name and validate its counts."""
    key = name.lower()
    if key not in DESCRIPTORS:
        raise DatasetError(f"unknown dataset {name!r}; known: {', '.join(DESCRIPTORS)}")
    desc = DESCRIPTORS[key]
    content, cites = find_files(data_dir, desc.stem)
    data = read_citation(content, cites, name=key)
    check_descriptor(data, desc)
    return data.graph


def load_webkb(dataset_dir, university: str) -> Graph:
    if university.lower() not in WEBKB:
        raise DatasetError(f"unknown WebKB university {university!r}; known: {', '.join(WEBKB)}")
    return load_named(university, dataset_dir)


def _fmt(x: float) -> str:
    return repr(float(x))


def _canonical_body(g: Graph) -> str:
    lines = [f"{CANONICAL_MAGIC} {CANONICAL_VERSION} n={g.n} m={g.m} d={g.d}"]
    for i, j, w in g.edges():
        lines.append(f"E {i} {j} {_fmt(w)}")
    if g.attributes is not None:
        for i, row in enumerate(g.attributes):
            lines.append("F " + str(i) + "".join(" " + _fmt(v) for v in row))
    if g.labels is not None:
        for i, lab in enumerate(g.labels):
            lines.append(f"L {i} {int(lab)}")
    return "\n".join(lines) + "\n"


def save_canonical(g: Graph, path) -> None:
    """Write the versioned text format, closed by an ``S <sha256>`` line."""
    body = _canonical_body(g)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(body)
        fh.write(f"S {digest}\n")


def load_canonical(path, name: str | None = None) -> Graph:
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) < 2 or header[0] != CANONICAL_MAGIC:
        raise DatasetError(f"{path}: not an {CANONICAL_MAGIC} file")
    if header[1] != CANONICAL_VERSION:
        raise DatasetError(f"{path}: unsupported version {header[1]!r}")
    try:
        fields = dict(item.split("=", 1) for item in header[2:])
        n, m, d = int(fields["n"]), int(fields["m"]), int(fields["d"])
    except (KeyError, ValueError):
        raise DatasetError(f"{path}: malformed header {lines[0]!r}") from None
    if n <= 0:
        raise DatasetError(f"{path}: graph must have at least one node (n={n})")

    if lines[-1].startswith("S "):
        body = "\n".join(lines[:-1]) + "\n"
        if hashlib.sha256(body.encode("utf-8")).hexdigest() != lines[-1][2:].strip():
            raise DatasetError(f"{path}: checksum mismatch")
        lines = lines[:-1]

    edges = []
    attrs = np.zeros((n, d)) if d else None
    seen_attr = np.zeros(n, dtype=bool)
    labels = np.zeros(n, dtype=np.int64)
    seen_label = np.zeros(n, dtype=bool)
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split()
        if not parts:
            continue
        try:
            tag = parts[0]
            if tag == "E":
                edges.append((int(parts[1]), int(parts[2]), float(parts[3])))
            elif tag == "F":
                i = int(parts[1])
                if len(parts) - 2 != d:
                    raise DatasetError(f"{path}:{lineno}: expected {d} attribute values")
                attrs[i] = [float(v) for v in parts[2:]]
                seen_attr[i] = True
            elif tag == "L":
                i = int(parts[1])
                labels[i] = int(parts[2])
                seen_label[i] = True
            else:
                raise DatasetError(f"{path}:{lineno}: unknown record {tag!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, DatasetError):
                raise
            raise DatasetError(f"{path}:{lineno}: {exc}") from None

    if attrs is not None and not seen_attr.all():
        raise DatasetError(f"{path}: attributes missing for some nodes")
    if seen_label.any() and not seen_label.all():
        raise DatasetError(f"{path}: labels missing for some nodes")
    g = build_graph(
        edges,
        n=n,
        attributes=attrs,
        labels=labels if seen_label.any() else None,
        name=name if name is not None else Path(path).stem,
    )
    if g.m != m:
        raise DatasetError(f"{path}: header says m={m}, found {g.m} edges")
    return g


@dataclass(frozen=True)
class AttributeModel:
    """Per-block binary prototypes with independent bit-flip noise."""

    dim: int
    flip: float = 0.1
    density: float = 0.5


def sbm_generate(block_sizes, p_in: float, p_out: float, seed: int = 0, attributes: AttributeModel | None = None) -> Graph:
    """Undirected unit-weight stochastic block model with planted labels."""
    sizes = [int(s) for s in block_sizes]
    if not sizes or any(s <= 0 for s in sizes):
        raise ValueError("every block needs at least one node")
    if not 0.0 <= p_out <= p_in <= 1.0:
        raise ValueError(f"need 0 <= p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = labels.size
    prob = np.where(labels[:, None] == labels[None, :], p_in, p_out)
    draw = rng.random((n, n))
    upper = np.triu(draw < prob, 1)
    rows, cols = np.nonzero(upper)
    F = None
    if attributes is not None:
        protos = (rng.random((len(sizes), attributes.dim)) < attributes.density).astype(float)
        F = protos[labels]
        flips = rng.random(F.shape) < attributes.flip
        F = np.where(flips, 1.0 - F, F)
    return build_graph(zip(rows.tolist(), cols.tolist()), n=n, attributes=F, labels=labels, name="sbm")
