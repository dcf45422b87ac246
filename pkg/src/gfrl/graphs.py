"""Graph representation, factorized log-probabilities, canonical keys, dataset IO.

A graph is a categorical labeling of ``n`` node slots and all ``n(n-1)/2``
unordered pairs; edge label 0 means "no edge".  Samplers and the denoiser
treat every slot as one categorical dimension, so absent edges are ordinary
labels rather than missing entries.
"""

from __future__ import annotations

import gzip
import io
from dataclasses import dataclass

import numpy as np

from .categorical import DomainError

CANON_EXACT_MAX_N = 16
CANON_SEARCH_BUDGET = 200_000


class DatasetFormatError(ValueError):
    """Malformed dataset file; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class GraphState:
    """Immutable labeled undirected graph.

    ``edge_labels`` is a symmetric (n, n) int matrix with zero diagonal.
    """

    node_labels: np.ndarray
    edge_labels: np.ndarray

    def __post_init__(self):
        nl = np.asarray(self.node_labels, dtype=np.int64)
        el = np.asarray(self.edge_labels, dtype=np.int64)
        n = nl.shape[0]
        if nl.ndim != 1 or n == 0:
            raise DomainError("node_labels must be a nonempty vector")
        if el.shape != (n, n):
            raise DomainError(f"edge_labels must be ({n}, {n})")
        if np.any(el != el.T):
            raise DomainError("edge_labels must be symmetric")
        if np.any(np.diag(el) != 0):
            raise DomainError("edge_labels must have a zero diagonal")
        if np.any(nl < 0) or np.any(el < 0):
            raise DomainError("labels must be nonnegative")
        nl.flags.writeable = False
        el.flags.writeable = False
        object.__setattr__(self, "node_labels", nl)
        object.__setattr__(self, "edge_labels", el)

    @property
    def n(self) -> int:
        return int(self.node_labels.shape[0])

    @classmethod
    def from_vectors(cls, node_labels, edge_vector) -> "GraphState":
        """Rebuild from node labels and the upper-triangle edge labels."""
        nl = np.asarray(node_labels, dtype=np.int64)
        n = nl.shape[0]
        iu, ju = pair_indices(n)
        el = np.zeros((n, n), dtype=np.int64)
        el[iu, ju] = edge_vector
        el[ju, iu] = edge_vector
        return cls(nl, el)

    @classmethod
    def from_edge_list(cls, node_labels, edges) -> "GraphState":
        nl = np.asarray(node_labels, dtype=np.int64)
        n = nl.shape[0]
        el = np.zeros((n, n), dtype=np.int64)
        for i, j, lab in edges:
            if i == j:
                raise DomainError("self loops are not representable")
            el[i, j] = lab
            el[j, i] = lab
        return cls(nl, el)

    def edge_vector(self) -> np.ndarray:
        iu, ju = pair_indices(self.n)
        return self.edge_labels[iu, ju]

    def permuted(self, perm) -> "GraphState":
        """Relabeled copy: node ``v`` moves to position ``perm.index(v)``."""
        p = np.asarray(perm)
        return GraphState(self.node_labels[p], self.edge_labels[np.ix_(p, p)])


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Upper-triangle pair order (0,1),(0,2),...,(n-2,n-1) used everywhere."""
    return np.triu_indices(n, 1)


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


@dataclass(frozen=True)
class GraphDistribution:
    """Per-dimension categorical rows: (n, X) for nodes, (m, E) for pairs.

    Edge rows follow the ``pair_indices`` order.
    """

    node_rows: np.ndarray
    edge_rows: np.ndarray

    def __post_init__(self):
        nr = np.asarray(self.node_rows, dtype=np.float64)
        er = np.asarray(self.edge_rows, dtype=np.float64)
        n = nr.shape[0]
        if er.shape[0] != num_pairs(n):
            raise DomainError("edge_rows must cover every unordered pair")
        object.__setattr__(self, "node_rows", nr)
        object.__setattr__(self, "edge_rows", er)

    @property
    def n(self) -> int:
        return int(self.node_rows.shape[0])


def graph_log_prob(dist: GraphDistribution, g: GraphState) -> float:
    """Sum of per-dimension log-probabilities of the labels of ``g``.

    Returns ``-inf`` when any dimension assigns zero probability; callers
    must treat that as a flagged sentinel, not a usable log-probability.
    """
    if dist.n != g.n:
        raise DomainError("distribution and graph sizes differ")
    node_p = dist.node_rows[np.arange(g.n), g.node_labels]
    edge_p = dist.edge_rows[np.arange(num_pairs(g.n)), g.edge_vector()]
    if np.any(node_p <= 0.0) or np.any(edge_p <= 0.0):
        return float("-inf")
    return float(np.log(node_p).sum() + np.log(edge_p).sum())


# --- canonical form ---------------------------------------------------------
#
# The key is built by placing nodes one at a time; placing a node appends its
# label followed by its edge labels toward the already-placed nodes.  The
# lexicographically smallest such stream over all placement orders is a
# complete isomorphism invariant, and because every level appends a
# fixed-length block, a level-wise greedy search with tie branching finds it
# exactly.  Pathologically symmetric graphs can explode the tie branching, so
# the search carries a node budget; past it (or past CANON_EXACT_MAX_N) the
# key falls back to an iterated neighborhood-refinement signature, which is
# isomorphism-invariant but may merge rare non-isomorphic pairs.


def _refinement_key(g: GraphState) -> bytes:
    n = g.n
    colors = [int(x) for x in g.node_labels]
    for _ in range(n):
        sigs = []
        for v in range(n):
            neigh = sorted(
                (int(g.edge_labels[v, u]), colors[u]) for u in range(n) if u != v
            )
            sigs.append((colors[v], tuple(neigh)))
        order = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new_colors = [order[s] for s in sigs]
        if new_colors == colors:
            break
        colors = new_colors
    per_node = sorted(
        (colors[v], int(g.node_labels[v]), tuple(sorted((colors[u], int(g.edge_labels[v, u])) for u in range(n) if u != v)))
        for v in range(n)
    )
    return b"R" + repr(per_node).encode()


def canonical_key(g: GraphState) -> bytes:
    """Isomorphism-invariant byte key; equal keys iff isomorphic as labeled graphs.

    Exact for n <= 16 (subject to a search budget on extremely symmetric
    inputs); larger graphs use the refinement fallback.
    """
    n = g.n
    if n > CANON_EXACT_MAX_N:
        return _refinement_key(g)
    labels = g.node_labels
    edges = g.edge_labels
    header = bytes([n & 0xFF])

    best: list[int] | None = None
    budget = CANON_SEARCH_BUDGET

    def search(placed: list[int], stream: list[int]) -> bool:
        """Returns False when the budget is exhausted."""
        nonlocal best, budget
        budget -= 1
        if budget < 0:
            return False
        if best is not None and stream > best[: len(stream)]:
            return True
        if len(placed) == n:
            if best is None or stream < best:
                best = list(stream)
            return True
        remaining = [v for v in range(n) if v not in placed]
        exts = {}
        for v in remaining:
            exts[v] = (int(labels[v]), *(int(edges[u, v]) for u in placed))
        m = min(exts.values())
        # A non-minimal extension cannot start a minimal continuation because
        # every level contributes a block of fixed length.
        for v in remaining:
            if exts[v] != m:
                continue
            stream.extend(m)
            if not search(placed + [v], stream):
                return False
            del stream[-len(m):]
        return True

    if search([], []):
        assert best is not None
        if max(best, default=0) < 256:
            return header + bytes(best)
        return header + repr(best).encode()
    return _refinement_key(g)


# --- dataset files ----------------------------------------------------------
#
#   N <count> NODE_CLASSES <a> EDGE_CLASSES <b>
#   G <n>
#   <n node labels>
#   <i> <j> <label>     (one line per nonzero edge, i < j, row-major)
#   END
#
# Plain text, optionally gzip-compressed (suffix .gz); round-trips exactly.


@dataclass(frozen=True)
class Dataset:
    """Graph list plus the label-set sizes recorded in the file header."""

    graphs: tuple
    node_classes: int
    edge_classes: int

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def __getitem__(self, idx):
        return self.graphs[idx]


def write_dataset(graphs, path, node_classes: int | None = None, edge_classes: int | None = None):
    graphs = list(graphs)
    if node_classes is None:
        node_classes = 1 + max((int(g.node_labels.max()) for g in graphs), default=0)
    if edge_classes is None:
        edge_classes = 1 + max((int(g.edge_labels.max()) for g in graphs), default=1)
    buf = io.StringIO()
    buf.write(f"N {len(graphs)} NODE_CLASSES {node_classes} EDGE_CLASSES {edge_classes}\n")
    for g in graphs:
        buf.write(f"G {g.n}\n")
        buf.write(" ".join(str(int(x)) for x in g.node_labels) + "\n")
        iu, ju = pair_indices(g.n)
        for i, j in zip(iu, ju):
            lab = int(g.edge_labels[i, j])
            if lab != 0:
                buf.write(f"{i} {j} {lab}\n")
        buf.write("END\n")
    data = buf.getvalue()
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wt") as f:
        f.write(data)


def read_dataset(path) -> Dataset:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt") as f:
        lines = f.read().splitlines()
    if not lines:
        return Dataset(graphs=(), node_classes=1, edge_classes=2)
    head = lines[0].split()
    if len(head) != 6 or head[0] != "N" or head[2] != "NODE_CLASSES" or head[4] != "EDGE_CLASSES":
        raise DatasetFormatError(1, f"bad header: {lines[0]!r}")
    try:
        count, node_classes, edge_classes = int(head[1]), int(head[3]), int(head[5])
    except ValueError:
        raise DatasetFormatError(1, f"non-integer header field: {lines[0]!r}") from None

    graphs = []
    ln = 1
    for _ in range(count):
        if ln >= len(lines) or not lines[ln].startswith("G "):
            raise DatasetFormatError(ln + 1, "expected 'G <n>'")
        try:
            n = int(lines[ln].split()[1])
        except (IndexError, ValueError):
            raise DatasetFormatError(ln + 1, f"bad graph header: {lines[ln]!r}") from None
        ln += 1
        if ln >= len(lines):
            raise DatasetFormatError(ln + 1, "missing node label line")
        try:
            node_labels = [int(x) for x in lines[ln].split()]
        except ValueError:
            raise DatasetFormatError(ln + 1, f"bad node labels: {lines[ln]!r}") from None
        if len(node_labels) != n:
            raise DatasetFormatError(ln + 1, f"expected {n} node labels, got {len(node_labels)}")
        ln += 1
        edges = []
        while ln < len(lines) and lines[ln] != "END":
            parts = lines[ln].split()
            if len(parts) != 3:
                raise DatasetFormatError(ln + 1, f"bad edge line: {lines[ln]!r}")
            try:
                i, j, lab = int(parts[0]), int(parts[1]), int(parts[2])
            except ValueError:
                raise DatasetFormatError(ln + 1, f"bad edge line: {lines[ln]!r}") from None
            if not (0 <= i < j < n):
                raise DatasetFormatError(ln + 1, f"edge endpoints out of order or range: {lines[ln]!r}")
            edges.append((i, j, lab))
            ln += 1
        if ln >= len(lines):
            raise DatasetFormatError(ln + 1, "missing END")
        ln += 1
        if any(lab >= edge_classes for _, _, lab in edges) or any(
            x >= node_classes for x in node_labels
        ):
            raise DatasetFormatError(ln, "label exceeds declared class count")
        graphs.append(GraphState.from_edge_list(node_labels, edges))
    return Dataset(graphs=tuple(graphs), node_classes=node_classes, edge_classes=edge_classes)
