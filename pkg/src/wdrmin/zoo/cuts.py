"""Graph-cut objectives, DIMACS ingestion and small synthetic graph generators."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import kernels
from ..core import Decomposition, ValueOracle, as_mask, modular_oracle
from ..errors import DimacsParseError


@dataclass
class CutInstance:
    """Cut function over d free nodes plus optional source/sink arcs.

    ``edges`` are (u, v, weight) triples.  Undirected edges count once when
    exactly one endpoint is inside S; directed arcs count when u is inside
    and v outside.  A source arc s->v counts when v is outside S, a sink arc
    v->t when v is inside.  Values are normalised so F(empty) = 0; the
    constant removed is kept in ``offset`` (the s-t cut capacity of S is
    offset + F(S)).
    """

    d: int
    edges: list
    source_caps: Optional[np.ndarray] = None
    sink_caps: Optional[np.ndarray] = None
    directed: bool = False
    W: np.ndarray = field(init=False, repr=False)
    unary: np.ndarray = field(init=False, repr=False)
    offset: float = field(init=False)

    def __post_init__(self):
        W = np.zeros((self.d, self.d))
        for u, v, w in self.edges:
            if w < 0:
                raise ValueError(f"negative weight on edge ({u}, {v})")
            if u == v:
                continue
            W[u, v] += w
            if not self.directed:
                W[v, u] += w
        self.W = W
        src = np.zeros(self.d) if self.source_caps is None else np.asarray(self.source_caps, float)
        snk = np.zeros(self.d) if self.sink_caps is None else np.asarray(self.sink_caps, float)
        self.source_caps, self.sink_caps = src, snk
        self.unary = snk - src
        self.offset = float(src.sum())

    def value(self, S) -> float:
        mask = as_mask(S)
        inside = np.array([(mask >> i) & 1 for i in range(self.d)], dtype=bool)
        return float(self.W[np.ix_(inside, ~inside)].sum() + self.unary[inside].sum())

    def chain(self, perm) -> np.ndarray:
        return kernels.cut_chain(self.W, self.unary, np.asarray(perm, dtype=np.int64))

    def oracle(self, name="cut") -> ValueOracle:
        return ValueOracle(self.value, self.d, chain_fn=self.chain, name=name)

    def lipschitz_bound(self) -> float:
        """Bound on ||kappa||_2 for any greedy vector of this cut function."""
        per_node = self.W.sum(axis=0) + self.W.sum(axis=1) + np.abs(self.unary)
        return float(np.sqrt(np.sum(per_node ** 2)))

    def decomposition(self):
        """H = F - G with F = H + c(S) non-decreasing submodular and G = c(S) modular.

        c_v = (in + out weight of v) + |unary_v| bounds every |H(v|A)|.
        """
        c = self.W.sum(axis=0) + self.W.sum(axis=1) + np.abs(self.unary)
        H = self.oracle()
        G = modular_oracle(c, name="cut-correction")

        def f(mask):
            return H.evaluate(mask) + G.evaluate(mask)

        def fchain(perm):
            return H.chain(perm) + G.chain(perm)

        return Decomposition(ValueOracle(f, self.d, chain_fn=fchain, name="cut+modular"), G, 1.0, 1.0)


def cut_value(inst: CutInstance, S) -> float:
    return inst.value(S)


def path_graph(d, weight=1.0) -> CutInstance:
    return CutInstance(d, [(i, i + 1, weight) for i in range(d - 1)])


def random_graph(d, p=0.5, seed=0, max_weight=1.0, unary_scale=0.0) -> CutInstance:
    rng = np.random.default_rng(seed)
    edges = [(u, v, float(rng.uniform(0.1, max_weight)))
             for u in range(d) for v in range(u + 1, d) if rng.random() < p]
    src = snk = None
    if unary_scale:
        src = rng.uniform(0, unary_scale, d)
        snk = rng.uniform(0, unary_scale, d)
    return CutInstance(d, edges, src, snk)


def layered_graph(frame_side=2, frames=3, seed=0, c1=1.0, c2=10.0) -> CutInstance:
    """Small Genrmf-style network: square-grid frames joined by random arcs.

    In-frame grid arcs carry c2 * side^2; each node sends one arc of random
    capacity in [c1, c2] to a random node of the next frame.  The source
    feeds every node of the first frame and every node of the last frame
    drains to the sink, each with a random capacity in [c1, c2].
    """
    rng = np.random.default_rng(seed)
    a, b = frame_side, frames
    d = a * a * b

    def node(f, r, c):
        return f * a * a + r * a + c

    edges = []
    big = c2 * a * a
    for f in range(b):
        for r in range(a):
            for c in range(a):
                u = node(f, r, c)
                for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0)):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < a and 0 <= cc < a:
                        edges.append((u, node(f, rr, cc), big))
                if f + 1 < b:
                    v = node(f + 1, int(rng.integers(a)), int(rng.integers(a)))
                    edges.append((u, v, float(rng.uniform(c1, c2))))
    src = np.zeros(d)
    snk = np.zeros(d)
    for r in range(a):
        for c in range(a):
            src[node(0, r, c)] = rng.uniform(c1, c2)
            snk[node(b - 1, r, c)] = rng.uniform(c1, c2)
    return CutInstance(d, edges, src, snk, directed=True)


def two_moons(n_points=24, n_labeled=4, noise=0.1, bandwidth=0.3, k=6,
              label_weight=5.0, seed=0) -> CutInstance:
    """Semi-supervised clustering as a cut: kNN Gaussian similarities plus
    label unaries pulling labelled points of moon 0 into S and of moon 1 out."""
    rng = np.random.default_rng(seed)
    n0 = n_points // 2
    n1 = n_points - n0
    t0 = np.linspace(0, np.pi, n0)
    t1 = np.linspace(0, np.pi, n1)
    X = np.vstack([
        np.column_stack([np.cos(t0), np.sin(t0)]),
        np.column_stack([1 - np.cos(t1), 0.5 - np.sin(t1)]),
    ]) + rng.normal(scale=noise, size=(n_points, 2))
    labels = np.array([0] * n0 + [1] * n1)
    D2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    edges = {}
    for u in range(n_points):
        for v in np.argsort(D2[u])[1:k + 1]:
            key = (min(u, int(v)), max(u, int(v)))
            edges[key] = float(np.exp(-D2[u, v] / (2 * bandwidth ** 2)))
    src = np.zeros(n_points)
    snk = np.zeros(n_points)
    per = max(1, n_labeled // 2)
    for cls, arr in ((0, src), (1, snk)):
        idx = rng.choice(np.nonzero(labels == cls)[0], size=per, replace=False)
        arr[idx] = label_weight
    inst = CutInstance(n_points, [(u, v, w) for (u, v), w in sorted(edges.items())], src, snk)
    inst.points = X
    inst.labels = labels
    return inst


def read_dimacs(path) -> CutInstance:
    """Parse a DIMACS max-flow file into a cut over its non-terminal nodes.

    Arcs touching the source or sink become modular terms; arcs into the
    source or out of the sink can never cross an s-t cut and are dropped.
    """
    n_nodes = n_arcs = None
    source = sink = None
    arcs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line[0] == "c":
                continue
            parts = line.split()
            tag = parts[0]
            try:
                if tag == "p":
                    if len(parts) != 4 or parts[1] != "max":
                        raise DimacsParseError("expected 'p max NODES ARCS'", lineno)
                    n_nodes, n_arcs = int(parts[2]), int(parts[3])
                elif tag == "n":
                    if len(parts) != 3 or parts[2] not in ("s", "t"):
                        raise DimacsParseError("expected 'n ID s|t'", lineno)
                    if parts[2] == "s":
                        source = int(parts[1])
                    else:
                        sink = int(parts[1])
                elif tag == "a":
                    if n_nodes is None:
                        raise DimacsParseError("arc before problem line", lineno)
                    if len(parts) != 4:
                        raise DimacsParseError("expected 'a U V CAP'", lineno)
                    u, v, cap = int(parts[1]), int(parts[2]), float(parts[3])
                    if not (1 <= u <= n_nodes and 1 <= v <= n_nodes):
                        raise DimacsParseError(f"node id out of range in arc {u}->{v}", lineno)
                    if cap < 0:
                        raise DimacsParseError("negative capacity", lineno)
                    arcs.append((u, v, cap))
                else:
                    raise DimacsParseError(f"unknown line type {tag!r}", lineno)
            except ValueError as exc:
                if isinstance(exc, DimacsParseError):
                    raise
                raise DimacsParseError(str(exc), lineno) from None
    if n_nodes is None:
        raise DimacsParseError("missing problem line")
    if source is None or sink is None:
        raise DimacsParseError("missing source or sink designation")
    if n_arcs is not None and n_arcs != len(arcs):
        raise DimacsParseError(f"header declares {n_arcs} arcs, found {len(arcs)}")
    free = [v for v in range(1, n_nodes + 1) if v not in (source, sink)]
    if not free:
        raise DimacsParseError("no free nodes")
    index = {v: k for k, v in enumerate(free)}
    d = len(free)
    src = np.zeros(d)
    snk = np.zeros(d)
    edges = []
    const = 0.0
    for u, v, cap in arcs:
        if u == source and v == sink:
            const += cap
        elif u == source and v in index:
            src[index[v]] += cap
        elif v == sink and u in index:
            snk[index[u]] += cap
        elif u in index and v in index:
            edges.append((index[u], index[v], cap))
    inst = CutInstance(d, edges, src, snk, directed=True)
    inst.offset += const
    inst.node_ids = free
    inst.n_arcs = len(arcs)
    return inst


def write_dimacs(inst: CutInstance, path):
    """Inverse of read_dimacs for directed instances (source = 1, sink = d+2)."""
    s, t = 1, inst.d + 2
    lines = []
    for v in range(inst.d):
        if inst.source_caps[v]:
            lines.append(f"a {s} {v + 2} {float(inst.source_caps[v])!r}")
        if inst.sink_caps[v]:
            lines.append(f"a {v + 2} {t} {float(inst.sink_caps[v])!r}")
    for u in range(inst.d):
        for v in range(inst.d):
            if inst.W[u, v]:
                lines.append(f"a {u + 2} {v + 2} {float(inst.W[u, v])!r}")
    with open(path, "w") as fh:
        fh.write(f"p max {inst.d + 2} {len(lines)}\n")
        fh.write(f"n {s} s\nn {t} t\n")
        fh.write("\n".join(lines) + "\n")
