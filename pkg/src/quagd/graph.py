"""Directed graph representation, random generation, and structural queries.

Edges are stored as ordered pairs ``(receiver, sender)``: the pair (j, i)
means node i can transmit to node j.  Every node additionally holds an
implicit self-edge, which is never stored explicitly; out-degree counts
distinct out-neighbors excluding self.
"""

from __future__ import annotations

import random
from collections import deque
from typing import Iterable, Optional


class GraphError(ValueError):
    """Malformed graph or a structural precondition failure."""


class NotStronglyConnectedError(GraphError):
    """Raised when an operation requires strong connectivity.

    Carries one witness ``pair = (source, target)`` with no directed path.
    """

    def __init__(self, pair: tuple[int, int]):
        self.pair = pair
        super().__init__(
            f"graph is not strongly connected: no directed path "
            f"from node {pair[0]} to node {pair[1]}"
        )


class Digraph:
    """Immutable digraph on nodes 0..n-1 with implicit self-edges."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 2:
            raise GraphError(f"need at least 2 nodes, got {n}")
        self.n = n
        edge_set = set()
        for recv, send in edges:
            if not (0 <= recv < n and 0 <= send < n):
                raise GraphError(f"edge ({recv}, {send}) out of range for n={n}")
            if recv == send:
                continue  # self-edges are implicit
            edge_set.add((recv, send))
        self.edges = frozenset(edge_set)
        self._out = [[] for _ in range(n)]
        self._in = [[] for _ in range(n)]
        for recv, send in sorted(edge_set):
            self._out[send].append(recv)
            self._in[recv].append(send)

    def out_neighbors(self, j: int) -> list[int]:
        """Nodes that can receive from j (self excluded)."""
        return self._out[j]

    def in_neighbors(self, j: int) -> list[int]:
        """Nodes that can transmit to j (self excluded)."""
        return self._in[j]

    def out_degree(self, j: int) -> int:
        return len(self._out[j])

    def __eq__(self, other):
        return (
            isinstance(other, Digraph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __repr__(self):
        return f"Digraph(n={self.n}, m={len(self.edges)})"


def _bfs_dists(g: Digraph, source: int) -> list[int]:
    """Shortest directed path lengths from source; -1 if unreachable."""
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.out_neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def find_unreachable_pair(g: Digraph) -> Optional[tuple[int, int]]:
    """Return some ordered pair (i, j) with no directed path i -> j, or None."""
    # Forward and backward reachability from node 0 suffice: every pair is
    # connected through node 0 iff both sweeps cover the whole graph.
    fwd = _bfs_dists(g, 0)
    for j, d in enumerate(fwd):
        if d < 0:
            return (0, j)
    rev = Digraph(g.n, ((s, r) for r, s in g.edges))
    bwd = _bfs_dists(rev, 0)
    for i, d in enumerate(bwd):
        if d < 0:
            return (i, 0)
    return None


def is_strongly_connected(g: Digraph) -> bool:
    """True iff a directed path exists between every ordered node pair."""
    return find_unreachable_pair(g) is None


def diameter(g: Digraph) -> int:
    """Longest shortest directed path over all ordered node pairs.

    Self-edges do not shorten paths between distinct nodes.  Rejects
    non-strongly-connected input.
    """
    worst = 0
    for source in range(g.n):
        dist = _bfs_dists(g, source)
        for target, d in enumerate(dist):
            if d < 0:
                raise NotStronglyConnectedError((source, target))
            worst = max(worst, d)
    return worst


def generate_random_strongly_connected(
    n: int, extra_edge_prob: float, seed: int
) -> Digraph:
    """Random strongly connected digraph, deterministic in seed.

    Plants a directed Hamiltonian cycle through a random node permutation,
    then adds each remaining ordered pair independently with probability
    extra_edge_prob.
    """
    if n < 2:
        raise GraphError(f"need at least 2 nodes, got {n}")
    if not (0.0 <= extra_edge_prob <= 1.0):
        raise GraphError(f"extra_edge_prob must be in [0, 1], got {extra_edge_prob}")
    rng = random.Random(seed)
    perm = list(range(n))
    rng.shuffle(perm)
    edges = set()
    for idx in range(n):
        sender = perm[idx]
        receiver = perm[(idx + 1) % n]
        edges.add((receiver, sender))
    for sender in range(n):
        for receiver in range(n):
            if receiver == sender or (receiver, sender) in edges:
                continue
            if rng.random() < extra_edge_prob:
                edges.add((receiver, sender))
    return Digraph(n, edges)


def write_edge_list(g: Digraph, path: str) -> None:
    """Write the plain-text edge-list format: `n <count>` header, then one
    `receiver sender` pair per line."""
    with open(path, "w") as fh:
        fh.write(f"n {g.n}\n")
        for recv, send in sorted(g.edges):
            fh.write(f"{recv} {send}\n")


def read_edge_list(path: str) -> Digraph:
    """Parse the edge-list format written by write_edge_list."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("n "):
        raise GraphError(f"{path}: missing `n <count>` header line")
    try:
        n = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise GraphError(f"{path}: bad header line {lines[0]!r}") from None
    edges = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise GraphError(f"{path}:{lineno}: expected `receiver sender`, got {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphError(f"{path}:{lineno}: non-integer node id in {ln!r}") from None
    return Digraph(n, edges)
