"""Linear-time planarity testing via the left-right criterion.

A DFS orientation splits edges into tree and back edges; the graph is planar
iff the back edges admit a left/right two-coloring in which same-side return
edges nest and opposite-side ones may interleave.  The test maintains a stack
of conflict pairs (intervals of return edges forced to opposite sides) and
fails exactly when an interval pair cannot be untangled.

Dependency-free on purpose: the test doubles as the validity predicate inside
reward evaluation, so it sits on the hot path of oracle scoring.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field


@dataclass
class _Interval:
    """A run of return edges, identified by its extreme edges."""

    low: tuple | None = None
    high: tuple | None = None

    def empty(self) -> bool:
        return self.low is None and self.high is None


@dataclass
class _ConflictPair:
    left: _Interval = field(default_factory=_Interval)
    right: _Interval = field(default_factory=_Interval)

    def swap(self):
        self.left, self.right = self.right, self.left


class _NotPlanar(Exception):
    pass


class _LeftRightTest:
    def __init__(self, n: int, edges: list[tuple[int, int]]):
        self.n = n
        self.adj: list[list[int]] = [[] for _ in range(n)]
        seen = set()
        for u, v in edges:
            if u == v or (u, v) in seen:
                continue
            seen.add((u, v))
            seen.add((v, u))
            self.adj[u].append(v)
            self.adj[v].append(u)
        self.m = len(seen) // 2

        self.height: list[int | None] = [None] * n
        self.parent_edge: list[tuple | None] = [None] * n
        self.oriented: list[list[int]] = [[] for _ in range(n)]
        self.lowpt: dict[tuple, int] = {}
        self.lowpt2: dict[tuple, int] = {}
        self.nesting: dict[tuple, int] = {}
        self.visited_edge: set = set()

        self.stack: list[_ConflictPair] = []
        self.stack_bottom: dict[tuple, _ConflictPair | None] = {}
        self.lowpt_edge: dict[tuple, tuple] = {}
        self.ref: dict[tuple, tuple | None] = {}

    def run(self) -> bool:
        if self.n > 2 and self.m > 3 * self.n - 6:
            return False
        limit = sys.getrecursionlimit()
        if self.n + 64 > limit:
            sys.setrecursionlimit(self.n * 2 + 64)
        try:
            for s in range(self.n):
                if self.height[s] is None:
                    self.height[s] = 0
                    self._orient(s)
            for v in range(self.n):
                self.oriented[v].sort(key=lambda w: self.nesting[(v, w)])
            for s in range(self.n):
                if self.parent_edge[s] is None:
                    self._test(s)
        except _NotPlanar:
            return False
        finally:
            sys.setrecursionlimit(limit)
        return True

    # -- phase 1: orientation, lowpoints, nesting order --

    def _orient(self, v: int):
        e = self.parent_edge[v]
        for w in self.adj[v]:
            if (v, w) in self.visited_edge or (w, v) in self.visited_edge:
                continue
            ew = (v, w)
            self.visited_edge.add(ew)
            self.oriented[v].append(w)
            self.lowpt[ew] = self.height[v]
            self.lowpt2[ew] = self.height[v]
            if self.height[w] is None:
                self.parent_edge[w] = ew
                self.height[w] = self.height[v] + 1
                self._orient(w)
            else:
                self.lowpt[ew] = self.height[w]
            self.nesting[ew] = 2 * self.lowpt[ew]
            if self.lowpt2[ew] < self.height[v]:
                self.nesting[ew] += 1  # chordal edges nest deeper
            if e is not None:
                if self.lowpt[ew] < self.lowpt[e]:
                    self.lowpt2[e] = min(self.lowpt[e], self.lowpt2[ew])
                    self.lowpt[e] = self.lowpt[ew]
                elif self.lowpt[ew] > self.lowpt[e]:
                    self.lowpt2[e] = min(self.lowpt2[e], self.lowpt[ew])
                else:
                    self.lowpt2[e] = min(self.lowpt2[e], self.lowpt2[ew])

    # -- phase 2: constraint stack --

    def _top(self) -> _ConflictPair | None:
        return self.stack[-1] if self.stack else None

    def _conflicting(self, interval: _Interval, b: tuple) -> bool:
        return not interval.empty() and self.lowpt[interval.high] > self.lowpt[b]

    def _lowest(self, pair: _ConflictPair) -> int:
        if pair.left.empty():
            return self.lowpt[pair.right.low]
        if pair.right.empty():
            return self.lowpt[pair.left.low]
        return min(self.lowpt[pair.left.low], self.lowpt[pair.right.low])

    def _test(self, v: int):
        e = self.parent_edge[v]
        first = True
        for w in self.oriented[v]:
            ei = (v, w)
            self.stack_bottom[ei] = self._top()
            if ei == self.parent_edge[w]:
                self._test(w)
            else:
                self.lowpt_edge[ei] = ei
                self.stack.append(_ConflictPair(right=_Interval(ei, ei)))
            if self.lowpt[ei] < self.height[v]:
                if first:
                    self.lowpt_edge[e] = self.lowpt_edge[ei]
                else:
                    self._add_constraints(ei, e)
            first = False
        if e is not None:
            u = e[0]
            self._trim(u)
            if self.lowpt[e] < self.height[u]:
                top = self._top()
                hl = top.left.high
                hr = top.right.high
                if hl is not None and (hr is None or self.lowpt[hl] > self.lowpt[hr]):
                    self.ref[e] = hl
                else:
                    self.ref[e] = hr

    def _add_constraints(self, ei: tuple, e: tuple):
        pair = _ConflictPair()
        # return edges of ei all go to one side
        while True:
            q = self.stack.pop()
            if not q.left.empty():
                q.swap()
            if not q.left.empty():
                raise _NotPlanar
            if self.lowpt[q.right.low] > self.lowpt[e]:
                if pair.right.empty():
                    pair.right.high = q.right.high
                else:
                    self.ref[pair.right.low] = q.right.high
                pair.right.low = q.right.low
            else:
                self.ref[q.right.low] = self.lowpt_edge[e]
            if self._top() is self.stack_bottom[ei]:
                break
        # earlier siblings' return edges that interleave must take the other side
        while self._conflicting(self._top().left, ei) or self._conflicting(self._top().right, ei):
            q = self.stack.pop()
            if self._conflicting(q.right, ei):
                q.swap()
            if self._conflicting(q.right, ei):
                raise _NotPlanar
            self.ref[pair.right.low] = q.right.high
            if q.right.low is not None:
                pair.right.low = q.right.low
            if pair.left.empty():
                pair.left.high = q.left.high
            else:
                self.ref[pair.left.low] = q.left.high
            pair.left.low = q.left.low
        if not (pair.left.empty() and pair.right.empty()):
            self.stack.append(pair)

    def _trim(self, u: int):
        """Drop return edges ending at ``u`` once the DFS retreats past it."""
        h = self.height[u]
        while self.stack and self._lowest(self.stack[-1]) == h:
            self.stack.pop()
        if self.stack:
            pair = self.stack.pop()
            while pair.left.high is not None and pair.left.high[1] == u:
                pair.left.high = self.ref.get(pair.left.high)
            if pair.left.high is None and pair.left.low is not None:
                self.ref[pair.left.low] = pair.right.low
                pair.left.low = None
            while pair.right.high is not None and pair.right.high[1] == u:
                pair.right.high = self.ref.get(pair.right.high)
            if pair.right.high is None and pair.right.low is not None:
                self.ref[pair.right.low] = pair.left.low
                pair.right.low = None
            if not (pair.left.empty() and pair.right.empty()):
                self.stack.append(pair)


def is_planar_adjacency(n: int, edges: list[tuple[int, int]]) -> bool:
    """Planarity of the simple undirected graph on ``n`` vertices."""
    if n <= 4:
        return True
    return _LeftRightTest(n, edges).run()
