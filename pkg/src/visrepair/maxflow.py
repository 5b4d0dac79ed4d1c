"""Deterministic Dinic max-flow on exact integer capacities."""
from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple


def to_integer_capacities(values: Iterable[float]) -> Tuple[List[Optional[int]], int]:
    """Scale finite float capacities to integers exactly (floats are dyadic).

    ``None`` stands for an infinite capacity and is passed through.
    Returns the scaled list and the common scale factor.
    """
    fr = [None if v is None else Fraction(v) for v in values]
    scale = 1
    for f in fr:
        if f is not None and f.denominator > scale:
            scale = f.denominator  # all denominators are powers of two
    return [None if f is None else int(f * scale) for f in fr], scale


class MaxFlow:
    def __init__(self, n: int):
        self.n = n
        self.head: List[List[int]] = [[] for _ in range(n)]
        self.to: List[int] = []
        self.cap: List[Optional[int]] = []

    def add_edge(self, u: int, v: int, cap: Optional[int], rev_cap: Optional[int] = 0) -> None:
        """Arc u->v (and v->u with ``rev_cap``); ``None`` means infinite."""
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(rev_cap)

    def _residual(self, e: int) -> bool:
        c = self.cap[e]
        return c is None or c > 0

    def _bfs(self, s: int, t: int):
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.head[u]:
                v = self.to[e]
                if level[v] < 0 and self._residual(e):
                    level[v] = level[u] + 1
                    q.append(v)
        return level if level[t] >= 0 else None

    def _augment(self, s: int, t: int, level, it) -> int:
        # iterative DFS along the level graph; returns the pushed amount
        path: List[int] = []
        u = s
        while True:
            if u == t:
                f = None
                for e in path:
                    c = self.cap[e]
                    if c is not None and (f is None or c < f):
                        f = c
                if f is None:
                    raise ValueError("infinite-capacity path from source to sink")
                for e in path:
                    if self.cap[e] is not None:
                        self.cap[e] -= f
                    if self.cap[e ^ 1] is not None:
                        self.cap[e ^ 1] += f
                return f
            advanced = False
            while it[u] < len(self.head[u]):
                e = self.head[u][it[u]]
                v = self.to[e]
                if level[v] == level[u] + 1 and self._residual(e):
                    path.append(e)
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                if u == s:
                    return 0
                level[u] = -1  # dead end: prune it from this phase
                e = path.pop()
                u = self.to[e ^ 1]
                it[u] += 1

    def max_flow(self, s: int, t: int) -> int:
        total = 0
        while True:
            level = self._bfs(s, t)
            if level is None:
                return total
            it = [0] * self.n
            while True:
                f = self._augment(s, t, level, it)
                if f == 0:
                    break
                total += f

    def reaches(self, t: int) -> List[bool]:
        """Nodes that can still reach ``t`` in the residual graph."""
        radj: Dict[int, List[int]] = {}
        for u in range(self.n):
            for e in self.head[u]:
                if self._residual(e):
                    radj.setdefault(self.to[e], []).append(u)
        seen = [False] * self.n
        seen[t] = True
        q = deque([t])
        while q:
            v = q.popleft()
            for u in radj.get(v, ()):
                if not seen[u]:
                    seen[u] = True
                    q.append(u)
        return seen
