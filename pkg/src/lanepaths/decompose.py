"""Maximal-path decomposition of a successor lane graph."""
from __future__ import annotations

from .curves import Polyline
from .graph import LaneGraph, errors

DEFAULT_MAX_PATHS = 256

NodePath = tuple[int, ...]


class CycleDetectedError(ValueError):
    pass


class PathBudgetExceeded(ValueError):
    pass


def decompose(g: LaneGraph, max_paths: int = DEFAULT_MAX_PATHS) -> list[NodePath]:
    """Enumerate every root-to-terminal traversal of ``g``.

    Successors are visited in ascending id order, so the output comes out
    lexicographically sorted.  Nodes not reachable from the root are ignored.
    Raises :class:`PathBudgetExceeded` as soon as more than ``max_paths``
    traversals exist.
    """
    if max_paths < 1:
        raise ValueError("max_paths must be positive")
    if any(v.kind == "cycle" for v in errors(g)):
        raise CycleDetectedError("cycle detected")
    if g.root is None or g.root not in g:
        return []

    paths: list[NodePath] = []
    # explicit stack of (node, index of next successor to try)
    trail = [g.root]
    stack = [(g.root, 0)]
    while stack:
        v, i = stack[-1]
        succ = g.successors(v)
        if not succ:
            paths.append(tuple(trail))
            if len(paths) > max_paths:
                raise PathBudgetExceeded(f"path budget exceeded: more than {max_paths} paths")
            stack.pop()
            trail.pop()
            continue
        if i == len(succ):
            stack.pop()
            trail.pop()
            continue
        stack[-1] = (v, i + 1)
        w = succ[i]
        stack.append((w, 0))
        trail.append(w)
    return paths


def count_paths(g: LaneGraph) -> int:
    """Number of root-to-terminal paths, by memoised recursion over the DAG."""
    if g.root is None or g.root not in g:
        return 0
    memo: dict[int, int] = {}
    order: list[int] = []
    seen = set()
    todo = [(g.root, False)]
    while todo:
        v, done = todo.pop()
        if done:
            order.append(v)
            continue
        if v in seen:
            continue
        seen.add(v)
        todo.append((v, True))
        todo.extend((w, False) for w in g.successors(v) if w not in seen)
    for v in order:  # post-order: successors first
        succ = g.successors(v)
        memo[v] = 1 if not succ else sum(memo[w] for w in succ)
    return memo[g.root]


def path_to_polyline(g: LaneGraph, path: NodePath) -> Polyline:
    return Polyline([g.position(v) for v in path])


def path_points(g: LaneGraph, path: NodePath) -> list[tuple[float, float]]:
    """Node positions along ``path``; unlike a Polyline this accepts one node."""
    return [g.position(v) for v in path]
