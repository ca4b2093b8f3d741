"""History slicing: reflexive-transitive closure and commit reconstitution.

The slice of a criterion commit is every change element reachable from the
commit's own elements over the effective edges. Commits are then rebuilt
from the closure: a commit whose commit edges were eliminated may come out
split, carrying only the files the closure actually needs; any other commit
keeps its full file set (its commit edges drag every sibling element into
the closure anyway, and binary passengers ride along).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import UnknownCriterion
from .graph import DependencyGraph, Edge
from .model import ChangeElement, CommitId, FilePath, History


@dataclass(frozen=True)
class SliceCriterion:
    commit: CommitId


@dataclass(frozen=True)
class SliceCommit:
    source: CommitId
    included_files: frozenset[FilePath]
    split: bool


@dataclass(frozen=True)
class SliceStats:
    size: int
    original_size: int

    @property
    def reduction_ratio(self) -> float:
        if self.original_size == 0:
            return 0.0
        return 1.0 - self.size / self.original_size


@dataclass(frozen=True)
class HistorySlice:
    criterion: CommitId
    elements: frozenset[ChangeElement]
    commits: tuple[SliceCommit, ...]
    stats: SliceStats


def _reachable(
    seeds: list[ChangeElement], g: DependencyGraph, ignore_elimination: bool
) -> frozenset[ChangeElement]:
    if ignore_elimination and g.eliminated:
        adjacency: dict[ChangeElement, list[ChangeElement]] = {}
        for e in g.edges:
            adjacency.setdefault(e.src, []).append(e.dst)
        successors = lambda el: adjacency.get(el, [])
    else:
        successors = g.successors
    seen: set[ChangeElement] = set(seeds)
    frontier = deque(seeds)
    while frontier:
        current = frontier.popleft()
        for nxt in successors(current):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return frozenset(seen)


def _criterion_elements(g: DependencyGraph, commit_id: CommitId) -> list[ChangeElement]:
    if commit_id not in g.history:
        raise UnknownCriterion(f"commit {commit_id!r} is not in the sliced history")
    commit = g.history.commit(commit_id)
    return [
        ChangeElement(commit.id, fc.path) for fc in commit.file_changes if not fc.binary
    ]


def _reconstitute(
    g: DependencyGraph, elements: frozenset[ChangeElement]
) -> tuple[SliceCommit, ...]:
    per_commit: dict[CommitId, set[FilePath]] = {}
    for e in elements:
        per_commit.setdefault(e.commit, set()).add(e.file)
    out = []
    for c in g.history:
        touched = per_commit.get(c.id)
        if not touched:
            continue
        full = {fc.path for fc in c.file_changes}
        sliceable = {fc.path for fc in c.file_changes if not fc.binary}
        if touched == sliceable:
            included = full  # whole commit: binary passengers are kept
        else:
            included = touched
        out.append(
            SliceCommit(
                source=c.id,
                included_files=frozenset(included),
                split=included != full,
            )
        )
    return tuple(out)


def slice(g: DependencyGraph, criterion: SliceCriterion) -> HistorySlice:
    """Closure of the criterion commit's elements over effective edges."""
    seeds = _criterion_elements(g, criterion.commit)
    closed = _reachable(seeds, g, ignore_elimination=False)
    full = (
        closed
        if not g.eliminated
        else _reachable(seeds, g, ignore_elimination=True)
    )
    return HistorySlice(
        criterion=criterion.commit,
        elements=closed,
        commits=_reconstitute(g, closed),
        stats=SliceStats(size=len(closed), original_size=len(full)),
    )


def slice_all(g: DependencyGraph, h: History) -> dict[CommitId, HistorySlice]:
    """One slice per commit, in history order."""
    return {c.id: slice(g, SliceCriterion(c.id)) for c in h}


def slice_as_dict(g: DependencyGraph, s: HistorySlice) -> dict:
    order = g.history.element_sort_key
    return {
        "criterion": s.criterion,
        "stats": {
            "size": s.stats.size,
            "original_size": s.stats.original_size,
            "reduction_ratio": round(s.stats.reduction_ratio, 6),
        },
        "elements": [
            {"commit": e.commit, "file": e.file} for e in sorted(s.elements, key=order)
        ],
        "commits": [
            {
                "commit": sc.source,
                "files": sorted(sc.included_files),
                "split": sc.split,
            }
            for sc in s.commits
        ],
    }
