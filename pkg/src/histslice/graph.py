"""Typed dependency graph over change elements.

Three edge kinds are extracted:

  textual - the element's modified line range (widened by context lines in
            its pre-image) covers a line last written by an older element of
            the same file identity chain, found by walking backward with
            line-number remapping across intervening hunks;
  build   - the element's fine-grained changes use an identifier whose
            declaration was introduced or last modified by another element,
            resolved purely by name (ambiguous names yield edges to every
            candidate declaring element, which over-approximates safely);
  commit  - every ordered pair of elements committed together.

Textual edges always point at strictly older commits. Build edges usually
do too, but may also connect two elements of one commit: that is what keeps
a falsely split commit glued together when its files genuinely need each
other. Elimination moves the commit edges of splittable commits into an
eliminated mask without touching the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional

from .detector import SystematicVerdict
from .editscripts import diff_texts, is_source_path, parse_cached
from .model import (
    ChangeElement,
    CommitId,
    FileChange,
    FilePath,
    History,
    Segment,
    change_elements,
    file_segments,
    split_lines,
)
from .syntax import import_used_names
from .treediff import Delete, Insert, Move, Update


class DepKind(Enum):
    TEXTUAL = "textual"
    BUILD = "build"
    COMMIT = "commit"


@dataclass(frozen=True)
class Edge:
    src: ChangeElement  # the dependent (newer or same-commit) element
    dst: ChangeElement  # the element it needs
    kind: DepKind


@dataclass(frozen=True)
class DependencyGraph:
    history: History
    nodes: frozenset[ChangeElement]
    edges: frozenset[Edge]
    eliminated: frozenset[Edge] = frozenset()

    @property
    def effective_edges(self) -> frozenset[Edge]:
        return self.edges - self.eliminated

    def successors(self, element: ChangeElement) -> list[ChangeElement]:
        return self._adjacency().get(element, [])

    def _adjacency(self) -> dict[ChangeElement, list[ChangeElement]]:
        cached = self.__dict__.get("_adj")
        if cached is None:
            cached = {}
            for e in sorted(
                self.effective_edges,
                key=lambda e: (
                    self.history.element_sort_key(e.src),
                    self.history.element_sort_key(e.dst),
                    e.kind.value,
                ),
            ):
                cached.setdefault(e.src, []).append(e.dst)
            object.__setattr__(self, "_adj", cached)
        return cached

    def sorted_edges(self, edges: Optional[Iterable[Edge]] = None) -> list[Edge]:
        pool = self.effective_edges if edges is None else edges
        return sorted(
            pool,
            key=lambda e: (
                self.history.element_sort_key(e.src),
                ("textual", "build", "commit").index(e.kind.value),
                self.history.element_sort_key(e.dst),
            ),
        )


# --- textual dependencies ----------------------------------------------------


def _pre_image_ranges(fc: FileChange, context: int) -> list[tuple[int, int]]:
    """Inclusive 1-based line ranges the change reads in its pre-image."""
    length = len(split_lines(fc.before_text or ""))
    ranges = []
    for h in fc.hunks:
        if h.old_len > 0:
            lo, hi = h.old_start - context, h.old_start + h.old_len - 1 + context
        elif context > 0:
            lo, hi = h.old_start - context + 1, h.old_start + context
        else:
            continue  # a pure insertion reads nothing without context
        lo, hi = max(1, lo), min(length, hi)
        if lo <= hi:
            ranges.append((lo, hi))
    return ranges


def _last_writer(seg: Segment, event_index: int, line: int) -> Optional[int]:
    """Event index of the last writer of a pre-image line, walking backward.

    The line number is remapped across each intervening change: lines above
    a hunk keep their number, lines below shift by new_len - old_len, and a
    line inside a replaced range belongs to the replacing element.
    """
    for j in range(event_index - 1, -1, -1):
        fc = seg.events[j].change
        delta = 0
        hit = False
        for h in fc.hunks:  # sorted ascending by position
            if h.new_len > 0:
                lo, hi = h.new_range
                if line < lo:
                    break
                if line <= hi:
                    hit = True
                    break
                delta += h.new_len - h.old_len
            else:
                # pure deletion sitting after post-image line new_start
                if h.new_start < line:
                    delta -= h.old_len
                else:
                    break
        if hit:
            return j
        line -= delta
    return None


def textual_deps(h: History, context: int = 3) -> set[Edge]:
    """Edges from each element to the older elements whose lines it touches."""
    if context < 0:
        raise ValueError("context must be non-negative")
    edges: set[Edge] = set()
    segments, _ = file_segments(h)
    for seg in segments:
        for idx, event in enumerate(seg.events):
            fc = event.change
            if fc.binary or idx == 0 and seg.born_in_range:
                continue
            src = ChangeElement(h.commits[event.commit_index].id, fc.path)
            writers: set[int] = set()
            for lo, hi in _pre_image_ranges(fc, context):
                for line in range(lo, hi + 1):
                    j = _last_writer(seg, idx, line)
                    if j is not None:
                        writers.add(j)
            for j in writers:
                dst_event = seg.events[j]
                dst = ChangeElement(
                    h.commits[dst_event.commit_index].id, dst_event.change.path
                )
                edges.add(Edge(src, dst, DepKind.TEXTUAL))
    return edges


def textual_deps_oracle(h: History, context: int = 0) -> set[Edge]:
    """Forward-replay reference: track per-line last writers per snapshot.

    Replays every file identity from its first snapshot, keeping an array of
    last-writer event indexes, and reads each change's pre-image range off
    the array before applying the change. Kept independent of the backward
    walk above so the two can check each other.
    """
    edges: set[Edge] = set()
    segments, _ = file_segments(h)
    for seg in segments:
        writers: list[Optional[int]] = [None] * len(
            split_lines(seg.events[0].change.before_text or "")
        )
        for idx, event in enumerate(seg.events):
            fc = event.change
            if fc.binary:
                continue
            src = ChangeElement(h.commits[event.commit_index].id, fc.path)
            hit: set[int] = set()
            for lo, hi in _pre_image_ranges(fc, context):
                for line in range(lo, hi + 1):
                    j = writers[line - 1]
                    if j is not None:
                        hit.add(j)
            for j in sorted(hit):
                dst_event = seg.events[j]
                dst = ChangeElement(
                    h.commits[dst_event.commit_index].id, dst_event.change.path
                )
                edges.add(Edge(src, dst, DepKind.TEXTUAL))
            fresh: list[Optional[int]] = []
            cursor = 0
            for h_ in fc.hunks:
                start = h_.old_start - 1 if h_.old_len > 0 else h_.old_start
                fresh.extend(writers[cursor:start])
                fresh.extend([idx] * h_.new_len)
                cursor = start + h_.old_len
            fresh.extend(writers[cursor:])
            writers = fresh
    return edges


# --- build dependencies ------------------------------------------------------


def _scan_subtree(node) -> tuple[set[str], set[str]]:
    defs: set[str] = set()
    uses: set[str] = set()
    for n in node.walk():
        if n.kind == "decl_name":
            defs.add(n.value)
        elif n.kind == "identifier":
            uses.add(n.value)
        elif n.kind == "import_decl":
            uses.update(import_used_names(n.value))
    return defs, uses


def _defs_uses(fc: FileChange) -> tuple[set[str], set[str]]:
    """Names declared and referenced by the fine-grained changes of a file."""
    if fc.binary or not is_source_path(fc.path):
        return set(), set()
    if fc.kind == "deleted":
        return set(), set()
    if fc.kind == "added":
        tree = parse_cached(fc.after_text or "")
        if not tree.ok:
            return set(), set()
        return _scan_subtree(tree.root)
    diffed = diff_texts(fc.before_text or "", fc.after_text or "")
    if diffed is None:
        return set(), set()
    _, _, ops = diffed
    defs: set[str] = set()
    uses: set[str] = set()
    for op in ops:
        if isinstance(op, Delete):
            continue
        node = op.after_node if isinstance(op, (Update, Move)) else op.node
        if isinstance(op, Move):
            d, u = _scan_subtree(node)
            defs |= d
            uses |= u
        elif node.kind == "decl_name":
            defs.add(node.value)
        elif node.kind == "identifier":
            uses.add(node.value)
        elif node.kind == "import_decl":
            uses.update(import_used_names(node.value))
    return defs, uses


def build_deps(h: History) -> set[Edge]:
    """Def-use edges: a use points at every candidate declaring element.

    The registry keeps, per (name, file), the element that last introduced
    or modified a declaration of that name. Declarations made by the same
    commit are visible to its sibling elements, so intra-commit coupling is
    kept even if the commit's commit edges later get eliminated.
    """
    edges: set[Edge] = set()
    registry: dict[str, dict[FilePath, ChangeElement]] = {}
    for c in h:
        commit_defs: list[tuple[str, FilePath, ChangeElement]] = []
        commit_uses: list[tuple[ChangeElement, set[str]]] = []
        for fc in c.file_changes:
            element = ChangeElement(c.id, fc.path)
            defs, uses = _defs_uses(fc)
            for name in defs:
                commit_defs.append((name, fc.path, element))
            if uses:
                commit_uses.append((element, uses))
        # register first so sibling elements of this commit resolve each other
        for name, path, element in commit_defs:
            registry.setdefault(name, {})[path] = element
        for element, uses in commit_uses:
            for name in uses:
                for candidate in registry.get(name, {}).values():
                    if candidate != element:
                        edges.add(Edge(element, candidate, DepKind.BUILD))
    return edges


# --- commit dependencies and assembly ---------------------------------------


def commit_deps(h: History) -> set[Edge]:
    """All ordered pairs of elements inside one commit, self-loops excluded."""
    edges: set[Edge] = set()
    for c in h:
        elements = [
            ChangeElement(c.id, fc.path) for fc in c.file_changes if not fc.binary
        ]
        for a in elements:
            for b in elements:
                if a != b:
                    edges.add(Edge(a, b, DepKind.COMMIT))
    return edges


def build_graph(h: History, context: int = 3, with_build: bool = True) -> DependencyGraph:
    edges = textual_deps(h, context) | commit_deps(h)
    if with_build:
        edges |= build_deps(h)
    return DependencyGraph(
        history=h, nodes=change_elements(h), edges=frozenset(edges)
    )


def eliminate(
    g: DependencyGraph, verdicts: dict[CommitId, SystematicVerdict]
) -> DependencyGraph:
    """Mask the commit edges of every splittable commit."""
    missing = {e.src.commit for e in g.edges if e.kind == DepKind.COMMIT} - set(verdicts)
    if missing:
        raise ValueError(f"verdicts missing for commits: {sorted(missing)}")
    masked = frozenset(
        e
        for e in g.edges
        if e.kind == DepKind.COMMIT and verdicts[e.src.commit].splittable
    )
    return replace(g, eliminated=masked)


# --- export ------------------------------------------------------------------


def edges_as_text(g: DependencyGraph, include_eliminated: bool = False) -> str:
    pool = g.edges if include_eliminated else g.effective_edges
    lines = [
        f"{e.src.commit}:{e.src.file}\t{e.kind.value}\t{e.dst.commit}:{e.dst.file}"
        for e in g.sorted_edges(pool)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def graph_as_dict(g: DependencyGraph) -> dict:
    def elem(e: ChangeElement) -> dict:
        return {"commit": e.commit, "file": e.file}

    def edge(e: Edge) -> dict:
        return {"from": elem(e.src), "kind": e.kind.value, "to": elem(e.dst)}

    nodes = sorted(g.nodes, key=g.history.element_sort_key)
    return {
        "nodes": [elem(n) for n in nodes],
        "edges": [edge(e) for e in g.sorted_edges(g.edges)],
        "eliminated": [edge(e) for e in g.sorted_edges(g.eliminated)],
    }
