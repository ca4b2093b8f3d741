"""Normalized model of a linear commit history.

Commits carry per-file changes with full before/after texts and line hunks.
Everything here is immutable once built, so a History can be shared freely
by the downstream analysis passes.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from typing import Iterable, Optional

CommitId = str
FilePath = str

ADDED = "added"
MODIFIED = "modified"
DELETED = "deleted"
RENAMED = "renamed"

CHANGE_KINDS = (ADDED, MODIFIED, DELETED, RENAMED)


def normalize_newlines(text: str) -> str:
    """Normalize CRLF and lone CR to LF."""
    return text.replace("\r\n", "\n").replace("\r", "\n")


def split_lines(text: str) -> list[str]:
    """Split into lines without terminators.

    A trailing newline does not produce an empty final line, so the presence
    or absence of a terminating newline is carried solely by the text itself.
    """
    if text == "":
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return lines


def join_lines(lines: Iterable[str], newline_at_eof: bool = True) -> str:
    body = "\n".join(lines)
    if body and newline_at_eof:
        body += "\n"
    return body


def missing_final_newline(text: Optional[str]) -> bool:
    return bool(text) and not text.endswith("\n")


def tagged_lines(text: str) -> list[tuple[str, bool]]:
    """Lines paired with a no-final-newline flag on the last one.

    Tagging makes a trailing-newline-only change visible to line diffs as a
    rewrite of the final line instead of disappearing entirely.
    """
    lines = split_lines(text)
    if not lines:
        return []
    flag = missing_final_newline(text)
    return [(line, False) for line in lines[:-1]] + [(lines[-1], flag)]


@dataclass(frozen=True)
class Hunk:
    """One contiguous line edit, in unified-diff coordinates.

    old_start/new_start are 1-based first lines of the replaced ranges; a
    zero-length side uses the line number after which the edit happens
    (0 when editing at the top of the file), matching diff headers.
    """

    old_start: int
    old_len: int
    new_start: int
    new_len: int
    old_lines: tuple[str, ...]
    new_lines: tuple[str, ...]

    def __post_init__(self):
        if self.old_len != len(self.old_lines) or self.new_len != len(self.new_lines):
            raise ValueError("hunk length fields must match the carried lines")
        if self.old_len + self.new_len < 1:
            raise ValueError("empty hunk")

    @property
    def old_range(self) -> tuple[int, int]:
        """Inclusive 1-based pre-image range; (x, x-1) when old side is empty."""
        return (self.old_start, self.old_start + self.old_len - 1)

    @property
    def new_range(self) -> tuple[int, int]:
        return (self.new_start, self.new_start + self.new_len - 1)


def diff_hunks(before_lines: list[str], after_lines: list[str]) -> tuple[Hunk, ...]:
    """Compute minimal hunks between two line lists with an LCS line diff."""
    matcher = difflib.SequenceMatcher(a=before_lines, b=after_lines, autojunk=False)
    hunks = []
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            continue
        hunks.append(
            Hunk(
                old_start=i1 + 1 if i2 > i1 else i1,
                old_len=i2 - i1,
                new_start=j1 + 1 if j2 > j1 else j1,
                new_len=j2 - j1,
                old_lines=tuple(before_lines[i1:i2]),
                new_lines=tuple(after_lines[j1:j2]),
            )
        )
    return tuple(hunks)


def change_hunks(before_text: Optional[str], after_text: Optional[str]) -> tuple[Hunk, ...]:
    """Hunks between two file snapshots; empty exactly when the texts match."""
    before_tagged = tagged_lines(before_text or "")
    after_tagged = tagged_lines(after_text or "")
    matcher = difflib.SequenceMatcher(a=before_tagged, b=after_tagged, autojunk=False)
    hunks = []
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            continue
        hunks.append(
            Hunk(
                old_start=i1 + 1 if i2 > i1 else i1,
                old_len=i2 - i1,
                new_start=j1 + 1 if j2 > j1 else j1,
                new_len=j2 - j1,
                old_lines=tuple(t[0] for t in before_tagged[i1:i2]),
                new_lines=tuple(t[0] for t in after_tagged[j1:j2]),
            )
        )
    return tuple(hunks)


def apply_hunks(before_lines: list[str], hunks: Iterable[Hunk]) -> list[str]:
    """Apply hunks to a pre-image; raises ValueError on a pre-image mismatch."""
    out: list[str] = []
    cursor = 0  # 0-based index into before_lines
    for h in hunks:
        start = h.old_start - 1 if h.old_len > 0 else h.old_start
        if start < cursor:
            raise ValueError("hunks overlap or are out of order")
        out.extend(before_lines[cursor:start])
        actual = tuple(before_lines[start : start + h.old_len])
        if actual != h.old_lines:
            raise ValueError(f"pre-image mismatch at line {h.old_start}")
        out.extend(h.new_lines)
        cursor = start + h.old_len
    out.extend(before_lines[cursor:])
    return out


@dataclass(frozen=True)
class FileChange:
    path: FilePath
    kind: str
    hunks: tuple[Hunk, ...] = ()
    old_path: Optional[FilePath] = None
    before_text: Optional[str] = None
    after_text: Optional[str] = None
    binary: bool = False

    def __post_init__(self):
        if self.kind not in CHANGE_KINDS:
            raise ValueError(f"unknown change kind {self.kind!r}")
        if self.kind == RENAMED and not self.old_path:
            raise ValueError("renamed change needs old_path")
        if not self.binary:
            if self.kind == ADDED and self.before_text is not None:
                raise ValueError("added file cannot have a before text")
            if self.kind == DELETED and self.after_text is not None:
                raise ValueError("deleted file cannot have an after text")

    @property
    def source_path(self) -> FilePath:
        """The path this change reads from (the old name for renames)."""
        return self.old_path if self.kind == RENAMED else self.path


@dataclass(frozen=True)
class Commit:
    id: CommitId
    parent: Optional[CommitId]
    message: str
    timestamp: int
    file_changes: tuple[FileChange, ...]

    def __post_init__(self):
        if not self.id:
            raise ValueError("empty commit id")
        if not self.file_changes:
            raise ValueError(f"commit {self.id} carries no file changes")
        paths = [fc.path for fc in self.file_changes]
        if len(set(paths)) != len(paths):
            raise ValueError(f"duplicate paths in commit {self.id}")

    def change(self, path: FilePath) -> FileChange:
        for fc in self.file_changes:
            if fc.path == path:
                return fc
        raise KeyError(f"{self.id} does not change {path}")


@dataclass(frozen=True)
class ChangeElement:
    """A (commit, file) pair; the atomic unit the slicer works on."""

    commit: CommitId
    file: FilePath

    def __str__(self):
        return f"{self.commit}:{self.file}"


class History:
    """A strictly linear sequence of commits, oldest first.

    The parent field of each commit refers to the previous commit kept in
    the model (empty commits are dropped at ingest), so the chain is always
    locally consistent even when the underlying repository had fillers.
    """

    def __init__(self, commits: Iterable[Commit]):
        self.commits: tuple[Commit, ...] = tuple(commits)
        ids = [c.id for c in self.commits]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate commit ids in history")
        for prev, cur in zip(self.commits, self.commits[1:]):
            if cur.parent != prev.id:
                raise ValueError(
                    f"commit {cur.id} does not chain onto {prev.id}; history not linear"
                )
        if self.commits and self.commits[0].parent is not None:
            # the first commit's parent lies outside the range by definition
            pass
        self.position: dict[CommitId, int] = {c.id: i for i, c in enumerate(self.commits)}

    def __len__(self):
        return len(self.commits)

    def __iter__(self):
        return iter(self.commits)

    def __eq__(self, other):
        return isinstance(other, History) and self.commits == other.commits

    @property
    def first(self) -> CommitId:
        return self.commits[0].id

    @property
    def last(self) -> CommitId:
        return self.commits[-1].id

    def __contains__(self, commit_id: CommitId) -> bool:
        return commit_id in self.position

    def commit(self, commit_id: CommitId) -> Commit:
        return self.commits[self.position[commit_id]]

    def element_sort_key(self, e: ChangeElement) -> tuple[int, str]:
        return (self.position[e.commit], e.file)


def change_elements(h: History) -> frozenset[ChangeElement]:
    """One element per (commit, changed text file); binary files carry none."""
    out = set()
    for c in h:
        for fc in c.file_changes:
            if fc.binary:
                continue
            out.add(ChangeElement(c.id, fc.path))
    return frozenset(out)


@dataclass
class SegmentEvent:
    commit_index: int
    change: FileChange


@dataclass
class Segment:
    """The life of one file identity across the history.

    Renames keep the identity alive under a new name; a delete closes it and
    a later add of the same path starts a fresh identity.
    """

    events: list[SegmentEvent] = field(default_factory=list)
    born_in_range: bool = False

    def path_at(self, event_index: int) -> FilePath:
        return self.events[event_index].change.path


def file_segments(
    h: History,
) -> tuple[list[Segment], dict[tuple[CommitId, FilePath], tuple[Segment, int]]]:
    """Group file changes into identity segments, following renames."""
    segments: list[Segment] = []
    live: dict[FilePath, Segment] = {}
    locate: dict[tuple[CommitId, FilePath], tuple[Segment, int]] = {}

    for i, c in enumerate(h):
        for fc in c.file_changes:
            if fc.kind == ADDED:
                seg = Segment(born_in_range=True)
                segments.append(seg)
                live[fc.path] = seg
            elif fc.kind == RENAMED:
                seg = live.pop(fc.old_path, None)
                if seg is None:
                    seg = Segment(born_in_range=False)
                    segments.append(seg)
                live[fc.path] = seg
            else:
                seg = live.get(fc.path)
                if seg is None:
                    seg = Segment(born_in_range=False)
                    segments.append(seg)
                    live[fc.path] = seg
                if fc.kind == DELETED:
                    live.pop(fc.path, None)
            seg.events.append(SegmentEvent(i, fc))
            locate[(c.id, fc.path)] = (seg, len(seg.events) - 1)
    return segments, locate


def base_snapshot(h: History) -> dict[FilePath, str]:
    """File texts at the start of the range, for files the history touches."""
    segments, _ = file_segments(h)
    base: dict[FilePath, str] = {}
    for seg in segments:
        if seg.born_in_range:
            continue
        first = seg.events[0].change
        if first.binary or first.before_text is None:
            continue
        base[first.source_path] = first.before_text
    return base


def final_snapshot(h: History) -> dict[FilePath, str]:
    """File texts after the last commit, for files the history touches."""
    snapshot: dict[FilePath, str] = dict(base_snapshot(h))
    for c in h:
        for fc in c.file_changes:
            if fc.binary:
                continue
            if fc.kind == DELETED:
                snapshot.pop(fc.path, None)
                continue
            if fc.kind == RENAMED:
                snapshot.pop(fc.old_path, None)
            snapshot[fc.path] = fc.after_text or ""
    return snapshot


def validate_continuity(h: History) -> None:
    """Check that consecutive changes of one file identity chain snapshots.

    Raises ValueError naming the first offending (commit, path).
    """
    segments, _ = file_segments(h)
    for seg in segments:
        for prev, cur in zip(seg.events, seg.events[1:]):
            if prev.change.binary or cur.change.binary:
                continue
            if prev.change.after_text != cur.change.before_text:
                commit = h.commits[cur.commit_index].id
                raise ValueError(
                    f"{commit}:{cur.change.path} before-text does not match the "
                    f"previous change of the same file"
                )
