"""Location-free edit scripts, grouped by the member that was edited.

An abstract script keeps the change type, the node kind and the before and
after code fragments of the changed node, and nothing else. Two equal edits
applied in different files, members or lines therefore compare equal, which
is exactly what uniform-commit detection needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .model import Commit, CommitId, FileChange, FilePath, History
from .syntax import MemberInfo, SyntaxTree, enclosing_member, member_index, parse
from .treediff import Delete, EditOp, Insert, Move, Update, tree_diff

SOURCE_SUFFIXES = (".java",)

NON_MEMBER = "non-member"


@dataclass(frozen=True)
class MemberKey:
    file: FilePath
    member_kind: str
    signature: str

    def __str__(self):
        return f"{self.file}#{self.member_kind}#{self.signature}"


@dataclass(frozen=True)
class AbstractEditScript:
    change_type: str  # insert, delete, update, move
    before_fragment: str
    after_fragment: str
    node_kind: str

    def __post_init__(self):
        if self.change_type == "insert" and self.before_fragment:
            raise ValueError("insert scripts carry no before fragment")
        if self.change_type == "delete" and self.after_fragment:
            raise ValueError("delete scripts carry no after fragment")
        if self.change_type in ("update", "move") and not (
            self.before_fragment and self.after_fragment
        ):
            raise ValueError(f"{self.change_type} scripts need both fragments")

    @property
    def structural_subject(self) -> tuple[str, str]:
        return (self.before_fragment, self.after_fragment)

    def as_dict(self) -> dict:
        return {
            "change_type": self.change_type,
            "before": self.before_fragment,
            "after": self.after_fragment,
            "node_kind": self.node_kind,
        }


@dataclass
class CommitEditSummary:
    commit: CommitId
    per_member: dict[MemberKey, frozenset[AbstractEditScript]]
    non_member_scripts: frozenset[AbstractEditScript]
    syntax_identical: bool
    file_count: int
    # (path, reason) pairs that disqualify the commit from a systematic
    # verdict: unparseable sources, whole-file adds/deletes, non-source files
    blockers: tuple[tuple[FilePath, str], ...] = ()

    def as_dict(self) -> dict:
        return {
            "commit": self.commit,
            "syntax_identical": self.syntax_identical,
            "file_count": self.file_count,
            "blockers": [list(b) for b in self.blockers],
            "non_member": sorted(
                (s.as_dict() for s in self.non_member_scripts),
                key=lambda d: sorted(d.items()),
            ),
            "per_member": {
                str(k): sorted((s.as_dict() for s in v), key=lambda d: sorted(d.items()))
                for k, v in sorted(
                    self.per_member.items(),
                    key=lambda kv: (kv[0].file, kv[0].member_kind, kv[0].signature),
                )
            },
        }


def is_source_path(path: FilePath) -> bool:
    return path.endswith(SOURCE_SUFFIXES)


@lru_cache(maxsize=512)
def parse_cached(source: str) -> SyntaxTree:
    return parse(source)


@lru_cache(maxsize=256)
def diff_texts(before: str, after: str):
    """Parse and diff two file snapshots; None when either fails to parse."""
    before_tree = parse_cached(before)
    after_tree = parse_cached(after)
    if not before_tree.ok or not after_tree.ok:
        return None
    return before_tree, after_tree, tuple(tree_diff(before_tree, after_tree))


def abstract_scripts(
    ops: tuple[EditOp, ...] | list[EditOp],
    before_tree: SyntaxTree,
    after_tree: SyntaxTree,
    file: FilePath,
) -> tuple[dict[MemberKey, set[AbstractEditScript]], set[AbstractEditScript]]:
    """Abstract raw operations and group them by enclosing member.

    Deletions, updates and moves group under the member owning the node
    before the change; pure insertions under the member after it.
    """
    before_members = member_index(before_tree)
    after_members = member_index(after_tree)
    grouped: dict[MemberKey, set[AbstractEditScript]] = {}
    loose: set[AbstractEditScript] = set()

    def add(info: Optional[MemberInfo], script: AbstractEditScript) -> None:
        if info is None:
            loose.add(script)
        else:
            key = MemberKey(file, info.member_kind, info.signature)
            grouped.setdefault(key, set()).add(script)

    for op in ops:
        if isinstance(op, Insert):
            script = AbstractEditScript(
                "insert", "", after_tree.fragment(op.node), op.node.kind
            )
            add(enclosing_member(op.node, after_members), script)
        elif isinstance(op, Delete):
            script = AbstractEditScript(
                "delete", before_tree.fragment(op.node), "", op.node.kind
            )
            add(enclosing_member(op.node, before_members), script)
        elif isinstance(op, Update):
            script = AbstractEditScript(
                "update",
                before_tree.fragment(op.node),
                after_tree.fragment(op.after_node),
                op.node.kind,
            )
            add(enclosing_member(op.node, before_members), script)
        else:
            script = AbstractEditScript(
                "move",
                before_tree.fragment(op.node),
                after_tree.fragment(op.after_node),
                op.node.kind,
            )
            add(enclosing_member(op.node, before_members), script)
    return grouped, loose


def _change_blocker(fc: FileChange) -> Optional[str]:
    if fc.binary:
        return "binary"
    if not is_source_path(fc.path):
        return "non-source"
    if fc.kind == "added":
        return "added-file"
    if fc.kind == "deleted":
        return "deleted-file"
    return None


def summarize_commit(h: History, commit_id: CommitId) -> CommitEditSummary:
    """Collect abstracted edit scripts for one commit, grouped by member."""
    commit: Commit = h.commit(commit_id)
    per_member: dict[MemberKey, set[AbstractEditScript]] = {}
    loose: set[AbstractEditScript] = set()
    blockers: list[tuple[FilePath, str]] = []
    all_isomorphic = True

    for fc in commit.file_changes:
        blocker = _change_blocker(fc)
        if blocker is not None:
            blockers.append((fc.path, blocker))
            continue
        diffed = diff_texts(fc.before_text or "", fc.after_text or "")
        if diffed is None:
            blockers.append((fc.path, "unparseable"))
            continue
        before_tree, after_tree, ops = diffed
        if not ops:
            continue
        all_isomorphic = False
        grouped, file_loose = abstract_scripts(ops, before_tree, after_tree, fc.path)
        for key, scripts in grouped.items():
            per_member.setdefault(key, set()).update(scripts)
        loose.update(file_loose)

    syntax_identical = all_isomorphic and not blockers
    return CommitEditSummary(
        commit=commit_id,
        per_member={k: frozenset(v) for k, v in per_member.items()},
        non_member_scripts=frozenset(loose),
        syntax_identical=syntax_identical,
        file_count=len(commit.file_changes),
        blockers=tuple(blockers),
    )
