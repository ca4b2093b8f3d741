"""Classify commits as systematic (hence splittable) or not.

A commit is systematic when every changed member received the same set of
abstracted edit scripts, or when it changed nothing but whitespace and
comments. Anything the summary could not fully analyze (unparseable files,
whole-file adds or deletes, binary or non-source files) is conservatively
non-systematic: splitting such a commit could drop changes we cannot prove
independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .editscripts import (
    NON_MEMBER,
    AbstractEditScript,
    CommitEditSummary,
    MemberKey,
    summarize_commit,
)
from .model import CommitId, History

AST_SYSTEMATIC = "ast_systematic"
WHITESPACE_OR_COMMENT = "whitespace_or_comment_only"
NON_SYSTEMATIC = "non_systematic"

_NON_MEMBER_KEY = MemberKey(file="*", member_kind=NON_MEMBER, signature="<file-level>")


@dataclass(frozen=True)
class SystematicVerdict:
    commit: CommitId
    kind: str
    splittable: bool
    witness: Optional[tuple[MemberKey, MemberKey]] = None
    uniform_script_set: Optional[frozenset[AbstractEditScript]] = None

    def as_dict(self) -> dict:
        return {
            "commit": self.commit,
            "kind": self.kind,
            "splittable": self.splittable,
            "witness": [str(k) for k in self.witness] if self.witness else None,
        }


def classify(summary: CommitEditSummary) -> SystematicVerdict:
    commit = summary.commit
    multi_file = summary.file_count >= 2

    if summary.blockers:
        return SystematicVerdict(commit, NON_SYSTEMATIC, splittable=False)

    if summary.syntax_identical:
        return SystematicVerdict(commit, WHITESPACE_OR_COMMENT, splittable=multi_file)

    groups: dict[MemberKey, frozenset[AbstractEditScript]] = dict(summary.per_member)
    if summary.non_member_scripts:
        groups[_NON_MEMBER_KEY] = summary.non_member_scripts
    if not groups:  # unreachable: a non-identical summary always has scripts
        return SystematicVerdict(commit, NON_SYSTEMATIC, splittable=False)

    keys = sorted(groups, key=lambda k: (k.file, k.member_kind, k.signature))
    reference = groups[keys[0]]
    for key in keys[1:]:
        if groups[key] != reference:
            return SystematicVerdict(
                commit, NON_SYSTEMATIC, splittable=False, witness=(keys[0], key)
            )
    return SystematicVerdict(
        commit,
        AST_SYSTEMATIC,
        splittable=multi_file,
        uniform_script_set=reference,
    )


def detect_all(h: History) -> dict[CommitId, SystematicVerdict]:
    """One verdict per commit, in history order."""
    return {c.id: classify(summarize_commit(h, c.id)) for c in h}
