"""Patch series emission and textual application.

materialize() writes one mbox-style patch per slice commit, numbered in
history order, and then re-parses and replays the emitted series onto the
range's base snapshot. Replay locates each hunk by matching its pre-image
near the stated position (GNU-patch style offset search, no fuzz); a miss
raises PatchConflict naming the first element whose context is gone, which
is how a hole in the dependency extraction surfaces.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from difflib import SequenceMatcher
from email.utils import formatdate
from pathlib import Path
from typing import Optional

from .errors import PatchConflict
from .model import (
    ADDED,
    DELETED,
    RENAMED,
    Commit,
    FileChange,
    History,
    base_snapshot,
    join_lines,
    missing_final_newline,
    split_lines,
    tagged_lines,
)
from .slicer import HistorySlice, SliceCommit

_NOEOL = "\\ No newline at end of file"
_MBOX_DATE = "Mon Sep 17 00:00:00 2001"


def _fmt_range(start: int, length: int) -> str:
    return f"{start}" if length == 1 else f"{start},{length}"


def unified_diff_body(old_text: str, new_text: str, context: int = 3) -> list[str]:
    """Hunk lines (headers included) for one file pair.

    Diffing runs over terminator-tagged lines, so a change that only adds
    or drops the final newline still shows up as a last-line rewrite.
    """
    out: list[str] = []
    old_tagged = tagged_lines(old_text)
    new_tagged = tagged_lines(new_text)
    matcher = SequenceMatcher(a=old_tagged, b=new_tagged, autojunk=False)
    for group in matcher.get_grouped_opcodes(context):
        i1, i2 = group[0][1], group[-1][2]
        j1, j2 = group[0][3], group[-1][4]
        old_len, new_len = i2 - i1, j2 - j1
        old_start = i1 + 1 if old_len else i1
        new_start = j1 + 1 if new_len else j1
        out.append(f"@@ -{_fmt_range(old_start, old_len)} +{_fmt_range(new_start, new_len)} @@")
        for tag, a1, a2, b1, b2 in group:
            if tag in ("equal", "replace", "delete"):
                for k in range(a1, a2):
                    line, noeol = old_tagged[k]
                    out.append((" " if tag == "equal" else "-") + line)
                    if noeol:
                        out.append(_NOEOL)
            if tag in ("replace", "insert"):
                for k in range(b1, b2):
                    line, noeol = new_tagged[k]
                    out.append("+" + line)
                    if noeol:
                        out.append(_NOEOL)
    return out


def _file_diff(fc: FileChange, context: int) -> list[str]:
    if fc.binary:
        path = fc.path
        return [f"diff --git a/{path} b/{path}", f"Binary files a/{path} and b/{path} differ"]
    out: list[str] = []
    if fc.kind == ADDED:
        out.append(f"diff --git a/{fc.path} b/{fc.path}")
        out.append("new file")
        out.append("--- /dev/null")
        out.append(f"+++ b/{fc.path}")
    elif fc.kind == DELETED:
        out.append(f"diff --git a/{fc.path} b/{fc.path}")
        out.append("deleted file")
        out.append(f"--- a/{fc.path}")
        out.append("+++ /dev/null")
    elif fc.kind == RENAMED:
        out.append(f"diff --git a/{fc.old_path} b/{fc.path}")
        out.append(f"rename from {fc.old_path}")
        out.append(f"rename to {fc.path}")
        out.append(f"--- a/{fc.old_path}")
        out.append(f"+++ b/{fc.path}")
    else:
        out.append(f"diff --git a/{fc.path} b/{fc.path}")
        out.append(f"--- a/{fc.path}")
        out.append(f"+++ b/{fc.path}")
    out.extend(unified_diff_body(fc.before_text or "", fc.after_text or "", context))
    return out


def render_patch(commit: Commit, sc: SliceCommit, context: int = 3) -> str:
    subject, _, body = commit.message.partition("\n")
    if sc.split:
        subject += " [split]"
    lines = [
        f"From {commit.id} {_MBOX_DATE}",
        f"Date: {formatdate(commit.timestamp, usegmt=True)}",
        f"Subject: [PATCH] {subject}",
        "",
    ]
    body = body.strip("\n")
    if body:
        lines.extend(body.split("\n"))
        lines.append("")
    lines.append("---")
    for fc in sorted(commit.file_changes, key=lambda fc: fc.path):
        if fc.path not in sc.included_files:
            continue
        lines.extend(_file_diff(fc, context))
    lines.append("-- ")
    return "\n".join(lines) + "\n"


_SLUG_MAX = 48


def _slug(message: str) -> str:
    words = re.findall(r"[a-z0-9]+", message.partition("\n")[0].lower())
    return "-".join(words)[:_SLUG_MAX].rstrip("-") or "patch"


# --- parsing -----------------------------------------------------------------


@dataclass
class PatchHunk:
    old_start: int
    old_block: list[str] = field(default_factory=list)  # context + removed lines
    new_block: list[str] = field(default_factory=list)  # context + added lines
    old_noeol: bool = False
    new_noeol: bool = False


@dataclass
class FileDiff:
    old_path: Optional[str]
    new_path: Optional[str]
    binary: bool = False
    hunks: list[PatchHunk] = field(default_factory=list)


@dataclass
class ParsedPatch:
    commit: str
    subject: str
    diffs: list[FileDiff] = field(default_factory=list)


_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


def parse_patch(text: str) -> ParsedPatch:
    lines = text.split("\n")
    commit = ""
    subject = ""
    i = 0
    while i < len(lines) and not lines[i].startswith("diff --git "):
        if lines[i].startswith("From ") and not commit:
            commit = lines[i].split()[1]
        elif lines[i].startswith("Subject: "):
            subject = lines[i][len("Subject: "):]
        i += 1
    patch = ParsedPatch(commit=commit, subject=subject)
    while i < len(lines):
        line = lines[i]
        if not line.startswith("diff --git "):
            i += 1
            continue
        m = re.match(r"^diff --git a/(.*) b/(.*)$", line)
        diff = FileDiff(old_path=m.group(1), new_path=m.group(2))
        patch.diffs.append(diff)
        i += 1
        while i < len(lines):
            line = lines[i]
            if line.startswith("Binary files "):
                diff.binary = True
                i += 1
            elif line.startswith("--- "):
                name = line[4:]
                diff.old_path = None if name == "/dev/null" else name[2:]
                i += 1
            elif line.startswith("+++ "):
                name = line[4:]
                diff.new_path = None if name == "/dev/null" else name[2:]
                i += 1
            elif line.startswith(("new file", "deleted file", "rename from", "rename to")):
                i += 1
            elif _HUNK_RE.match(line):
                i = _parse_hunk(lines, i, diff)
            else:
                break
    return patch


def _parse_hunk(lines: list[str], i: int, diff: FileDiff) -> int:
    m = _HUNK_RE.match(lines[i])
    old_start = int(m.group(1))
    old_len = int(m.group(2)) if m.group(2) is not None else 1
    new_len = int(m.group(4)) if m.group(4) is not None else 1
    hunk = PatchHunk(old_start=old_start)
    diff.hunks.append(hunk)
    i += 1
    old_seen = new_seen = 0
    last_side = ""
    while i < len(lines) and (old_seen < old_len or new_seen < new_len):
        line = lines[i]
        if line.startswith(_NOEOL[0]):  # "\ No newline at end of file"
            if last_side in (" ", "-"):
                hunk.old_noeol = True
            if last_side in (" ", "+"):
                hunk.new_noeol = True
            i += 1
            continue
        tag, content = (line[0], line[1:]) if line else (" ", "")
        if tag == " ":
            hunk.old_block.append(content)
            hunk.new_block.append(content)
            old_seen += 1
            new_seen += 1
        elif tag == "-":
            hunk.old_block.append(content)
            old_seen += 1
        elif tag == "+":
            hunk.new_block.append(content)
            new_seen += 1
        else:
            break
        last_side = tag
        i += 1
    # a trailing marker can follow the last counted line
    if i < len(lines) and lines[i].startswith(_NOEOL[0]):
        if last_side in (" ", "-"):
            hunk.old_noeol = True
        if last_side in (" ", "+"):
            hunk.new_noeol = True
        i += 1
    return i


# --- application -------------------------------------------------------------


def _apply_hunks(
    text: str, hunks: list[PatchHunk], commit: str, path: str
) -> str:
    lines = split_lines(text)
    noeol = missing_final_newline(text)
    shift = 0
    for hunk in hunks:
        expected = hunk.old_block
        stated = hunk.old_start - 1 if expected else hunk.old_start
        pos = _locate(lines, noeol, expected, hunk.old_noeol, stated + shift)
        if pos is None:
            head = expected[0] if expected else "<empty>"
            raise PatchConflict(
                commit, path, f"pre-image not found near line {hunk.old_start}: {head!r}"
            )
        touches_eof = pos + len(expected) == len(lines)
        lines[pos : pos + len(expected)] = hunk.new_block
        if touches_eof:
            noeol = hunk.new_noeol
        shift = pos - stated + len(hunk.new_block) - len(expected)
    return join_lines(lines, newline_at_eof=not noeol)


def _locate(
    lines: list[str],
    file_noeol: bool,
    expected: list[str],
    expected_noeol: bool,
    pos: int,
) -> Optional[int]:
    limit = len(lines) - len(expected)
    if limit < 0:
        return None

    def fits(p: int) -> bool:
        if lines[p : p + len(expected)] != expected:
            return False
        at_eof = p + len(expected) == len(lines)
        if expected_noeol and not (at_eof and file_noeol):
            return False
        if not expected_noeol and at_eof and file_noeol and expected:
            return False
        return True

    pos = max(0, min(pos, limit))
    for radius in range(0, max(pos, limit - pos) + 1):
        for candidate in (pos + radius, pos - radius) if radius else (pos,):
            if 0 <= candidate <= limit and fits(candidate):
                return candidate
    return None


def apply_parsed_patch(
    snapshot: dict[str, str], patch: ParsedPatch
) -> dict[str, str]:
    for diff in patch.diffs:
        if diff.binary:
            continue  # carried binary changes are outside textual replay
        commit = patch.commit
        if diff.old_path is None:  # added file
            path = diff.new_path
            if path in snapshot:
                raise PatchConflict(commit, path, "file to add already exists")
            hunk = diff.hunks[0] if diff.hunks else PatchHunk(0)
            snapshot[path] = join_lines(hunk.new_block, newline_at_eof=not hunk.new_noeol)
            continue
        if diff.old_path not in snapshot:
            raise PatchConflict(commit, diff.old_path, "file to change is absent")
        if diff.new_path is None:  # deleted file
            current = snapshot[diff.old_path]
            hunk = diff.hunks[0] if diff.hunks else PatchHunk(1)
            want = join_lines(hunk.old_block, newline_at_eof=not hunk.old_noeol)
            if current != want:
                raise PatchConflict(commit, diff.old_path, "deleted content differs")
            del snapshot[diff.old_path]
            continue
        text = snapshot.pop(diff.old_path)
        snapshot[diff.new_path] = _apply_hunks(text, diff.hunks, commit, diff.new_path)
    return snapshot


def apply_patch_series(texts: list[str], snapshot: dict[str, str]) -> dict[str, str]:
    """Apply rendered patches in order onto a copy of the snapshot."""
    state = dict(snapshot)
    for text in texts:
        apply_parsed_patch(state, parse_patch(text))
    return state


# --- materialization ---------------------------------------------------------


def materialize(
    h: History,
    hist_slice: HistorySlice,
    out: str | Path,
    context: int = 3,
    verify: bool = True,
) -> list[Path]:
    """Write the slice's ordered patch series and replay it as a check."""
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    texts: list[str] = []
    paths: list[Path] = []
    for index, sc in enumerate(hist_slice.commits, start=1):
        commit = h.commit(sc.source)
        text = render_patch(commit, sc, context)
        name = f"{index:04d}-{_slug(commit.message)}.patch"
        target = out_dir / name
        target.write_text(text, encoding="utf-8")
        texts.append(text)
        paths.append(target)
    if verify:
        apply_patch_series(texts, base_snapshot(h))
    return paths
