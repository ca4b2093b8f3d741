"""Load a linear commit history from a Git repository or a fixture file.

The fixture format is a single JSON document:

    {"commits": [{"id": ..., "message": ..., "timestamp": ...,
                  "files": [{"path": ..., "before": str|null, "after": str|null}]}]}

listed oldest first, with full file texts; before=null means the file was
added and after=null that it was deleted. Hunks are recomputed internally
with an LCS line diff, so a fixture and a real repository built from the
same edits load into equal histories (up to commit ids).
"""

from __future__ import annotations

import json
import os
import subprocess
from pathlib import Path
from typing import Any, Optional

from .errors import (
    EmptyRange,
    MalformedFixture,
    NotARepository,
    NotLinearHistory,
    UnknownCommit,
)
from .model import (
    ADDED,
    DELETED,
    MODIFIED,
    RENAMED,
    Commit,
    CommitId,
    FileChange,
    History,
    change_hunks,
    normalize_newlines,
    validate_continuity,
)


def _check_path(path: Any, where: str) -> str:
    if not isinstance(path, str) or not path:
        raise MalformedFixture(f"{where}: path must be a non-empty string")
    parts = path.split("/")
    if path.startswith("/") or any(p in ("", ".", "..") for p in parts):
        raise MalformedFixture(f"{where}: path {path!r} is not normalized")
    return path


def _file_change(entry: Any, where: str) -> FileChange:
    if not isinstance(entry, dict):
        raise MalformedFixture(f"{where}: file entry must be an object")
    path = _check_path(entry.get("path"), where)
    before = entry.get("before")
    after = entry.get("after")
    for name, value in (("before", before), ("after", after)):
        if value is not None and not isinstance(value, str):
            raise MalformedFixture(f"{where}: {name} must be a string or null")
    if before is None and after is None:
        raise MalformedFixture(f"{where}: {path} has neither before nor after text")
    if before == after:
        raise MalformedFixture(f"{where}: {path} does not change")
    if before is None:
        kind = ADDED
    elif after is None:
        kind = DELETED
    else:
        kind = MODIFIED
    before = normalize_newlines(before) if before is not None else None
    after = normalize_newlines(after) if after is not None else None
    if before is not None and before == after:
        raise MalformedFixture(f"{where}: {path} differs only in line endings")
    hunks = change_hunks(before, after)
    return FileChange(
        path=path,
        kind=kind,
        hunks=hunks,
        before_text=before,
        after_text=after,
    )


def history_from_fixture_data(data: Any) -> History:
    if not isinstance(data, dict) or not isinstance(data.get("commits"), list):
        raise MalformedFixture("top level must be an object with a 'commits' list")
    commits: list[Commit] = []
    seen: set[str] = set()
    parent: Optional[CommitId] = None
    for i, raw in enumerate(data["commits"]):
        where = f"commits[{i}]"
        if not isinstance(raw, dict):
            raise MalformedFixture(f"{where}: commit must be an object")
        cid = raw.get("id")
        if not isinstance(cid, str) or not cid:
            raise MalformedFixture(f"{where}: id must be a non-empty string")
        if cid in seen:
            raise MalformedFixture(f"{where}: duplicate commit id {cid!r}")
        seen.add(cid)
        message = raw.get("message", "")
        if not isinstance(message, str):
            raise MalformedFixture(f"{where}: message must be a string")
        timestamp = raw.get("timestamp", 0)
        if not isinstance(timestamp, (int, float)) or isinstance(timestamp, bool):
            raise MalformedFixture(f"{where}: timestamp must be a number")
        files = raw.get("files")
        if not isinstance(files, list):
            raise MalformedFixture(f"{where}: files must be a list")
        changes = []
        paths = set()
        for j, entry in enumerate(files):
            fc = _file_change(entry, f"{where}.files[{j}]")
            if fc.path in paths:
                raise MalformedFixture(f"{where}: duplicate path {fc.path!r}")
            paths.add(fc.path)
            changes.append(fc)
        if not changes:
            continue  # empty commits carry no change elements; drop them
        commits.append(
            Commit(
                id=cid,
                parent=parent,
                message=message,
                timestamp=int(timestamp),
                file_changes=tuple(changes),
            )
        )
        parent = cid
    history = History(commits)
    try:
        validate_continuity(history)
    except ValueError as exc:
        raise MalformedFixture(str(exc)) from None
    return history


def load_fixture_history(fixture_path: str | Path) -> History:
    path = Path(fixture_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedFixture(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedFixture(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return history_from_fixture_data(data)


def history_to_fixture_data(h: History) -> dict:
    """Serialize back to the fixture format.

    Renamed files cannot be expressed by the format and degrade to a
    delete of the old path plus an add of the new one.
    """
    commits = []
    for c in h:
        files = []
        for fc in c.file_changes:
            if fc.binary:
                continue
            if fc.kind == RENAMED:
                files.append({"path": fc.old_path, "before": fc.before_text, "after": None})
                files.append({"path": fc.path, "before": None, "after": fc.after_text})
            else:
                files.append(
                    {"path": fc.path, "before": fc.before_text, "after": fc.after_text}
                )
        commits.append(
            {
                "id": c.id,
                "message": c.message,
                "timestamp": c.timestamp,
                "files": files,
            }
        )
    return {"commits": commits}


def dump_fixture_history(h: History, fixture_path: str | Path) -> None:
    Path(fixture_path).write_text(
        json.dumps(history_to_fixture_data(h), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


# --- Git ingestion -----------------------------------------------------------

_BINARY_SNIFF = 8000


def _looks_binary(blob: bytes) -> bool:
    return b"\x00" in blob[:_BINARY_SNIFF]


class _GitRepo:
    def __init__(self, repo_path: str | Path):
        self.path = Path(repo_path)
        if not self.path.exists():
            raise NotARepository(f"{self.path} does not exist")
        try:
            self.run("rev-parse", "--git-dir")
        except (subprocess.CalledProcessError, OSError) as exc:
            raise NotARepository(f"{self.path} is not a git repository: {exc}") from None

    def run(self, *args: str) -> bytes:
        return subprocess.run(
            ["git", "-C", str(self.path), *args],
            check=True,
            capture_output=True,
        ).stdout

    def text(self, *args: str) -> str:
        return self.run(*args).decode("utf-8", errors="replace")

    def resolve(self, rev: str) -> str:
        try:
            return self.text("rev-parse", "--verify", f"{rev}^{{commit}}").strip()
        except subprocess.CalledProcessError:
            raise UnknownCommit(f"cannot resolve {rev!r}") from None

    def blob(self, oid: str) -> bytes:
        return self.run("cat-file", "blob", oid)


_NULL_OID_PREFIX = "0000000"


def load_git_history(repo_path: str | Path, from_commit: str, to_commit: str) -> History:
    """Load the commits in (from_commit, to_commit], oldest first.

    The range must be a single linear chain; a merge commit or a
    non-ancestor pair raises NotLinearHistory.
    """
    repo = _GitRepo(repo_path)
    start = repo.resolve(from_commit)
    end = repo.resolve(to_commit)
    if start == end:
        raise EmptyRange(f"range ({from_commit}, {to_commit}] is empty")

    listing = repo.text("rev-list", "--reverse", "--parents", end, f"^{start}").split("\n")
    chain: list[tuple[str, list[str]]] = []
    for line in listing:
        if not line:
            continue
        sha, *parents = line.split()
        if len(parents) > 1:
            raise NotLinearHistory(f"merge commit {sha} inside the range")
        chain.append((sha, parents))
    if not chain:
        raise EmptyRange(f"range ({from_commit}, {to_commit}] is empty")
    expected = start
    for sha, parents in chain:
        if parents != [expected]:
            raise NotLinearHistory(
                f"{from_commit}..{to_commit} is not a linear chain (at {sha})"
            )
        expected = sha

    commits: list[Commit] = []
    parent_in_model: Optional[str] = None
    for sha, parents in chain:
        meta = repo.text("log", "-1", "--format=%ct%x00%B", sha)
        raw_ts, _, message = meta.partition("\x00")
        changes = _commit_changes(repo, parents[0], sha)
        if not changes:
            continue  # empty commits are dropped
        commits.append(
            Commit(
                id=sha,
                parent=parent_in_model,
                message=message.rstrip("\n"),
                timestamp=int(raw_ts.strip()),
                file_changes=tuple(changes),
            )
        )
        parent_in_model = sha
    if not commits:
        raise EmptyRange(f"range ({from_commit}, {to_commit}] holds only empty commits")
    return History(commits)


def _commit_changes(repo: _GitRepo, parent: str, sha: str) -> list[FileChange]:
    raw = repo.text("diff-tree", "-r", "-M", "-z", parent, sha)
    fields = raw.split("\x00")
    changes: list[FileChange] = []
    i = 0
    while i < len(fields) and fields[i]:
        meta = fields[i]
        # :oldmode newmode oldoid newoid status
        parts = meta.lstrip(":").split()
        if len(parts) < 5:
            break
        old_oid, new_oid, status = parts[2], parts[3], parts[4]
        if status.startswith(("R", "C")):
            old_path = fields[i + 1]
            new_path = fields[i + 2]
            i += 3
        else:
            old_path = new_path = fields[i + 1]
            i += 2
        fc = _build_change(repo, status, old_oid, new_oid, old_path, new_path)
        if fc is not None:
            changes.append(fc)
    changes.sort(key=lambda fc: fc.path)
    return changes


def _build_change(
    repo: _GitRepo, status: str, old_oid: str, new_oid: str, old_path: str, new_path: str
) -> Optional[FileChange]:
    before_blob = b"" if old_oid.startswith(_NULL_OID_PREFIX) else repo.blob(old_oid)
    after_blob = b"" if new_oid.startswith(_NULL_OID_PREFIX) else repo.blob(new_oid)

    code = status[0]
    if code == "A":
        kind = ADDED
    elif code == "D":
        kind = DELETED
    elif code in ("R", "C"):
        kind = RENAMED if code == "R" else ADDED
    elif code in ("M", "T"):
        kind = MODIFIED
    else:
        return None

    if _looks_binary(before_blob) or _looks_binary(after_blob):
        return FileChange(
            path=new_path if kind != DELETED else old_path,
            kind=kind,
            old_path=old_path if kind == RENAMED else None,
            binary=True,
        )

    before = normalize_newlines(before_blob.decode("utf-8", errors="replace"))
    after = normalize_newlines(after_blob.decode("utf-8", errors="replace"))
    if kind == RENAMED and before == after:
        hunks: tuple = ()
    else:
        hunks = change_hunks(before, after)
        if not hunks and kind == MODIFIED:
            return None  # mode-only change; no text difference to model
    return FileChange(
        path=new_path if kind != DELETED else old_path,
        kind=kind,
        hunks=hunks,
        old_path=old_path if kind == RENAMED else None,
        before_text=None if kind == ADDED else before,
        after_text=None if kind == DELETED else after,
    )
