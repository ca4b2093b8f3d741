import os
import subprocess
from pathlib import Path

import pytest

from histslice.ingest import history_from_fixture_data
from histslice.synth import detector_corpus_data, sweep_fixture_data

GIT_ENV = dict(
    os.environ,
    GIT_AUTHOR_NAME="tester",
    GIT_AUTHOR_EMAIL="tester@example.com",
    GIT_COMMITTER_NAME="tester",
    GIT_COMMITTER_EMAIL="tester@example.com",
    GIT_AUTHOR_DATE="2020-01-01T00:00:00 +0000",
    GIT_COMMITTER_DATE="2020-01-01T00:00:00 +0000",
)


def git(repo: Path, *args: str) -> str:
    out = subprocess.run(
        ["git", "-C", str(repo), *args], check=True, capture_output=True, env=GIT_ENV
    )
    return out.stdout.decode().strip()


def init_repo(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    git(path, "init", "-q", "-b", "main")
    return path


def commit_files(repo: Path, message: str, files: dict[str, str | None]) -> str:
    """Write/delete the given files and commit; returns the new sha."""
    for rel, content in files.items():
        target = repo / rel
        if content is None:
            target.unlink()
        else:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8")
    git(repo, "add", "-A")
    git(repo, "commit", "-qm", message)
    return git(repo, "rev-parse", "HEAD")


@pytest.fixture
def sweep_history():
    return history_from_fixture_data(sweep_fixture_data())


@pytest.fixture
def corpus():
    data, labels = detector_corpus_data()
    return history_from_fixture_data(data), labels


def brute_closure_bitsets(n: int, direct: list[int]) -> list[int]:
    """Reflexive-transitive closure over bitset adjacency rows (Warshall)."""
    rows = list(direct)
    for k in range(n):
        bit = 1 << k
        row_k = rows[k]
        for i in range(n):
            if rows[i] & bit:
                rows[i] |= row_k
    for i in range(n):
        rows[i] |= 1 << i
    return rows
