"""Exception types shared across the package."""


class HistsliceError(Exception):
    """Base class for all errors raised by this package."""


class NotARepository(HistsliceError):
    """The given path is not a readable Git repository."""


class UnknownCommit(HistsliceError):
    """A commit id could not be resolved in the repository."""


class NotLinearHistory(HistsliceError):
    """The requested range contains a merge or is not a single linear chain."""


class EmptyRange(HistsliceError):
    """The requested range contains no commits."""


class MalformedFixture(HistsliceError):
    """A fixture file failed validation; the message carries diagnostics."""


class DiffOnUnparseable(HistsliceError):
    """Tree differencing was requested for a tree that did not parse."""


class UnknownCriterion(HistsliceError):
    """The slicing criterion commit is not part of the graph's history."""


class MismatchedCriteria(HistsliceError):
    """Two reports being compared do not cover the same criteria."""


class PatchConflict(HistsliceError):
    """A patch in a materialized series does not apply onto the running snapshot.

    Carries the first element whose pre-image or context lines are absent,
    which usually points at a dependency the slice failed to capture.
    """

    def __init__(self, commit: str, file: str, detail: str):
        self.commit = commit
        self.file = file
        self.detail = detail
        super().__init__(f"patch conflict at {commit}:{file}: {detail}")
