"""Systematic-edit-aware history slicing for linear commit histories.

The pipeline: ingest a history (Git range or JSON fixture), detect commits
made of uniform systematic edits, extract textual/build/commit dependencies
between per-file change elements, drop the commit coupling of splittable
commits, and compute dependency-closed slices that can be materialized as
an ordered patch series.
"""

from .detector import (
    AST_SYSTEMATIC,
    NON_SYSTEMATIC,
    WHITESPACE_OR_COMMENT,
    SystematicVerdict,
    classify,
    detect_all,
)
from .editscripts import (
    AbstractEditScript,
    CommitEditSummary,
    MemberKey,
    abstract_scripts,
    summarize_commit,
)
from .errors import (
    DiffOnUnparseable,
    EmptyRange,
    HistsliceError,
    MalformedFixture,
    MismatchedCriteria,
    NotARepository,
    NotLinearHistory,
    PatchConflict,
    UnknownCommit,
    UnknownCriterion,
)
from .graph import (
    DependencyGraph,
    DepKind,
    Edge,
    build_deps,
    build_graph,
    commit_deps,
    eliminate,
    textual_deps,
)
from .ingest import (
    dump_fixture_history,
    history_from_fixture_data,
    history_to_fixture_data,
    load_fixture_history,
    load_git_history,
)
from .model import (
    ChangeElement,
    Commit,
    FileChange,
    History,
    Hunk,
    base_snapshot,
    change_elements,
    final_snapshot,
)
from .patches import apply_patch_series, materialize, render_patch
from .report import (
    FixtureSource,
    GitSource,
    ReductionReport,
    RunConfig,
    compare_reports,
    run,
)
from .slicer import HistorySlice, SliceCommit, SliceCriterion, slice, slice_all
from .syntax import SyntaxTree, parse
from .treediff import apply_edit_ops, tree_diff, tree_shape

__version__ = "0.1.0"
