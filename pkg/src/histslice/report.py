"""Pipeline orchestration and slice-size reporting.

run() wires ingest, detection, graph construction, elimination, slicing and
materialization into one call driven by a RunConfig. Reports pair, per
criterion, the closure size with and without elimination; rows below the
minimum slice size stay listed but are left out of the mean, since tiny
slices say nothing about reduction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .detector import (
    AST_SYSTEMATIC,
    WHITESPACE_OR_COMMENT,
    SystematicVerdict,
    detect_all,
)
from .errors import MismatchedCriteria
from .graph import DependencyGraph, build_graph, edges_as_text, eliminate, graph_as_dict
from .ingest import load_fixture_history, load_git_history
from .model import CommitId, History
from .patches import materialize
from .slicer import HistorySlice, SliceCriterion, slice, slice_all, slice_as_dict

DEFAULT_CONTEXT = 3
DEFAULT_MIN_SLICE_SIZE = 3


@dataclass(frozen=True)
class GitSource:
    repo: str
    from_commit: str
    to_commit: str


@dataclass(frozen=True)
class FixtureSource:
    path: str


@dataclass
class RunConfig:
    source: GitSource | FixtureSource
    criterion: Optional[CommitId] = None  # None means all-criteria mode
    context: int = DEFAULT_CONTEXT
    elimination: bool = True
    output_format: str = "json"  # json or csv
    patch_dir: Optional[str] = None
    min_slice_size_report: int = DEFAULT_MIN_SLICE_SIZE

    def __post_init__(self):
        if self.context < 0:
            raise ValueError("context must be non-negative")
        if self.output_format not in ("json", "csv"):
            raise ValueError(f"unknown output format {self.output_format!r}")


@dataclass(frozen=True)
class ReductionRow:
    criterion: CommitId
    original_size: int
    reduced_size: int

    @property
    def reduction_pct(self) -> float:
        if self.original_size == 0:
            return 0.0
        return 100.0 * (1.0 - self.reduced_size / self.original_size)


@dataclass(frozen=True)
class SystematicCounts:
    total: int
    ast: int
    whitespace_comment: int


@dataclass(frozen=True)
class ReductionReport:
    per_criterion: tuple[ReductionRow, ...]
    mean_reduction_pct: float
    systematic_counts: SystematicCounts
    min_slice_size: int

    def as_dict(self) -> dict:
        return {
            "per_criterion": [
                {
                    "criterion": r.criterion,
                    "original_size": r.original_size,
                    "reduced_size": r.reduced_size,
                    "reduction_pct": round(r.reduction_pct, 4),
                }
                for r in self.per_criterion
            ],
            "mean_reduction_pct": round(self.mean_reduction_pct, 4),
            "min_slice_size": self.min_slice_size,
            "systematic_counts": {
                "total": self.systematic_counts.total,
                "ast": self.systematic_counts.ast,
                "whitespace_comment": self.systematic_counts.whitespace_comment,
            },
        }

    def as_csv(self) -> str:
        lines = ["criterion,original_size,reduced_size,reduction_pct"]
        for r in self.per_criterion:
            lines.append(
                f"{r.criterion},{r.original_size},{r.reduced_size},{r.reduction_pct:.4f}"
            )
        return "\n".join(lines) + "\n"


def count_systematic(verdicts: Mapping[CommitId, SystematicVerdict]) -> SystematicCounts:
    ast = sum(1 for v in verdicts.values() if v.kind == AST_SYSTEMATIC)
    ws = sum(1 for v in verdicts.values() if v.kind == WHITESPACE_OR_COMMENT)
    return SystematicCounts(total=ast + ws, ast=ast, whitespace_comment=ws)


def compare_reports(
    with_elim: Mapping[CommitId, int],
    without_elim: Mapping[CommitId, int],
    verdicts: Optional[Mapping[CommitId, SystematicVerdict]] = None,
    min_slice_size: int = DEFAULT_MIN_SLICE_SIZE,
) -> ReductionReport:
    """Pair per-criterion sizes row-wise and average the reduction."""
    if set(with_elim) != set(without_elim):
        raise MismatchedCriteria("the two size tables cover different criteria")
    rows = tuple(
        ReductionRow(criterion=c, original_size=without_elim[c], reduced_size=with_elim[c])
        for c in with_elim
    )
    for r in rows:
        if r.reduced_size > r.original_size:
            raise ValueError(f"criterion {r.criterion}: reduced exceeds original")
    qualifying = [r.reduction_pct for r in rows if r.original_size >= min_slice_size]
    mean = sum(qualifying) / len(qualifying) if qualifying else 0.0
    counts = count_systematic(verdicts) if verdicts else SystematicCounts(0, 0, 0)
    return ReductionReport(
        per_criterion=rows,
        mean_reduction_pct=mean,
        systematic_counts=counts,
        min_slice_size=min_slice_size,
    )


# --- pipeline ----------------------------------------------------------------


@dataclass
class RunResult:
    history: History
    verdicts: dict[CommitId, SystematicVerdict]
    graph: DependencyGraph
    slices: dict[CommitId, HistorySlice]
    report: Optional[ReductionReport]
    artifacts: dict[str, str] = field(default_factory=dict)
    patch_files: list[Path] = field(default_factory=list)


def load_history(config: RunConfig) -> History:
    if isinstance(config.source, FixtureSource):
        return load_fixture_history(config.source.path)
    return load_git_history(
        config.source.repo, config.source.from_commit, config.source.to_commit
    )


def prepare_graph(h: History, config: RunConfig) -> tuple[DependencyGraph, dict]:
    verdicts = detect_all(h)
    g = build_graph(h, context=config.context)
    if config.elimination:
        g = eliminate(g, verdicts)
    return g, verdicts


def run(config: RunConfig) -> RunResult:
    """Execute the full pipeline for the configured source and mode."""
    h = load_history(config)
    g, verdicts = prepare_graph(h, config)

    if config.criterion is not None:
        the_slice = slice(g, SliceCriterion(config.criterion))
        slices = {config.criterion: the_slice}
    else:
        slices = slice_all(g, h)

    report = None
    if config.criterion is None:
        with_elim = {cid: s.stats.size for cid, s in slices.items()}
        without = {cid: s.stats.original_size for cid, s in slices.items()}
        report = compare_reports(
            with_elim, without, verdicts, config.min_slice_size_report
        )

    result = RunResult(
        history=h, verdicts=verdicts, graph=g, slices=slices, report=report
    )

    if config.output_format == "json":
        if report is not None:
            result.artifacts["report"] = _json_text(report.as_dict())
        else:
            result.artifacts["slice"] = _json_text(
                slice_as_dict(g, slices[config.criterion])
            )
    else:
        if report is not None:
            result.artifacts["report"] = report.as_csv()
        else:
            result.artifacts["slice"] = _slice_csv(g, slices[config.criterion])

    if config.patch_dir is not None:
        for cid, s in slices.items():
            target = Path(config.patch_dir)
            if config.criterion is None:
                target = target / cid
            result.patch_files.extend(materialize(h, s, target, context=config.context))

    return result


def _json_text(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _slice_csv(g: DependencyGraph, s: HistorySlice) -> str:
    lines = ["commit,file,split"]
    split_commits = {sc.source for sc in s.commits if sc.split}
    for e in sorted(s.elements, key=g.history.element_sort_key):
        flag = "true" if e.commit in split_commits else "false"
        lines.append(f"{e.commit},{e.file},{flag}")
    return "\n".join(lines) + "\n"


def detect_as_json(verdicts: Mapping[CommitId, SystematicVerdict]) -> str:
    return _json_text({"verdicts": [v.as_dict() for v in verdicts.values()]})


def detect_as_csv(verdicts: Mapping[CommitId, SystematicVerdict]) -> str:
    lines = ["commit,kind,splittable,witness"]
    for v in verdicts.values():
        witness = "|".join(str(k) for k in v.witness) if v.witness else ""
        lines.append(f"{v.commit},{v.kind},{str(v.splittable).lower()},{witness}")
    return "\n".join(lines) + "\n"


def deps_as_text(g: DependencyGraph) -> str:
    return edges_as_text(g)


def deps_as_json(g: DependencyGraph) -> str:
    return _json_text(graph_as_dict(g))
