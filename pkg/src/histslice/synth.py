"""Builders for synthetic histories, corpora and randomized test inputs.

Everything here is deterministic given its arguments (and seed, where one
applies), so the test suite and the experiment scripts can regenerate the
same data at will.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Optional

from .graph import DependencyGraph, DepKind, Edge
from .ingest import history_from_fixture_data
from .model import ChangeElement, Commit, FileChange, History, change_hunks


def java_class(name: str, body_lines: list[str], package: str = "demo") -> str:
    lines = [f"package {package};", "", f"public class {name} {{"]
    lines.extend("    " + line if line else "" for line in body_lines)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _sweep_file(index: int, value: str, final: bool) -> str:
    mod = "final " if final else ""
    return java_class(
        f"C{index:02d}",
        [
            f"{mod}int value{index:02d} = {value};",
            "",
            f"int helper{index:02d}() {{",
            f"    return value{index:02d};",
            "}",
        ],
    )


def sweep_fixture_data(sweep_files: int = 20, overlapped: int = 14) -> dict:
    """A history built around one systematic sweep commit.

    The first `overlapped` commits each tweak one file; the sweep commit
    then adds a `final` qualifier across all `sweep_files` files, touching
    the very lines those earlier commits wrote; a last commit edits the
    final (untouched-before) sweep file, so slicing from it walks straight
    into the sweep.
    """
    if not 0 <= overlapped < sweep_files:
        raise ValueError("need overlapped < sweep_files")
    paths = [f"src/C{i:02d}.java" for i in range(1, sweep_files + 1)]
    commits = []
    ts = 1_500_000_000

    for i in range(1, overlapped + 1):
        commits.append(
            {
                "id": f"pre{i:02d}",
                "message": f"Tune constant in C{i:02d}",
                "timestamp": ts,
                "files": [
                    {
                        "path": paths[i - 1],
                        "before": _sweep_file(i, str(i), final=False),
                        "after": _sweep_file(i, f"{i}00", final=False),
                    }
                ],
            }
        )
        ts += 60

    sweep_entries = []
    for i in range(1, sweep_files + 1):
        value = f"{i}00" if i <= overlapped else str(i)
        sweep_entries.append(
            {
                "path": paths[i - 1],
                "before": _sweep_file(i, value, final=False),
                "after": _sweep_file(i, value, final=True),
            }
        )
    commits.append(
        {
            "id": "sweep",
            "message": "Add final qualifier to value fields",
            "timestamp": ts,
            "files": sweep_entries,
        }
    )
    ts += 60

    last = sweep_files
    commits.append(
        {
            "id": "crit",
            "message": f"Bump constant in C{last:02d}",
            "timestamp": ts,
            "files": [
                {
                    "path": paths[-1],
                    "before": _sweep_file(last, str(last), final=True),
                    "after": _sweep_file(last, f"{last}{last}", final=True),
                }
            ],
        }
    )
    return {"commits": commits}


def sweep_fixture_history(sweep_files: int = 20, overlapped: int = 14) -> History:
    return history_from_fixture_data(sweep_fixture_data(sweep_files, overlapped))


# --- labeled detector corpus ---------------------------------------------------


@dataclass(frozen=True)
class CorpusLabel:
    kind: str
    splittable: bool


def detector_corpus_data() -> tuple[dict, dict[str, CorpusLabel]]:
    """Hand-labeled commits covering the whole verdict space."""
    commits: list[dict] = []
    labels: dict[str, CorpusLabel] = {}
    ts = 1_600_000_000

    def add(cid: str, kind: str, splittable: bool, files: list[dict], message: str = ""):
        nonlocal ts
        commits.append(
            {
                "id": cid,
                "message": message or f"Corpus case {cid}",
                "timestamp": ts,
                "files": files,
            }
        )
        labels[cid] = CorpusLabel(kind, splittable)
        ts += 60

    def jfile(case: str, name: str) -> str:
        return f"{case}/{name}.java"

    def pair(case, name, before_body, after_body):
        return {
            "path": jfile(case, name),
            "before": java_class(name, before_body),
            "after": java_class(name, after_body),
        }

    # uniform final sweep across three files
    add(
        "sweep3", "ast_systematic", True,
        [
            pair("sweep3", n, [f"int {f} = 1;"], [f"final int {f} = 1;"])
            for n, f in (("Alpha", "a"), ("Beta", "b"), ("Gamma", "c"))
        ],
        "Make fields final",
    )

    # whitespace-only reformat over two files
    add(
        "ws2", "whitespace_or_comment_only", True,
        [
            {
                "path": jfile("ws2", n),
                "before": java_class(n, ["int x = 1;", "int y(){ return x; }"]),
                "after": java_class(n, ["int x  =  1;", "int y() {  return x;  }"]),
            }
            for n in ("One", "Two")
        ],
        "Reformat",
    )

    # comment-only change, single file
    add(
        "cmt1", "whitespace_or_comment_only", False,
        [
            {
                "path": jfile("cmt1", "Solo"),
                "before": java_class("Solo", ["// old note", "int x = 1;"]),
                "after": java_class("Solo", ["// better note", "int x = 1;"]),
            }
        ],
        "Fix comment",
    )

    # mixed edits: a qualifier in one file, a rename in the other
    add(
        "mixed2", "non_systematic", False,
        [
            pair("mixed2", "Left", ["int a = 1;"], ["final int a = 1;"]),
            pair("mixed2", "Right", ["void m() { foo(); }"], ["void m() { bar(); }"]),
        ],
        "Two unrelated tweaks",
    )

    # one unparseable file poisons an otherwise uniform commit
    add(
        "unparse2", "non_systematic", False,
        [
            pair("unparse2", "Clean", ["int a = 1;"], ["final int a = 1;"]),
            {
                "path": "unparse2/Broken.java",
                "before": "this is !! not parseable @@\n",
                "after": "this is ## still not parseable\n",
            },
        ],
        "Touch generated file",
    )

    # single file, two members edited the same way
    add(
        "single2m", "ast_systematic", False,
        [
            pair(
                "single2m", "Pairy",
                ["int a = 1;", "int b = 2;"],
                ["final int a = 1;", "final int b = 2;"],
            )
        ],
        "Final both fields",
    )

    # identical call rename in two files
    add(
        "rename2", "ast_systematic", True,
        [
            pair("rename2", n, ["void m() { foo(); }"], ["void m() { bar(); }"])
            for n in ("CallerA", "CallerB")
        ],
        "Rename call sites",
    )

    # identical import added to two files
    add(
        "imports2", "ast_systematic", True,
        [
            {
                "path": jfile("imports2", n),
                "before": f"package demo;\n\npublic class {n} {{\n}}\n",
                "after": f"package demo;\n\nimport java.util.List;\n\npublic class {n} {{\n}}\n",
            }
            for n in ("ImpA", "ImpB")
        ],
        "Add list import",
    )

    # whole-file addition blocks a systematic verdict
    add(
        "addfile2", "non_systematic", False,
        [
            pair("addfile2", "Old", ["int a = 1;"], ["final int a = 1;"]),
            {
                "path": jfile("addfile2", "Fresh"),
                "before": None,
                "after": java_class("Fresh", ["int b = 2;"]),
            },
        ],
        "Add class and tweak",
    )

    # whole-file deletion
    add(
        "delfile1", "non_systematic", False,
        [
            {
                "path": jfile("delfile1", "Gone"),
                "before": java_class("Gone", ["int a = 1;"]),
                "after": None,
            }
        ],
        "Drop dead class",
    )

    # a non-source file rides along
    add(
        "nonsource2", "non_systematic", False,
        [
            pair("nonsource2", "Code", ["int a = 1;"], ["final int a = 1;"]),
            {
                "path": "nonsource2/NOTES.txt",
                "before": "draft\n",
                "after": "draft two\n",
            },
        ],
        "Edit notes too",
    )

    # same source name renamed to different targets
    add(
        "difftargets2", "non_systematic", False,
        [
            pair("difftargets2", "DtA", ["void m() { foo(); }"], ["void m() { bar(); }"]),
            pair("difftargets2", "DtB", ["void m() { foo(); }"], ["void m() { baz(); }"]),
        ],
        "Inconsistent renames",
    )

    # whitespace-only across three files
    add(
        "ws3", "whitespace_or_comment_only", True,
        [
            {
                "path": jfile("ws3", n),
                "before": java_class(n, ["int k = 3;"]),
                "after": java_class(n, ["int  k =  3;"]),
            }
            for n in ("WsA", "WsB", "WsC")
        ],
        "Spacing pass",
    )

    # identical new method added to two classes
    new_method = ["int size() {", "    return 0;", "}"]
    add(
        "newmethod2", "ast_systematic", True,
        [
            pair("newmethod2", n, ["int a = 1;"], ["int a = 1;", ""] + new_method)
            for n in ("HolderA", "HolderB")
        ],
        "Add size accessor",
    )

    # field type widened identically in two files
    add(
        "typechange2", "ast_systematic", True,
        [
            pair("typechange2", n, ["int total = 0;"], ["long total = 0;"])
            for n in ("WideA", "WideB")
        ],
        "Widen counters",
    )

    # comment tweak in one file, code change in the other
    add(
        "cmtplus1", "ast_systematic", True,
        [
            {
                "path": jfile("cmtplus1", "Doc"),
                "before": java_class("Doc", ["// v1", "int a = 1;"]),
                "after": java_class("Doc", ["// v2", "int a = 1;"]),
            },
            pair("cmtplus1", "Codey", ["int b = 1;"], ["final int b = 1;"]),
        ],
        "Comment plus code",
    )

    # same literal changed to different values
    add(
        "litdiff2", "non_systematic", False,
        [
            pair("litdiff2", "LitA", ["int n = 1;"], ["int n = 2;"]),
            pair("litdiff2", "LitB", ["int n = 1;"], ["int n = 3;"]),
        ],
        "Diverging constants",
    )

    # annotation added to two classes
    add(
        "annot2", "ast_systematic", True,
        [
            {
                "path": jfile("annot2", n),
                "before": f"package demo;\n\npublic class {n} {{\n}}\n",
                "after": f"package demo;\n\n@Deprecated\npublic class {n} {{\n}}\n",
            }
            for n in ("AnnA", "AnnB")
        ],
        "Deprecate helpers",
    )

    # two members per file, both files uniform
    add(
        "multimember2", "ast_systematic", True,
        [
            pair(
                "multimember2", n,
                ["int a = 1;", "int b = 2;"],
                ["final int a = 1;", "final int b = 2;"],
            )
            for n in ("MmA", "MmB")
        ],
        "Final sweep",
    )

    # an insertion in one file, a deletion in the other
    add(
        "insdel2", "non_systematic", False,
        [
            pair(
                "insdel2", "Grow",
                ["void m() { a = 1; }"],
                ["void m() { a = 1; b = 2; }"],
            ),
            pair(
                "insdel2", "Shrink",
                ["void m() { a = 1; b = 2; }"],
                ["void m() { a = 1; }"],
            ),
        ],
        "Unbalanced edits",
    )

    # two members of one file edited differently
    add(
        "intrafile2", "non_systematic", False,
        [
            pair(
                "intrafile2", "Wild",
                ["int a = 1;", "void m() { foo(); }"],
                ["final int a = 1;", "void m() { bar(); }"],
            )
        ],
        "Tangled single file",
    )

    # package declaration updated identically in two files
    add(
        "pkg2", "ast_systematic", True,
        [
            {
                "path": jfile("pkg2", n),
                "before": java_class(n, ["int p = 1;"], package="demo.old"),
                "after": java_class(n, ["int p = 1;"], package="demo.fresh"),
            }
            for n in ("PkgA", "PkgB")
        ],
        "Move package",
    )

    return {"commits": commits}, labels


# --- randomized file histories -------------------------------------------------


def random_file_history(rng: random.Random, max_commits: int = 15,
                        max_lines: int = 200) -> dict:
    """A random multi-file text history in fixture form."""
    n_files = rng.randint(1, 3)
    counter = 0

    def fresh_line(tag: str) -> str:
        nonlocal counter
        counter += 1
        if rng.random() < 0.15:
            return "shared filler line"
        return f"{tag} line {counter}"

    def text_of(lines: list[str]) -> str:
        return "\n".join(lines) + "\n" if lines else ""

    files: dict[str, Optional[list[str]]] = {}
    for i in range(n_files):
        path = f"f{i}.txt"
        files[path] = [fresh_line(path) for _ in range(rng.randint(1, 30))]

    commits = []
    for c in range(rng.randint(1, max_commits)):
        entries = []
        for path in list(files):
            if rng.random() < 0.45:
                continue
            current = files[path]
            if current is None:
                if rng.random() < 0.3:  # re-add a deleted path
                    fresh = [fresh_line(path) for _ in range(rng.randint(1, 10))]
                    files[path] = fresh
                    entries.append({"path": path, "before": None, "after": text_of(fresh)})
                continue
            if rng.random() < 0.06 and current:
                entries.append({"path": path, "before": text_of(current), "after": None})
                files[path] = None
                continue
            updated = list(current)
            for _ in range(rng.randint(1, 3)):
                op = rng.random()
                if op < 0.4 or not updated:
                    pos = rng.randint(0, len(updated))
                    for _ in range(rng.randint(1, 5)):
                        if len(updated) >= max_lines:
                            break
                        updated.insert(pos, fresh_line(path))
                elif op < 0.7:
                    pos = rng.randrange(len(updated))
                    span = min(rng.randint(1, 4), len(updated) - pos)
                    updated[pos : pos + span] = [fresh_line(path) for _ in range(span)]
                else:
                    pos = rng.randrange(len(updated))
                    span = min(rng.randint(1, 3), len(updated) - pos)
                    del updated[pos : pos + span]
            if updated == current:
                continue
            entries.append(
                {"path": path, "before": text_of(current), "after": text_of(updated)}
            )
            files[path] = updated
        if entries:
            commits.append(
                {
                    "id": f"c{c:03d}",
                    "message": f"step {c}",
                    "timestamp": 1_700_000_000 + 60 * c,
                    "files": entries,
                }
            )
    if not commits:  # guarantee at least one commit
        path = next(iter(files))
        text = files[path]
        base = text_of(text) if text else "seed\n"
        commits.append(
            {
                "id": "c000",
                "message": "seed",
                "timestamp": 1_700_000_000,
                "files": [
                    {"path": path, "before": base, "after": base + "tail line\n"}
                ],
            }
        )
    return {"commits": commits}


# --- randomized dependency graphs ----------------------------------------------


def random_graph(rng: random.Random, max_nodes: int = 50,
                 max_edges: int = 200) -> DependencyGraph:
    """A random typed graph consistent with the structural invariants."""
    commits: list[Commit] = []
    elements: list[ChangeElement] = []
    parent = None
    index = 0
    while len(elements) < max_nodes and index < max_nodes:
        width = min(rng.randint(1, 3), max_nodes - len(elements))
        cid = f"g{index:03d}"
        changes = []
        for f in range(width):
            path = f"file_{index:03d}_{f}.txt"
            text = f"content {index} {f}\n"
            changes.append(
                FileChange(path=path, kind="added",
                           hunks=change_hunks(None, text), after_text=text)
            )
            elements.append(ChangeElement(cid, path))
        commits.append(
            Commit(id=cid, parent=parent, message=f"node {index}",
                   timestamp=1_700_000_000 + index, file_changes=tuple(changes)))
        parent = cid
        index += 1
        if rng.random() < 0.1:
            break
    history = History(commits)

    edges: set[Edge] = set()
    by_commit: dict[str, list[ChangeElement]] = {}
    for e in elements:
        by_commit.setdefault(e.commit, []).append(e)
    for group in by_commit.values():
        for a in group:
            for b in group:
                if a != b:
                    edges.add(Edge(a, b, DepKind.COMMIT))

    budget = max_edges - len(edges)
    order = {e: history.position[e.commit] for e in elements}
    for _ in range(max(0, budget)):
        a = rng.choice(elements)
        b = rng.choice(elements)
        if a == b:
            continue
        if order[b] > order[a]:
            a, b = b, a
        kind = DepKind.TEXTUAL if rng.random() < 0.6 else DepKind.BUILD
        if order[a] == order[b] and kind is DepKind.TEXTUAL:
            continue  # textual edges always span commits
        edges.add(Edge(a, b, kind))

    splittable = {
        cid for cid, group in by_commit.items() if len(group) > 1 and rng.random() < 0.5
    }
    eliminated = frozenset(
        e for e in edges if e.kind is DepKind.COMMIT and e.src.commit in splittable
    )
    return DependencyGraph(
        history=history,
        nodes=frozenset(elements),
        edges=frozenset(edges),
        eliminated=eliminated,
    )


# --- randomized programs for tree differencing ----------------------------------


_TYPES = ["int", "long", "String", "boolean", "double"]
_NAMES = ["alpha", "beta", "gamma", "delta", "count", "total", "name", "value",
          "items", "flag"]
_MODS = ["public", "private", "protected"]


@dataclass
class FieldSpec:
    mods: list[str]
    type: str
    name: str
    init: str


@dataclass
class MethodSpec:
    mods: list[str]
    ret: str
    name: str
    params: list[tuple[str, str]]
    stmts: list[str]


@dataclass
class ClassSpec:
    name: str
    fields: list[FieldSpec] = field(default_factory=list)
    methods: list[MethodSpec] = field(default_factory=list)


def _expr(rng: random.Random, depth: int = 0) -> str:
    r = rng.random()
    if depth > 2 or r < 0.35:
        return rng.choice(
            [str(rng.randint(0, 99)), rng.choice(_NAMES), f'"s{rng.randint(0, 9)}"',
             "true", "null"]
        )
    if r < 0.55:
        op = rng.choice(["+", "-", "*", "<", "==", "&&"])
        return f"{_expr(rng, depth + 1)} {op} {_expr(rng, depth + 1)}"
    if r < 0.75:
        args = ", ".join(_expr(rng, 3) for _ in range(rng.randint(0, 2)))
        return f"{rng.choice(_NAMES)}({args})"
    if r < 0.9:
        return f"{rng.choice(_NAMES)}.{rng.choice(_NAMES)}"
    return f"new Holder({_expr(rng, 3)})"


def _stmt(rng: random.Random, depth: int = 0) -> str:
    r = rng.random()
    if depth > 1 or r < 0.35:
        return f"{rng.choice(_NAMES)} = {_expr(rng)};"
    if r < 0.5:
        return f"{rng.choice(_TYPES)} {rng.choice(_NAMES)} = {_expr(rng)};"
    if r < 0.62:
        return f"if ({_expr(rng, 2)}) {{ {_stmt(rng, depth + 1)} }}"
    if r < 0.72:
        return f"while ({_expr(rng, 2)}) {{ {_stmt(rng, depth + 1)} }}"
    if r < 0.85:
        return f"return {_expr(rng)};"
    return f"for (int i = 0; i < 10; i++) {{ {_stmt(rng, depth + 1)} }}"


def random_class_spec(rng: random.Random) -> ClassSpec:
    spec = ClassSpec(name=f"Gen{rng.randint(0, 99)}")
    for _ in range(rng.randint(0, 3)):
        spec.fields.append(
            FieldSpec(
                mods=rng.sample(_MODS, rng.randint(0, 1))
                + (["static"] if rng.random() < 0.2 else [])
                + (["final"] if rng.random() < 0.3 else []),
                type=rng.choice(_TYPES),
                name=f"{rng.choice(_NAMES)}{rng.randint(0, 9)}",
                init=_expr(rng, 2),
            )
        )
    for _ in range(rng.randint(1, 3)):
        spec.methods.append(
            MethodSpec(
                mods=rng.sample(_MODS, rng.randint(0, 1)),
                ret=rng.choice(_TYPES + ["void"]),
                name=f"{rng.choice(_NAMES)}{rng.randint(0, 9)}",
                params=[(rng.choice(_TYPES), f"p{i}") for i in range(rng.randint(0, 2))],
                stmts=[_stmt(rng) for _ in range(rng.randint(0, 4))],
            )
        )
    return spec


def render_class(spec: ClassSpec, rng: Optional[random.Random] = None) -> str:
    """Render a spec; an rng adds cosmetic comment and whitespace noise."""
    noise = rng if rng is not None else random.Random(0)
    decorate = rng is not None

    def maybe_comment(indent: str) -> list[str]:
        if decorate and noise.random() < 0.25:
            return [f"{indent}// note {noise.randint(0, 999)}"]
        return []

    lines = ["package gen;", ""]
    lines.append(f"public class {spec.name} {{")
    for f in spec.fields:
        lines.extend(maybe_comment("    "))
        mods = " ".join(f.mods)
        mods = mods + " " if mods else ""
        lines.append(f"    {mods}{f.type} {f.name} = {f.init};")
    for m in spec.methods:
        lines.append("")
        lines.extend(maybe_comment("    "))
        mods = " ".join(m.mods)
        mods = mods + " " if mods else ""
        params = ", ".join(f"{t} {n}" for t, n in m.params)
        lines.append(f"    {mods}{m.ret} {m.name}({params}) {{")
        for s in m.stmts:
            lines.extend(maybe_comment("        "))
            lines.append(f"        {s}")
        lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def mutate_class_spec(rng: random.Random, spec: ClassSpec) -> ClassSpec:
    """A structurally mutated copy; may also come back identical."""
    out = ClassSpec(
        name=spec.name,
        fields=[replace(f, mods=list(f.mods)) for f in spec.fields],
        methods=[
            replace(m, mods=list(m.mods), params=list(m.params), stmts=list(m.stmts))
            for m in spec.methods
        ],
    )
    for _ in range(rng.randint(1, 4)):
        choice = rng.random()
        if choice < 0.15 and out.fields:
            f = rng.choice(out.fields)
            if "final" in f.mods:
                f.mods.remove("final")
            else:
                f.mods.append("final")
        elif choice < 0.3:
            out.fields.append(
                FieldSpec(mods=[], type=rng.choice(_TYPES),
                          name=f"fresh{rng.randint(0, 9)}", init=_expr(rng, 2))
            )
        elif choice < 0.4 and out.fields:
            out.fields.pop(rng.randrange(len(out.fields)))
        elif choice < 0.55 and out.methods:
            m = rng.choice(out.methods)
            if m.stmts and rng.random() < 0.5:
                m.stmts.pop(rng.randrange(len(m.stmts)))
            else:
                m.stmts.insert(rng.randint(0, len(m.stmts)), _stmt(rng))
        elif choice < 0.65 and out.methods:
            rng.choice(out.methods).name = f"renamed{rng.randint(0, 9)}"
        elif choice < 0.75 and out.methods and len(out.methods) > 1:
            i = rng.randrange(len(out.methods))
            j = rng.randrange(len(out.methods))
            out.methods[i], out.methods[j] = out.methods[j], out.methods[i]
        elif choice < 0.85 and out.fields:
            rng.choice(out.fields).init = _expr(rng, 2)
        elif out.methods:
            m = rng.choice(out.methods)
            m.ret = rng.choice(_TYPES + ["void"])
    return out


def random_program_pair(rng: random.Random) -> tuple[str, str]:
    spec = random_class_spec(rng)
    mutated = mutate_class_spec(rng, spec)
    return render_class(spec, rng), render_class(mutated, rng)
