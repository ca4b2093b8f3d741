"""Fine-grained differencing of syntax trees.

Produces node-level insert/delete/update/move operations whose replay onto
the before tree yields a tree isomorphic to the after tree. Matching is a
three-pass affair: identical-subtree anchors (tallest first), bottom-up
container matching by shared anchored descendants, then a top-down
positional alignment that pairs leftover same-kind children. The matching
only affects script size; replay correctness holds for any matching.

Operation node references point into the input trees: delete, update and
move subjects into the before tree, insert subjects into the after tree.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Optional, Union

from .errors import DiffOnUnparseable
from .syntax import Node, SyntaxTree


@dataclass(frozen=True)
class Insert:
    node: Node  # after-tree node, inserted bare (children arrive separately)
    parent: Node  # after-tree parent
    position: int
    anchor: Optional[Node]  # before-tree node hosting the insert, if matched

    change_type = "insert"


@dataclass(frozen=True)
class Delete:
    node: Node  # before-tree node

    change_type = "delete"


@dataclass(frozen=True)
class Update:
    node: Node  # before-tree node whose value changes
    after_node: Node

    change_type = "update"


@dataclass(frozen=True)
class Move:
    node: Node  # before-tree node being re-homed
    parent: Node  # after-tree parent
    position: int
    anchor: Optional[Node]  # before-tree node of the hosting parent, if matched
    after_node: Node

    change_type = "move"


EditOp = Union[Insert, Delete, Update, Move]


def _zip_subtrees(m: dict, rm: dict, x: Node, y: Node) -> None:
    xs = list(x.walk())
    ys = list(y.walk())
    for a, b in zip(xs, ys):
        m[id(a)] = b
        rm[id(b)] = a


def _lcs_pairs(a: list, b: list, eq) -> set[int]:
    """Ids of the a-side nodes kept by a longest common subsequence."""
    n, k = len(a), len(b)
    if n == 0 or k == 0:
        return set()
    table = [[0] * (k + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(k - 1, -1, -1):
            if eq(a[i], b[j]):
                table[i][j] = table[i + 1][j + 1] + 1
            else:
                table[i][j] = max(table[i + 1][j], table[i][j + 1])
    kept: set[int] = set()
    i = j = 0
    while i < n and j < k:
        if eq(a[i], b[j]):
            kept.add(id(a[i]))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return kept


_MIN_ANCHOR_HEIGHT = 2
_CONTAINER_DICE = 0.5


def match_trees(broot: Node, aroot: Node) -> tuple[dict, dict]:
    """Compute a partial bijection before-node -> after-node (keyed by id)."""
    m: dict[int, Node] = {}
    rm: dict[int, Node] = {}

    if broot.digest == aroot.digest:
        _zip_subtrees(m, rm, broot, aroot)
        return m, rm

    # identical-subtree anchors, tallest first, document order on ties
    by_digest: dict[bytes, deque] = defaultdict(deque)
    for y in aroot.walk():
        if y.height >= _MIN_ANCHOR_HEIGHT:
            by_digest[y.digest].append(y)
    b_nodes = list(broot.walk())
    b_index = {id(n): i for i, n in enumerate(b_nodes)}
    for x in sorted(b_nodes, key=lambda n: (-n.height, b_index[id(n)])):
        if x.height < _MIN_ANCHOR_HEIGHT or id(x) in m:
            continue
        dq = by_digest.get(x.digest)
        if not dq:
            continue
        while dq and id(dq[0]) in rm:
            dq.popleft()
        if dq:
            _zip_subtrees(m, rm, x, dq.popleft())

    if id(broot) not in m and id(aroot) not in rm:
        m[id(broot)] = aroot
        rm[id(aroot)] = broot

    # bottom-up containers: unmatched nodes sharing anchored descendants
    a_index: dict[int, int] = {}
    for i, y in enumerate(aroot.walk()):
        a_index[id(y)] = i
    for x in reversed(b_nodes):  # reversed pre-order visits children first
        if id(x) in m or x is broot:
            continue
        common: dict[int, int] = defaultdict(int)
        nodes: dict[int, Node] = {}
        for d in x.walk():
            partner = m.get(id(d))
            if partner is None or d is x:
                continue
            anc = partner.parent
            while anc is not None:
                if id(anc) not in rm and anc.kind == x.kind:
                    common[id(anc)] += 1
                    nodes[id(anc)] = anc
                anc = anc.parent
        best: Optional[Node] = None
        best_dice = 0.0
        for yid, shared in common.items():
            y = nodes[yid]
            dice = 2.0 * shared / ((x.size - 1) + (y.size - 1))
            if dice > best_dice or (
                dice == best_dice and best is not None and a_index[yid] < a_index[id(best)]
            ):
                best = y
                best_dice = dice
        if best is not None and best_dice >= _CONTAINER_DICE:
            m[id(x)] = best
            rm[id(best)] = x

    # top-down alignment of leftover children under matched pairs
    queue: deque[tuple[Node, Node]] = deque()
    seen: set[int] = set()
    for x in b_nodes:
        y = m.get(id(x))
        if y is not None and x.digest != y.digest:
            queue.append((x, y))
    while queue:
        x, y = queue.popleft()
        if id(x) in seen:
            continue
        seen.add(id(x))
        bx = [c for c in x.children if id(c) not in m]
        ay = [c for c in y.children if id(c) not in rm]
        kept = _lcs_pairs(bx, ay, lambda p, q: p.digest == q.digest)
        paired_b = [c for c in bx if id(c) in kept]
        paired_a: list[Node] = []
        want = {c.digest for c in paired_b}
        bi = 0
        for cy in ay:
            if bi < len(paired_b) and cy.digest == paired_b[bi].digest:
                paired_a.append(cy)
                bi += 1
        for cb, ca in zip(paired_b, paired_a):
            _zip_subtrees(m, rm, cb, ca)
        bx = [c for c in x.children if id(c) not in m]
        ay = [c for c in y.children if id(c) not in rm]
        kept = _lcs_pairs(bx, ay, lambda p, q: p.kind == q.kind)
        remaining_a = deque(ay)
        for cb in bx:
            if id(cb) not in kept:
                continue
            while remaining_a and remaining_a[0].kind != cb.kind:
                remaining_a.popleft()
            if not remaining_a:
                break
            ca = remaining_a.popleft()
            m[id(cb)] = ca
            rm[id(ca)] = cb
            queue.append((cb, ca))
    return m, rm


class _WorkNode:
    __slots__ = ("kind", "value", "children", "parent", "orig")

    def __init__(self, kind: str, value: str, orig: Optional[Node]):
        self.kind = kind
        self.value = value
        self.children: list[_WorkNode] = []
        self.parent: Optional[_WorkNode] = None
        self.orig = orig


def _copy_tree(root: Node) -> tuple[_WorkNode, dict[int, _WorkNode]]:
    bmap: dict[int, _WorkNode] = {}

    def build(node: Node) -> _WorkNode:
        w = _WorkNode(node.kind, node.value, node)
        bmap[id(node)] = w
        for child in node.children:
            cw = build(child)
            cw.parent = w
            w.children.append(cw)
        return w

    return build(root), bmap


def _detach(w: _WorkNode) -> None:
    if w.parent is not None:
        w.parent.children.remove(w)
        w.parent = None


def _generate_ops(broot: Node, aroot: Node, m: dict, rm: dict) -> list[EditOp]:
    wroot, bmap = _copy_tree(broot)
    amap: dict[int, _WorkNode] = {}
    for xid, y in m.items():
        amap[id(y)] = bmap[xid]
    ops: list[EditOp] = []

    def sync(w: _WorkNode, y: Node) -> None:
        if w.value != y.value:
            ops.append(Update(node=w.orig, after_node=y))
            w.value = y.value
        pair_cy: dict[int, Node] = {}
        for cy in y.children:
            cw = amap.get(id(cy))
            if cw is not None and cw.parent is w:
                pair_cy[id(cw)] = cy
        seq_w = [c for c in w.children if id(c) in pair_cy]
        seq_y = [pair_cy[id(c)] for c in seq_w]
        seq_y.sort(key=lambda cy: y.children.index(cy))
        anchored = _lcs_pairs(seq_w, seq_y, lambda cw, cy: amap.get(id(cy)) is cw)
        prev: Optional[_WorkNode] = None
        host_anchor = w.orig
        for cy in y.children:
            cw = amap.get(id(cy))
            if cw is not None:
                if id(cw) in anchored and cw.parent is w:
                    prev = cw
                    continue
                _detach(cw)
                pos = w.children.index(prev) + 1 if prev is not None else 0
                w.children.insert(pos, cw)
                cw.parent = w
                ops.append(
                    Move(node=cw.orig, parent=y, position=pos,
                         anchor=host_anchor, after_node=cy)
                )
                prev = cw
            else:
                cw = _WorkNode(cy.kind, cy.value, None)
                pos = w.children.index(prev) + 1 if prev is not None else 0
                w.children.insert(pos, cw)
                cw.parent = w
                amap[id(cy)] = cw
                ops.append(Insert(node=cy, parent=y, position=pos, anchor=host_anchor))
                prev = cw
        for cy in y.children:
            sync(amap[id(cy)], cy)

    sync(wroot, aroot)

    def delete_pass(node: Node) -> None:
        for child in node.children:
            delete_pass(child)
        if id(node) not in m:
            ops.append(Delete(node=node))
            _detach(bmap[id(node)])

    delete_pass(broot)
    return ops


def tree_diff(before: SyntaxTree, after: SyntaxTree) -> list[EditOp]:
    """Diff two parsed trees; empty exactly when they are isomorphic."""
    if not before.ok or not after.ok:
        raise DiffOnUnparseable("cannot diff a tree that failed to parse")
    if before.root.isomorphic(after.root):
        return []
    m, rm = match_trees(before.root, after.root)
    return _generate_ops(before.root, after.root, m, rm)


def apply_edit_ops(before: SyntaxTree, ops: list[EditOp]):
    """Replay operations onto a copy of the before tree.

    Returns a plain (kind, value, children) tuple structure, convenient for
    an isomorphism check that does not depend on the differ internals.
    """
    wroot, bmap = _copy_tree(before.root)
    amap: dict[int, _WorkNode] = {}

    def host(op) -> _WorkNode:
        if op.anchor is not None:
            return bmap[id(op.anchor)]
        return amap[id(op.parent)]

    for op in ops:
        if isinstance(op, Insert):
            w = _WorkNode(op.node.kind, op.node.value, None)
            parent = host(op)
            parent.children.insert(op.position, w)
            w.parent = parent
            amap[id(op.node)] = w
        elif isinstance(op, Update):
            bmap[id(op.node)].value = op.after_node.value
        elif isinstance(op, Move):
            w = bmap[id(op.node)]
            _detach(w)
            parent = host(op)
            parent.children.insert(op.position, w)
            w.parent = parent
        elif isinstance(op, Delete):
            _detach(bmap[id(op.node)])
        else:  # pragma: no cover
            raise TypeError(f"unknown op {op!r}")
    return _as_shape(wroot)


def _as_shape(w: _WorkNode):
    return (w.kind, w.value, tuple(_as_shape(c) for c in w.children))


def tree_shape(tree: SyntaxTree):
    """The same plain structure apply_edit_ops returns, for comparisons."""

    def build(node: Node):
        return (node.kind, node.value, tuple(build(c) for c in node.children))

    return build(tree.root)
