"""Parser for a Java-like subset, producing comment-free syntax trees.

The grammar covers what the analyses need from the corpus language:
package/import declarations, class/interface/enum types, fields, methods,
constructors, initializer blocks, the usual statements and expressions,
annotations and generics. Anything outside the subset (lambdas, method
references, anonymous enum bodies, ...) fails the parse, and the caller
receives a degraded single-node tree flagged unparseable.

Declaration names are distinguished from other identifiers by node kind
(decl_name vs identifier), which is what the def-use extraction keys on.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterator, Optional

MODIFIER_WORDS = frozenset(
    "public private protected static final abstract synchronized volatile "
    "transient native strictfp default".split()
)
PRIMITIVE_WORDS = frozenset("void int long short byte char boolean float double".split())
KEYWORDS = MODIFIER_WORDS | PRIMITIVE_WORDS | frozenset(
    "package import class interface enum extends implements throws if else while do for "
    "return throw try catch finally switch case break continue new this super instanceof "
    "true false null assert".split()
)

_OPERATORS = sorted(
    [
        ">>>=", ">>>", ">>=", "<<=", "...", ">>", "<<", "->", "::", "++", "--",
        "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "&=",
        "|=", "^=", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "=", "<",
        ">", "+", "-", "*", "/", "%", "&", "|", "^", "!", "~", "?", ":",
    ],
    key=len,
    reverse=True,
)


class _SyntaxFailure(Exception):
    pass


@dataclass
class Token:
    kind: str  # ident, keyword, number, string, char, op, eof
    text: str
    start: int
    end: int


def _tokenize(source: str) -> tuple[list[Token], list[tuple[int, int]]]:
    tokens: list[Token] = []
    comments: list[tuple[int, int]] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n\f":
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            j = n if j < 0 else j
            comments.append((i, j))
            i = j
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                raise _SyntaxFailure("unterminated block comment")
            comments.append((i, j + 2))
            i = j + 2
            continue
        if ch.isalpha() or ch == "_" or ch == "$":
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] in "_$"):
                j += 1
            word = source[i:j]
            tokens.append(Token("keyword" if word in KEYWORDS else "ident", word, i, j))
            i = j
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            if source.startswith(("0x", "0X"), i):
                j = i + 2
                while j < n and (source[j] in "0123456789abcdefABCDEF_"):
                    j += 1
            else:
                seen_dot = False
                while j < n and (source[j].isdigit() or source[j] == "_" or
                                 (source[j] == "." and not seen_dot)):
                    if source[j] == ".":
                        seen_dot = True
                    j += 1
                if j < n and source[j] in "eE":
                    j += 1
                    if j < n and source[j] in "+-":
                        j += 1
                    while j < n and source[j].isdigit():
                        j += 1
            if j < n and source[j] in "lLfFdD":
                j += 1
            tokens.append(Token("number", source[i:j], i, j))
            i = j
            continue
        if ch == '"':
            j = i + 1
            while j < n and source[j] != '"':
                j += 2 if source[j] == "\\" else 1
            if j >= n:
                raise _SyntaxFailure("unterminated string literal")
            tokens.append(Token("string", source[i : j + 1], i, j + 1))
            i = j + 1
            continue
        if ch == "'":
            j = i + 1
            while j < n and source[j] != "'":
                j += 2 if source[j] == "\\" else 1
            if j >= n:
                raise _SyntaxFailure("unterminated char literal")
            tokens.append(Token("char", source[i : j + 1], i, j + 1))
            i = j + 1
            continue
        for op in _OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token("op", op, i, i + len(op)))
                i += len(op)
                break
        else:
            raise _SyntaxFailure(f"unexpected character {ch!r} at offset {i}")
    tokens.append(Token("eof", "", n, n))
    return tokens, comments


class Node:
    """One syntax tree node; leaves carry their token text in value."""

    __slots__ = ("kind", "value", "children", "start", "end", "parent",
                 "digest", "height", "size")

    def __init__(self, kind: str, value: str = "", children: Optional[list] = None,
                 start: int = 0, end: int = 0):
        self.kind = kind
        self.value = value
        self.children: list[Node] = children if children is not None else []
        self.start = start
        self.end = end
        self.parent: Optional[Node] = None
        self.digest: bytes = b""
        self.height = 1
        self.size = 1

    def __repr__(self):
        inner = self.value if self.value else f"{len(self.children)} children"
        return f"Node({self.kind}, {inner})"

    def walk(self) -> Iterator["Node"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> Iterator["Node"]:
        for node in self.walk():
            if not node.children:
                yield node

    def isomorphic(self, other: "Node") -> bool:
        return self.digest == other.digest


def _finalize(root: Node) -> None:
    order: list[Node] = list(root.walk())
    for node in reversed(order):  # children before parents
        h = hashlib.blake2b(digest_size=12)
        h.update(node.kind.encode())
        h.update(b"\x00")
        h.update(node.value.encode())
        height = 0
        size = 1
        for child in node.children:
            child.parent = node
            h.update(child.digest)
            height = max(height, child.height)
            size += child.size
        node.digest = h.digest()
        node.height = height + 1
        node.size = size


class SyntaxTree:
    def __init__(self, source: str, root: Node, ok: bool,
                 comment_spans: Optional[list[tuple[int, int]]] = None,
                 error: str = ""):
        self.source = source
        self.root = root
        self.ok = ok
        self.comment_spans = comment_spans or []
        self.error = error
        self._line_starts: Optional[list[int]] = None

    def span(self, node: Node) -> tuple[int, int]:
        """1-based (start line, end line) of a node in the source."""
        if self._line_starts is None:
            starts = [0]
            for i, ch in enumerate(self.source):
                if ch == "\n":
                    starts.append(i + 1)
            self._line_starts = starts
        import bisect

        first = bisect.bisect_right(self._line_starts, node.start)
        last = bisect.bisect_right(self._line_starts, max(node.start, node.end - 1))
        return first, last

    def fragment(self, node: Node) -> str:
        """Source text of a node, comments stripped, whitespace collapsed."""
        piece = []
        cursor = node.start
        for c_start, c_end in self.comment_spans:
            if c_end <= node.start or c_start >= node.end:
                continue
            piece.append(self.source[cursor:max(cursor, c_start)])
            piece.append(" ")
            cursor = c_end
        piece.append(self.source[cursor:node.end])
        return " ".join("".join(piece).split())

    def isomorphic(self, other: "SyntaxTree") -> bool:
        return self.ok and other.ok and self.root.isomorphic(other.root)


class _Parser:
    def __init__(self, source: str, tokens: list[Token]):
        self.source = source
        self.tokens = tokens
        self.i = 0

    # --- token plumbing ---

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("op", "keyword")

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            tok = self.tokens[self.i]
            self.i += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            raise _SyntaxFailure(
                f"expected {text!r} but found {self.peek().text!r} at offset {self.peek().start}"
            )
        return tok

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise _SyntaxFailure(f"expected identifier, found {tok.text!r} at {tok.start}")
        self.i += 1
        return tok

    def expect_close_angle(self) -> int:
        """Consume one '>' in a generics context, splitting shift tokens."""
        tok = self.peek()
        if tok.text == ">":
            self.i += 1
            return tok.end
        if tok.text in (">>", ">>>", ">=", ">>=", ">>>="):
            self.tokens[self.i] = Token("op", tok.text[1:], tok.start + 1, tok.end)
            return tok.start + 1
        raise _SyntaxFailure(f"expected '>' at offset {tok.start}")

    def _leaf(self, kind: str, tok: Token) -> Node:
        return Node(kind, tok.text, [], tok.start, tok.end)

    def _node(self, kind: str, children: list[Node], start: int, end: int,
              value: str = "") -> Node:
        return Node(kind, value, children, start, end)

    def try_parse(self, fn, *args):
        saved = self.i
        try:
            return fn(*args)
        except _SyntaxFailure:
            self.i = saved
            return None

    # --- compilation unit ---

    def parse_unit(self) -> Node:
        start = self.peek().start
        children: list[Node] = []
        if self.at("package"):
            children.append(self.parse_package())
        while self.at("import"):
            children.append(self.parse_import())
        while not self.peek().kind == "eof":
            if self.accept(";"):
                continue
            children.append(self.parse_type_decl())
        end = children[-1].end if children else start
        return self._node("compilation_unit", children, start, end)

    def parse_package(self) -> Node:
        tok = self.expect("package")
        name = self.dotted_name()
        end = self.expect(";").end
        return Node("package_decl", name, [], tok.start, end)

    def parse_import(self) -> Node:
        tok = self.expect("import")
        prefix = "static " if self.accept("static") else ""
        name = self.dotted_name()
        if self.accept("."):
            self.expect("*")
            name += ".*"
        end = self.expect(";").end
        return Node("import_decl", prefix + name, [], tok.start, end)

    def dotted_name(self) -> str:
        parts = [self.expect_ident().text]
        while self.peek().text == "." and self.peek(1).kind == "ident":
            self.expect(".")
            parts.append(self.expect_ident().text)
        return ".".join(parts)

    # --- declarations ---

    def parse_modifiers(self) -> list[Node]:
        out: list[Node] = []
        while True:
            tok = self.peek()
            if tok.kind == "keyword" and tok.text in MODIFIER_WORDS:
                self.i += 1
                out.append(self._leaf("modifier", tok))
            elif tok.text == "@" and self.peek(1).text != "interface":
                out.append(self.parse_annotation())
            else:
                return out

    def parse_annotation(self) -> Node:
        at = self.expect("@")
        name_tok = self.expect_ident()
        children = [self._leaf("identifier", name_tok)]
        end = name_tok.end
        while self.accept("."):
            seg = self.expect_ident()
            children.append(self._leaf("identifier", seg))
            end = seg.end
        if self.at("("):
            self.expect("(")
            while not self.at(")"):
                if self.peek().kind == "ident" and self.peek(1).text == "=":
                    key = self.expect_ident()
                    self.expect("=")
                    value = self.parse_annotation_value()
                    pair = self._node("annotation_arg",
                                      [self._leaf("identifier", key), value],
                                      key.start, value.end)
                    children.append(pair)
                else:
                    children.append(self.parse_annotation_value())
                if not self.accept(","):
                    break
            end = self.expect(")").end
        return self._node("annotation", children, at.start, end)

    def parse_annotation_value(self) -> Node:
        if self.at("{"):
            return self.parse_array_init()
        if self.at("@"):
            return self.parse_annotation()
        return self.parse_expression()

    def parse_type_decl(self) -> Node:
        start_tok = self.peek()
        mods = self.parse_modifiers()
        for word in ("class", "interface", "enum"):
            if self.accept(word):
                kind_word = word
                break
        else:
            raise _SyntaxFailure(f"expected a type declaration at offset {start_tok.start}")
        name = self.expect_ident()
        children = mods + [self._leaf("decl_name", name)]
        if self.at("<"):
            children.append(self.parse_type_params())
        if self.accept("extends"):
            sup = [self.parse_type()]
            while self.accept(","):
                sup.append(self.parse_type())
            children.append(self._node("extends_clause", sup, sup[0].start, sup[-1].end))
        if self.accept("implements"):
            ifaces = [self.parse_type()]
            while self.accept(","):
                ifaces.append(self.parse_type())
            children.append(
                self._node("implements_clause", ifaces, ifaces[0].start, ifaces[-1].end)
            )
        self.expect("{")
        if kind_word == "enum":
            children.extend(self.parse_enum_constants())
        while not self.at("}"):
            if self.accept(";"):
                continue
            children.append(self.parse_member(name.text))
        end = self.expect("}").end
        start = mods[0].start if mods else start_tok.start
        return self._node("type_decl", children, start, end, value=kind_word)

    def parse_enum_constants(self) -> list[Node]:
        out: list[Node] = []
        while self.peek().kind == "ident" or self.at("@"):
            mods = []
            while self.at("@"):
                mods.append(self.parse_annotation())
            name = self.expect_ident()
            children = mods + [self._leaf("decl_name", name)]
            end = name.end
            if self.at("("):
                self.expect("(")
                while not self.at(")"):
                    children.append(self.parse_expression())
                    if not self.accept(","):
                        break
                end = self.expect(")").end
            if self.at("{"):
                raise _SyntaxFailure("enum constant bodies are not supported")
            start = mods[0].start if mods else name.start
            out.append(self._node("enum_constant", children, start, end))
            if not self.accept(","):
                break
        self.accept(";")
        return out

    def parse_member(self, enclosing_name: str) -> Node:
        mark = self.i
        start_tok = self.peek()
        mods = self.parse_modifiers()

        if self.at("{"):  # initializer block (mods hold at most 'static')
            block = self.parse_block()
            start = mods[0].start if mods else block.start
            return self._node("initializer_block", mods + [block], start, block.end)

        if self.peek().kind == "keyword" and self.peek().text in ("class", "interface", "enum"):
            self.i = mark  # reparse with modifiers inside
            return self.parse_type_decl()

        type_params = self.parse_type_params() if self.at("<") else None

        # constructor: Name ( ... )
        if (self.peek().kind == "ident" and self.peek().text == enclosing_name
                and self.peek(1).text == "("):
            name = self.expect_ident()
            children = mods + ([type_params] if type_params else [])
            children.append(self._leaf("decl_name", name))
            children.extend(self.parse_params())
            if self.accept("throws"):
                children.append(self.parse_throws())
            body = self.parse_block()
            children.append(body)
            start = mods[0].start if mods else name.start
            return self._node("ctor_decl", children, start, body.end)

        rtype = self.parse_type()
        if self.peek().kind != "ident":
            raise _SyntaxFailure(f"expected a member name at offset {self.peek().start}")

        if self.peek(1).text == "(":  # method
            name = self.expect_ident()
            children = mods + ([type_params] if type_params else [])
            children.append(rtype)
            children.append(self._leaf("decl_name", name))
            children.extend(self.parse_params())
            if self.accept("throws"):
                children.append(self.parse_throws())
            if self.at("{"):
                body = self.parse_block()
                children.append(body)
                end = body.end
            else:
                end = self.expect(";").end
            start = mods[0].start if mods else (type_params.start if type_params else rtype.start)
            return self._node("method_decl", children, start, end)

        # field with one or more declarators
        children = mods + [rtype]
        children.append(self.parse_declarator())
        while self.accept(","):
            children.append(self.parse_declarator())
        end = self.expect(";").end
        start = mods[0].start if mods else rtype.start
        return self._node("field_decl", children, start, end)

    def parse_params(self) -> list[Node]:
        self.expect("(")
        params: list[Node] = []
        while not self.at(")"):
            p_start = self.peek().start
            mods = self.parse_modifiers()
            ptype = self.parse_type()
            if self.at("..."):
                tok = self.expect("...")
                ptype = self._node("type", ptype.children + [self._leaf("array_dim", tok)],
                                   ptype.start, tok.end, value=ptype.value)
            name = self.expect_ident()
            children = mods + [ptype, self._leaf("decl_name", name)]
            end = name.end
            while self.at("["):
                self.expect("[")
                end = self.expect("]").end
            params.append(self._node("param", children, p_start, end))
            if not self.accept(","):
                break
        self.expect(")")
        return params

    def parse_throws(self) -> Node:
        first = self.parse_type()
        types = [first]
        while self.accept(","):
            types.append(self.parse_type())
        return self._node("throws_clause", types, first.start, types[-1].end)

    def parse_declarator(self) -> Node:
        name = self.expect_ident()
        children: list[Node] = [self._leaf("decl_name", name)]
        end = name.end
        while self.at("["):
            lb = self.expect("[")
            tok = self.expect("]")
            children.append(Node("array_dim", "[]", [], lb.start, tok.end))
            end = tok.end
        if self.accept("="):
            init = self.parse_array_init() if self.at("{") else self.parse_expression()
            children.append(init)
            end = init.end
        return self._node("declarator", children, name.start, end)

    # --- types ---

    def parse_type_params(self) -> Node:
        start = self.expect("<").start
        params: list[Node] = []
        while True:
            name = self.expect_ident()
            children: list[Node] = [self._leaf("decl_name", name)]
            if self.accept("extends"):
                children.append(self.parse_type())
                while self.accept("&"):
                    children.append(self.parse_type())
            params.append(self._node("type_param", children, name.start, children[-1].end))
            if not self.accept(","):
                break
        end = self.expect_close_angle()
        return self._node("type_params", params, start, end)

    def parse_type(self) -> Node:
        tok = self.peek()
        children: list[Node] = []
        if tok.kind == "keyword" and tok.text in PRIMITIVE_WORDS:
            self.i += 1
            children.append(self._leaf("primitive_type", tok))
            end = tok.end
        elif tok.kind == "ident":
            end = self._type_segment(children)
            while self.peek().text == "." and self.peek(1).kind == "ident":
                self.expect(".")
                end = self._type_segment(children)
        else:
            raise _SyntaxFailure(f"expected a type at offset {tok.start}")
        while self.peek().text == "[" and self.peek(1).text == "]":
            lb = self.expect("[")
            close = self.expect("]")
            children.append(Node("array_dim", "[]", [], lb.start, close.end))
            end = close.end
        return self._node("type", children, tok.start, end)

    def _type_segment(self, children: list[Node]) -> int:
        name = self.expect_ident()
        children.append(self._leaf("identifier", name))
        end = name.end
        if self.at("<"):
            args = self.parse_type_args()
            children.append(args)
            end = args.end
        return end

    def parse_type_args(self) -> Node:
        start = self.expect("<").start
        args: list[Node] = []
        if not self.peek().text.startswith(">"):
            while True:
                if self.at("?"):
                    q = self.expect("?")
                    wc_children: list[Node] = []
                    end = q.end
                    if self.accept("extends") or self.accept("super"):
                        bound = self.parse_type()
                        wc_children.append(bound)
                        end = bound.end
                    args.append(self._node("wildcard", wc_children, q.start, end))
                else:
                    args.append(self.parse_type())
                if not self.accept(","):
                    break
        end = self.expect_close_angle()
        return self._node("type_args", args, start, end)

    # --- statements ---

    def parse_block(self) -> Node:
        start = self.expect("{").start
        stmts: list[Node] = []
        while not self.at("}"):
            stmts.append(self.parse_statement())
        end = self.expect("}").end
        return self._node("block", stmts, start, end)

    def parse_statement(self) -> Node:
        tok = self.peek()
        if tok.text == "{":
            return self.parse_block()
        if tok.text == ";":
            self.i += 1
            return Node("empty_stmt", ";", [], tok.start, tok.end)
        if tok.text == "if":
            return self.parse_if()
        if tok.text == "while":
            self.i += 1
            self.expect("(")
            cond = self.parse_expression()
            self.expect(")")
            body = self.parse_statement()
            return self._node("while_stmt", [cond, body], tok.start, body.end)
        if tok.text == "do":
            self.i += 1
            body = self.parse_statement()
            self.expect("while")
            self.expect("(")
            cond = self.parse_expression()
            self.expect(")")
            end = self.expect(";").end
            return self._node("do_stmt", [body, cond], tok.start, end)
        if tok.text == "for":
            return self.parse_for()
        if tok.text == "return":
            self.i += 1
            if self.at(";"):
                end = self.expect(";").end
                return self._node("return_stmt", [], tok.start, end)
            value = self.parse_expression()
            end = self.expect(";").end
            return self._node("return_stmt", [value], tok.start, end)
        if tok.text == "throw":
            self.i += 1
            value = self.parse_expression()
            end = self.expect(";").end
            return self._node("throw_stmt", [value], tok.start, end)
        if tok.text == "try":
            return self.parse_try()
        if tok.text == "switch":
            return self.parse_switch()
        if tok.text in ("break", "continue"):
            self.i += 1
            children = []
            if self.peek().kind == "ident":
                children.append(self._leaf("identifier", self.expect_ident()))
            end = self.expect(";").end
            return self._node(f"{tok.text}_stmt", children, tok.start, end)
        if tok.text == "assert":
            self.i += 1
            cond = self.parse_expression()
            children = [cond]
            if self.accept(":"):
                children.append(self.parse_expression())
            end = self.expect(";").end
            return self._node("assert_stmt", children, tok.start, end)
        if tok.text == "synchronized" and self.peek(1).text == "(":
            self.i += 1
            self.expect("(")
            guard = self.parse_expression()
            self.expect(")")
            body = self.parse_block()
            return self._node("sync_stmt", [guard, body], tok.start, body.end)
        local_type = self.try_parse(self._local_type_decl)
        if local_type is not None:
            return local_type
        decl = self.try_parse(self.parse_local_var_decl)
        if decl is not None:
            return decl
        expr = self.parse_expression()
        end = self.expect(";").end
        return self._node("expr_stmt", [expr], tok.start, end)

    def _local_type_decl(self) -> Node:
        saved = self.i
        self.parse_modifiers()
        if not (self.at("class") or self.at("interface") or self.at("enum")):
            raise _SyntaxFailure("not a local type declaration")
        self.i = saved
        return self.parse_type_decl()

    def parse_local_var_decl(self) -> Node:
        start = self.peek().start
        mods = self.parse_modifiers()
        vtype = self.parse_type()
        if self.peek().kind != "ident":
            raise _SyntaxFailure("not a local variable declaration")
        children = mods + [vtype, self.parse_declarator()]
        while self.accept(","):
            children.append(self.parse_declarator())
        end = self.expect(";").end
        return self._node("local_var_decl", children, start, end)

    def parse_if(self) -> Node:
        start = self.expect("if").start
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        then = self.parse_statement()
        children = [cond, then]
        end = then.end
        if self.accept("else"):
            other = self.parse_statement()
            children.append(other)
            end = other.end
        return self._node("if_stmt", children, start, end)

    def parse_for(self) -> Node:
        start = self.expect("for").start
        self.expect("(")
        foreach = self.try_parse(self._foreach_header)
        if foreach is not None:
            iterable = self.parse_expression()
            self.expect(")")
            body = self.parse_statement()
            return self._node("foreach_stmt", foreach + [iterable, body], start, body.end)
        children: list[Node] = []
        if not self.at(";"):
            init = self.try_parse(self._for_init_decl)
            if init is None:
                init = self._expr_list("for_init")
            children.append(init)
        self.expect(";")
        if not self.at(";"):
            children.append(self.parse_expression())
        self.expect(";")
        if not self.at(")"):
            children.append(self._expr_list("for_update"))
        self.expect(")")
        body = self.parse_statement()
        children.append(body)
        return self._node("for_stmt", children, start, body.end)

    def _foreach_header(self) -> list[Node]:
        mods = self.parse_modifiers()
        vtype = self.parse_type()
        name = self.expect_ident()
        self.expect(":")
        return mods + [vtype, self._leaf("decl_name", name)]

    def _for_init_decl(self) -> Node:
        start = self.peek().start
        mods = self.parse_modifiers()
        vtype = self.parse_type()
        if self.peek().kind != "ident" or self.peek(1).text in (".", "("):
            raise _SyntaxFailure("not a for-init declaration")
        children = mods + [vtype, self.parse_declarator()]
        while self.accept(","):
            children.append(self.parse_declarator())
        if not self.at(";"):
            raise _SyntaxFailure("not a for-init declaration")
        return self._node("local_var_decl", children, start, children[-1].end)

    def _expr_list(self, kind: str) -> Node:
        first = self.parse_expression()
        exprs = [first]
        while self.accept(","):
            exprs.append(self.parse_expression())
        return self._node(kind, exprs, first.start, exprs[-1].end)

    def parse_try(self) -> Node:
        start = self.expect("try").start
        children: list[Node] = [self.parse_block()]
        end = children[-1].end
        while self.at("catch"):
            c_start = self.expect("catch").start
            self.expect("(")
            mods = self.parse_modifiers()
            ctype = self.parse_type()
            c_children = mods + [ctype]
            while self.accept("|"):
                c_children.append(self.parse_type())
            name = self.expect_ident()
            c_children.append(self._leaf("decl_name", name))
            self.expect(")")
            body = self.parse_block()
            c_children.append(body)
            children.append(self._node("catch_clause", c_children, c_start, body.end))
            end = body.end
        if self.accept("finally"):
            body = self.parse_block()
            children.append(self._node("finally_clause", [body], body.start, body.end))
            end = body.end
        if len(children) == 1:
            raise _SyntaxFailure("try without catch or finally")
        return self._node("try_stmt", children, start, end)

    def parse_switch(self) -> Node:
        start = self.expect("switch").start
        self.expect("(")
        selector = self.parse_expression()
        self.expect(")")
        self.expect("{")
        children: list[Node] = [selector]
        while not self.at("}"):
            g_start = self.peek().start
            labels: list[Node] = []
            while self.at("case") or self.at("default"):
                if self.accept("case"):
                    expr = self.parse_expression()
                    self.expect(":")
                    labels.append(self._node("case_label", [expr], g_start, expr.end))
                else:
                    tok = self.expect("default")
                    self.expect(":")
                    labels.append(Node("default_label", "default", [], tok.start, tok.end))
            if not labels:
                raise _SyntaxFailure(f"expected case label at offset {self.peek().start}")
            stmts: list[Node] = []
            while not (self.at("case") or self.at("default") or self.at("}")):
                stmts.append(self.parse_statement())
            group = labels + stmts
            children.append(self._node("switch_case", group, g_start, group[-1].end))
        end = self.expect("}").end
        return self._node("switch_stmt", children, start, end)

    # --- expressions ---

    _BINARY_LEVELS = [
        ["||"],
        ["&&"],
        ["|"],
        ["^"],
        ["&"],
        ["==", "!="],
        ["<", ">", "<=", ">=", "instanceof"],
        ["<<", ">>", ">>>"],
        ["+", "-"],
        ["*", "/", "%"],
    ]
    _ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="}

    def parse_expression(self) -> Node:
        left = self.parse_ternary()
        tok = self.peek()
        if tok.text in self._ASSIGN_OPS and tok.kind == "op":
            self.i += 1
            right = self.parse_expression()
            return self._node("assign_expr", [left, right], left.start, right.end,
                              value=tok.text)
        return left

    def parse_ternary(self) -> Node:
        cond = self.parse_binary(0)
        if self.at("?"):
            self.expect("?")
            then = self.parse_expression()
            self.expect(":")
            other = self.parse_ternary()
            return self._node("ternary_expr", [cond, then, other], cond.start, other.end)
        return cond

    def parse_binary(self, level: int) -> Node:
        if level >= len(self._BINARY_LEVELS):
            return self.parse_unary()
        ops = self._BINARY_LEVELS[level]
        left = self.parse_binary(level + 1)
        while True:
            tok = self.peek()
            if tok.text not in ops:
                return left
            if tok.text == "instanceof":
                self.i += 1
                itype = self.parse_type()
                left = self._node("instanceof_expr", [left, itype], left.start, itype.end)
                continue
            if tok.kind != "op":
                return left
            self.i += 1
            right = self.parse_binary(level + 1)
            left = self._node("binary_expr", [left, right], left.start, right.end,
                              value=tok.text)

    def parse_unary(self) -> Node:
        tok = self.peek()
        if tok.text in ("+", "-", "!", "~", "++", "--") and tok.kind == "op":
            self.i += 1
            operand = self.parse_unary()
            return self._node("unary_expr", [operand], tok.start, operand.end,
                              value=tok.text)
        if tok.text == "(":
            cast = self.try_parse(self._cast)
            if cast is not None:
                return cast
        return self.parse_postfix()

    def _cast(self) -> Node:
        start = self.expect("(").start
        ctype = self.parse_type()
        self.expect(")")
        nxt = self.peek()
        plain_name = (
            all(ch.kind == "identifier" for ch in ctype.children)
        )
        can_start = (
            nxt.kind in ("ident", "number", "string", "char")
            or nxt.text in ("(", "this", "super", "new", "true", "false", "null")
            or (not plain_name and nxt.text in ("!", "~", "+", "-"))
        )
        if not can_start:
            raise _SyntaxFailure("not a cast")
        operand = self.parse_unary()
        return self._node("cast_expr", [ctype, operand], start, operand.end)

    def parse_postfix(self) -> Node:
        node = self.parse_primary()
        while True:
            tok = self.peek()
            if tok.text == "." and self.peek(1).kind in ("ident", "keyword"):
                member = self.peek(1)
                if member.kind == "keyword" and member.text not in ("this", "super", "class", "new"):
                    break
                if member.text == "new":
                    raise _SyntaxFailure("qualified class creation is not supported")
                self.i += 2
                leaf_kind = "identifier" if member.kind == "ident" else "keyword_ref"
                node = self._node("field_access", [node, self._leaf(leaf_kind, member)],
                                  node.start, member.end)
            elif tok.text == "(":
                args = self.parse_args()
                node = self._node("call_expr", [node] + args[0], node.start, args[1])
            elif tok.text == "[" :
                self.expect("[")
                index = self.parse_expression()
                end = self.expect("]").end
                node = self._node("array_access", [node, index], node.start, end)
            elif tok.text in ("++", "--"):
                self.i += 1
                node = self._node("postfix_expr", [node], node.start, tok.end,
                                  value=tok.text)
            else:
                break
        return node

    def parse_args(self) -> tuple[list[Node], int]:
        self.expect("(")
        args: list[Node] = []
        while not self.at(")"):
            args.append(self.parse_expression())
            if not self.accept(","):
                break
        end = self.expect(")").end
        return args, end

    def parse_primary(self) -> Node:
        tok = self.peek()
        if tok.kind in ("number", "string", "char"):
            self.i += 1
            return self._leaf("literal", tok)
        if tok.text in ("true", "false", "null"):
            self.i += 1
            return self._leaf("literal", tok)
        if tok.text in ("this", "super"):
            self.i += 1
            return self._leaf("self_ref", tok)
        if tok.kind == "ident":
            self.i += 1
            return self._leaf("identifier", tok)
        if tok.kind == "keyword" and tok.text in PRIMITIVE_WORDS:
            # primitive class literals: int.class
            self.i += 1
            return self._leaf("primitive_type", tok)
        if tok.text == "(":
            self.expect("(")
            inner = self.parse_expression()
            end = self.expect(")").end
            return self._node("paren_expr", [inner], tok.start, end)
        if tok.text == "new":
            return self.parse_new()
        raise _SyntaxFailure(f"unexpected token {tok.text!r} at offset {tok.start}")

    def parse_new(self) -> Node:
        start = self.expect("new").start
        ntype = self.parse_type()
        has_dims = any(c.kind == "array_dim" for c in ntype.children)
        if self.at("[") or has_dims:
            children: list[Node] = [ntype]
            end = ntype.end
            while self.at("["):
                self.expect("[")
                if not self.at("]"):
                    children.append(self.parse_expression())
                end = self.expect("]").end
            if self.at("{"):
                init = self.parse_array_init()
                children.append(init)
                end = init.end
            return self._node("array_creation", children, start, end)
        args, end = self.parse_args()
        children = [ntype] + args
        if self.at("{"):  # anonymous class body
            body_start = self.expect("{").start
            body_children: list[Node] = []
            while not self.at("}"):
                if self.accept(";"):
                    continue
                body_children.append(self.parse_member(""))
            body_end = self.expect("}").end
            children.append(self._node("anon_body", body_children, body_start, body_end))
            end = body_end
        return self._node("new_expr", children, start, end)

    def parse_array_init(self) -> Node:
        start = self.expect("{").start
        items: list[Node] = []
        while not self.at("}"):
            items.append(self.parse_array_init() if self.at("{") else self.parse_expression())
            if not self.accept(","):
                break
        end = self.expect("}").end
        return self._node("array_init", items, start, end)


def parse(source: str) -> SyntaxTree:
    """Parse source text; never raises.

    Unparseable input yields a single opaque node flagged not-ok, which the
    callers treat conservatively.
    """
    try:
        tokens, comments = _tokenize(source)
        parser = _Parser(source, tokens)
        root = parser.parse_unit()
        if parser.peek().kind != "eof":
            raise _SyntaxFailure(f"trailing input at offset {parser.peek().start}")
        _finalize(root)
        return SyntaxTree(source, root, ok=True, comment_spans=comments)
    except (_SyntaxFailure, RecursionError) as exc:
        root = Node("opaque", source, [], 0, len(source))
        _finalize(root)
        return SyntaxTree(source, root, ok=False, error=str(exc))


# --- member extraction -------------------------------------------------------

MEMBER_METHOD = "method"
MEMBER_CTOR = "constructor"
MEMBER_FIELD = "field"
MEMBER_INITIALIZER = "initializer"
MEMBER_TYPE = "type-level"


@dataclass(frozen=True)
class MemberInfo:
    member_kind: str
    signature: str


def render_type(node: Node) -> str:
    """Compact text of a type node, stable under whitespace edits."""
    out = ""
    for child in node.children:
        if child.kind in ("identifier", "primitive_type"):
            out += ("." if out else "") + child.value
        elif child.kind == "type_args":
            out += "<" + ",".join(render_type_arg(a) for a in child.children) + ">"
        elif child.kind == "array_dim":
            out += "[]"
    return out


def render_type_arg(node: Node) -> str:
    if node.kind == "wildcard":
        return "?" if not node.children else f"?:{render_type(node.children[0])}"
    return render_type(node)


def _decl_name_of(node: Node) -> str:
    for child in node.children:
        if child.kind == "decl_name":
            return child.value
    return "<anon>"


def _member_signature(node: Node, prefix: str) -> str:
    if node.kind in ("method_decl", "ctor_decl"):
        name = "<init>" if node.kind == "ctor_decl" else _decl_name_of(node)
        params = [render_type(next(cc for cc in c.children if cc.kind == "type"))
                  for c in node.children if c.kind == "param"]
        return f"{prefix}.{name}({','.join(params)})"
    if node.kind == "field_decl":
        names = [_decl_name_of(c) for c in node.children if c.kind == "declarator"]
        return f"{prefix}.{','.join(names)}"
    return prefix


def member_index(tree: SyntaxTree) -> dict[int, MemberInfo]:
    """Map id(member root node) -> MemberInfo for every declared member."""
    out: dict[int, MemberInfo] = {}
    if not tree.ok:
        return out

    def visit_type(node: Node, prefix: str) -> None:
        name = _decl_name_of(node)
        qual = f"{prefix}.{name}" if prefix else name
        out[id(node)] = MemberInfo(MEMBER_TYPE, qual)
        init_count = 0
        for child in node.children:
            if child.kind == "type_decl":
                visit_type(child, qual)
            elif child.kind in ("method_decl", "ctor_decl"):
                kind = MEMBER_METHOD if child.kind == "method_decl" else MEMBER_CTOR
                out[id(child)] = MemberInfo(kind, _member_signature(child, qual))
            elif child.kind == "field_decl":
                out[id(child)] = MemberInfo(MEMBER_FIELD, _member_signature(child, qual))
            elif child.kind == "initializer_block":
                out[id(child)] = MemberInfo(
                    MEMBER_INITIALIZER, f"{qual}.<initializer#{init_count}>"
                )
                init_count += 1

    for top in tree.root.children:
        if top.kind == "type_decl":
            visit_type(top, "")
    return out


def enclosing_member(node: Node, members: dict[int, MemberInfo]) -> Optional[MemberInfo]:
    """The smallest declared member containing the node (or the node itself)."""
    cur: Optional[Node] = node
    while cur is not None:
        info = members.get(id(cur))
        if info is not None:
            return info
        cur = cur.parent
    return None


def import_used_names(import_value: str) -> list[str]:
    """Type or member names an import statement refers to."""
    value = import_value.removeprefix("static ")
    last = value.rsplit(".", 1)[-1]
    return [] if last == "*" else [last]
