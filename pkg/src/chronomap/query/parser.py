"""Tokenizer, recursive-descent parser, printer, and schema validation.

The grammar is a deliberately small SPARQL subset: SELECT/ASK, basic graph
patterns, FILTER expressions, OPTIONAL blocks, aggregates with GROUP BY,
ORDER BY, LIMIT/OFFSET. UNION, subqueries, property paths, and query-time
geometry functions are out of scope; everything they would answer is
materialized in the store.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .. import kgstore as kg
from ..errors import QuerySyntaxError, UnknownPrefixError
from . import ast

DEFAULT_PREFIXES = dict(kg.PREFIXES)

_KEYWORDS = {
    "SELECT", "ASK", "WHERE", "PREFIX", "FILTER", "OPTIONAL", "DISTINCT",
    "GROUP", "BY", "ORDER", "ASC", "DESC", "LIMIT", "OFFSET", "AS",
    "COUNT", "SUM", "AVG", "MIN", "MAX",
}
_AGG_FUNCS = ("COUNT", "SUM", "AVG", "MIN", "MAX")

_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<COMMENT>\#[^\n]*)
  | (?P<IRIREF><[^<>\s]*>)
  | (?P<VAR>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<NUMBER>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<PNAME>[A-Za-z_][A-Za-z0-9_-]*:[A-Za-z0-9_.-]*)
  | (?P<NAME>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<STRING>"(?:[^"\\]|\\.)*")
  | (?P<OP>\|\||&&|!=|<=|>=|[{}().,;*/+\-=<>!])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        raw = m.group()
        if kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], prefixes: dict[str, str]):
        self.tokens = tokens
        self.pos = 0
        self.prefixes = dict(prefixes)

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, *expected: str) -> QuerySyntaxError:
        tok = self.peek()
        return QuerySyntaxError(message, tok.line, tok.col, tuple(expected))

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "NAME" and tok.text.upper() == word

    def eat_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            raise self.error(f"expected {word}", word)
        return self.advance()

    def at_op(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text == text

    def eat_op(self, text: str) -> Token:
        if not self.at_op(text):
            raise self.error(f"expected {text!r}", text)
        return self.advance()

    # -- grammar ------------------------------------------------------------

    def parse_query(self) -> ast.Query:
        while self.at_keyword("PREFIX"):
            self.parse_prefix()
        if self.at_keyword("SELECT"):
            query = self.parse_select()
        elif self.at_keyword("ASK"):
            self.advance()
            query = ast.AskQuery(where=self.parse_group())
        else:
            raise self.error("expected SELECT or ASK", "SELECT", "ASK")
        if self.peek().kind != "EOF":
            raise self.error("trailing input after query")
        _check_invariants(query, self)
        return query

    def parse_prefix(self) -> None:
        self.advance()
        tok = self.peek()
        # the lexer folds "name:" into a PNAME with empty local part
        if tok.kind == "PNAME" and tok.text.endswith(":"):
            name = self.advance().text[:-1]
        elif tok.kind == "NAME":
            self.advance()
            self.eat_op(":")
            name = tok.text
        else:
            raise self.error("expected prefix name")
        iri_tok = self.peek()
        if iri_tok.kind != "IRIREF":
            raise self.error("expected <iri> in PREFIX")
        self.advance()
        self.prefixes[name] = iri_tok.text[1:-1]

    def parse_select(self) -> ast.SelectQuery:
        self.advance()
        distinct = False
        if self.at_keyword("DISTINCT"):
            distinct = True
            self.advance()
        projection: list[ast.Var | ast.Aggregate] | None
        if self.at_op("*"):
            self.advance()
            projection = None
        else:
            projection = []
            while True:
                tok = self.peek()
                if tok.kind == "VAR":
                    projection.append(ast.Var(self.advance().text[1:]))
                elif self.at_op("("):
                    projection.append(self.parse_agg_alias())
                else:
                    break
            if not projection:
                raise self.error("expected projection variables, aggregates, or *")
        self.eat_keyword("WHERE")
        where = self.parse_group()
        group_by: tuple[ast.Var, ...] = ()
        order_by: list[tuple[ast.Var, bool]] = []
        limit = offset = None
        while True:
            if self.at_keyword("GROUP"):
                self.advance()
                self.eat_keyword("BY")
                gvars = []
                while self.peek().kind == "VAR":
                    gvars.append(ast.Var(self.advance().text[1:]))
                if not gvars:
                    raise self.error("GROUP BY needs at least one variable")
                group_by = tuple(gvars)
            elif self.at_keyword("ORDER"):
                self.advance()
                self.eat_keyword("BY")
                if self.at_keyword("ASC"):
                    ascending = True
                    self.advance()
                elif self.at_keyword("DESC"):
                    ascending = False
                    self.advance()
                else:
                    raise self.error("expected ASC or DESC", "ASC", "DESC")
                self.eat_op("(")
                tok = self.peek()
                if tok.kind != "VAR":
                    raise self.error("expected variable in ORDER BY")
                self.advance()
                self.eat_op(")")
                order_by.append((ast.Var(tok.text[1:]), ascending))
            elif self.at_keyword("LIMIT"):
                self.advance()
                limit = self.parse_nonnegative_int("LIMIT")
            elif self.at_keyword("OFFSET"):
                self.advance()
                offset = self.parse_nonnegative_int("OFFSET")
            else:
                break
        return ast.SelectQuery(
            distinct=distinct,
            projection=tuple(projection) if projection is not None else None,
            where=where,
            group_by=group_by,
            order_by=tuple(order_by),
            limit=limit,
            offset=offset,
        )

    def parse_nonnegative_int(self, label: str) -> int:
        tok = self.peek()
        if tok.kind != "NUMBER" or not tok.text.isdigit():
            raise self.error(f"expected integer after {label}")
        self.advance()
        return int(tok.text)

    def parse_agg_alias(self) -> ast.Aggregate:
        self.eat_op("(")
        tok = self.peek()
        if tok.kind != "NAME" or tok.text.upper() not in _AGG_FUNCS:
            raise self.error("expected aggregate function", *_AGG_FUNCS)
        func = self.advance().text.upper()
        self.eat_op("(")
        if self.at_op("*"):
            self.advance()
            arg = None
        else:
            var_tok = self.peek()
            if var_tok.kind != "VAR":
                raise self.error("expected variable or * in aggregate")
            self.advance()
            arg = ast.Var(var_tok.text[1:])
        self.eat_op(")")
        self.eat_keyword("AS")
        alias_tok = self.peek()
        if alias_tok.kind != "VAR":
            raise self.error("expected alias variable after AS")
        self.advance()
        self.eat_op(")")
        return ast.Aggregate(func=func, arg=arg, alias=ast.Var(alias_tok.text[1:]))

    def parse_group(self) -> ast.Group:
        self.eat_op("{")
        items: list = []
        while not self.at_op("}"):
            if self.at_keyword("FILTER"):
                self.advance()
                self.eat_op("(")
                expr = self.parse_expr()
                self.eat_op(")")
                items.append(ast.Filter(expr))
            elif self.at_keyword("OPTIONAL"):
                self.advance()
                items.append(ast.OptionalGroup(self.parse_group()))
            elif self.peek().kind == "EOF":
                raise self.error("unterminated group, expected }", "}")
            else:
                s = self.parse_term_pat()
                p = self.parse_term_pat()
                o = self.parse_term_pat()
                items.append(ast.TriplePattern(s, p, o))
                if self.at_op("."):
                    self.advance()
        self.advance()  # }
        return ast.Group(tuple(items))

    def parse_term_pat(self) -> ast.TermPat:
        tok = self.peek()
        if tok.kind == "VAR":
            self.advance()
            return ast.Var(tok.text[1:])
        if tok.kind == "IRIREF":
            self.advance()
            return kg.iri(tok.text[1:-1])
        if tok.kind == "PNAME":
            self.advance()
            return self.expand_pname(tok)
        if tok.kind == "STRING":
            self.advance()
            return kg.lit_string(_unquote(tok.text))
        if tok.kind == "NUMBER":
            self.advance()
            return _number_term(tok.text)
        if self.at_op("-"):
            self.advance()
            num = self.peek()
            if num.kind != "NUMBER":
                raise self.error("expected number after -")
            self.advance()
            return _number_term("-" + num.text)
        if tok.kind == "NAME" and tok.text.lower() in ("true", "false"):
            self.advance()
            return kg.lit_bool(tok.text.lower() == "true")
        raise self.error(
            "expected term", "variable", "iri", "prefixed name", "literal"
        )

    def expand_pname(self, tok: Token) -> kg.Term:
        prefix, _, local = tok.text.partition(":")
        base = self.prefixes.get(prefix)
        if base is None:
            raise UnknownPrefixError(f"unknown prefix {prefix!r}", tok.line, tok.col)
        return kg.iri(base + local)

    # -- expressions --------------------------------------------------------

    def parse_expr(self) -> ast.Expr:
        return self.parse_or()

    def parse_or(self) -> ast.Expr:
        parts = [self.parse_and()]
        while self.at_op("||"):
            self.advance()
            parts.append(self.parse_and())
        return parts[0] if len(parts) == 1 else ast.OrExpr(tuple(parts))

    def parse_and(self) -> ast.Expr:
        parts = [self.parse_not()]
        while self.at_op("&&"):
            self.advance()
            parts.append(self.parse_not())
        return parts[0] if len(parts) == 1 else ast.AndExpr(tuple(parts))

    def parse_not(self) -> ast.Expr:
        if self.at_op("!"):
            self.advance()
            return ast.NotExpr(self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self) -> ast.Expr:
        left = self.parse_add()
        for op in ("<=", ">=", "!=", "=", "<", ">"):
            if self.at_op(op):
                self.advance()
                return ast.Comparison(op, left, self.parse_add())
        return left

    def parse_add(self) -> ast.Expr:
        node = self.parse_mul()
        while self.at_op("+") or self.at_op("-"):
            op = self.advance().text
            node = ast.Arith(op, node, self.parse_mul())
        return node

    def parse_mul(self) -> ast.Expr:
        node = self.parse_prim()
        while self.at_op("*") or self.at_op("/"):
            op = self.advance().text
            node = ast.Arith(op, node, self.parse_prim())
        return node

    def parse_prim(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind == "VAR":
            self.advance()
            return ast.Var(tok.text[1:])
        if tok.kind == "NUMBER":
            self.advance()
            return _number_term(tok.text)
        if tok.kind == "STRING":
            self.advance()
            return kg.lit_string(_unquote(tok.text))
        if tok.kind == "NAME" and tok.text.lower() in ("true", "false"):
            self.advance()
            return kg.lit_bool(tok.text.lower() == "true")
        if self.at_op("("):
            self.advance()
            inner = self.parse_expr()
            self.eat_op(")")
            return inner
        raise self.error("expected expression", "variable", "number", "string", "boolean", "(")


def _number_term(text: str) -> kg.Term:
    if re.fullmatch(r"-?\d+", text):
        return kg.lit_int(int(text))
    return kg.lit_decimal(float(text))


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and i + 1 < len(body):
            out.append({"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _check_invariants(query: ast.Query, parser: _Parser) -> None:
    if isinstance(query, ast.AskQuery):
        return
    bound = set(ast.pattern_vars(query.where))
    aliases = {a.alias.name for a in query.aggregates}
    grouped = {v.name for v in query.group_by}
    has_aggregates = bool(query.aggregates)
    if query.projection is None:
        if query.group_by:
            raise QuerySyntaxError("SELECT * cannot be combined with GROUP BY", 1, 1)
        return
    for item in query.projection:
        if isinstance(item, ast.Var):
            if item.name not in bound:
                raise QuerySyntaxError(
                    f"projected variable ?{item.name} does not appear in the pattern", 1, 1
                )
            if (has_aggregates or query.group_by) and item.name not in grouped:
                raise QuerySyntaxError(
                    f"projected variable ?{item.name} must be in GROUP BY", 1, 1
                )
        else:
            if item.arg is not None and item.arg.name not in bound:
                raise QuerySyntaxError(
                    f"aggregate argument ?{item.arg.name} does not appear in the pattern", 1, 1
                )
    for v in query.group_by:
        if v.name not in bound:
            raise QuerySyntaxError(f"GROUP BY variable ?{v.name} does not appear in the pattern", 1, 1)
    for v, _asc in query.order_by:
        if v.name not in bound and v.name not in aliases:
            raise QuerySyntaxError(f"ORDER BY variable ?{v.name} is not in scope", 1, 1)


def parse(text: str, prefixes: dict[str, str] | None = None) -> ast.Query:
    """Parse query text into an AST; prefixed names are expanded eagerly.

    The cmf/cmo/cmr/xsd prefixes are predeclared; PREFIX lines may add to
    or override them. Unknown predicates are not a parse error (schema
    validation is a separate pass).
    """
    tokens = _tokenize(text)
    parser = _Parser(tokens, prefixes or DEFAULT_PREFIXES)
    return parser.parse_query()


def validate_against_schema(query: ast.Query, schema: kg.Schema) -> list[str]:
    """IRIs used in predicate position that are missing from the catalog.

    Variable predicates cannot be checked statically and pass through.
    """
    violations: list[str] = []

    def walk(group: ast.Group, path: str):
        for idx, item in enumerate(group.items):
            if isinstance(item, ast.TriplePattern):
                pred = item.p
                if isinstance(pred, kg.Term) and pred.is_iri and pred.value not in schema:
                    violations.append(f"{path}pattern {idx}: unknown predicate {pred.value}")
            elif isinstance(item, ast.OptionalGroup):
                walk(item.group, f"{path}optional {idx} > ")

    walk(query.where, "")
    return violations


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------


def _print_term(t: ast.TermPat) -> str:
    if isinstance(t, ast.Var):
        return f"?{t.name}"
    if t.is_iri:
        return f"<{t.value}>"
    if t.datatype == "boolean":
        return "true" if t.value else "false"
    if t.datatype == "integer":
        return str(t.value)
    if t.datatype == "decimal":
        return repr(t.value)
    return kg.nt_term(t)  # plain quoted string


def _print_expr(e: ast.Expr, parenthesize: bool = False) -> str:
    if isinstance(e, ast.Var):
        text = f"?{e.name}"
    elif isinstance(e, kg.Term):
        return _print_term(e)
    elif isinstance(e, ast.Comparison):
        text = f"{_print_expr(e.left, True)} {e.op} {_print_expr(e.right, True)}"
    elif isinstance(e, ast.Arith):
        text = f"{_print_expr(e.left, True)} {e.op} {_print_expr(e.right, True)}"
    elif isinstance(e, ast.NotExpr):
        return f"!{_print_expr(e.inner, True)}"
    elif isinstance(e, ast.AndExpr):
        text = " && ".join(_print_expr(p, True) for p in e.parts)
    elif isinstance(e, ast.OrExpr):
        text = " || ".join(_print_expr(p, True) for p in e.parts)
    else:  # pragma: no cover
        raise TypeError(f"unknown expression node {e!r}")
    if parenthesize and not isinstance(e, (ast.Var, kg.Term)):
        return f"({text})"
    return text


def _print_group(group: ast.Group, indent: str) -> str:
    lines = ["{"]
    inner = indent + "  "
    for item in group.items:
        if isinstance(item, ast.TriplePattern):
            lines.append(f"{inner}{_print_term(item.s)} {_print_term(item.p)} {_print_term(item.o)} .")
        elif isinstance(item, ast.Filter):
            lines.append(f"{inner}FILTER({_print_expr(item.expr)})")
        else:
            lines.append(f"{inner}OPTIONAL {_print_group(item.group, inner)}")
    lines.append(indent + "}")
    return "\n".join(lines)


def to_text(query: ast.Query) -> str:
    """Canonical text for an AST; reparsing yields a structurally equal tree."""
    if isinstance(query, ast.AskQuery):
        return f"ASK {_print_group(query.where, '')}"
    parts = ["SELECT"]
    if query.distinct:
        parts.append("DISTINCT")
    if query.projection is None:
        parts.append("*")
    else:
        for item in query.projection:
            if isinstance(item, ast.Var):
                parts.append(f"?{item.name}")
            else:
                arg = "*" if item.arg is None else f"?{item.arg.name}"
                parts.append(f"({item.func}({arg}) AS ?{item.alias.name})")
    header = " ".join(parts)
    text = f"{header} WHERE {_print_group(query.where, '')}"
    if query.group_by:
        text += "\nGROUP BY " + " ".join(f"?{v.name}" for v in query.group_by)
    for var, ascending in query.order_by:
        text += f"\nORDER BY {'ASC' if ascending else 'DESC'}(?{var.name})"
    if query.limit is not None:
        text += f"\nLIMIT {query.limit}"
    if query.offset is not None:
        text += f"\nOFFSET {query.offset}"
    return text
