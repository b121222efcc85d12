"""Query AST nodes.

Everything is a frozen dataclass so parsed trees compare structurally,
which is what the print/reparse fixed-point tests rely on. Concrete RDF
terms reuse kgstore.Term so evaluation can compare against store triples
directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..kgstore import Term


@dataclass(frozen=True)
class Var:
    name: str


TermPat = Union[Var, Term]


@dataclass(frozen=True)
class TriplePattern:
    s: TermPat
    p: TermPat
    o: TermPat


@dataclass(frozen=True)
class Comparison:
    op: str  # = != < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Arith:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class NotExpr:
    inner: "Expr"


@dataclass(frozen=True)
class AndExpr:
    parts: tuple["Expr", ...]


@dataclass(frozen=True)
class OrExpr:
    parts: tuple["Expr", ...]


Expr = Union[Var, Term, Comparison, Arith, NotExpr, AndExpr, OrExpr]


@dataclass(frozen=True)
class Filter:
    expr: Expr


@dataclass(frozen=True)
class OptionalGroup:
    group: "Group"


@dataclass(frozen=True)
class Group:
    items: tuple[Union[TriplePattern, Filter, OptionalGroup], ...]


@dataclass(frozen=True)
class Aggregate:
    func: str  # COUNT SUM AVG MIN MAX
    arg: Var | None  # None means *
    alias: Var


@dataclass(frozen=True)
class SelectQuery:
    distinct: bool
    projection: tuple[Union[Var, Aggregate], ...] | None  # None means *
    where: Group
    group_by: tuple[Var, ...] = ()
    order_by: tuple[tuple[Var, bool], ...] = ()  # (variable, ascending)
    limit: int | None = None
    offset: int | None = None

    @property
    def aggregates(self) -> tuple[Aggregate, ...]:
        return tuple(p for p in (self.projection or ()) if isinstance(p, Aggregate))


@dataclass(frozen=True)
class AskQuery:
    where: Group


Query = Union[SelectQuery, AskQuery]


def pattern_vars(group: Group) -> list[str]:
    """Variable names bound by triple patterns, in first-appearance order,
    including those inside optional blocks."""
    names: list[str] = []

    def walk(g: Group):
        for item in g.items:
            if isinstance(item, TriplePattern):
                for part in (item.s, item.p, item.o):
                    if isinstance(part, Var) and part.name not in names:
                        names.append(part.name)
            elif isinstance(item, OptionalGroup):
                walk(item.group)

    walk(group)
    return names
