"""Query evaluation over a sealed store.

Bag semantics throughout: triple patterns join by index lookup, filters
apply once their group's bindings are complete, OPTIONAL blocks left-join.
A filter that hits a type error (string compared to a number, arithmetic
on IRIs, unbound variable) drops the row and tallies it rather than
failing the query.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import kgstore as kg
from . import ast


class TypeMismatch(Exception):
    """Filter expression applied to incompatible operand types."""


@dataclass
class EvalStats:
    filter_type_mismatches: int = 0


@dataclass
class SolutionTable:
    variables: list[str]
    rows: list[tuple]  # Term or None per variable
    stats: EvalStats = field(default_factory=EvalStats)

    def column(self, name: str) -> list:
        idx = self.variables.index(name)
        return [row[idx] for row in self.rows]


Binding = dict[str, kg.Term]


def _resolve(part: ast.TermPat, binding: Binding) -> kg.Term | None:
    if isinstance(part, ast.Var):
        return binding.get(part.name)
    return part


def _join_pattern(rows: list[Binding], pattern: ast.TriplePattern, store: kg.Store) -> list[Binding]:
    out: list[Binding] = []
    for binding in rows:
        s = _resolve(pattern.s, binding)
        p = _resolve(pattern.p, binding)
        o = _resolve(pattern.o, binding)
        for triple in store.match(s, p, o):
            extended = dict(binding)
            ok = True
            for part, value in ((pattern.s, triple.s), (pattern.p, triple.p), (pattern.o, triple.o)):
                if isinstance(part, ast.Var):
                    bound = extended.get(part.name)
                    if bound is None:
                        extended[part.name] = value
                    elif bound != value:
                        ok = False
                        break
            if ok:
                out.append(extended)
    return out


def _eval_group(group: ast.Group, store: kg.Store, base: list[Binding], stats: EvalStats) -> list[Binding]:
    rows = base
    filters: list[ast.Filter] = []
    for item in group.items:
        if isinstance(item, ast.TriplePattern):
            rows = _join_pattern(rows, item, store)
        elif isinstance(item, ast.OptionalGroup):
            extended: list[Binding] = []
            for row in rows:
                sub = _eval_group(item.group, store, [row], stats)
                extended.extend(sub if sub else [row])
            rows = extended
        else:
            filters.append(item)
    for f in filters:
        kept = []
        for row in rows:
            try:
                value = eval_expr(f.expr, row)
                if value is True:
                    kept.append(row)
                elif not isinstance(value, bool):
                    stats.filter_type_mismatches += 1
            except TypeMismatch:
                stats.filter_type_mismatches += 1
        rows = kept
    return rows


# ---------------------------------------------------------------------------
# Expression evaluation
# ---------------------------------------------------------------------------

_NUMERIC = ("integer", "decimal")


def eval_expr(expr: ast.Expr, binding: Binding):
    """Evaluate a filter expression to a Python value; raises TypeMismatch."""
    if isinstance(expr, ast.Var):
        term = binding.get(expr.name)
        if term is None:
            raise TypeMismatch(f"unbound variable ?{expr.name}")
        return term
    if isinstance(expr, kg.Term):
        return expr
    if isinstance(expr, ast.NotExpr):
        return not _as_bool(eval_expr(expr.inner, binding))
    if isinstance(expr, ast.AndExpr):
        return all(_as_bool(eval_expr(p, binding)) for p in expr.parts)
    if isinstance(expr, ast.OrExpr):
        return any(_as_bool(eval_expr(p, binding)) for p in expr.parts)
    if isinstance(expr, ast.Comparison):
        return _compare(expr.op, eval_expr(expr.left, binding), eval_expr(expr.right, binding))
    if isinstance(expr, ast.Arith):
        return _arith(expr.op, eval_expr(expr.left, binding), eval_expr(expr.right, binding))
    raise TypeMismatch(f"unsupported expression node {expr!r}")


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, kg.Term) and value.datatype == "boolean":
        return bool(value.value)
    raise TypeMismatch("expected a boolean operand")


def _as_number(value) -> float | int:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return value
    if isinstance(value, kg.Term) and value.datatype in _NUMERIC:
        return value.value
    raise TypeMismatch("expected a numeric operand")


def _compare(op: str, left, right) -> bool:
    lv, rv = _comparable(left), _comparable(right)
    if op == "=":
        return lv == rv
    if op == "!=":
        return lv != rv
    both_numbers = isinstance(lv, (int, float)) and isinstance(rv, (int, float))
    both_strings = isinstance(lv, str) and isinstance(rv, str)
    if not (both_numbers or both_strings):
        raise TypeMismatch("ordering is defined for number or string pairs only")
    if op == "<":
        return lv < rv
    if op == "<=":
        return lv <= rv
    if op == ">":
        return lv > rv
    return lv >= rv


def _comparable(value):
    """Project a value into one comparable category or refuse."""
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, kg.Term):
        if value.datatype in _NUMERIC:
            return value.value
        if value.datatype == "string":
            return value.value
        if value.datatype == "boolean":
            return ("bool", value.value)
        if value.is_iri:
            return ("iri", value.value)
        return ("geom", value.value)
    if isinstance(value, str):
        return value
    raise TypeMismatch(f"cannot compare {value!r}")


def _arith(op: str, left, right):
    lv, rv = _as_number(left), _as_number(right)
    if op == "+":
        return lv + rv
    if op == "-":
        return lv - rv
    if op == "*":
        return lv * rv
    if rv == 0:
        raise TypeMismatch("division by zero")
    result = lv / rv
    return result


def term_order_key(term: kg.Term):
    """Total order for ORDER BY: numerics, then strings, booleans, IRIs."""
    if term.kind == "literal":
        if term.datatype in _NUMERIC:
            return (0, float(term.value), "")
        if term.datatype == "string":
            return (1, 0.0, term.value)
        return (2, float(bool(term.value)), "")
    if term.kind == "iri":
        return (3, 0.0, term.value)
    return (4, 0.0, str(term.value))


# ---------------------------------------------------------------------------
# Aggregation and projection
# ---------------------------------------------------------------------------


def _aggregate(agg: ast.Aggregate, bucket: list[Binding]) -> kg.Term | None:
    if agg.func == "COUNT":
        if agg.arg is None:
            return kg.lit_int(len(bucket))
        return kg.lit_int(sum(1 for row in bucket if row.get(agg.arg.name) is not None))
    values = [row[agg.arg.name] for row in bucket if row.get(agg.arg.name) is not None]
    if not values:
        return None  # unbound over an empty group
    if agg.func in ("SUM", "AVG"):
        if not all(v.kind == "literal" and v.datatype in _NUMERIC for v in values):
            return None
        nums = sorted(v.value for v in values)  # fixed order: float sums reproducible
        if agg.func == "SUM":
            total = sum(nums)
            return kg.lit_int(total) if all(isinstance(n, int) for n in nums) else kg.lit_decimal(float(total))
        return kg.lit_decimal(sum(nums) / len(nums))
    ordered = sorted(values, key=term_order_key)
    return ordered[0] if agg.func == "MIN" else ordered[-1]


def canonical_row_key(row: Binding) -> str:
    """Deterministic base order for solution rows, independent of join order."""
    return repr(sorted((name, term.sort_key()) for name, term in row.items()))


def _project(query: ast.SelectQuery, rows: list[Binding], stats: EvalStats) -> SolutionTable:
    aggregates = query.aggregates
    if aggregates or query.group_by:
        grouped: dict[tuple, list[Binding]] = {}
        for row in rows:
            key = tuple(row.get(v.name) for v in query.group_by)
            grouped.setdefault(key, []).append(row)
        if not grouped and not query.group_by:
            grouped[()] = []  # whole-table grouping: COUNT over nothing is 0
        solution_rows: list[Binding] = []
        for key in sorted(grouped, key=repr):
            bucket = grouped[key]
            cells: Binding = {
                v.name: key[i] for i, v in enumerate(query.group_by) if key[i] is not None
            }
            for agg in aggregates:
                value = _aggregate(agg, bucket)
                if value is not None:
                    cells[agg.alias.name] = value
            solution_rows.append(cells)
        rows = solution_rows
        header = [p.name if isinstance(p, ast.Var) else p.alias.name for p in query.projection or ()]
    elif query.projection is None:
        header = ast.pattern_vars(query.where)
    else:
        header = [p.name for p in query.projection]  # all plain vars here
    rows = sorted(rows, key=canonical_row_key)
    for var, ascending in query.order_by:
        bound = [r for r in rows if r.get(var.name) is not None]
        unbound = [r for r in rows if r.get(var.name) is None]
        bound.sort(key=lambda r: term_order_key(r[var.name]), reverse=not ascending)
        rows = bound + unbound
    table = [tuple(row.get(h) for h in header) for row in rows]
    if query.distinct:
        seen = set()
        deduped = []
        for row in table:
            if row not in seen:
                seen.add(row)
                deduped.append(row)
        table = deduped
    if query.offset:
        table = table[query.offset:]
    if query.limit is not None:
        table = table[: query.limit]
    return SolutionTable(variables=header, rows=table, stats=stats)


def evaluate(query: ast.Query, store: kg.Store) -> SolutionTable | bool:
    """Evaluate a parsed query; SELECT yields a SolutionTable, ASK a bool."""
    stats = EvalStats()
    rows = _eval_group(query.where, store, [{}], stats)
    if isinstance(query, ast.AskQuery):
        return len(rows) > 0
    return _project(query, rows, stats)
