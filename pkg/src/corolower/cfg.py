"""Control flow graphs of generator bodies.

Blocks hold straight-line statements; control transfers live in the
terminator (goto, two-way branch, yield, finish). Yields end their block
because they are exactly the points where the lowering must cut states.

The reserved id END (0) stands for "leave the function with a null
result": branch arms may point at it directly, and after merging so may
a yield's resume edge. An empty Finish block is materialized only where
an edge needs a real block: as the entry of an empty body or as a
yield's resume target. Block ids are dense, entry = 1, and follow
reverse postorder, which makes the fib example number its blocks exactly
like the published figure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import TransformError
from .printer import expr_source, stmt_lines
from .syntax import (
    Assign,
    BoolLit,
    Expr,
    ExprStmt,
    FieldSet,
    FuncDecl,
    If,
    Let,
    LetYield,
    Print,
    Return,
    Stmt,
    While,
    YieldStmt,
)

END = 0


@dataclass
class Goto:
    target: int


@dataclass
class Branch:
    cond: Expr
    then: int
    orelse: int


@dataclass
class YieldTo:
    value: Expr
    receiver: Optional[str]  # present iff the source statement was let-yield
    resume: int


@dataclass
class Finish:
    value: Optional[Expr] = None


Terminator = Union[Goto, Branch, YieldTo, Finish]


@dataclass
class BasicBlock:
    id: int
    stmts: list[Stmt]
    terminator: Terminator


@dataclass
class Cfg:
    blocks: dict[int, BasicBlock]
    entry: int


_STRAIGHT_LINE = (Let, Assign, ExprStmt, Print, FieldSet)


def _targets(term: Terminator) -> list[int]:
    if isinstance(term, Goto):
        return [term.target]
    if isinstance(term, Branch):
        return [term.then, term.orelse]
    if isinstance(term, YieldTo):
        return [term.resume]
    return []


def _retarget(term: Terminator, mapping: dict[int, int]) -> Terminator:
    def m(t):
        return mapping.get(t, t)

    if isinstance(term, Goto):
        return Goto(m(term.target))
    if isinstance(term, Branch):
        return Branch(term.cond, m(term.then), m(term.orelse))
    if isinstance(term, YieldTo):
        return YieldTo(term.value, term.receiver, m(term.resume))
    return term


def check_cfg(graph: Cfg) -> None:
    """Structural invariants: dense ids 1..n, entry = 1, no dangling edges,
    straight-line statements only inside blocks."""
    ids = sorted(graph.blocks)
    assert ids == list(range(1, len(ids) + 1)), f"non-dense block ids {ids}"
    assert graph.entry == 1, f"entry is {graph.entry}, expected 1"
    for bid, block in graph.blocks.items():
        assert block.id == bid
        for stmt in block.stmts:
            assert isinstance(stmt, _STRAIGHT_LINE), (
                f"control-flow statement inside block {bid}: {stmt!r}"
            )
        for target in _targets(block.terminator):
            assert target == END or target in graph.blocks, (
                f"dangling edge {bid} -> {target}"
            )


# -- construction -------------------------------------------------------------


class _Builder:
    def __init__(self):
        self.stmts: dict[int, list[Stmt]] = {}
        self.terms: dict[int, Terminator | None] = {}
        self._next = 1

    def fresh(self) -> int:
        bid = self._next
        self._next += 1
        self.stmts[bid] = []
        self.terms[bid] = None
        return bid

    def lower(self, stmts: list[Stmt], cur: int) -> int | None:
        """Lower a statement list into blocks starting at cur; returns the
        open continuation block, or None when every path returned.
        Statements after a return are unreachable and dropped."""
        for stmt in stmts:
            if cur is None:
                break
            if isinstance(stmt, _STRAIGHT_LINE):
                self.stmts[cur].append(stmt)
            elif isinstance(stmt, (YieldStmt, LetYield)):
                receiver = stmt.name if isinstance(stmt, LetYield) else None
                resume = self.fresh()
                self.terms[cur] = YieldTo(stmt.value, receiver, resume)
                cur = resume
            elif isinstance(stmt, Return):
                self.terms[cur] = Finish(stmt.value)
                cur = None
            elif isinstance(stmt, If):
                join = self.fresh()
                then_entry = self.fresh()
                if stmt.orelse is not None:
                    else_entry = self.fresh()
                    self.terms[cur] = Branch(stmt.cond, then_entry, else_entry)
                    else_end = self.lower(stmt.orelse.stmts, else_entry)
                    if else_end is not None:
                        self.terms[else_end] = Goto(join)
                else:
                    self.terms[cur] = Branch(stmt.cond, then_entry, join)
                then_end = self.lower(stmt.then.stmts, then_entry)
                if then_end is not None:
                    self.terms[then_end] = Goto(join)
                cur = join
            elif isinstance(stmt, While):
                test = self.fresh()
                body_entry = self.fresh()
                after = self.fresh()
                self.terms[cur] = Goto(test)
                self.terms[test] = Branch(stmt.cond, body_entry, after)
                body_end = self.lower(stmt.body.stmts, body_entry)
                if body_end is not None:
                    self.terms[body_end] = Goto(test)
                cur = after
            else:
                raise AssertionError(f"unhandled statement {stmt!r}")
        return cur


def build_cfg(func: FuncDecl) -> Cfg:
    """Build the control flow graph of a validated generator body."""
    if not func.is_generator:
        raise TransformError(f"{func.name!r} is not a generator")
    b = _Builder()
    entry = b.fresh()
    open_block = b.lower(func.body.stmts, entry)
    if open_block is not None:
        b.terms[open_block] = Finish(None)
    entry = _drop_goto_stubs(b, entry)
    _drop_empty_finishes(b, entry)
    return _renumber(b.stmts, b.terms, entry)


def _receiver_resume_targets(terms) -> set[int]:
    return {
        t.resume
        for t in terms.values()
        if isinstance(t, YieldTo) and t.receiver is not None
    }


def _resume_targets(terms) -> set[int]:
    return {t.resume for t in terms.values() if isinstance(t, YieldTo)}


def _drop_goto_stubs(b: _Builder, entry: int) -> int:
    """Remove empty blocks whose only job is a goto. A receiver-carrying
    yield keeps its dedicated resume block: the receiver binding must run
    only on a fresh resumption, never on a same-call jump into a shared
    successor."""
    changed = True
    while changed:
        changed = False
        protected = _receiver_resume_targets(b.terms)
        for bid in sorted(b.terms):
            term = b.terms[bid]
            if (
                not b.stmts[bid]
                and isinstance(term, Goto)
                and term.target != bid
                and bid not in protected
            ):
                mapping = {bid: term.target}
                if entry == bid:
                    entry = term.target
                for other in b.terms:
                    if other != bid and b.terms[other] is not None:
                        b.terms[other] = _retarget(b.terms[other], mapping)
                del b.stmts[bid], b.terms[bid]
                changed = True
                break
    return entry


def _drop_empty_finishes(b: _Builder, entry: int) -> None:
    """Route edges into an empty Finish(absent) block straight out of the
    function: branch arms point at END, a predecessor goto becomes the
    finish itself. The entry and resume targets keep their block (a
    resume edge needs a real block to land on)."""
    changed = True
    while changed:
        changed = False
        resume_targets = _resume_targets(b.terms)
        for bid in sorted(b.terms):
            term = b.terms[bid]
            if (
                b.stmts[bid]
                or not isinstance(term, Finish)
                or term.value is not None
                or bid == entry
                or bid in resume_targets
            ):
                continue
            for other in sorted(b.terms):
                if other == bid:
                    continue
                t = b.terms[other]
                if isinstance(t, Goto) and t.target == bid:
                    b.terms[other] = Finish(None)
                elif isinstance(t, Branch) and bid in (t.then, t.orelse):
                    b.terms[other] = Branch(
                        t.cond,
                        END if t.then == bid else t.then,
                        END if t.orelse == bid else t.orelse,
                    )
            del b.stmts[bid], b.terms[bid]
            changed = True
            break


def _renumber(
    stmts: dict[int, list[Stmt]],
    terms: dict[int, Terminator | None],
    entry: int,
) -> Cfg:
    """Drop unreachable blocks and assign dense reverse-postorder ids with
    entry = 1. Branch successors are walked else-first, which numbers the
    then-arm before the else-arm in the result."""
    order: list[int] = []
    seen: set[int] = set()
    stack: list[tuple[int, bool]] = [(entry, False)]
    while stack:
        bid, expanded = stack.pop()
        if expanded:
            order.append(bid)
            continue
        if bid in seen or bid == END:
            continue
        seen.add(bid)
        stack.append((bid, True))
        term = terms[bid]
        succs = _targets(term) if term is not None else []
        if isinstance(term, Branch):
            succs = [term.orelse, term.then]
        for s in reversed(succs):
            if s != END and s not in seen:
                stack.append((s, False))
    order.reverse()
    mapping = {old: new for new, old in enumerate(order, start=1)}
    blocks: dict[int, BasicBlock] = {}
    for old, new in mapping.items():
        term = terms[old]
        assert term is not None, f"block {old} has no terminator"
        blocks[new] = BasicBlock(new, list(stmts[old]), _retarget(term, mapping))
    graph = Cfg(blocks, 1)
    check_cfg(graph)
    return graph


# -- merging ------------------------------------------------------------------


def _pred_counts(blocks: dict[int, BasicBlock], entry: int) -> dict[int, int]:
    preds = {bid: 0 for bid in blocks}
    preds[entry] += 1  # virtual edge: the entry is never absorbed
    for block in blocks.values():
        for target in _targets(block.terminator):
            if target != END:
                preds[target] += 1
    return preds


def merge_blocks(graph: Cfg) -> Cfg:
    """Simplify to a fixpoint: (a) a block ending in goto t, where t has no
    other predecessor, absorbs t; (b) a branch on a literal true/false
    becomes a goto (or a finish when the surviving arm is the end
    sentinel); (c) a yield resuming into an empty Finish(absent) block
    resumes at END instead. Diamond squashing is out of scope. Ids are
    reassigned densely in reverse postorder; the input is not modified."""
    blocks = {
        bid: BasicBlock(bid, list(b.stmts), b.terminator)
        for bid, b in graph.blocks.items()
    }
    entry = graph.entry
    changed = True
    while changed:
        changed = False
        for block in blocks.values():
            term = block.terminator
            if isinstance(term, Branch) and isinstance(term.cond, BoolLit):
                target = term.then if term.cond.value else term.orelse
                block.terminator = Finish(None) if target == END else Goto(target)
                changed = True
        for block in blocks.values():
            term = block.terminator
            if isinstance(term, YieldTo) and term.resume != END:
                resume = blocks[term.resume]
                if (
                    not resume.stmts
                    and isinstance(resume.terminator, Finish)
                    and resume.terminator.value is None
                ):
                    block.terminator = YieldTo(term.value, term.receiver, END)
                    changed = True
        merged = True
        while merged:
            merged = False
            preds = _pred_counts(blocks, entry)
            for bid in sorted(blocks):
                term = blocks[bid].terminator
                if (
                    isinstance(term, Goto)
                    and term.target != bid
                    and preds.get(term.target) == 1
                ):
                    victim = blocks.pop(term.target)
                    blocks[bid].stmts = blocks[bid].stmts + victim.stmts
                    blocks[bid].terminator = victim.terminator
                    merged = True
                    changed = True
                    break
    stmts = {bid: b.stmts for bid, b in blocks.items()}
    terms = {bid: b.terminator for bid, b in blocks.items()}
    return _renumber(stmts, terms, entry)


def yield_count(graph: Cfg) -> int:
    return sum(
        1 for b in graph.blocks.values() if isinstance(b.terminator, YieldTo)
    )


# -- rendering ----------------------------------------------------------------


def emit_dot(graph: Cfg, name: str = "cfg") -> str:
    """Graphviz rendering in the style of the paper's figure: boxes for
    statement blocks, circles for pure branch nodes, yes/no labels on
    branch edges, dashed edges labeled with the yielded expression, and
    distinguished start/end nodes."""
    lines = [f"digraph {name} {{"]
    lines.append('  start [shape=oval, style=filled, fillcolor=palegreen];')
    lines.append('  end [shape=oval, style=filled, fillcolor=lightcoral];')
    for bid in sorted(graph.blocks):
        block = graph.blocks[bid]
        if not block.stmts and isinstance(block.terminator, Branch):
            label = _escape(expr_source(block.terminator.cond))
            lines.append(f'  bb{bid} [shape=circle, xlabel="bb{bid}", label="{label}"];')
        else:
            body = "\\l".join(
                _escape(line)
                for stmt in block.stmts
                for line in _stmt_label(stmt)
            )
            label = body + "\\l" if body else f"bb{bid}"
            lines.append(f'  bb{bid} [shape=box, xlabel="bb{bid}", label="{label}"];')
    lines.append(f"  start -> bb{graph.entry};")
    for bid in sorted(graph.blocks):
        term = graph.blocks[bid].terminator
        if isinstance(term, Goto):
            lines.append(f"  bb{bid} -> {_node(term.target)};")
        elif isinstance(term, Branch):
            lines.append(f'  bb{bid} -> {_node(term.then)} [label="yes"];')
            lines.append(f'  bb{bid} -> {_node(term.orelse)} [label="no"];')
        elif isinstance(term, YieldTo):
            label = _escape(f"yield {expr_source(term.value)}")
            lines.append(
                f'  bb{bid} -> {_node(term.resume)} [style=dashed, label="{label}"];'
            )
        elif isinstance(term, Finish):
            if term.value is not None:
                label = _escape(expr_source(term.value))
                lines.append(f'  bb{bid} -> end [label="{label}"];')
            else:
                lines.append(f"  bb{bid} -> end;")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _node(target: int) -> str:
    return "end" if target == END else f"bb{target}"


def _stmt_label(stmt: Stmt) -> list[str]:
    return [line.strip() for line in stmt_lines(stmt, 0)]


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')
