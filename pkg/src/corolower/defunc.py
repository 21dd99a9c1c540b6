"""First-order output: closures replaced by environment records plus
lifted top-level functions, applied through one global dispatcher.

Each state-machine factory F becomes (a) a lifted `F_fo(env, r)` holding
the dispatch loop with every captured variable rewritten to a field of
env, and (b) a constructor returning `{ env: {...}, fn: &F_fo }`. A
single `apply(c, r)` performs `c.fn(c.env, r)`, and every `next(g, v)`
call site anywhere in the program becomes `apply(g, v)`. The result
contains no anonymous functions at all.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DefuncError
from .syntax import (
    Assign,
    Binary,
    Block,
    Call,
    Expr,
    ExprStmt,
    FieldGet,
    FieldSet,
    FuncDecl,
    FuncLit,
    FuncRef,
    If,
    IntLit,
    Let,
    NextCall,
    NullLit,
    Print,
    Program,
    RecordLit,
    Return,
    Stmt,
    Unary,
    Var,
    While,
    block_exprs,
    program_identifiers,
)
from .transform import NameAllocator


@dataclass
class LiftedClosure:
    """Record-and-function pair a factory's closure turns into."""

    env_fields: list[str]  # inst var, then params, then hoisted locals
    lifted_fn: str
    ctor_fn: str


@dataclass
class _FactoryShape:
    inst_var: str
    params: list[str]
    hoisted: list[str]
    resume_param: str
    machine_body: Block


def match_factory(decl: FuncDecl) -> _FactoryShape | None:
    """Recognize the exact shape transform emits: `let inst = 1`, a null
    `let` per hoisted local, then `return fn (r) { ... }`."""
    stmts = decl.body.stmts
    if not stmts or not isinstance(stmts[-1], Return):
        return None
    ret = stmts[-1]
    if not isinstance(ret.value, FuncLit) or len(ret.value.params) != 1:
        return None
    lets = stmts[:-1]
    if not lets or not all(isinstance(s, Let) for s in lets):
        return None
    first = lets[0]
    if not (isinstance(first.value, IntLit) and first.value.value == 1):
        return None
    hoisted = []
    for s in lets[1:]:
        if not isinstance(s.value, NullLit):
            return None
        hoisted.append(s.name)
    return _FactoryShape(
        inst_var=first.name,
        params=list(decl.params),
        hoisted=hoisted,
        resume_param=ret.value.params[0],
        machine_body=ret.value.body,
    )


def defunctionalize(program: Program) -> Program:
    """Eliminate every closure from a lowered program. Raises DefuncError
    on generators or on anonymous functions that are not state machines."""
    for decl in program.decls:
        if decl.is_generator:
            raise DefuncError(f"program still contains generator {decl.name!r}")
    names = NameAllocator(program_identifiers(program))
    apply_name = names.fresh("apply")
    global_names = {d.name for d in program.decls}

    decls: list[FuncDecl] = []
    lifted: list[LiftedClosure] = []
    for decl in program.decls:
        shape = match_factory(decl)
        if shape is None:
            decls.append(decl)
            continue
        fo_name = names.fresh(f"{decl.name}_fo")
        env_param = names.fresh("_e")
        env_fields = [shape.inst_var] + shape.params + shape.hoisted
        _check_free_vars(decl.name, shape, env_fields, global_names)
        machine = _env_rewrite_block(shape.machine_body, env_param, set(env_fields))
        decls.append(FuncDecl(fo_name, [env_param, shape.resume_param], False, machine))
        env_init: list[tuple[str, Expr]] = [(shape.inst_var, IntLit(1))]
        env_init += [(p, Var(p)) for p in shape.params]
        env_init += [(h, NullLit()) for h in shape.hoisted]
        ctor_body = Block(
            [
                Return(
                    RecordLit(
                        [("env", RecordLit(env_init)), ("fn", FuncRef(fo_name))]
                    )
                )
            ]
        )
        decls.append(FuncDecl(decl.name, list(decl.params), False, ctor_body))
        lifted.append(LiftedClosure(env_fields, fo_name, decl.name))

    decls = [_rewrite_next_decl(d, apply_name) for d in decls]
    rewrote_next = any(
        isinstance(e, NextCall) for d in program.decls for e in block_exprs(d.body)
    )

    for decl in decls:
        for expr in block_exprs(decl.body):
            if isinstance(expr, FuncLit):
                raise DefuncError(
                    f"{decl.name!r} contains a closure that is not a state machine"
                )

    if lifted or rewrote_next:
        decls.insert(0, _apply_decl(apply_name))
    return Program(decls, program.entry)


def _apply_decl(name: str) -> FuncDecl:
    # fn apply(c, r) { return c.fn(c.env, r) }
    body = Block(
        [
            Return(
                Call(
                    FieldGet(Var("c"), "fn"),
                    [FieldGet(Var("c"), "env"), Var("r")],
                )
            )
        ]
    )
    return FuncDecl(name, ["c", "r"], False, body)


def _check_free_vars(name, shape, env_fields, global_names):
    bound = set(env_fields) | {shape.resume_param} | global_names
    for expr in block_exprs(shape.machine_body):
        if isinstance(expr, Var) and expr.name not in bound:
            raise DefuncError(
                f"{name!r}: machine body references {expr.name!r}, "
                "which is neither captured nor global"
            )


# -- captured-variable rewriting ---------------------------------------------


def _env_rewrite_block(block: Block, env: str, captured: set[str]) -> Block:
    return Block([_env_rewrite_stmt(s, env, captured) for s in block.stmts])


def _env_rewrite_stmt(stmt: Stmt, env: str, captured: set[str]) -> Stmt:
    def rewrite(e: Expr) -> Expr:
        return _env_rewrite_expr(e, env, captured)

    if isinstance(stmt, Assign):
        if stmt.name in captured:
            return FieldSet(Var(env), stmt.name, rewrite(stmt.value))
        return Assign(stmt.name, rewrite(stmt.value))
    if isinstance(stmt, Let):
        return Let(stmt.name, rewrite(stmt.value))
    if isinstance(stmt, If):
        return If(
            rewrite(stmt.cond),
            _env_rewrite_block(stmt.then, env, captured),
            _env_rewrite_block(stmt.orelse, env, captured)
            if stmt.orelse is not None
            else None,
        )
    if isinstance(stmt, While):
        return While(rewrite(stmt.cond), _env_rewrite_block(stmt.body, env, captured))
    if isinstance(stmt, Return):
        return Return(rewrite(stmt.value) if stmt.value is not None else None)
    if isinstance(stmt, Print):
        return Print(rewrite(stmt.value))
    if isinstance(stmt, ExprStmt):
        return ExprStmt(rewrite(stmt.value))
    if isinstance(stmt, FieldSet):
        return FieldSet(rewrite(stmt.record), stmt.field, rewrite(stmt.value))
    raise DefuncError(f"unexpected statement in a machine body: {stmt!r}")


def _env_rewrite_expr(expr: Expr, env: str, captured: set[str]) -> Expr:
    def rewrite(e: Expr) -> Expr:
        return _env_rewrite_expr(e, env, captured)

    if isinstance(expr, Var):
        if expr.name in captured:
            return FieldGet(Var(env), expr.name)
        return expr
    if isinstance(expr, Binary):
        return Binary(expr.op, rewrite(expr.lhs), rewrite(expr.rhs))
    if isinstance(expr, Unary):
        return Unary(expr.op, rewrite(expr.operand))
    if isinstance(expr, Call):
        return Call(rewrite(expr.callee), [rewrite(a) for a in expr.args])
    if isinstance(expr, NextCall):
        return NextCall(
            rewrite(expr.gen), rewrite(expr.arg) if expr.arg is not None else None
        )
    if isinstance(expr, FieldGet):
        return FieldGet(rewrite(expr.record), expr.field)
    if isinstance(expr, RecordLit):
        return RecordLit([(k, rewrite(v)) for k, v in expr.fields])
    if isinstance(expr, FuncLit):
        raise DefuncError("nested closure inside a machine body")
    return expr


# -- next(g, v) -> apply(g, v) -------------------------------------------------


def _rewrite_next_decl(decl: FuncDecl, apply_name: str) -> FuncDecl:
    body = _next_rewrite_block(decl.body, apply_name)
    if body is decl.body:
        return decl
    return FuncDecl(decl.name, list(decl.params), decl.is_generator, body)


def _next_rewrite_block(block: Block, apply_name: str) -> Block:
    stmts = [_next_rewrite_stmt(s, apply_name) for s in block.stmts]
    if all(new is old for new, old in zip(stmts, block.stmts)):
        return block
    return Block(stmts)


def _next_rewrite_stmt(stmt: Stmt, apply_name: str) -> Stmt:
    def rw(e: Expr) -> Expr:
        return _next_rewrite_expr(e, apply_name)

    if isinstance(stmt, (Let, Assign)):
        value = rw(stmt.value)
        if value is stmt.value:
            return stmt
        cls = type(stmt)
        return cls(stmt.name, value)
    if isinstance(stmt, If):
        cond = rw(stmt.cond)
        then = _next_rewrite_block(stmt.then, apply_name)
        orelse = (
            _next_rewrite_block(stmt.orelse, apply_name)
            if stmt.orelse is not None
            else None
        )
        if cond is stmt.cond and then is stmt.then and orelse is stmt.orelse:
            return stmt
        return If(cond, then, orelse)
    if isinstance(stmt, While):
        cond = rw(stmt.cond)
        body = _next_rewrite_block(stmt.body, apply_name)
        if cond is stmt.cond and body is stmt.body:
            return stmt
        return While(cond, body)
    if isinstance(stmt, Return):
        if stmt.value is None:
            return stmt
        value = rw(stmt.value)
        return stmt if value is stmt.value else Return(value)
    if isinstance(stmt, (Print, ExprStmt)):
        value = rw(stmt.value)
        if value is stmt.value:
            return stmt
        return type(stmt)(value)
    if isinstance(stmt, FieldSet):
        record = rw(stmt.record)
        value = rw(stmt.value)
        if record is stmt.record and value is stmt.value:
            return stmt
        return FieldSet(record, stmt.field, value)
    return stmt


def _next_rewrite_expr(expr: Expr, apply_name: str) -> Expr:
    def rw(e: Expr) -> Expr:
        return _next_rewrite_expr(e, apply_name)

    if isinstance(expr, NextCall):
        gen = rw(expr.gen)
        arg = rw(expr.arg) if expr.arg is not None else NullLit()
        return Call(Var(apply_name), [gen, arg])
    if isinstance(expr, Binary):
        lhs, rhs = rw(expr.lhs), rw(expr.rhs)
        if lhs is expr.lhs and rhs is expr.rhs:
            return expr
        return Binary(expr.op, lhs, rhs)
    if isinstance(expr, Unary):
        operand = rw(expr.operand)
        return expr if operand is expr.operand else Unary(expr.op, operand)
    if isinstance(expr, Call):
        callee = rw(expr.callee)
        args = [rw(a) for a in expr.args]
        if callee is expr.callee and all(a is b for a, b in zip(args, expr.args)):
            return expr
        return Call(callee, args)
    if isinstance(expr, FieldGet):
        record = rw(expr.record)
        return expr if record is expr.record else FieldGet(record, expr.field)
    if isinstance(expr, RecordLit):
        fields = [(k, rw(v)) for k, v in expr.fields]
        if all(v is w for (_, v), (_, w) in zip(fields, expr.fields)):
            return expr
        return RecordLit(fields)
    if isinstance(expr, FuncLit):
        return FuncLit(expr.params, _next_rewrite_block(expr.body, apply_name))
    return expr
