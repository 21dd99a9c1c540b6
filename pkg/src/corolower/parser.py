"""Recursive-descent parser and static validation.

The grammar has no statement separators; parsing is greedy, so the
canonical style keeps one statement per line and the printer guarantees
re-parseable output. Yield is legal only in statement position
(`yield e` / `let x = yield e`) and only inside `fn*` bodies.
"""

from __future__ import annotations

from .errors import ParseError, ValidationError
from .lexer import Token, lex
from .syntax import (
    Assign,
    Binary,
    Block,
    BoolLit,
    Call,
    ExprStmt,
    Expr,
    FieldGet,
    FieldSet,
    FuncDecl,
    FuncLit,
    FuncRef,
    If,
    IntLit,
    Let,
    LetYield,
    NextCall,
    NullLit,
    Pos,
    Print,
    Program,
    RecordLit,
    Return,
    Stmt,
    Unary,
    Var,
    While,
    YieldStmt,
    iter_exprs,
    iter_stmts,
    stmt_exprs,
)

BINARY_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}

_UNARY_OPS = ("-", "!")

# Tokens that may begin an expression; used to decide `return` vs `return e`.
_EXPR_START_KWS = frozenset(["true", "false", "null", "next", "fn"])
_EXPR_START_OPS = frozenset(["(", "{", "&", "-", "!"])


class _Tokens:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        j = min(self.i + ahead, len(self.tokens) - 1)
        return self.tokens[j]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if not self.at(kind, text):
            wanted = text if text is not None else kind
            found = tok.text if tok.text else "end of input"
            raise ParseError(
                f"expected {wanted!r}, found {found!r}", tok.line, tok.col
            )
        return self.next()


def _pos(tok: Token) -> Pos:
    return Pos(tok.line, tok.col)


def parse(tokens: list[Token]) -> Program:
    """Parse a whole token stream into a validated Program (entry: main)."""
    ts = _Tokens(tokens)
    decls = []
    while not ts.at("eof"):
        decls.append(_decl(ts))
    program = Program(decls)
    validate(program)
    return program


def parse_source(source: str) -> Program:
    return parse(lex(source))


def _decl(ts: _Tokens) -> FuncDecl:
    start = ts.expect("kw", "fn")
    is_generator = False
    if ts.at("op", "*"):
        ts.next()
        is_generator = True
    name = ts.expect("ident").text
    params = _params(ts)
    body = _block(ts)
    return FuncDecl(name, params, is_generator, body, pos=_pos(start))


def _params(ts: _Tokens) -> list[str]:
    ts.expect("op", "(")
    params = []
    if not ts.at("op", ")"):
        params.append(ts.expect("ident").text)
        while ts.at("op", ","):
            ts.next()
            params.append(ts.expect("ident").text)
    ts.expect("op", ")")
    return params


def _block(ts: _Tokens) -> Block:
    start = ts.expect("op", "{")
    stmts = []
    while not ts.at("op", "}"):
        if ts.at("eof"):
            raise ParseError("expected '}'", ts.peek().line, ts.peek().col)
        stmts.append(_stmt(ts))
    ts.expect("op", "}")
    return Block(stmts, pos=_pos(start))


def _stmt(ts: _Tokens) -> Stmt:
    tok = ts.peek()
    if tok.kind == "kw":
        if tok.text == "let":
            ts.next()
            name = ts.expect("ident").text
            ts.expect("op", "=")
            if ts.at("kw", "yield"):
                ts.next()
                return LetYield(name, _expr(ts), pos=_pos(tok))
            return Let(name, _expr(ts), pos=_pos(tok))
        if tok.text == "yield":
            ts.next()
            return YieldStmt(_expr(ts), pos=_pos(tok))
        if tok.text == "if":
            ts.next()
            ts.expect("op", "(")
            cond = _expr(ts)
            ts.expect("op", ")")
            then = _block(ts)
            orelse = None
            if ts.at("kw", "else"):
                ts.next()
                orelse = _block(ts)
            return If(cond, then, orelse, pos=_pos(tok))
        if tok.text == "while":
            ts.next()
            ts.expect("op", "(")
            cond = _expr(ts)
            ts.expect("op", ")")
            return While(cond, _block(ts), pos=_pos(tok))
        if tok.text == "return":
            ts.next()
            nxt = ts.peek()
            starts_expr = (
                nxt.kind in ("ident", "int")
                or (nxt.kind == "kw" and nxt.text in _EXPR_START_KWS)
                or (nxt.kind == "op" and nxt.text in _EXPR_START_OPS)
            )
            return Return(_expr(ts) if starts_expr else None, pos=_pos(tok))
        if tok.text == "print":
            ts.next()
            ts.expect("op", "(")
            value = _expr(ts)
            ts.expect("op", ")")
            return Print(value, pos=_pos(tok))
    if tok.kind == "ident" and ts.peek(1).kind == "op" and ts.peek(1).text == "=":
        ts.next()
        ts.next()
        return Assign(tok.text, _expr(ts), pos=_pos(tok))
    expr = _expr(ts)
    if ts.at("op", "="):
        eq = ts.next()
        if not isinstance(expr, FieldGet):
            raise ParseError("cannot assign to this expression", eq.line, eq.col)
        return FieldSet(expr.record, expr.field, _expr(ts), pos=_pos(tok))
    return ExprStmt(expr, pos=_pos(tok))


def _expr(ts: _Tokens, min_prec: int = 1) -> Expr:
    lhs = _unary(ts)
    while True:
        tok = ts.peek()
        if tok.kind != "op":
            return lhs
        prec = BINARY_PRECEDENCE.get(tok.text)
        if prec is None or prec < min_prec:
            return lhs
        ts.next()
        rhs = _expr(ts, prec + 1)
        lhs = Binary(tok.text, lhs, rhs, pos=_pos(tok))


def _unary(ts: _Tokens) -> Expr:
    tok = ts.peek()
    if tok.kind == "op" and tok.text in _UNARY_OPS:
        ts.next()
        return Unary(tok.text, _unary(ts), pos=_pos(tok))
    return _postfix(ts)


def _postfix(ts: _Tokens) -> Expr:
    expr = _primary(ts)
    while True:
        tok = ts.peek()
        if ts.at("op", "("):
            ts.next()
            args = []
            if not ts.at("op", ")"):
                args.append(_expr(ts))
                while ts.at("op", ","):
                    ts.next()
                    args.append(_expr(ts))
            ts.expect("op", ")")
            expr = Call(expr, args, pos=_pos(tok))
        elif ts.at("op", "."):
            ts.next()
            expr = FieldGet(expr, _field_name(ts), pos=_pos(tok))
        else:
            return expr


def _field_name(ts: _Tokens) -> str:
    # Keywords are legal field names (the first-order output uses `.fn`).
    tok = ts.peek()
    if tok.kind in ("ident", "kw"):
        ts.next()
        return tok.text
    raise ParseError(
        f"expected field name, found {tok.text!r}", tok.line, tok.col
    )


def _primary(ts: _Tokens) -> Expr:
    tok = ts.peek()
    if tok.kind == "int":
        ts.next()
        return IntLit(int(tok.text), pos=_pos(tok))
    if tok.kind == "ident":
        ts.next()
        return Var(tok.text, pos=_pos(tok))
    if tok.kind == "kw":
        if tok.text == "true" or tok.text == "false":
            ts.next()
            return BoolLit(tok.text == "true", pos=_pos(tok))
        if tok.text == "null":
            ts.next()
            return NullLit(pos=_pos(tok))
        if tok.text == "next":
            ts.next()
            ts.expect("op", "(")
            gen = _expr(ts)
            arg = None
            if ts.at("op", ","):
                ts.next()
                arg = _expr(ts)
            ts.expect("op", ")")
            return NextCall(gen, arg, pos=_pos(tok))
        if tok.text == "fn":
            ts.next()
            params = _params(ts)
            body = _block(ts)
            return FuncLit(params, body, pos=_pos(tok))
    if ts.at("op", "("):
        ts.next()
        expr = _expr(ts)
        ts.expect("op", ")")
        return expr
    if ts.at("op", "{"):
        ts.next()
        fields: list[tuple[str, Expr]] = []
        if not ts.at("op", "}"):
            while True:
                name_tok = ts.peek()
                name = _field_name(ts)
                if any(name == seen for seen, _ in fields):
                    raise ParseError(
                        f"duplicate record field {name!r}",
                        name_tok.line,
                        name_tok.col,
                    )
                ts.expect("op", ":")
                fields.append((name, _expr(ts)))
                if not ts.at("op", ","):
                    break
                ts.next()
        ts.expect("op", "}")
        return RecordLit(fields, pos=_pos(tok))
    if ts.at("op", "&"):
        ts.next()
        name = ts.expect("ident").text
        return FuncRef(name, pos=_pos(tok))
    found = tok.text if tok.text else "end of input"
    raise ParseError(f"expected expression, found {found!r}", tok.line, tok.col)


# -- validation ---------------------------------------------------------------


def validate(program: Program) -> None:
    """Enforce static rules: unique function names, a zero-parameter
    non-generator entry, distinct parameters, and yields confined to
    generator bodies (anonymous functions are never generators)."""
    seen: set[str] = set()
    for decl in program.decls:
        if decl.name in seen:
            raise ValidationError(
                f"duplicate function name {decl.name!r}",
                decl.pos.line if decl.pos else None,
                decl.pos.col if decl.pos else None,
            )
        seen.add(decl.name)
    if program.entry not in seen:
        raise ValidationError(f"missing entry function {program.entry!r}")
    entry = next(d for d in program.decls if d.name == program.entry)
    if entry.is_generator:
        raise ValidationError(f"entry function {program.entry!r} is a generator")
    if entry.params:
        raise ValidationError(f"entry function {program.entry!r} takes parameters")
    for decl in program.decls:
        _check_params(decl.params, decl.pos)
        _check_yields(decl.body, decl.is_generator)


def _check_params(params: list[str], pos) -> None:
    if len(set(params)) != len(params):
        raise ValidationError(
            "duplicate parameter name",
            pos.line if pos else None,
            pos.col if pos else None,
        )


def _check_yields(block: Block, allowed: bool) -> None:
    for stmt in iter_stmts(block):
        if isinstance(stmt, (YieldStmt, LetYield)) and not allowed:
            raise ValidationError(
                "yield outside a generator",
                stmt.pos.line if stmt.pos else None,
                stmt.pos.col if stmt.pos else None,
            )
        for expr_root in stmt_exprs(stmt):
            for expr in iter_exprs(expr_root):
                if isinstance(expr, FuncLit):
                    _check_params(expr.params, expr.pos)
                    _check_yields(expr.body, False)
