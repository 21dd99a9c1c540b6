"""Tree-walking evaluator defining the semantics of both languages.

One evaluator runs generator-bearing source programs (interp_native) and
the lowered/first-order outputs (interp). Generators are instantiated
lazily and resumed through `next`; `next` on a closure is plain
application of one argument, which is what lets a driver written against
generators run unmodified against the lowered program.

Values: 64-bit integers with wrapping arithmetic, booleans, null,
closures over a shared mutable environment, generator instances,
records, and late-bound function references. Locals are function-scoped
and pre-bound to null when a frame is created, mirroring the uniform
variable hoisting performed by the lowering (a `let` executes as plain
assignment into the frame).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .errors import BudgetExceeded, InterpError, ValidationError
from .syntax import (
    Assign,
    Binary,
    Block,
    BoolLit,
    Call,
    Expr,
    ExprStmt,
    FieldGet,
    FieldSet,
    FuncLit,
    FuncRef,
    If,
    IntLit,
    Let,
    LetYield,
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
    YieldStmt,
    declared_locals,
)
from . import cfg as cfg_mod

DEFAULT_STEP_BUDGET = 10_000_000

NULL = None

_INT_MIN = -(2**63)
_WRAP = 2**64

# Distinguishes falling off a body's end from an explicit `return null`.
_ABSENT = object()


def wrap64(x: int) -> int:
    return (x - _INT_MIN) % _WRAP + _INT_MIN


@dataclass(eq=False)
class Closure:
    params: list[str]
    body: Block
    env: "Env"
    is_generator: bool = False
    name: str | None = None


@dataclass(eq=False)
class GenInstance:
    closure: Closure
    env: "Env"
    runner: object = dc_field(default=None, repr=False)
    started: bool = False
    done: bool = False
    finish_value: object = _ABSENT


@dataclass(eq=False)
class Record:
    fields: dict


@dataclass(eq=False)
class FuncRefV:
    name: str


class Env:
    """Mutable name->value bindings with innermost-first lookup."""

    __slots__ = ("vars", "parent")

    def __init__(self, parent: "Env | None" = None):
        self.vars: dict[str, object] = {}
        self.parent = parent

    def declare(self, name, value):
        self.vars[name] = value

    def lookup(self, name, node=None):
        env = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        raise _err(f"unbound name {name!r}", node)

    def assign(self, name, value, node=None):
        env = self
        while env is not None:
            if name in env.vars:
                env.vars[name] = value
                return
            env = env.parent
        raise _err(f"assignment to undeclared name {name!r}", node)


class _Return(Exception):
    def __init__(self, value):
        self.value = value


def _err(message, node=None):
    pos = getattr(node, "pos", None)
    if pos is not None:
        return InterpError(message, pos.line, pos.col)
    return InterpError(message)


def values_equal(a, b) -> bool:
    """Language-level `==`: by value for int/bool/null (never across
    types), by identity for records/closures/instances, by name for
    function references."""
    if a is NULL or b is NULL:
        return a is NULL and b is NULL
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    if isinstance(a, FuncRefV) and isinstance(b, FuncRefV):
        return a.name == b.name
    return a is b


def render_value(v) -> str:
    if v is NULL:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Record):
        inner = ", ".join(f"{k}: {render_value(x)}" for k, x in v.fields.items())
        return "{ " + inner + " }" if inner else "{}"
    if isinstance(v, FuncRefV):
        return f"&{v.name}"
    if isinstance(v, GenInstance):
        return f"<generator {v.closure.name or 'fn'}>"
    if isinstance(v, Closure):
        return f"<fn {v.name}>" if v.name else "<fn>"
    raise AssertionError(f"unrenderable value {v!r}")


def render_output(values) -> str:
    return "".join(render_value(v) + "\n" for v in values)


class Interpreter:
    def __init__(self, program: Program, step_budget: int = DEFAULT_STEP_BUDGET):
        self.program = program
        self.step_budget = step_budget
        self.steps = 0
        self.output: list[object] = []
        self._locals_cache: dict[int, tuple[Block, list[str]]] = {}
        self.globals = Env()
        for decl in program.decls:
            self.globals.declare(
                decl.name,
                Closure(decl.params, decl.body, self.globals, decl.is_generator, decl.name),
            )

    # -- driving ------------------------------------------------------------

    def run(self) -> list[object]:
        entry = self.globals.lookup(self.program.entry)
        self.call(entry, [])
        return self.output

    def _charge(self, node=None):
        self.steps += 1
        if self.steps > self.step_budget:
            raise BudgetExceeded("step budget exceeded")

    # -- calls and resumption -------------------------------------------------

    def call(self, fn, args, node=None):
        if isinstance(fn, FuncRefV):
            fn = self._resolve_ref(fn, node)
        if not isinstance(fn, Closure):
            raise _err(f"value {render_value(fn)} is not callable", node)
        if len(args) != len(fn.params):
            raise _err(
                f"{fn.name or 'fn'} expects {len(fn.params)} argument(s), got {len(args)}",
                node,
            )
        env = Env(fn.env)
        for name, value in zip(fn.params, args):
            env.declare(name, value)
        for name in self._locals_of(fn.body):
            if name not in env.vars:
                env.declare(name, NULL)
        if fn.is_generator:
            return GenInstance(fn, env)
        return self._run_plain(fn.body, env)

    def _locals_of(self, body: Block) -> list[str]:
        # Keyed by identity; the entry pins the block so ids never recycle.
        entry = self._locals_cache.get(id(body))
        if entry is None or entry[0] is not body:
            entry = (body, declared_locals(body))
            self._locals_cache[id(body)] = entry
        return entry[1]

    def _resolve_ref(self, ref: FuncRefV, node=None) -> Closure:
        target = self.globals.lookup(ref.name, node)
        if not isinstance(target, Closure):
            raise _err(f"&{ref.name} does not name a function", node)
        return target

    def _run_plain(self, body: Block, env: Env):
        walker = self._exec_block(body, env)
        try:
            next(walker)
        except StopIteration:
            return NULL
        except _Return as ret:
            return NULL if ret.value is _ABSENT else ret.value
        raise AssertionError("yield escaped a non-generator body")

    def next_value(self, target, value, node=None):
        if isinstance(target, GenInstance):
            return self.resume(target, value)
        if isinstance(target, Closure):
            return self.call(target, [value], node)
        raise _err(f"next on non-resumable value {render_value(target)}", node)

    def resume(self, inst: GenInstance, value):
        """Resume protocol: first resumption discards its value and runs from
        the top; later ones deliver the value to a `let x = yield` receiver;
        a finished instance keeps returning null."""
        if inst.done:
            return NULL
        if not inst.started:
            inst.runner = self._run_generator(inst)
            inst.started = True
            value = None  # not-started: the argument is discarded
        try:
            return inst.runner.send(value)
        except StopIteration as stop:
            inst.done = True
            # _ABSENT marks falling off the end (or a bare return): that
            # resumption observes null and the trace records nothing. An
            # explicit `return null` is a real finish value.
            inst.finish_value = stop.value
            return NULL if inst.finish_value is _ABSENT else inst.finish_value
        except ValueError:
            raise _err("generator is already running")

    def _run_generator(self, inst: GenInstance):
        try:
            yield from self._exec_block(inst.closure.body, inst.env)
        except _Return as ret:
            return ret.value  # _ABSENT for a bare return, else a value
        return _ABSENT

    # -- statements -----------------------------------------------------------

    def _exec_block(self, block: Block, env: Env):
        for stmt in block.stmts:
            self._charge(stmt)
            if isinstance(stmt, Let):
                env.declare(stmt.name, self._eval(stmt.value, env))
            elif isinstance(stmt, Assign):
                env.assign(stmt.name, self._eval(stmt.value, env), stmt)
            elif isinstance(stmt, LetYield):
                received = yield self._eval(stmt.value, env)
                env.declare(stmt.name, received)
            elif isinstance(stmt, YieldStmt):
                yield self._eval(stmt.value, env)
            elif isinstance(stmt, If):
                if self._bool(self._eval(stmt.cond, env), stmt.cond):
                    yield from self._exec_block(stmt.then, env)
                elif stmt.orelse is not None:
                    yield from self._exec_block(stmt.orelse, env)
            elif isinstance(stmt, While):
                while self._bool(self._eval(stmt.cond, env), stmt.cond):
                    yield from self._exec_block(stmt.body, env)
                    self._charge(stmt)
            elif isinstance(stmt, Return):
                raise _Return(
                    _ABSENT if stmt.value is None else self._eval(stmt.value, env)
                )
            elif isinstance(stmt, Print):
                self.output.append(self._eval(stmt.value, env))
            elif isinstance(stmt, ExprStmt):
                self._eval(stmt.value, env)
            elif isinstance(stmt, FieldSet):
                self._field_set(stmt, env)
            else:
                raise AssertionError(f"unhandled statement {stmt!r}")

    def exec_straight(self, stmt: Stmt, env: Env):
        """Execute one straight-line statement (no control flow, no yield);
        used by the CFG executor."""
        self._charge(stmt)
        if isinstance(stmt, Let):
            env.declare(stmt.name, self._eval(stmt.value, env))
        elif isinstance(stmt, Assign):
            env.assign(stmt.name, self._eval(stmt.value, env), stmt)
        elif isinstance(stmt, Print):
            self.output.append(self._eval(stmt.value, env))
        elif isinstance(stmt, ExprStmt):
            self._eval(stmt.value, env)
        elif isinstance(stmt, FieldSet):
            self._field_set(stmt, env)
        else:
            raise AssertionError(f"not a straight-line statement: {stmt!r}")

    def _field_set(self, stmt: FieldSet, env: Env):
        record = self._eval(stmt.record, env)
        if not isinstance(record, Record):
            raise _err("field assignment on a non-record value", stmt)
        if stmt.field not in record.fields:
            raise _err(f"record has no field {stmt.field!r}", stmt)
        record.fields[stmt.field] = self._eval(stmt.value, env)

    # -- expressions ----------------------------------------------------------

    def _eval(self, expr: Expr, env: Env):
        self._charge(expr)
        if isinstance(expr, IntLit):
            return expr.value
        if isinstance(expr, BoolLit):
            return expr.value
        if isinstance(expr, NullLit):
            return NULL
        if isinstance(expr, Var):
            return env.lookup(expr.name, expr)
        if isinstance(expr, Binary):
            return self._binary(expr, env)
        if isinstance(expr, Unary):
            operand = self._eval(expr.operand, env)
            if expr.op == "-":
                return wrap64(-self._int(operand, expr))
            return not self._bool(operand, expr)
        if isinstance(expr, Call):
            callee = self._eval(expr.callee, env)
            args = [self._eval(a, env) for a in expr.args]
            return self.call(callee, args, expr)
        if isinstance(expr, NextCall):
            gen = self._eval(expr.gen, env)
            value = NULL if expr.arg is None else self._eval(expr.arg, env)
            return self.next_value(gen, value, expr)
        if isinstance(expr, FieldGet):
            record = self._eval(expr.record, env)
            if not isinstance(record, Record):
                raise _err("field access on a non-record value", expr)
            if expr.field not in record.fields:
                raise _err(f"record has no field {expr.field!r}", expr)
            return record.fields[expr.field]
        if isinstance(expr, RecordLit):
            return Record({k: self._eval(v, env) for k, v in expr.fields})
        if isinstance(expr, FuncRef):
            self._resolve_ref(FuncRefV(expr.name), expr)
            return FuncRefV(expr.name)
        if isinstance(expr, FuncLit):
            return Closure(expr.params, expr.body, env)
        raise AssertionError(f"unhandled expression {expr!r}")

    def _binary(self, expr: Binary, env: Env):
        op = expr.op
        if op == "&&":
            if not self._bool(self._eval(expr.lhs, env), expr.lhs):
                return False
            return self._bool(self._eval(expr.rhs, env), expr.rhs)
        if op == "||":
            if self._bool(self._eval(expr.lhs, env), expr.lhs):
                return True
            return self._bool(self._eval(expr.rhs, env), expr.rhs)
        lhs = self._eval(expr.lhs, env)
        rhs = self._eval(expr.rhs, env)
        if op == "==":
            return values_equal(lhs, rhs)
        if op == "!=":
            return not values_equal(lhs, rhs)
        a = self._int(lhs, expr)
        b = self._int(rhs, expr)
        if op == "+":
            return wrap64(a + b)
        if op == "-":
            return wrap64(a - b)
        if op == "*":
            return wrap64(a * b)
        if op == "/":
            if b == 0:
                raise _err("division by zero", expr)
            q = abs(a) // abs(b)
            return wrap64(-q if (a < 0) != (b < 0) else q)
        if op == "%":
            if b == 0:
                raise _err("modulo by zero", expr)
            q = abs(a) // abs(b)
            if (a < 0) != (b < 0):
                q = -q
            return wrap64(a - q * b)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        raise AssertionError(f"unhandled operator {op!r}")

    def _int(self, v, node) -> int:
        if isinstance(v, int) and not isinstance(v, bool):
            return v
        raise _err(f"expected an integer, got {render_value(v)}", node)

    def _bool(self, v, node) -> bool:
        if isinstance(v, bool):
            return v
        raise _err(f"expected a boolean, got {render_value(v)}", node)


# -- public entry points ----------------------------------------------------


def interp_native(program: Program, step_budget: int = DEFAULT_STEP_BUDGET):
    """Run a program that may contain generators; returns the list of
    printed values (the ProgramOutput)."""
    return Interpreter(program, step_budget).run()


def interp(program: Program, step_budget: int = DEFAULT_STEP_BUDGET):
    """Run a generator-free program (lowered or first-order form)."""
    for decl in program.decls:
        if decl.is_generator:
            raise ValidationError(f"generator {decl.name!r} in a lowered program")
    return Interpreter(program, step_budget).run()


@dataclass
class YieldTrace:
    items: list
    terminated: bool = False


def _instantiate(interp_: Interpreter, gen_name: str, args):
    factory = interp_.globals.lookup(gen_name)
    if not isinstance(factory, Closure):
        raise InterpError(f"{gen_name!r} is not a function")
    return interp_.call(factory, list(args))


def resume_any(interp_: Interpreter, instance, value):
    """Resume whatever a generator became in some form: a native instance,
    a state-machine closure, or a first-order record ({env, fn})."""
    if isinstance(instance, (GenInstance, Closure)):
        return interp_.next_value(instance, value)
    if (
        isinstance(instance, Record)
        and "fn" in instance.fields
        and "env" in instance.fields
    ):
        return interp_.call(
            instance.fields["fn"], [instance.fields["env"], value]
        )
    raise InterpError("value cannot be resumed")


def trace_generator(
    program: Program,
    gen_name: str,
    args,
    resume_values,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> YieldTrace:
    """Instantiate gen_name with args and resume once per entry of
    resume_values, recording produced values. In native mode the trace
    stops at Finish with terminated=True (recording an explicit return
    value when present); lowered forms cannot signal termination, so
    their traces simply record each call's result."""
    interp_ = Interpreter(program, step_budget)
    instance = _instantiate(interp_, gen_name, args)
    items: list = []
    terminated = False
    for index, value in enumerate(resume_values):
        try:
            if isinstance(instance, GenInstance):
                result = interp_.resume(instance, value)
                if instance.done:
                    terminated = True
                    if instance.finish_value is not _ABSENT:
                        items.append(instance.finish_value)
                    break
                items.append(result)
            else:
                items.append(resume_any(interp_, instance, value))
        except InterpError as err:
            raise InterpError(
                f"resumption {index}: {err.message}", err.line, err.col
            ) from err
    return YieldTrace(items, terminated)


def resume_sequence(
    program: Program,
    gen_name: str,
    args,
    resume_values,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> list:
    """The caller-observable protocol: the raw result of every `next`,
    one per resume value, with no early stop (a finished native instance
    keeps producing null exactly like an exhausted state machine). This
    is the unit the differential oracle compares across forms."""
    interp_ = Interpreter(program, step_budget)
    instance = _instantiate(interp_, gen_name, args)
    return [resume_any(interp_, instance, value) for value in resume_values]


def eval_cfg(
    graph,
    bindings: dict,
    resume_values,
    program: Program | None = None,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> YieldTrace:
    """Execute a control flow graph directly, independently of the
    rewriter: the oracle showing merge_blocks preserves semantics.
    bindings supplies parameters; hoisted locals default to null.
    A transfer to the end sentinel finishes with no recorded value."""
    interp_ = Interpreter(
        program if program is not None else Program([], entry=""), step_budget
    )
    env = Env(interp_.globals)
    for name, value in bindings.items():
        env.declare(name, value)
    items: list = []
    terminated = False
    ip: int | None = None
    receiver: str | None = None
    for value in resume_values:
        if terminated:
            break
        if ip is None:
            ip = graph.entry
        else:
            if receiver is not None and ip != cfg_mod.END:
                env.declare(receiver, value)
            receiver = None
        while True:
            if ip == cfg_mod.END:
                terminated = True
                break
            block = graph.blocks[ip]
            for stmt in block.stmts:
                interp_.exec_straight(stmt, env)
            term = block.terminator
            if isinstance(term, cfg_mod.Goto):
                ip = term.target
            elif isinstance(term, cfg_mod.Branch):
                cond = interp_._eval(term.cond, env)
                ip = term.then if interp_._bool(cond, term.cond) else term.orelse
            elif isinstance(term, cfg_mod.YieldTo):
                items.append(interp_._eval(term.value, env))
                receiver = term.receiver
                ip = term.resume
                break
            elif isinstance(term, cfg_mod.Finish):
                terminated = True
                if term.value is not None:
                    items.append(interp_._eval(term.value, env))
                break
            else:
                raise AssertionError(f"unhandled terminator {term!r}")
    return YieldTrace(items, terminated)
