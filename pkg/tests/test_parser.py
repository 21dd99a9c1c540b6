import pytest

from corolower.errors import ParseError, ValidationError
from corolower.parser import parse_source
from corolower.syntax import (
    Assign,
    Binary,
    BoolLit,
    Call,
    FieldGet,
    FieldSet,
    FuncLit,
    FuncRef,
    IntLit,
    Let,
    LetYield,
    NextCall,
    NullLit,
    RecordLit,
    Unary,
    Var,
    While,
    YieldStmt,
)

from conftest import FIB_SOURCE


def test_minimal_program():
    program = parse_source("fn main() { }")
    assert len(program.decls) == 1
    assert program.decls[0].name == "main"
    assert not program.decls[0].is_generator
    assert program.decls[0].body.stmts == []


def test_fib_shape():
    program = parse_source(FIB_SOURCE)
    fib = program.decls[0]
    assert fib.name == "fib" and fib.is_generator
    lets = fib.body.stmts[:2]
    assert [s.name for s in lets] == ["a", "b"]
    assert all(isinstance(s, Let) for s in lets)
    loop = fib.body.stmts[2]
    assert isinstance(loop, While) and loop.cond == BoolLit(True)
    body = loop.body.stmts
    assert isinstance(body[0], YieldStmt) and body[0].value == Var("a")
    assert body[1] == Let("c", Var("a"))
    assert body[2] == Assign("a", Var("b"))
    assert body[3] == Assign("b", Binary("+", Var("c"), Var("a")))


def test_yield_outside_generator_rejected():
    with pytest.raises(ValidationError):
        parse_source("fn f() { yield 1 } fn main() { }")


def test_yield_inside_funclit_rejected():
    with pytest.raises(ValidationError):
        parse_source("fn* g() { let f = fn () { yield 1 } } fn main() { }")


def test_duplicate_function_name():
    with pytest.raises(ValidationError):
        parse_source("fn main() { } fn main() { }")


def test_missing_entry():
    with pytest.raises(ValidationError):
        parse_source("fn helper() { }")


def test_generator_entry_rejected():
    with pytest.raises(ValidationError):
        parse_source("fn* main() { }")


def test_entry_with_params_rejected():
    with pytest.raises(ValidationError):
        parse_source("fn main(x) { }")


def test_duplicate_params_rejected():
    with pytest.raises(ValidationError):
        parse_source("fn f(a, a) { } fn main() { }")


def test_let_yield():
    program = parse_source("fn* g() { let x = yield 1 } fn main() { }")
    stmt = program.decls[0].body.stmts[0]
    assert stmt == LetYield("x", IntLit(1))


def test_precedence():
    program = parse_source("fn main() { let x = 1 + 2 * 3 == 7 && true }")
    value = program.decls[0].body.stmts[0].value
    assert value == Binary(
        "&&",
        Binary("==", Binary("+", IntLit(1), Binary("*", IntLit(2), IntLit(3))), IntLit(7)),
        BoolLit(True),
    )


def test_unary_and_parens():
    program = parse_source("fn main() { let x = -(1 + 2) let y = !true }")
    stmts = program.decls[0].body.stmts
    assert stmts[0].value == Unary("-", Binary("+", IntLit(1), IntLit(2)))
    assert stmts[1].value == Unary("!", BoolLit(True))


def test_postfix_chains():
    program = parse_source("fn main() { let v = f(1)(2).field }")
    value = program.decls[0].body.stmts[0].value
    assert value == FieldGet(Call(Call(Var("f"), [IntLit(1)]), [IntLit(2)]), "field")


def test_next_forms():
    program = parse_source("fn main() { let a = next(g) let b = next(g, 1) }")
    stmts = program.decls[0].body.stmts
    assert stmts[0].value == NextCall(Var("g"), None)
    assert stmts[1].value == NextCall(Var("g"), IntLit(1))


def test_record_and_funcref_and_fieldset():
    program = parse_source(
        "fn main() { let r = { env: { inst: 1 }, fn: &main } r.env = null }"
    )
    stmts = program.decls[0].body.stmts
    record = stmts[0].value
    assert isinstance(record, RecordLit)
    assert record.fields[0][0] == "env"
    assert record.fields[1] == ("fn", FuncRef("main"))
    assert stmts[1] == FieldSet(Var("r"), "env", NullLit())


def test_duplicate_record_field_rejected():
    with pytest.raises(ParseError):
        parse_source("fn main() { let r = { a: 1, a: 2 } }")


def test_funclit():
    program = parse_source("fn main() { return fn (x) { return x } }")
    value = program.decls[0].body.stmts[0].value
    assert isinstance(value, FuncLit)
    assert value.params == ["x"]


def test_assign_to_call_rejected():
    with pytest.raises(ParseError):
        parse_source("fn main() { f(1) = 2 }")


def test_parse_error_position_in_bounds():
    source = "fn main() {\n  let = 3\n}"
    with pytest.raises(ParseError) as err:
        parse_source(source)
    lines = source.split("\n")
    assert 1 <= err.value.line <= len(lines)
    assert 1 <= err.value.col <= len(lines[err.value.line - 1]) + 1


def test_expected_found_message():
    with pytest.raises(ParseError) as err:
        parse_source("fn main( { }")
    assert "expected" in err.value.message and "found" in err.value.message


def test_positions_do_not_affect_equality():
    a = parse_source("fn main() { let x = 1 }")
    b = parse_source("fn main() {\n\n  let x =    1 }")
    assert a == b


def test_error_positions_stay_in_bounds_under_corruption():
    # Position fidelity: mangle real sources and check every reported
    # error position lands inside the input.
    import random

    from corolower.errors import MiniError
    from conftest import CORPUS_FILES

    rng = random.Random(7)
    junk = ["@", "}", ")", "yield", "=", "let", "1 1", "&&", "next"]
    for path in CORPUS_FILES[:6]:
        source = path.read_text()
        for _ in range(40):
            at = rng.randrange(len(source))
            mangled = source[:at] + rng.choice(junk) + source[at:]
            try:
                parse_source(mangled)
            except MiniError as err:
                if err.line is None:
                    continue
                lines = mangled.split("\n")
                assert 1 <= err.line <= len(lines)
                assert 1 <= err.col <= len(lines[err.line - 1]) + 2
