import pytest

from corolower.defunc import defunctionalize, match_factory
from corolower.errors import DefuncError
from corolower.interp import Interpreter, interp, interp_native, resume_sequence
from corolower.parser import parse_source
from corolower.printer import print_source
from corolower.syntax import FuncLit, RecordLit, FuncRef, block_exprs
from corolower.transform import transform_program

from conftest import CORPUS_FILES, FIB_SOURCE


def first_order(source, opt=True):
    return defunctionalize(transform_program(parse_source(source), opt))


def test_fib_first_order_structure():
    program = first_order(FIB_SOURCE)
    names = [d.name for d in program.decls]
    assert names == ["apply", "fib_fo", "fib", "main"]
    fib = next(d for d in program.decls if d.name == "fib")
    ret = fib.body.stmts[0].value
    assert isinstance(ret, RecordLit)
    assert [k for k, _ in ret.fields] == ["env", "fn"]
    env = ret.fields[0][1]
    assert [k for k, _ in env.fields] == ["_i", "a", "b", "c"]  # inst, then hoisted
    assert ret.fields[1][1] == FuncRef("fib_fo")
    lifted = next(d for d in program.decls if d.name == "fib_fo")
    assert len(lifted.params) == 2
    assert not lifted.is_generator


def test_fib_first_order_runs_identically():
    program = parse_source(FIB_SOURCE)
    assert interp(first_order(FIB_SOURCE)) == interp_native(program)


def test_simple_coroutine_first_order_trace():
    source = "fn* f(n) { let x = yield n yield n + x } fn main() { }"
    program = first_order(source)
    # apply(f(5), null) = 5; apply(instance, 3) = 8.
    assert resume_sequence(program, "f", [5], [None, 3]) == [5, 8]
    lifted = next(d for d in program.decls if d.name == "f_fo")
    env_fields = [
        k
        for k, _ in next(d for d in program.decls if d.name == "f")
        .body.stmts[0]
        .value.fields[0][1]
        .fields
    ]
    assert env_fields == ["_i", "n", "x"]  # inst, params, hoisted


def test_no_anonymous_functions_anywhere():
    for path in CORPUS_FILES:
        for opt in (True, False):
            program = first_order(path.read_text(), opt)
            for decl in program.decls:
                assert not any(
                    isinstance(e, FuncLit) for e in block_exprs(decl.body)
                ), (path.name, decl.name)
            assert not any(d.is_generator for d in program.decls)


def test_first_order_reparses_and_reruns():
    for path in CORPUS_FILES:
        program = first_order(path.read_text())
        text = print_source(program)
        again = parse_source(text)
        assert again == program, path.name
        assert interp(again) == interp(program), path.name


def test_identity_without_closures():
    program = parse_source("fn helper(x) { return x * 2 } fn main() { print(helper(3)) }")
    result = defunctionalize(program)
    assert result == program  # no apply emitted, decls untouched


def test_next_sites_rewritten_to_apply():
    program = first_order(FIB_SOURCE)
    text = print_source(program)
    assert "next(" not in text
    assert "apply(g, null)" in text


def test_rejects_generators():
    program = parse_source("fn* g() { yield 1 } fn main() { }")
    with pytest.raises(DefuncError):
        defunctionalize(program)


def test_rejects_foreign_closures():
    program = parse_source("fn main() { let f = fn (x) { return x } }")
    with pytest.raises(DefuncError):
        defunctionalize(program)


def test_match_factory_shape():
    lowered = transform_program(parse_source(FIB_SOURCE))
    shape = match_factory(lowered.decls[0])
    assert shape is not None
    assert shape.hoisted == ["a", "b", "c"]
    assert match_factory(lowered.decls[1]) is None  # main is not a factory


def test_apply_name_collision_bumped():
    source = """
fn* g() { yield 1 }

fn apply(a, b) { return a + b }

fn main() {
  print(apply(1, 2))
  let i = g()
  print(next(i))
}
"""
    program = parse_source(source)
    result = defunctionalize(transform_program(program))
    names = [d.name for d in result.decls]
    assert "apply" in names and "apply1" in names
    assert interp(result) == interp_native(program) == [3, 1]


def test_instances_do_not_alias():
    source = """
fn* counter() {
  let n = 0
  while (true) {
    yield n
    n = n + 1
  }
}

fn main() { }
"""
    program = first_order(source)
    interp_ = Interpreter(program)
    factory = interp_.globals.lookup("counter")
    a = interp_.call(factory, [])
    b = interp_.call(factory, [])
    from corolower.interp import resume_any

    seq = [
        resume_any(interp_, a, None),
        resume_any(interp_, b, None),
        resume_any(interp_, a, None),
        resume_any(interp_, a, None),
        resume_any(interp_, b, None),
    ]
    assert seq == [0, 0, 1, 2, 1]
