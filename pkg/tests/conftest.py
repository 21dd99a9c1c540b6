from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
CORPUS_DIR = TESTS_DIR / "corpus"
GOLDEN_DIR = TESTS_DIR / "golden"

CORPUS_FILES = sorted(CORPUS_DIR.glob("*.mini"))

FIB_SOURCE = (CORPUS_DIR / "fib.mini").read_text()
RECEIVE_SOURCE = (CORPUS_DIR / "receive.mini").read_text()


@pytest.fixture(scope="session")
def corpus_programs():
    from corolower.parser import parse_source

    return {path.stem: parse_source(path.read_text()) for path in CORPUS_FILES}


def corpus_ids():
    return [path.stem for path in CORPUS_FILES]
