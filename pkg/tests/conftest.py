import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from evgr.corpus_io import parse_corpus
from evgr.synthetic import separable_corpus

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).parent / "data"

MINIMAL_CSV = (
    b"response_id,student_id,question_id,phase,text\n"
    b"r1,s1,Q1,pre,Bacteria mutate.\n"
    b"r2,s1,Q1,post,Resistant bacteria survive and reproduce.\n"
)


def load_json(name):
    return json.loads((DATA / name).read_text())


@pytest.fixture
def minimal_corpus():
    return parse_corpus(MINIMAL_CSV)[0]


@pytest.fixture(scope="session")
def separable():
    return separable_corpus(100, seed=3)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
