import sys
from pathlib import Path

import pytest

sys.setrecursionlimit(100_000)
sys.path.insert(0, str(Path(__file__).parent))

from perpl.pipeline import corpus_dir, front  # noqa: E402
from perpl.transform import linearize  # noqa: E402
from perpl.typecheck import typecheck  # noqa: E402

CORPUS = sorted(p.stem for p in corpus_dir().glob("*.ppl"))


def source(name: str) -> str:
    return (corpus_dir() / f"{name}.ppl").read_text()


def typed(src: str, mode="affine"):
    return typecheck(front(src), mode)


def linear(src: str):
    return linearize(typecheck(front(src)))


@pytest.fixture(params=CORPUS)
def corpus_name(request):
    return request.param


# one summary line per acceptance criterion

_acceptance: dict = {}
_details: dict = {}


@pytest.fixture
def detail(request):
    """Collects measurement lines printed under the criterion's summary line."""
    lines = _details.setdefault(request.node.name, [])
    return lines.append


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        name = report.nodeid.split("::")[-1]
        prev = _acceptance.get(name, "passed")
        _acceptance[name] = report.outcome if prev == "passed" else prev


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda n: int(n.split("_")[2])):
        status = "PASS" if _acceptance[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
        for line in _details.get(name, []):
            terminalreporter.write_line(f"      {line}")
