import jsonschema
import pytest
from referencing import Registry, Resource

from spex.resources import SCHEMAS, schema


@pytest.fixture(scope="session")
def validate():
    registry = Registry().with_resources(
        (f"{name}.json", Resource.from_contents(schema(name))) for name in SCHEMAS
    )

    def check(doc, name):
        jsonschema.Draft202012Validator(schema(name), registry=registry).validate(doc)

    return check


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py::test_c" in rep.nodeid:
                name = rep.nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL", rep.duration))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, seconds in sorted(lines):
        number = int(name[6:8])
        title = name[9:].replace("_", " ")
        terminalreporter.write_line(f"criterion {number:2d}  {status}  {title}  ({seconds:.2f} s)")
