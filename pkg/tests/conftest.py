import json
from importlib import resources

import pytest

from densegoldbach.residue import ResidueFunction, units
from densegoldbach.rng import SplitMix64


def random_table(rng: SplitMix64, q: int, lo: float = 0.0, hi: float = 1.0) -> ResidueFunction:
    return ResidueFunction(q, tuple(rng.uniform(lo, hi) for _ in units(q)))


def load_schema(name: str) -> dict:
    return json.loads(resources.files("densegoldbach").joinpath("schemas", name).read_text())


@pytest.fixture(scope="session")
def validate_report():
    """Validate a CLI report (and any embedded pipeline report) against the shipped schemas."""
    import jsonschema
    from referencing import Registry, Resource

    run = load_schema("run_report.schema.json")
    pipe = load_schema("pipeline_report.schema.json")
    registry = Registry().with_resources(
        [(s["$id"], Resource.from_contents(s)) for s in (run, pipe)]
    )
    run_v = jsonschema.Draft202012Validator(run, registry=registry)
    pipe_v = jsonschema.Draft202012Validator(pipe, registry=registry)

    def check(report: dict, kind: str = "run") -> None:
        (run_v if kind == "run" else pipe_v).validate(report)

    return check


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
