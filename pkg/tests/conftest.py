import math

import pytest

from dsirs.model import Instance, Resource


def build(rows, budget):
    return Instance(tuple(Resource(*row) for row in rows), budget)


@pytest.fixture
def alex_belle() -> Instance:
    """Watch, four art pieces, designer bag. Utilities total 100 for both
    agents; selling the watch alone fits the unit budget."""
    return build(
        [
            ("r1", 56, 50, 50, 1),
            ("r2", 11, 10, 5, 1),
            ("r3", 11, 10, 5, 1),
            ("r4", 11, 10, 5, 1),
            ("r5", 11, 10, 5, 1),
            ("r6", 0, 10, 5, 1),
        ],
        budget=1,
    )


@pytest.fixture
def d_vs_rho() -> Instance:
    """Three resources where the best difference and best ratio disagree.
    Only resource a is affordable to sell."""
    return build(
        [
            ("a", 99, 8, 0, 1),
            ("b", 1, 90, 0, 2),
            ("c", 0, 2, 0, 2),
        ],
        budget=1,
    )


@pytest.fixture
def envy_impossibility() -> Instance:
    """Two resources where every plan leaves some agent envious."""
    return build(
        [
            ("a", 70, 60, 20, 1),
            ("b", 30, 40, 20, 1),
        ],
        budget=1,
    )


@pytest.fixture
def conflicts() -> Instance:
    """Five resources exhibiting the tension between minimum difference
    and envy-freeness."""
    return build(
        [
            ("v", 22, 39, 2, 1),
            ("w", 56, 2, 5, 1),
            ("x", 16, 28, 4, 1),
            ("y", 1, 27, 10, 1),
            ("z", 25, 24, 5, 1),
        ],
        budget=1,
    )


def pytest_sessionfinish(session, exitstatus):
    """Suite-wide assertion hook: d = 0 and rho = 1 must coincide on every
    plan any test evaluated."""
    from dsirs.model import audit_counters

    counts = audit_counters()
    if counts["evaluations"] and counts["violations"]:
        print(
            f"\nFAIL d=0 <-> rho=1 audit: {counts['violations']} violations "
            f"in {counts['evaluations']} welfare evaluations"
        )
        session.exitstatus = 1
