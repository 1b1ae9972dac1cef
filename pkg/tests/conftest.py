import random

import hypothesis.strategies as st
from hypothesis import HealthCheck, settings

from survmart.randlaws import KINDS, random_law

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def latent_laws(draw, kinds=KINDS):
    kind = draw(st.sampled_from(kinds))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_law(random.Random(seed), kind)


independent_laws = latent_laws(kinds=("independent-shared", "independent-disjoint"))


_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
