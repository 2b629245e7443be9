from pathlib import Path

import pytest
from hypothesis import strategies as st

from pta.catalog import builtin_catalog
from pta.model import CANONICAL_STAGES, PipelineModel, SlsaCapability

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

ASSETS = [f"AS{i}" for i in range(1, 12)]
AGENTS = [f"TA{i}" for i in range(1, 8)]


@pytest.fixture(scope="session")
def catalog():
    return builtin_catalog()


def reference_model(**overrides) -> PipelineModel:
    fields = dict(
        name="reference",
        stages=frozenset(CANONICAL_STAGES),
        assets=frozenset(ASSETS),
        agents=frozenset(AGENTS),
    )
    fields.update(overrides)
    return PipelineModel(**fields)


@pytest.fixture
def reference():
    return reference_model()


@pytest.fixture
def saturated(catalog):
    return reference_model(
        controls=frozenset(c.id for c in catalog.controls),
        slsa_capabilities=frozenset(SlsaCapability),
    )


def models(control_ids):
    """Random pipeline models over the built-in id space."""
    return st.builds(
        lambda stages, assets, agents, controls, caps: PipelineModel(
            name="random",
            stages=frozenset(stages),
            assets=frozenset(assets),
            agents=frozenset(agents),
            controls=frozenset(controls),
            slsa_capabilities=frozenset(caps),
        ),
        st.sets(st.sampled_from(CANONICAL_STAGES)),
        st.sets(st.sampled_from(ASSETS)),
        st.sets(st.sampled_from(AGENTS)),
        st.sets(st.sampled_from(control_ids)),
        st.sets(st.sampled_from(list(SlsaCapability))),
    )


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
