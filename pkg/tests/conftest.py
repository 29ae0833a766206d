from pathlib import Path

import pytest

from nlcmd import EngineConfig, parse_spec

REPO = Path(__file__).resolve().parent.parent
DEMO_SPEC = REPO / "demo" / "lights.scs"
DEMO_CORPUS = REPO / "demo" / "corpus.jsonl"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def demo_spec_text() -> str:
    return DEMO_SPEC.read_text("utf-8")


@pytest.fixture()
def demo_kb(demo_spec_text):
    return parse_spec(demo_spec_text)


@pytest.fixture()
def config():
    return EngineConfig()
