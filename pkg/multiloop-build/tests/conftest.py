"""
Shared fixtures: corpus paths, a fresh settings singleton per test and
module-scoped multiloop algebras (root decompositions are the slow part).
"""

import logging
import os
from pathlib import Path

import pytest

from app.api.commands import parse_spec
from app.core import config
from app.core.logging import StderrHandler
from app.services.multiloop import MultiloopLieAlgebra

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test starts from default settings, whatever the environment holds."""
    for key in list(os.environ):
        if key.startswith("MULTILOOP_"):
            monkeypatch.delenv(key, raising=False)
    config._settings = None
    yield
    config._settings = None
    root = logging.getLogger()
    for handler in list(root.handlers):
        # only what setup_logging installed; pytest owns the rest
        if isinstance(handler, (StderrHandler, logging.FileHandler)):
            root.removeHandler(handler)
            handler.close()


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


def corpus_path(name: str) -> str:
    return str(CORPUS / name)


def load_algebra(name: str, seed: int = 0) -> MultiloopLieAlgebra:
    return MultiloopLieAlgebra(parse_spec(corpus_path(name)).sigma, seed=seed)


@pytest.fixture(scope="module")
def untwisted_sl2() -> MultiloopLieAlgebra:
    return load_algebra("untwisted_sl2.json")


@pytest.fixture(scope="module")
def sl2_involution() -> MultiloopLieAlgebra:
    return load_algebra("sl2_involution.json")


@pytest.fixture(scope="module")
def sl2_torus3() -> MultiloopLieAlgebra:
    return load_algebra("sl2_torus3.json")


@pytest.fixture(scope="module")
def sl3_diagram() -> MultiloopLieAlgebra:
    return load_algebra("sl3_diagram.json")


@pytest.fixture(scope="module")
def sl3_diagram_torus() -> MultiloopLieAlgebra:
    return load_algebra("sl3_diagram_torus.json")


@pytest.fixture(scope="module")
def zero_fixed() -> MultiloopLieAlgebra:
    return load_algebra("zero_fixed.json")
