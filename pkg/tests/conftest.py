import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
FIGURES = ROOT / "figures"
sys.path.insert(0, str(Path(__file__).resolve().parent))

from pabisim.model import load_pa  # noqa: E402

CORPUS = sorted(FIGURES.glob("*.pa"))


@pytest.fixture(scope="session")
def fig1():
    return load_pa(FIGURES / "fig1.pa")


@pytest.fixture(scope="session")
def uv():
    return load_pa(FIGURES / "uv_hull.pa")


@pytest.fixture(scope="session")
def figures():
    return FIGURES
