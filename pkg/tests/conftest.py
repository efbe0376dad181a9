import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from atlir import icgs, modelio


@pytest.fixture(scope="session")
def cardgame():
    return modelio.gen_cardgame()


@pytest.fixture(scope="session")
def cardgame_pi(cardgame):
    return icgs.with_perfect_information(cardgame)


@pytest.fixture(scope="session")
def castles111():
    return modelio.gen_castles(1, 1, 1)


@pytest.fixture(scope="session")
def castles112():
    return modelio.gen_castles(1, 1, 2)
