import random

import pytest

from asyncpay.backends import ToyBackend, TypeABackend


@pytest.fixture
def toy101():
    """Tiny toy group used by the hand-computed golden vectors."""
    return ToyBackend(101)


@pytest.fixture
def toy():
    """Default toy group (61-bit order): digest collisions are negligible."""
    return ToyBackend()


@pytest.fixture(scope="session")
def production():
    return TypeABackend()


@pytest.fixture
def rng():
    return random.Random(0xA5C3)


class QueuedRng:
    """Duck-typed rng stub feeding predetermined draws to randrange."""

    def __init__(self, values):
        self.values = list(values)

    def randrange(self, *args):
        return self.values.pop(0)


@pytest.fixture
def queued_rng():
    return QueuedRng
