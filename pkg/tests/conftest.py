import os
import random

import pytest

from services.finset_model import FinInterpretation
from services.generators import seeded_rng
from services.language import OMEGA, ONE, Ground, Signature, Var

WORKSPACES = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'workspaces')

A, B = Ground('A'), Ground('B')


@pytest.fixture
def rng() -> random.Random:
    """Seeded from LOSET_SEED so a failing sweep can be replayed."""
    return seeded_rng()


@pytest.fixture
def sig() -> Signature:
    return Signature.build(['A', 'B'], [('p', A, OMEGA), ('F', A, B), ('c', ONE, A)])


@pytest.fixture
def interp(sig) -> FinInterpretation:
    return FinInterpretation.from_index_tables(sig, {'A': 3, 'B': 2}, {
        'p': [1, 0, 1],
        'F': [0, 1, 1],
        'c': [2],
    })


@pytest.fixture
def xa() -> Var:
    return Var('x', A)


@pytest.fixture
def yb() -> Var:
    return Var('y', B)


@pytest.fixture
def corpus():
    """(name, text) for every workspace in the example corpus."""
    entries = []
    for name in sorted(os.listdir(WORKSPACES)):
        if name.endswith('.sexp'):
            with open(os.path.join(WORKSPACES, name), encoding='utf-8') as fh:
                entries.append((name, fh.read()))
    return entries


@pytest.fixture
def app():
    from app import create_app
    app = create_app('testing')
    yield app


@pytest.fixture
def client(app):
    return app.test_client()
