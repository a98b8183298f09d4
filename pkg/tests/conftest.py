import random

import pytest

from citeforge.styles import load_builtin_styles
from citeforge.synth import sample_article


@pytest.fixture(scope="session")
def styles():
    return load_builtin_styles()


@pytest.fixture()
def argon_entry():
    return sample_article()


@pytest.fixture()
def rng():
    return random.Random(20180401)
