from __future__ import annotations

import pytest

from engine.cantor import GeneralizedCantorSet
from engine.config import reset_settings_cache


@pytest.fixture(autouse=True)
def _fresh_settings():
    """
    Tests that set FZ_* variables through monkeypatch must not leak a cached
    Settings instance into the next test.
    """
    reset_settings_cache()
    yield
    reset_settings_cache()


@pytest.fixture()
def ternary() -> GeneralizedCantorSet:
    return GeneralizedCantorSet(2, 1.0 / 3.0)


@pytest.fixture(params=[(2, 1.0 / 3.0), (3, 0.2), (2, 0.25)], ids=lambda p: f"m{p[0]}-a{p[1]:g}")
def cantor_set(request) -> GeneralizedCantorSet:
    m, a = request.param
    return GeneralizedCantorSet(m, a)
