import pytest

from orbitcone.matrixgrp import realization

PRESETS = ("kostant_sl2", "sl2_so11", "sl3_so21", "group_sl2")


@pytest.fixture(scope="session", params=PRESETS)
def rz(request):
    return realization(request.param)


@pytest.fixture(scope="session")
def rz_sl3():
    return realization("sl3_so21")


@pytest.fixture(scope="session")
def rz_group():
    return realization("group_sl2")


@pytest.fixture(scope="session")
def rz_so11():
    return realization("sl2_so11")


@pytest.fixture(scope="session")
def rz_kostant():
    return realization("kostant_sl2")
