import pytest

from fracbvp.presets import EX1, EX2, EX3


@pytest.fixture(params=[EX1, EX2, EX3], ids=["ex1", "ex2", "ex3"])
def preset(request):
    return request.param
