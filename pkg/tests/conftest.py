import math

import pytest

from tcdkit.change_models import GaussianSpec, GeneralChange, MeanChange, VarianceChange
from tcdkit.sigraim import TcdConfig

CN0_MU0 = 10 ** 4.4
CN0_DELTA = CN0_MU0 * (10 ** 0.3 - 1)
CN0_SIGMA2 = (CN0_DELTA / 3) ** 2


def case1_model():
    return MeanChange(CN0_MU0, CN0_SIGMA2, 10 ** 3.7, 10 ** 3.4)


def case2_model(actual=None):
    return VarianceChange(1.11e-5, 2.78e-4, actual)


def case3_model():
    return GeneralChange(GaussianSpec(0.1, 1.14e-3), GaussianSpec(0.2, 2.03e-3))


@pytest.fixture
def case1():
    return case1_model()


@pytest.fixture
def case2():
    return case2_model()


@pytest.fixture
def case2_actual():
    return case2_model(5.44e-4)


@pytest.fixture
def case3():
    return case3_model()


@pytest.fixture
def tcd60():
    return TcdConfig(6, 60, 0.01, 0.01)


@pytest.fixture
def tcd300():
    return TcdConfig(6, 300, 0.01, 0.01)


def rel(x, target):
    return abs(x - target) / abs(target)


def quantile_h(alpha, m_alpha):
    """Bare standard-normal quantile threshold, by an independent route."""
    from statistics import NormalDist
    return NormalDist().inv_cdf((1 - alpha) ** (1 / m_alpha))


assert math.isclose(CN0_SIGMA2, 6.944e7, rel_tol=1e-3)


# one PASS/FAIL line per acceptance criterion, printed after the run

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    num, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed or rep.when == "call":
        _CRITERIA[num] = ("PASS" if rep.passed else "FAIL", title, detail, call.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        status, title, detail, secs = _CRITERIA[num]
        line = f"criterion {num:2d}  {status}  {title}  ({secs:.2f} s)"
        terminalreporter.write_line(line + (f"  {detail}" if detail else ""))
