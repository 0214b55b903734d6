import numba
import pytest

numba.set_num_threads(2)


def pytest_addoption(parser):
    parser.addoption("--skip-acceptance", action="store_true",
                     help="skip the long acceptance criteria module")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--skip-acceptance"):
        skip = pytest.mark.skip(reason="--skip-acceptance")
        for item in items:
            if "acceptance" in item.nodeid:
                item.add_marker(skip)
