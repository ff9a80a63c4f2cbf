import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # expose the call-phase outcome to fixtures that report on teardown
    out = yield
    rep = out.get_result()
    if rep.when == "call":
        item.rep_failed = rep.failed
