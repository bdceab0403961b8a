import pytest

_RESULTS: dict[int, tuple[str, str]] = {}


@pytest.fixture
def criterion(request):
    """Record a numbered acceptance criterion's outcome for the end-of-run table."""
    num_detail = {}

    def note(num: int, text: str):
        num_detail["num"], num_detail["text"] = num, text

    yield note
    rep = getattr(request.node, "rep_call", None)
    if "num" in num_detail:
        ok = rep is not None and rep.passed
        _RESULTS[num_detail["num"]] = ("PASS" if ok else "FAIL", num_detail["text"])


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        status, text = _RESULTS[num]
        terminalreporter.write_line(f"criterion {num}: {status}  {text}")
