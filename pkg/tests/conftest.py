import logging

import pytest

# criterion number -> (title, passed, detail); filled in by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture(autouse=True)
def _quiet_register_warnings():
    # mismatched circuit applications are expected in generated programs
    logging.getLogger("iqu.evaluator").setLevel(logging.ERROR)
    yield
    logging.getLogger("iqu.evaluator").setLevel(logging.NOTSET)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
