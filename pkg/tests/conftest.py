from common import AC_LINES


def pytest_terminal_summary(terminalreporter):
    if not AC_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for ac in sorted(AC_LINES):
        terminalreporter.write_line(AC_LINES[ac])
