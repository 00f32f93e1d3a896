import sys


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance pass/fail lines even when stdout was captured."""
    for name, module in sys.modules.items():
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            lines = getattr(module, "REPORT_LINES", [])
            if lines:
                terminalreporter.section("acceptance criteria")
                for line in lines:
                    terminalreporter.write_line(line)
            break
