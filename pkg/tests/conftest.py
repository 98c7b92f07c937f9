def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance")
        for line in RESULTS:
            terminalreporter.write_line(line)
