from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# filled by the acceptance suite, printed after the run
CRITERIA: list[tuple[str, str, float]] = []


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, seconds in CRITERIA:
        terminalreporter.write_line(f"{status}  {name}  ({seconds:.2f} s)")
