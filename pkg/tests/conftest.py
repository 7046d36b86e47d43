"""Shared pytest plumbing: collect acceptance verdict lines for the summary."""

ACCEPTANCE_LINES = []


def record_verdict(name: str, ok: bool, detail: str) -> None:
    line = f"acceptance {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
