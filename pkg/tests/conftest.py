"""Shared test plumbing: acceptance criteria report one PASS/FAIL line each,
collected here and echoed in the terminal summary so they are visible in any
pytest invocation."""

CRITERION_LINES: list[tuple[int, str]] = []


def record_criterion(num: int, ok: bool, detail: str) -> str:
    line = f"CRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    CRITERION_LINES.append((num, line))
    print(line, flush=True)
    return line


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(CRITERION_LINES):
        terminalreporter.write_line(line)
