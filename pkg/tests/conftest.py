from __future__ import annotations

# (number, description, passed, detail) rows filled in by test_acceptance
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, desc, ok, detail in sorted(ACCEPTANCE):
        line = f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {desc}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
