import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE = {}


def record_acceptance(number: int, title: str, passed: bool, detail: str) -> None:
    """Store and print the one-line verdict of an acceptance criterion."""
    line = f"ACCEPTANCE {number} {'PASS' if passed else 'FAIL'}: {title} ({detail})"
    _ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
