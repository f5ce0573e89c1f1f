import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

VERDICTS: dict[int, str] = {}


def record_verdict(number: int, ok: bool, detail: str) -> None:
    VERDICTS[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(VERDICTS[number])


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[n])
