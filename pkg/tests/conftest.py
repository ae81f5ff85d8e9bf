import sys
from pathlib import Path

# lets tests import the naive reference implementations in oracles.py
sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    report = sys.modules.get("test_acceptance")
    lines = getattr(report, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
