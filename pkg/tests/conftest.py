import sys
from pathlib import Path

# lets test modules share oracle helpers (e.g. sympy_u_series)
sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}")
