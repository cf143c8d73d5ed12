import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance verdicts, printed once per criterion at the end of the session
ACCEPTANCE: dict = {}
ACCEPTANCE_TOTAL = 10


def record_verdict(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


SLOW_CRITERIA = (6, 7, 8)


def pytest_terminal_summary(terminalreporter):
    collected = any("test_acceptance" in str(getattr(item, "fspath", ""))
                    for item in terminalreporter.stats.get("passed", []) + terminalreporter.stats.get("failed", [])
                    + terminalreporter.stats.get("deselected", []))
    if not (ACCEPTANCE or collected):
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, ACCEPTANCE_TOTAL + 1):
        if n in ACCEPTANCE:
            ok, detail = ACCEPTANCE[n]
            terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        elif n in SLOW_CRITERIA:
            terminalreporter.write_line(f"criterion {n}: NOT RUN  (slow suite: pytest -m slow tests/test_acceptance.py)")
        else:
            terminalreporter.write_line(f"criterion {n}: NOT RUN  (not selected)")
