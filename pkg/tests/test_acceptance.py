"""The fourteen acceptance criteria; each prints a PASS/FAIL line with its checks."""
import pytest

from ilw import acceptance


@pytest.mark.parametrize("number,title,fn", acceptance.CRITERIA,
                         ids=[f"criterion_{n:02d}" for n, _, _ in acceptance.CRITERIA])
def test_criterion(number, title, fn, capsys):
    checks = fn()
    ok = all(c.passed for c in checks)
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}")
        for c in checks:
            print("        " + c.line())
    failed = [c.line() for c in checks if not c.passed]
    assert ok, "; ".join(failed)
