"""Acceptance gate: every criterion at its stated tolerance, one line each."""
import pytest

from nlscatter import acceptance, linfield

ACCEPTANCE_LINES: list[str] = []


@pytest.mark.parametrize("fn", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(fn):
    res = acceptance.run_one(fn)
    line = acceptance.format_line(res)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, line


@pytest.mark.parametrize("fn", [acceptance.criterion_03, acceptance.criterion_04],
                         ids=lambda f: f.__name__)
def test_wrong_green_prefactor_is_caught(fn, monkeypatch):
    monkeypatch.setattr(linfield, "_green_prefactor", lambda w: -2.0 / w)
    res = acceptance.run_one(fn)
    assert not res.passed, acceptance.format_line(res)
