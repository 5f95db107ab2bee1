"""Tests for the Result combinators."""

from result import Err, Ok

from cave_sim.utils.railway import bind, collect_errors, map_error


def positive(x: float):
    return Ok(x) if x > 0 else Err(f"must be > 0, got {x}")


def test_bind_runs_on_success():
    assert bind(positive)(Ok(2.0)) == Ok(2.0)
    assert bind(positive)(Ok(-2.0)) == Err("must be > 0, got -2.0")


def test_bind_skips_errors():
    assert bind(positive)(Err("file not found")) == Err("file not found")


def test_map_error_only_touches_errors():
    tag = map_error(lambda e: f"scenario: {e}")
    assert tag(Err("bad")) == Err("scenario: bad")
    assert tag(Ok(1)) == Ok(1)


def test_collect_errors_keeps_order():
    results = [Ok(1), Err("a"), Ok(2), Err("b")]
    assert collect_errors(results) == ["a", "b"]
    assert collect_errors(iter([Ok(1)])) == []
