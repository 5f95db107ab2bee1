"""Railway-Oriented Programming helpers for ``result.Result``.

Config loading chains several fallible steps (read, parse, validate) and
validation reports every problem at once; these helpers cover both.
"""

from collections.abc import Callable, Iterable

from result import Err, Ok, Result


def bind[A, B, E](f: Callable[[A], Result[B, E]]) -> Callable[[Result[A, E]], Result[B, E]]:
    """Lift a fallible step so it runs only on the success track.

    Examples:
        >>> def positive(x: float) -> Result[float, str]:
        ...     return Ok(x) if x > 0 else Err(f"must be > 0, got {x}")
        >>> check = bind(positive)
        >>> check(Ok(0.001))
        Ok(0.001)
        >>> check(Ok(-1.0))
        Err('must be > 0, got -1.0')
        >>> check(Err("file not found"))
        Err('file not found')
    """

    def bound(result: Result[A, E]) -> Result[B, E]:
        match result:
            case Ok(value):
                return f(value)
            case Err(error):
                return Err(error)

    return bound


def map_error[A, E, F](f: Callable[[E], F]) -> Callable[[Result[A, E]], Result[A, F]]:
    """Transform the error of a Result, leaving success values alone.

    Examples:
        >>> tag = map_error(lambda e: f"scenario: {e}")
        >>> tag(Err("duration must be >= 0"))
        Err('scenario: duration must be >= 0')
        >>> tag(Ok(60.0))
        Ok(60.0)
    """

    def mapped(result: Result[A, E]) -> Result[A, F]:
        match result:
            case Ok(value):
                return Ok(value)
            case Err(error):
                return Err(f(error))

    return mapped


def collect_errors[A, E](results: Iterable[Result[A, E]]) -> list[E]:
    """Every error in ``results``, in order.

    Examples:
        >>> collect_errors([Ok(1), Err("seed: expected int"), Ok(2), Err("x: unknown key")])
        ['seed: expected int', 'x: unknown key']
    """
    return [result.err_value for result in results if isinstance(result, Err)]
