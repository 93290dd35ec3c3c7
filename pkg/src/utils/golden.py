import math
from typing import Callable, Tuple

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARED = (3 - math.sqrt(5)) / 2


def golden_section_maximize(func: Callable[[float], float], a: float, b: float,
                            tol: float = 1e-10) -> Tuple[float, float]:
    """Maximise a unimodal func on [a, b] until the bracket is narrower than tol.

    Returns (x, func(x)) at the midpoint of the final bracket. On equal
    values the left part of the bracket is kept, so ties resolve toward a.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, func(x)

    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARED * h
    d = a + INV_PHI * h
    fc, fd = func(c), func(d)

    for _ in range(steps):
        h *= INV_PHI
        if fc >= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI_SQUARED * h
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * h
            fd = func(d)

    x = 0.5 * (a + b)
    return x, func(x)
