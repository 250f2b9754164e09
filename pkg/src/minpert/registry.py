"""Named example problems with exactly representable anchors."""

from __future__ import annotations

from .errors import UnknownBuiltin
from .system import Anchor, ParameterizedSystem, parse_problem

_SOURCES = {
    # unit circle in y, radius^2 given by x; K(x) does not depend on x
    "circle": """
        dims m=2 n=1 p=1
        anchor y0=(1,0) x0=(1)
        eq: y1^2 + y2^2 - x1
    """,
    # affine in (y, x); A = [[1,2,0],[0,1,-1]], B = [[1,0],[1,2]]
    "linear2x3": """
        dims m=3 n=2 p=2
        anchor y0=(1,-1,0.5) x0=(0.5,-1)
        eq: y1 + 2 y2 + x1 + 0.5
        eq: y2 - y3 + x1 + 2 x2 + 3
    """,
    "sphere": """
        dims m=3 n=1 p=1
        anchor y0=(1,0,0) x0=(1)
        eq: y1^2 + y2^2 + y3^2 - x1
    """,
    # K(x) = [x - 2, 1] moves with x, and F(y0, x) = x^2 - x is curved in x
    "parabola-underdet": """
        dims m=2 n=1 p=1
        anchor y0=(1,1) x0=(0)
        eq: y2 - y1^2 + x1 y1 - 2 x1 + x1^2
    """,
}

BUILTIN_NAMES = tuple(_SOURCES)


def builtin(name: str) -> tuple[ParameterizedSystem, Anchor]:
    try:
        text = _SOURCES[name]
    except KeyError:
        raise UnknownBuiltin(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
    return parse_problem(text, name=name)
