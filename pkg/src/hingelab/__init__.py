"""hingelab: boundary objects of the symmetric space SL(n,R)/SO(n).

Exact hinge limits of matrix families, Satake flag-and-forms boundary
data, velocity simplices and Karpelevich polyhedra, the matrix sky with
its Tits metric, hybrid boundary points and the stratified space of
geodesics.  See the README for the CLI and the module map.
"""

from . import (
    core,
    errors,
    geodesics,
    hinges,
    hybrid,
    jsonio,
    relations,
    satake,
    sky,
    velocity,
)

__all__ = [
    "core",
    "errors",
    "geodesics",
    "hinges",
    "hybrid",
    "jsonio",
    "relations",
    "satake",
    "sky",
    "velocity",
]

__version__ = "0.1.0"
