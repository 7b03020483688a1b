"""Kernel backend selection.

The compiled extension ``tscale._ckernels`` is used when it was built;
otherwise, or when ``TSCALE_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the pure-Python implementation in ``tscale._pykernels`` is used.
Both expose the same ``Program`` class.
"""

import os

from . import _pykernels
from .expr import Expr, cached_compile

if os.environ.get("TSCALE_PURE_PYTHON", "") not in ("", "0"):
    _backend = _pykernels
else:
    try:
        from . import _ckernels as _backend
    except ImportError:  # extension not built
        _backend = _pykernels

BACKEND = _backend.NAME
Program = _backend.Program

# generic algorithms over Python callables
simpson = _pykernels.simpson
extrema = _pykernels.extrema

_programs: dict = {}


def program_for(expr: Expr, backend=None):
    """Compiled program for ``expr`` (cached per backend)."""
    impl = backend or _backend
    key = (impl.NAME, expr)
    prog = _programs.get(key)
    if prog is None:
        ops, consts, depth = cached_compile(expr)
        try:
            prog = impl.Program(ops, consts, depth)
        except ValueError:  # too deep for the native stack
            prog = _pykernels.Program(ops, consts, depth)
        if len(_programs) > 8192:
            _programs.clear()
        _programs[key] = prog
    return prog


def backend_module(name: str):
    if name == "python":
        return _pykernels
    from . import _ckernels
    return _ckernels
