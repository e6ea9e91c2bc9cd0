"""Kernel backend selection.

At import time the compiled Cython core is preferred; the pure-numpy
module is the fallback. `use()` switches the active backend (mainly for
tests and the backend benchmark); both backends expose the same functions
and produce identical results.
"""

from __future__ import annotations

import contextlib

from . import pure

try:
    from . import _core as _compiled
    HAVE_COMPILED = True
except ImportError:
    _compiled = None
    HAVE_COMPILED = False

_active = _compiled if HAVE_COMPILED else pure

BACKENDS = ("pure", "compiled") if HAVE_COMPILED else ("pure",)


def get():
    """The active kernel module."""
    return _active


def active_name() -> str:
    return "compiled" if _active is _compiled else "pure"


def _resolve(name: str):
    if name == "pure":
        return pure
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r} (expected 'pure' or 'compiled')")


def set_backend(name: str) -> None:
    global _active
    _active = _resolve(name)


@contextlib.contextmanager
def use(name: str):
    """Temporarily select a kernel backend."""
    global _active
    prev = _active
    _active = _resolve(name)
    try:
        yield _active
    finally:
        _active = prev
