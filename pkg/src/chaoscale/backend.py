"""Backend selection: compiled extension when importable, numpy otherwise.

The active backend can be forced with the CHAOSCALE_BACKEND environment
variable ("compiled" | "numpy") or temporarily with `force()`.  `verify`
always runs on the numpy backend so its golden output is independent of
whether the extension was built.
"""

from __future__ import annotations

import contextlib
import os

from . import _kernels_np

try:
    from . import _kernels_cy
except ImportError:  # extension not built; pure-python install still works
    _kernels_cy = None

_BY_NAME = {"numpy": _kernels_np}
if _kernels_cy is not None:
    _BY_NAME["compiled"] = _kernels_cy


def _initial():
    requested = os.environ.get("CHAOSCALE_BACKEND", "auto")
    if requested == "auto":
        return _BY_NAME.get("compiled", _kernels_np)
    if requested not in _BY_NAME:
        raise ImportError(
            f"CHAOSCALE_BACKEND={requested!r} unavailable; "
            f"have {sorted(_BY_NAME)}"
        )
    return _BY_NAME[requested]


_active = _initial()


def active_name() -> str:
    return _active.NAME


def available() -> list[str]:
    return sorted(_BY_NAME)


def get(name: str):
    if name not in _BY_NAME:
        raise KeyError(f"backend {name!r} unavailable; have {sorted(_BY_NAME)}")
    return _BY_NAME[name]


@contextlib.contextmanager
def force(name: str):
    """Temporarily pin the active backend (used by `verify` and tests)."""
    global _active
    prev = _active
    _active = get(name)
    try:
        yield
    finally:
        _active = prev


def chain_ito(dw, fvals):
    return _active.chain_ito(dw, fvals)


def chain_strat(dw, fmid):
    return _active.chain_strat(dw, fmid)


def heun_system(*args, **kwargs):
    return _active.heun_system(*args, **kwargs)
