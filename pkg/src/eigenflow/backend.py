"""Backend selection for the hot numeric kernels.

The integrator and eigensolver inner loops exist in two variants: a
numba-compiled loop version and a vectorized pure-numpy version.  The
default is numba when importable; set ``EIGENFLOW_BACKEND=numpy`` to force
the fallback (or ``EIGENFLOW_BACKEND=numba`` to fail loudly if numba is
missing).
"""

import os

_env = os.environ.get("EIGENFLOW_BACKEND", "").strip().lower()

if _env == "numpy":
    HAVE_NUMBA = False
else:
    try:
        import numba  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:
        if _env == "numba":
            raise
        HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """numba.njit when the numba backend is active, identity otherwise."""
    if HAVE_NUMBA:
        from numba import njit as _njit

        return _njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def wrap(fn):
        return fn

    return wrap


def set_num_threads(n):
    if HAVE_NUMBA:
        import numba

        numba.set_num_threads(max(1, int(n)))
