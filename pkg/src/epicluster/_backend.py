"""Kernel selection: compiled ``_core`` when importable, else ``_pycore``.

Set ``EPICLUSTER_BACKEND=python`` to force the pure-Python kernel.
"""

import os

from . import _pycore

BACKEND = "python"
run = _pycore.run

if os.environ.get("EPICLUSTER_BACKEND", "").lower() != "python":
    try:
        from . import _core
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        run = _core.run

backends = {"python": _pycore.run}
if BACKEND == "cython":
    backends["cython"] = run
