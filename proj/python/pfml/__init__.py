"""Exact workbench for probabilistic fuzzy modal logic.

Thin wrapper around the compiled extension; all heavy lifting happens in C++
with exact rational arithmetic. Values cross the boundary as "p/q" strings.
"""

try:
    from ._pfml import *  # noqa: F401,F403  (installed package layout)
    from ._pfml import __doc__ as _ext_doc  # noqa: F401
except ImportError:  # build-tree layout: extension on PYTHONPATH as _pfml
    from _pfml import *  # noqa: F401,F403
