"""Import-time sampler backend selection.

Prefers the compiled Cython module; falls back to the pure-Python reference
if the extension is missing (not built, or no compiler at install time).
Setting the environment variable VERTEXLAB_PURE_PYTHON=1 forces the fallback,
which is how the equivalence and benchmark harnesses pin each side.
"""

import os

if os.environ.get("VERTEXLAB_PURE_PYTHON") == "1":
    from ._samplers_py import BACKEND_NAME, CutTable, PhiloxStream, philox4x64_block
else:
    try:
        from ._samplers_cy import (  # type: ignore[attr-defined]
            BACKEND_NAME,
            CutTable,
            PhiloxStream,
            philox4x64_block,
        )
    except ImportError:
        from ._samplers_py import (
            BACKEND_NAME,
            CutTable,
            PhiloxStream,
            philox4x64_block,
        )

__all__ = ["PhiloxStream", "CutTable", "philox4x64_block", "BACKEND_NAME"]
