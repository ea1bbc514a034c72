"""Build script.

The sampler hot loops have a Cython twin; if Cython or a C compiler is
unavailable the package installs anyway and falls back to the pure-Python
implementation at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "vertexlab.dynamics._samplers_cy",
                ["src/vertexlab/dynamics/_samplers_cy.pyx"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover
    print(f"Cython extension skipped ({exc}); pure-Python samplers will be used")

setup(ext_modules=ext_modules)
