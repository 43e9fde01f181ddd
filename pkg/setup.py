"""Build script: compiles the optional edit-distance extension when Cython is present.

The package is fully functional without the extension; `concordia._kernels`
falls back to the pure-Python implementation at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "concordia._kernels._editdist",
                ["src/concordia/_kernels/_editdist.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
