"""Build hook: compiles the assembly core if Cython and a C compiler are present.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here is deliberately non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/nlshape/assembly/_core.pyx",
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": 3,
        },
    )
    include_dirs = [numpy.get_include()]
    for ext in ext_modules:
        ext.include_dirs = include_dirs
        ext.define_macros = [("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")]
except Exception as exc:  # pragma: no cover
    import sys

    print("nlshape: building without the compiled core (%s)" % exc, file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
