"""Build script for the optional compiled kernels.

The package works without the extension: heritagebot.kernels falls back to
the pure numpy/Python implementation when the compiled module is missing.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "heritagebot._kernels",
                ["src/heritagebot/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError as exc:
    sys.stderr.write(f"skipping compiled kernels ({exc}); pure-Python fallback will be used\n")

setup(ext_modules=ext_modules)
