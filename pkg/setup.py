"""Build script: compiles the optional fused-kernel extension.

The package is fully functional without it (a pure-numpy fallback is
selected at import time); set HALLMHD_SKIP_EXT=1 to skip compilation.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("HALLMHD_SKIP_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "hallmhd._kernels_ext",
                    ["src/hallmhd/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    # -ffp-contract=off keeps the compiled lane bitwise
                    # identical to the numpy fallback (no FMA contraction).
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
