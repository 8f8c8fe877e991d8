"""Build the optional compiled kernels.

If Cython or a C compiler is unavailable the package still installs and
falls back to the pure-Python kernels at import time.
"""
import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("GL2LFUN_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "gl2lfun._kernels",
                    ["src/gl2lfun/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no -ffast-math: compensated sums must not be reassociated
                    extra_compile_args=["-O2", "-fno-fast-math", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        )

setup(ext_modules=ext_modules)
