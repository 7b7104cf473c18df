"""Build script for the optional compiled simulation core.

The package works without the extension (a pure-numpy backend is selected at
import time); set STOCHDISC_NO_EXTENSION=1 to skip compilation on purpose.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("STOCHDISC_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "stochdisc._kernels._core",
                    ["src/stochdisc/_kernels/_core.pyx"],
                    # no -ffast-math: the backends promise IEEE-reproducible
                    # output for a fixed seed
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
