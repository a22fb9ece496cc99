"""Builds the optional compiled resampling kernel.

The package works without it: chartrole.kernels falls back to the numpy
implementation when the extension is missing or CHARTROLE_PURE_PYTHON=1.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext = Extension(
        "chartrole.kernels._rotate_cy",
        ["src/chartrole/kernels/_rotate_cy.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # keep C arithmetic bit-compatible with the numpy fallback
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
