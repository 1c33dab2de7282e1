"""Build the optional compiled tableau kernels.

The package works without them (pure-Python fallback), so a missing Cython
or compiler only produces a warning.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SEMISTATIC_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("semistatic.exact_lp._kernels",
                       ["src/semistatic/exact_lp/_kernels.pyx"],
                       extra_compile_args=["-O2"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        print("warning: Cython not available, building without compiled kernels")

setup(ext_modules=ext_modules)
