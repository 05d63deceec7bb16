import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "atpgkit._kernels._fastsim",
                ["src/atpgkit/_kernels/_fastsim.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-Python fallback kernel is selected at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
