"""Build the optional compiled kernels.

Without a working Cython/toolchain the package still installs; the pure
Python kernels in ``htcluster._accel_py`` are used instead.
"""
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/htcluster/_accel.pyx",
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
