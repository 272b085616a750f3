"""Optional compiled kernel; the package works without it."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("THREADMOD_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("threadmod._kernels", ["src/threadmod/_kernels.pyx"], optional=True)],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
