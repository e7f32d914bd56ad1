from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/bidforecast/_core.pyx"],
        language_level="3",
    )
except ImportError:
    # Pure-Python fallback kernels are selected at import time.
    ext_modules = None

setup(ext_modules=ext_modules)
