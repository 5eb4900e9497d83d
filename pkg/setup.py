"""Build hook: compile the optional speedup extension when Cython is present.

The package is fully functional without the extension; _backend falls back to
the pure-Python kernels, so any build failure here is deliberately non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/trkp/_kernels.pyx"],
        language_level=3,
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
