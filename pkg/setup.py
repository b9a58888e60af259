"""Build hook for the optional compiled projection kernel.

The package works without the extension (a numpy fallback is selected at
import time), so the extension is marked optional and any compile failure
downgrades to the pure-Python build.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "tvphase._cd",
                ["src/tvphase/_cd.pyx"],
                optional=True,
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
