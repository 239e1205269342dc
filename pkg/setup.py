"""Build script: compiles the hot tick kernel when Cython is available.

The package works without the extension (a pure-Python kernel is selected
at import time), so the build degrades gracefully. Set SOCSYNTH_NO_EXT=1
to skip compilation, e.g. to test the fallback lane end to end.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("SOCSYNTH_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("socsynth._speedups", ["src/socsynth/_speedups.pyx"])],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
