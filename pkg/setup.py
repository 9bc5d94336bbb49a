# Builds the compiled ranking-likelihood kernel. The package works without it
# (a numpy fallback is selected at import), so a failed extension build only
# costs speed. To force a pure-python install: WELFARERANK_NO_EXT=1 pip install .
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("WELFARERANK_NO_EXT"):
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "welfarerank.ranklik._kernel",
                ["src/welfarerank/ranklik/_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
