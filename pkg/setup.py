"""Build hook for the optional compiled kernels; metadata lives in pyproject.toml."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("VERT_NO_EXT", "") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "vert.dynsem._vm",
                    ["src/vert/dynsem/_vm.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
