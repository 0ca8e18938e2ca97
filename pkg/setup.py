import numpy as np
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from Cython.Compiler.Errors import CompileError

    ext_modules = cythonize(
        [
            Extension(
                "collabradar._kernels",
                ["src/collabradar/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except (ImportError, CompileError):
    # pure-Python install; collabradar.kernels falls back to numpy
    ext_modules = []

setup(ext_modules=ext_modules)
