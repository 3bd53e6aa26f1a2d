import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SNAPFIX_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        # pure-Python kernels are selected at import time
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "snapfix._kernels",
                    ["src/snapfix/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
