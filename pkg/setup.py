import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; ranpoly falls back to numpy kernels
    cythonize = None

EXT_MODULES = []
if cythonize is not None and not os.environ.get("RANPOLY_NO_EXT"):
    EXT_MODULES = cythonize(
        [
            Extension(
                "ranpoly._ckernels",
                [os.path.join("src", "ranpoly", "_ckernels.pyx")],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3, "embedsignature": True},
    )

setup(ext_modules=EXT_MODULES)
