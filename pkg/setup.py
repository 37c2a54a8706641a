import os

import numpy as np
from setuptools import Extension, setup

# VIEWMIX_NO_EXT=1 skips the compiled core; the package then runs on the numpy fallback.
ext_modules = []
if not os.environ.get("VIEWMIX_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "viewmix._ckernels",
                ["src/viewmix/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                # no -ffast-math / -march=native: finite results must match the numpy
                # fallback bit for bit; these two flags only let clamps become minsd/maxsd
                extra_compile_args=["-O3", "-ffinite-math-only", "-fno-signed-zeros"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
