import os

from setuptools import setup

ext_modules = []
if os.environ.get("WDRMIN_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            Extension(
                "wdrmin._kernels",
                ["src/wdrmin/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            ),
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # numpy fallback is used at import time
        ext_modules = []

setup(ext_modules=ext_modules)
