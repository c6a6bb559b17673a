import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ZONED_COMPILER_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "zoned_compiler.kernels._core",
                    ["src/zoned_compiler/kernels/_core.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no fast-math: results must match the pure-Python kernels bit for bit
                    extra_compile_args=["-O2", "-fno-fast-math", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
