"""Build hook for the optional compiled simulator kernels."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MITBENCH_NO_EXT", "") not in ("1", "true", "yes"):
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:  # build the pure-Python package only
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "mitbench._kernels",
                    ["src/mitbench/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
