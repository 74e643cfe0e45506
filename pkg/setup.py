import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "lqglab._kernels._fast",
                ["src/lqglab/_kernels/_fast.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
)
