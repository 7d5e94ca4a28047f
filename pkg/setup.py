import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "chaoscale._kernels_cy",
        ["src/chaoscale/_kernels_cy.pyx"],
        include_dirs=[np.get_include()],
        # no -ffast-math / fused contraction: the numpy fallback must be able
        # to reproduce the compiled results, and `verify` promises stable bytes
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
