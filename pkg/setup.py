"""Build script for the optional compiled ODE kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time); the Cython kernel removes the per-step Python
overhead of the adaptive integrator, which dominates the optimal-sweep-time
searches.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "vacuumprobe.kernels._fast_ode",
                ["src/vacuumprobe/kernels/_fast_ode.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
