import os
import sys

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the numpy tracer is used instead
    cythonize = None

# keep float evaluation order identical to the numpy backend
compile_args = ["-O2", "-ffp-contract=off", "-fno-fast-math"]
link_args = []
if sys.platform != "darwin" and os.environ.get("VISREPAIR_NO_OPENMP") != "1":
    compile_args.append("-fopenmp")
    link_args.append("-fopenmp")

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "visrepair._tracer",
                ["src/visrepair/_tracer.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=compile_args,
                extra_link_args=link_args,
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
