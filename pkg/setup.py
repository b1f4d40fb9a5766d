import os

import numpy as np
from setuptools import Extension, setup

# The compiled kernels are optional; the package falls back to pure Python
# when the extension is absent or fails to build.
try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

ext_kwargs = dict(
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3"],
    optional=True,
)

if cythonize is not None:
    ext_modules = cythonize(
        [Extension("domargin._kernels",
                   [os.path.join("src", "domargin", "_kernels.pyx")],
                   **ext_kwargs)],
        compiler_directives={"language_level": "3"},
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
