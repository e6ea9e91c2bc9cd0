import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the accelerator extension if possible; the package falls back
    to the pure-numpy kernels at import time when it is absent."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: skipping compiled kernels ({exc}); "
                  "semvox will use the pure-Python fallback", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not compile {ext.name} ({exc}); "
                  "semvox will use the pure-Python fallback", file=sys.stderr)


def extensions():
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "semvox._kernels._core",
        ["src/semvox/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
