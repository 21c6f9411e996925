"""Build script: compiles the hot-loop extension, falling back to pure python.

The package is fully functional without the extension (the numpy fallback in
``recurrence_lab._kernels_np`` is selected at import time), so a failed
compile only costs speed.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            warnings.warn(f"building the compiled kernels failed ({exc}); "
                          "falling back to the pure-python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"building {ext.name} failed ({exc}); "
                          "falling back to the pure-python backend")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython not available; skipping compiled kernels")
        return []
    from setuptools import Extension

    return cythonize(
        [
            Extension(
                "recurrence_lab._kernels",
                ["src/recurrence_lab/_kernels.pyx"],
                # -march=native lets floor() inline to roundsd; it stays
                # IEEE-exact, so backend bit-parity is unaffected
                extra_compile_args=["-O3", "-march=native"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
