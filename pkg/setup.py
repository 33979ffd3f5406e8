"""Optional compiled kernels; the package works without them."""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler or no Cython
            warnings.warn(f"compiled kernels not built ({exc}); using the numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled kernels not built ({exc}); using the numpy fallback")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "killing_transport._kernels._ckernels",
        ["src/killing_transport/_kernels/_ckernels.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], quiet=True)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
