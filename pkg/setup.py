"""Build script for the optional compiled simulation kernels.

The extension links against numpy's static distribution library so the
compiled event loops draw from the exact same random stream as the pure
Python fallback.  If Cython or a C toolchain is unavailable the build
degrades gracefully and the package runs on the fallback kernels.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the accelerator if possible; never fail the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing
            print(f"skipping compiled kernels: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping compiled kernels ({ext.name}): {exc}")


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"skipping compiled kernels: {exc}")
        return []

    random_lib_dir = os.path.join(os.path.dirname(numpy.random.__file__), "lib")
    ext = Extension(
        "newswarn._kernels",
        sources=["src/newswarn/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[random_lib_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off keeps float expressions bit-identical to the
        # pure Python kernels (no fused multiply-add contraction).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=make_extensions(), cmdclass={"build_ext": OptionalBuildExt})
