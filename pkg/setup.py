"""Build hook for the optional compiled kernels.

The package works without a compiler: if Cython or a C toolchain is
missing, the extension is skipped and the numpy fallback in
uncerseg.kernels is used at import time.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:
            print(f"warning: compiled kernels skipped ({exc}); "
                  f"pure-python backend will be used")

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  f"pure-python backend will be used")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available, skipping compiled kernels")
        return []
    ext = Extension(
        "uncerseg.kernels._speedups",
        sources=["src/uncerseg/kernels/_speedups.pyx"],
    )
    return cythonize(
        [ext],
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False},
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
