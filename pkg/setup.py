"""Build hook for the optional compiled kernels.

The extension is a convenience, not a requirement: if Cython or a C compiler
is unavailable the install completes anyway and the package selects the pure
numpy backend at import time.
"""
import sys
from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: compiled kernels skipped ({exc}); "
                  "falling back to the pure backend", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "falling back to the pure backend", file=sys.stderr)


ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/prismvc/kernels/_core.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print("warning: Cython not available; compiled kernels will not be built",
          file=sys.stderr)

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
