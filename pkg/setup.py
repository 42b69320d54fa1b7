"""Build script: compiles the optional subset-DP extension.

The package is fully functional without the extension (a pure-Python
kernel is selected at import time), so a failed compile only costs speed.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or toolchain missing
            print(f"warning: extension build skipped ({exc}); "
                  "bincover will use the pure-Python kernel")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "bincover will use the pure-Python kernel")


ext_modules = []
if not os.environ.get("BINCOVER_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("bincover._optkernel", ["src/bincover/_optkernel.pyx"])],
            language_level="3",
        )
    except ImportError:
        print("warning: Cython not available; bincover will use the "
              "pure-Python kernel")

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
