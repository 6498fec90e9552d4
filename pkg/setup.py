"""Build script for the optional compiled orbit kernels.

The extension is a pure speed-up: if Cython or a C compiler is missing the
install falls back to the pure-Python kernels with identical numerics.
Compiled with -ffp-contract=off so the C arithmetic performs exactly the
same IEEE-754 operations as the Python fallback (no FMA contraction).
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Skip the extension (with a warning) instead of failing the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing entirely
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"WARNING: building the compiled kernels failed ({exc}); "
            "nads-lab will use the pure-Python fallback.",
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "nads_lab._kernels",
                ["src/nads_lab/_kernels.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": 3},
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
