"""Build hook for the optional compiled search engine.

The package is pure Python plus one Cython extension (mvreg._search). When
Cython or a C compiler is unavailable the install still succeeds and the
search falls back to the pure-Python engine.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: building mvreg._search failed ({exc}); "
            "falling back to the pure-Python search engine",
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "warning: Cython not available; skipping the compiled search engine",
            file=sys.stderr,
        )
        return []
    return cythonize(
        [
            Extension(
                "mvreg._search",
                ["src/mvreg/_search.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
