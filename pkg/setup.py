from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("couniv._ckernels", ["src/couniv/_ckernels.pyx"], extra_compile_args=["-O3"])],
        language_level="3",
    )

setup(ext_modules=ext_modules)
