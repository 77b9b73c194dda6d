from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("qiup.backend._ckernels", ["src/qiup/backend/_ckernels.pyx"])],
        language_level=3,
    )
except ImportError:
    # Pure-Python kernels are a full fallback; the extension is optional.
    ext_modules = []

setup(ext_modules=ext_modules)
