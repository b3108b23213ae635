from setuptools import find_packages, setup

setup(
    name="poisson-filter",
    version="1.0.0",
    description="Poisson Kalman filtering for SIR/SIRH epidemic models",
    packages=find_packages("src"),
    package_dir={"": "src"},
    package_data={"poisson_filter.presets": ["*.yaml"]},
    install_requires=[
        "attrs",
        "numpy",
        "scipy",
        "PyYAML",
        "setuptools",
    ],
    extras_require={
        "dev": [
            "ruff",
            "isort",
            "bandit",
            "pre-commit",
            "mypy",
            "types-PyYAML",
        ],
        "test": [
            "pytest",
            "pytest-cov",
            "pytest-mock",
            "tox",
        ],
    },
    python_requires=">=3.10",
    entry_points={
        "console_scripts": [
            "poisson-filter = poisson_filter.app:main",
        ],
    },
)
