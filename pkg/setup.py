from setuptools import find_packages, setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = fh.read().splitlines()

setup(
    name="qfwalk",
    description="Numerical workbench for quasifree stochastic cocycles and their repeated-interaction approximations.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=requirements,
    setup_requires=["setuptools_scm"],
    use_scm_version={"write_to": "qfwalk/_version.py", "fallback_version": "0.1.0"},
    entry_points={"console_scripts": ["qfwalk=qfwalk.cli:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.8",
)
