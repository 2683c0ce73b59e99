from setuptools import setup, find_packages

setup(
    name="dtlbench",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    include_package_data=True,
)
