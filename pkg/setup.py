from setuptools import setup, find_packages

setup(
    name="ising_crossing_lab",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    package_data={"src.data": ["config.json", "domains/*.json"]},
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.12.0",
        "pandas>=2.0.0",
        "plotly>=5.14.0",
        "openpyxl>=3.1.0",
        "tqdm>=4.65.0",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "ising_crossing_lab=src.main:main",
        ],
    },
    description="Critical Ising crossing estimates, interface explorers and the SLE(3, -3/2, -3/2) driving process",
    license="MIT",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
)
