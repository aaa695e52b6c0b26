from setuptools import setup, find_packages
from RoadmapTools import VERSION

setup(
    name="RoadmapTools",
    version=VERSION,
    packages=find_packages(),
    include_package_data=True,
    install_requires=[
        "numpy",
        "scipy",
        "tqdm",
    ],
    extras_require={
        "test": [
            "pytest",
            "hypothesis",
            "networkx",
        ],
    },
    entry_points={
        "console_scripts": [
            "roadmap-bench=RoadmapTools.bench:main",
        ],
    },
    license="GNU General Public License v3.0",
    description="densified lazy planning on low-dispersion roadmaps",
)
