from setuptools import setup

setup(
    name='mdsq',
    version='0.1.0',
    description='Capacity, regime, routing and simulation tools for '
    'multi-access servers with systematic MDS coded servers.',
    package_dir={'mdsq': 'python'},
    packages=['mdsq', 'mdsq.capacity', 'mdsq.routing', 'mdsq.sim'],
    python_requires='>=3.7',
    install_requires=['numpy', 'scipy', 'pyaml', 'tqdm'],
    extras_require={'test': ['pytest', 'pytest-cov']},
    entry_points={'console_scripts': ['mdsq=mdsq.cli:main']},
)
