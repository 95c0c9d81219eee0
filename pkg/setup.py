from setuptools import setup, find_packages

setup(
    name='meshkit',
    version='0.1',
    packages=find_packages(where='src'),
    package_dir={'': 'src'},
    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'sortedcontainers',
        'configobj',
        'tqdm',
        'pytest',
    ],
    entry_points={
        'console_scripts': [
            'meshkit = meshkit.cli:main',
        ],
    },
    author='Gilles Dejaegere',
    author_email='gilles.dejaegere@ulb.be',
    description='Hierarchical feature learning on triangle meshes: spherical-harmonic mesh convolutions, parallel quadric decimation and cluster (un)pooling.',
    classifiers=[
        'Programming Language :: Python :: 3',
        'Operating System :: OS Independent',
    ],
    python_requires='>=3.9',
)
