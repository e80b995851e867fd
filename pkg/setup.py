from setuptools import setup, find_packages

# NOTE:
# matplotlib is only used by the development tool bin/plot_profiles.py. On a
# headless machine it runs with the Agg backend and needs no os-level packages.
#

setup(
    name='commwatch',
    version='0.1.0',
    description='Sequential detection of emerging communities in random graph streams',
    packages=find_packages(exclude=('test',)),
    package_data={'commwatch': ['.settings.json']},
    python_requires='>=3.8',
    install_requires=['numpy', 'scipy', 'matplotlib'],
    extras_require={'test': ['pytest']},
    tests_require=['pytest'],
    scripts=[
        'bin/commwatch',
    ],
)
