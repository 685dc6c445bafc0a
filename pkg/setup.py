from setuptools import setup, find_packages

setup(name='overfitsim',
      # major.minor.patch.dev versioning, see https://peps.python.org/pep-0440/
      #     -   Second digit is raised for changes to experiment configs or artifact formats that break existing
      #         scripts or stored configs.
      #     -   Third digit is for bugfix releases that keep configs and artifact formats unchanged.
      #     -   Fourth digit comes after "dev" and is an internal revision number for testing of new releases.
      version="0.1.0.dev1",
      description='Simulators for overfitting control by noisy and adversarial learning dynamics',
      long_description="OVERFITSIM runs seeded simulations of learning dynamics on multi-well objective landscapes: "
                       "SGLD well capture, Fokker-Planck and free-energy escape rates, GAN and predator-prey "
                       "dynamics, branching particle populations and a regression benchmark.",
      classifiers=[
          'Development Status :: 3 - Alpha',
          'Environment :: Console',
          'Intended Audience :: Science/Research',
          'Operating System :: POSIX :: Linux',
          'Programming Language :: Python :: 3',
          'Topic :: Scientific/Engineering :: Artificial Intelligence',
          'License :: OSI Approved :: GNU General Public License v3 (GPLv3)'
      ],
      packages=find_packages(where='src'),
      package_dir={'': 'src'},
      include_package_data=True,
      entry_points={
          "console_scripts": [
              "overfitsim = overfitsim.CLI:cli_main",
              "overfitsim-config = overfitsim.utils.AdvancedConfig:cli_config",
            ]
      },
      package_data={
          "overfitsim": ["data/*", "data/experiments/*"],
      },
      license='GPL v3',
      install_requires=[
          'numpy',
          'python-dotenv',
          'scipy',
          'setuptools',
      ],
      python_requires='>=3.10',
      zip_safe=False
      )
