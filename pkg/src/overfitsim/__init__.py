"""
# What is OVERFITSIM?
OVERFITSIM simulates how noisy learning dynamics choose between wide and narrow maxima of an objective. It covers
stochastic gradient Langevin dynamics on Gaussian-mixture landscapes, Fokker-Planck evolution toward the Gibbs state,
free-energy escape rates, two-player GAN dynamics, a predator-prey optimizer and branching particle populations, and
a polynomial regression benchmark that compares gradient descent with the predator-prey optimizer.

# Who are these docs for?
This documentation describes the API of the OVERFITSIM modules for developers who drive the simulators from python
scripts. For command line use, see `overfitsim -h` and the bundled experiment configs listed by
`overfitsim list-experiments`.

# API
The API should NOT be considered stable. Each simulator lives in its own module (`overfitsim.Sgld`,
`overfitsim.Eyring`, ...). `overfitsim.Experiments.run_experiment` runs a whole experiment from a config dict and
writes its artifacts.

# Examples

## Running a bundled experiment
`overfitsim run fig2` runs the temperature sweep of the wide-well fraction and writes
`wide_well_fraction.csv`, `summary.json` and `manifest.json` to a run directory under the output root.

## Scripting a single SGLD run
```python
from overfitsim.Landscape import GaussianMixtureLandscape
from overfitsim.SdeCore import RngStream
from overfitsim.Sgld import SgldConfig, sgld_run
from overfitsim.utils.AdvancedConfig import SGLD_LANDSCAPE

landscape = GaussianMixtureLandscape.from_config(SGLD_LANDSCAPE)
result = sgld_run(landscape, SgldConfig(temperature=0.4), RngStream(seed=1))
```
"""
