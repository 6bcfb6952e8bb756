"""Link-level simulation toolkit for hybrid multiport fluid-antenna receivers.

Library layout:

- :mod:`fahm.linalg` -- Hermitian kernels (tracked inverse, downdate, J0).
- :mod:`fahm.channel` -- port grids, correlated Rayleigh and geometric channels.
- :mod:`fahm.receivers` -- slow-FAMA, digital combining, CUMA and the
  hybrid generalized-eigenvector port-selection receivers.
- :mod:`fahm.metrics` -- post-combining SINR, spectral efficiency, outage.
- :mod:`fahm.simulate` -- deterministic Monte Carlo harness, sweeps,
  elbow diagnostics and runtime benchmarks.
- :mod:`fahm.config` / :mod:`fahm.cli` -- scenario files and the
  ``fahm run|sweep|elbow|bench`` command-line front end.

All port, user and position indices in this package are 0-based.
"""

__version__ = "0.1.0"
