"""Monte Carlo experiments: trial fan-out, calibration, sweeps and result files."""
