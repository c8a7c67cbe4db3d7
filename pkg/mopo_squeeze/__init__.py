# Mirrorless OPO below-threshold squeezing and EPR-correlation spectra.
