# WarpBoost test suite
