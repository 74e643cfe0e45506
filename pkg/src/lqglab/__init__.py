"""Lattice Liouville quantum gravity toolbox."""
