"""Protocols built on BELT block encodings: entanglement detection, channel inversion and pseudo-differential operators."""
