"""Tools for the family of FFT algorithms realizable on the radix-2 flowgraph."""

from fftfam.flowgraph import Flowgraph, Node, Pair, build_flowgraph, check_properties

__all__ = [
    "Flowgraph",
    "Node",
    "Pair",
    "build_flowgraph",
    "check_properties",
]
