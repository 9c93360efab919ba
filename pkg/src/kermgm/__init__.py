"""Kernelized multigraph matching with a projected power method."""
from .affinity import build_phi, build_vertex_affinity, explicit_edge_affinity
from .consistency import BulkPermutation, UniverseAssignment, expand, is_cycle_consistent, membership_Cr
from .graphs import AttributedGraph, GraphCollection, load_collection, save_collection
from .kernels import KernelSpec
from .metrics import score, strip_dummy_matches
from .projectors import ProjectorSpec, gpow, hungarian, match_eig, msync
from .solver import SolverConfig, SolveTrace, gradient, objective, solve
from .synth import SynthSpec, generate

__version__ = "0.1.0"
