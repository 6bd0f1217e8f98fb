"""Numerical toolkit for L1 convergence of double Fourier series."""

from .analysis import ExperimentRecord, NoConvergence, convergence_run, decomposition_norm_run, l1_distance, l1_norm
from .families import FamilySpec, Unavailable, build, closed_form, parse_family, reference_truncation
from .grid import CoefficientGrid, DiffOrder, GridParseError, SignedIndex, diff, get, load_grid, save_grid
from .kernels import DegenerateWindow, VPParams, e_kernel, e_norm_profile, lambda_index
from .summability import SampleGrid, cesaro_mean, partial_sum, single_partial_sum, vp_mean

__version__ = "0.1.0"
