"""Full counting statistics of a Kitaev chain between two normal reservoirs.

Modules
-------
model     chain and reservoir parameters, BdG matrix, occupations
keldysh   counting-field dressed self-energies and determinant ratios
fcs       CGF, cumulants and charge distribution
oracles   closed-form characteristic functions of short chains
xft       fluctuation-theorem checks
cli       command-line driver
"""
__version__ = "0.1.0"

from .errors import (BranchAmbiguity, CaseMismatch, FcsError, InsufficientSupport, ParityError,
                     SingularPropagator, StepTooSmall, TailNotConverged)
from .fcs import (CgfCurve, ChargeDistribution, FrequencyGrid, cf_at_frequency, cgf, cgf_curve,
                  charge_distribution, cumulants)
from .keldysh import CountingField, LeadBlock, assemble_kernel, det_ratio, lead_self_energy
from .model import ChainSpec, ReservoirSpec, build_bdg_matrix, occupation
from .oracles import AnalyticCase, analytic_cf, landauer_current, majorana_conductance
from .xft import (ComponentCharges, XftReport, decompose_components, gc_symmetry_residual,
                  joint_xft_residual, parity_and_periodicity, xft_slope)

__all__ = [
    "__version__",
    "ChainSpec", "ReservoirSpec", "build_bdg_matrix", "occupation",
    "CountingField", "LeadBlock", "assemble_kernel", "det_ratio", "lead_self_energy",
    "FrequencyGrid", "CgfCurve", "ChargeDistribution",
    "cf_at_frequency", "cgf", "cgf_curve", "cumulants", "charge_distribution",
    "AnalyticCase", "analytic_cf", "landauer_current", "majorana_conductance",
    "XftReport", "ComponentCharges", "gc_symmetry_residual", "xft_slope", "parity_and_periodicity",
    "joint_xft_residual", "decompose_components",
    "FcsError", "SingularPropagator", "TailNotConverged", "BranchAmbiguity", "StepTooSmall",
    "CaseMismatch", "InsufficientSupport", "ParityError",
]
