"""Dominance analysis of Lure systems from rate-shifted Nyquist curves.

A loop is strictly p-dominant with rate ``lam`` when exactly ``p`` closed-loop
poles lie right of ``Re(s) = -lam``.  The tools here count those poles from
the Nyquist curve of ``W(s - lam)`` (gain, phase and disk margins, the
circle criterion), build Lyapunov-type certificates for linear loops and
simulate the nonlinear feedback to check what the margins predict.
"""

from ._backend import BACKEND
from .dominance import (DominanceCertificate, Inertia, certify_lti,
                        dominance_degree_lti, inertia, solve_lyapunov)
from .exceptions import (DomarginError, EigOnLine, InertiaMismatch,
                         NonIntegerWinding, PointOnCurve, RateOnPole)
from .lure import (AttractorVerdict, Equilibrium, LureSystem, Sector,
                   SimulationTrace, StaticNonlinearity, bistable_msd,
                   classify, equilibria, oscillator_msd, sector_bounds,
                   simulate, verify_sector)
from .margins import (CircleCriterionResult, Disk, DiskMarginReport,
                      GainInterval, GainMarginReport, PhaseMarginReport,
                      SweepResult, circle_criterion, disk_margin_check,
                      gain_margins, hinf_lambda_norm, margin_vs_rate_sweep,
                      msd_family, open_loop_degree, phase_margins)
from .nyquist import (Crossing, CrossingSet, NyquistCurve,
                      clockwise_encirclements, real_axis_crossings,
                      sample_curve, winding_number)
from .rational import (PoleReport, Polynomial, RationalTransferFunction,
                       StateSpace, pole_report, poly_roots, poly_shift,
                       ss_from_tf, tf, tf_feedback, tf_from_ss, tf_series,
                       tf_shift)

__version__ = '0.1.0'
