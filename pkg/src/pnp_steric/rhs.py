"""Assembly of the reduced Poisson right-hand sides.

After eliminating the concentrations through the branch inverses, the
steady-state potential satisfies eps * phi'' = f(phi) where f collects
the net charge density as a function of phi alone.  Two charge
configurations are supported:

* three species: one steric pair plus a third, steric-free counter-ion
  of valence z3 with concentration exp(-z3*phi), balanced against a
  constant background density rho0;
* four species: two independent steric pairs balanced against a
  constant background of either sign.

Each configuration yields one right-hand side per outer branch label
("A" or "B"); the two generally admit distinct bulk roots and hence
distinct steady states.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import branch
from .branch import TwoSpeciesParams
from .errors import (
    DomainError,
    EmptyDomainError,
    NoIntersectionError,
    SubcriticalError,
)

__all__ = [
    "ThreeSpeciesConfig",
    "FourSpeciesConfig",
    "RhsFunction",
    "assemble_three_species",
    "assemble_four_species",
    "third_species_concentration",
]

# The branch potentials grow without bound; cap the usable sigma range of
# each unbounded segment at sigma_c + SPAN_SCALE/(g+z) so the decay factor
# exp(-(g+z)*sigma) stays representable with lots of headroom.
_SPAN_SCALE = 50.0

_ROOT_RTOL = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class ThreeSpeciesConfig:
    """One steric pair plus a steric-free third species.

    z3 is the third-species valence (positive); rho0 the constant
    background density.  A positive rho0 is required for the assembled
    right-hand sides to cross zero; nonpositive values are accepted here
    so the missing-root diagnostics can be exercised.
    """

    pair: TwoSpeciesParams
    z3: float
    rho0: float

    def __post_init__(self):
        if not (math.isfinite(self.z3) and self.z3 > 0):
            raise DomainError("z3 must be a positive finite number")
        if not math.isfinite(self.rho0):
            raise DomainError("rho0 must be finite")


@dataclass(frozen=True)
class FourSpeciesConfig:
    """Two independent steric pairs over a constant background rho0 != 0."""

    pair12: TwoSpeciesParams
    pair34: TwoSpeciesParams
    rho0: float

    def __post_init__(self):
        if not (math.isfinite(self.rho0) and self.rho0 != 0):
            raise DomainError("rho0 must be finite and nonzero")


@dataclass
class RhsFunction:
    """A reduced right-hand side f(phi) on an interval.

    Fields
    ------
    label : outer branch label, "A" or "B"
    domain : (lo, hi) interval of admissible potentials
    root : bulk root of f inside the domain (None only for probe
        functions constructed by hand)
    evaluator / derivative : vectorised callables for f and f'
    """

    label: str
    domain: tuple
    root: float | None
    evaluator: Callable = field(repr=False)
    derivative: Callable = field(repr=False)

    def __call__(self, phi):
        lo, hi = self.domain
        phi = np.asarray(phi, dtype=float)
        slack = 1e-12 * max(1.0, abs(lo) if math.isfinite(lo) else 0.0,
                            abs(hi) if math.isfinite(hi) else 0.0)
        if np.any(phi < lo - slack) or np.any(phi > hi + slack):
            raise DomainError(
                "potential outside the right-hand side domain [%g, %g]" % (lo, hi)
            )
        return self.evaluator(np.clip(phi, lo, hi))


def third_species_concentration(phi, z3):
    """Boltzmann concentration exp(-z3*phi) of the steric-free species."""
    return np.exp(-z3 * np.asarray(phi, dtype=float))


def _segment_window(pair, segment):
    """Usable phi window of an unbounded outer segment, after truncation.

    "A1" runs from -phi_crit up to the potential at sigma_c + span;
    "B1" from the mirrored lower cap up to +phi_crit.
    """
    pac = branch.phi_crit(pair)
    span = _SPAN_SCALE / (pair.g + pair.z)
    cap = branch.phi_on_branch(branch.sigma_c(pair) + span, pair, segment[0])
    if segment == "A1":
        return -pac, cap
    return cap, pac


def _locate_root(fn, lo, hi):
    """Bracketed root of a scalar function on [lo, hi], or None."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        return None
    return brentq(fn, lo, hi, xtol=1e-12, rtol=_ROOT_RTOL)


def assemble_three_species(config, label):
    """Right-hand side f(phi) for the pair + third species configuration.

    f_A(phi) = q*(c1 - c2)(sigma_A1(phi)) - z3*exp(-z3*phi) + rho0 on the
    A window; f_B uses the B1 inverse on the mirrored window.  The pair
    must be supercritical (z > g_crit(g)); a missing sign change raises
    NoIntersectionError.
    """
    if label not in ("A", "B"):
        raise DomainError("label must be 'A' or 'B', got %r" % (label,))
    pair, z3, rho0 = config.pair, config.z3, config.rho0
    if pair.z <= branch.g_crit(pair.g):
        raise SubcriticalError(
            "three-species assembly requires a supercritical pair "
            "(z > g_crit(g) = %.6g)" % branch.g_crit(pair.g)
        )
    segment = label + "1"
    lo, hi = _segment_window(pair, segment)

    def evaluator(phi):
        diff = branch.c_diff_on_segment(phi, pair, segment)
        return pair.q * diff - z3 * np.exp(-z3 * phi) + rho0

    def derivative(phi):
        ddiff = branch.c_diff_segment_derivative(phi, pair, segment)
        return pair.q * ddiff + z3 * z3 * np.exp(-z3 * phi)

    root = _locate_root(lambda p: float(evaluator(p)), lo, hi)
    if root is None:
        raise NoIntersectionError(
            "f_%s has no sign change on [%g, %g]; "
            "a positive background rho0 is required" % (label, lo, hi)
        )
    return RhsFunction(label, (lo, hi), root, evaluator, derivative)


def assemble_four_species(config, label):
    """Right-hand side f(phi) for two steric pairs over a background.

    The first pair contributes through its "A1"/"B1" segment as labelled;
    the second pair enters with the opposite orientation (its own "B1"
    segment on label "A" and "A1" on label "B"), so both charge terms are
    increasing in phi.  The domain is the overlap of the two segment
    windows; an empty overlap raises EmptyDomainError.
    """
    if label not in ("A", "B"):
        raise DomainError("label must be 'A' or 'B', got %r" % (label,))
    p12, p34, rho0 = config.pair12, config.pair34, config.rho0
    for name, pair in (("pair12", p12), ("pair34", p34)):
        if pair.z <= branch.g_crit(pair.g):
            raise SubcriticalError(
                "four-species assembly requires supercritical pairs; "
                "%s has z <= g_crit(g)" % name
            )
    seg12 = label + "1"
    seg34 = ("B1" if label == "A" else "A1")
    lo12, hi12 = _segment_window(p12, seg12)
    lo34, hi34 = _segment_window(p34, seg34)
    lo, hi = max(lo12, lo34), min(hi12, hi34)
    if lo >= hi:
        raise EmptyDomainError(
            "segment windows [%g, %g] and [%g, %g] do not overlap"
            % (lo12, hi12, lo34, hi34)
        )

    def evaluator(phi):
        d12 = branch.c_diff_on_segment(phi, p12, seg12)
        d34 = branch.c_diff_on_segment(phi, p34, seg34)
        return p12.q * d12 + p34.q * d34 - rho0

    def derivative(phi):
        d12 = branch.c_diff_segment_derivative(phi, p12, seg12)
        d34 = branch.c_diff_segment_derivative(phi, p34, seg34)
        return p12.q * d12 + p34.q * d34

    root = _locate_root(lambda p: float(evaluator(p)), lo, hi)
    if root is None:
        raise NoIntersectionError(
            "f_%s has no sign change on the window overlap [%g, %g]"
            % (label, lo, hi)
        )
    return RhsFunction(label, (lo, hi), root, evaluator, derivative)
