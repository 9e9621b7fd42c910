"""Excess electric current carried by the steric interactions.

At steady state the total current through any cross-section splits into
an ideal (Nernst-Planck) part and an excess part proportional to the
steric couplings.  The excess part admits two independent evaluations:

* the x route: a pointwise current density I(x) along the solved
  potential profile, integrated over a window with grid quadrature;
* the sigma route: a change of variables onto the total concentration
  of each pair, integrated with adaptive quadrature between the window
  endpoint images.

Both routes are implemented from scratch and agreement between them is
the package's primary correctness check for this module.  A third,
configuration-agnostic formula evaluates the excess current directly
from concentration profiles and the steric coupling matrix.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from . import branch
from .errors import (
    BoundsError,
    BranchMismatchError,
    ConsistencyError,
    DomainError,
    EndpointSingularityWarning,
)
from .quadrature import adaptive_simpson

__all__ = [
    "DiffusionSet",
    "CurrentProfile",
    "pointwise_current_three",
    "pointwise_current_four",
    "integral_current_x",
    "integral_current_sigma_three",
    "integral_current_sigma_four",
    "generic_current",
    "grid_derivative",
]


@dataclass(frozen=True)
class DiffusionSet:
    """Diffusion coefficients per species and the elementary charge scale."""

    coefficients: tuple
    charge_scale: float = 1.0

    def __post_init__(self):
        coeffs = tuple(float(d) for d in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        for d in coeffs:
            if not (math.isfinite(d) and d > 0):
                raise DomainError("diffusion coefficients must be positive")
        if not (math.isfinite(self.charge_scale) and self.charge_scale > 0):
            raise DomainError("charge_scale must be positive")


@dataclass
class CurrentProfile:
    """Pointwise excess current density sampled on the solver grid."""

    nodes: np.ndarray
    values: np.ndarray


def grid_derivative(x, y):
    """Second-order derivative on a uniform grid (one-sided at the ends)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h = x[1] - x[0]
    d = np.empty_like(y)
    d[1:-1] = (y[2:] - y[:-2]) / (2.0 * h)
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
    d[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * h)
    return d


def _nodes_values(solution):
    if isinstance(solution, tuple):
        x, v = solution
        return np.asarray(x, dtype=float), np.asarray(v, dtype=float)
    return np.asarray(solution.nodes, float), np.asarray(solution.values, float)


def _pair_current_factor(sigma, pair, d_small_label, branch_label):
    """Per-pair mobility factor i(sigma) multiplying q * e * dphi/dx.

    branch_label "A" has concentration difference +s, "B" has -s; the
    rest of the expression is shared:

        i = [sgn*(D2-D1)/2*s - (D1+D2)/2*(sigma + 2*(g+z)*E)] / f_tilde
            + q*[(D1+D2)/2*sigma - sgn*(D2-D1)/2*s]
    """
    d1, d2 = d_small_label
    g, z, q = pair.g, pair.z, pair.q
    sigma = np.asarray(sigma, dtype=float)
    E = np.exp(-(g + z) * sigma)
    s = np.sqrt(np.maximum(sigma * sigma - 4.0 * E, 0.0))
    tilde = 1.0 + g * sigma + (g * g - z * z) * E
    sgn = 1.0 if branch_label == "A" else -1.0
    half_diff = 0.5 * (d2 - d1) * sgn * s
    half_sum = 0.5 * (d1 + d2)
    return (half_diff - half_sum * (sigma + 2.0 * (g + z) * E)) / tilde + q * (
        half_sum * sigma - half_diff
    )


def _segment_sigmas(phi, pair, branch_label):
    """Map potentials through the outer segment of the requested branch."""
    segment = branch_label + "1"
    pac = branch.phi_crit(pair)
    slack = 1e-12 * max(1.0, pac)
    phi = np.asarray(phi, dtype=float)
    if branch_label == "A":
        if np.any(phi < -pac - slack):
            raise BranchMismatchError(
                "profile leaves the A-branch segment (phi < -phi_crit)"
            )
    else:
        if np.any(phi > pac + slack):
            raise BranchMismatchError(
                "profile leaves the B-branch segment (phi > +phi_crit)"
            )
    return branch.inverse_sigma(phi, pair, segment)


def pointwise_current_three(solution, config, diffusion, label):
    """Excess current density I(x) for the pair + third species setup.

    The steric-free third species carries no excess current, so only the
    pair contributes: I = q * e * i(sigma(phi)) * dphi/dx.
    """
    x, phi = _nodes_values(solution)
    pair = config.pair
    d1, d2 = diffusion.coefficients[0], diffusion.coefficients[1]
    sig = _segment_sigmas(phi, pair, label)
    factor = _pair_current_factor(sig, pair, (d1, d2), label)
    dphi = grid_derivative(x, phi)
    values = pair.q * diffusion.charge_scale * factor * dphi
    return CurrentProfile(x, values)


def pointwise_current_four(solution, config, diffusion, label):
    """Excess current density I(x) with two steric pairs.

    The second pair rides the opposite outer segment, mirroring the
    right-hand side assembly: its mobility factor takes the "B" form on
    label "A" and vice versa.
    """
    x, phi = _nodes_values(solution)
    d = diffusion.coefficients
    if len(d) < 4:
        raise DomainError("four diffusion coefficients required")
    other = "B" if label == "A" else "A"
    sig12 = _segment_sigmas(phi, config.pair12, label)
    sig34 = _segment_sigmas(phi, config.pair34, other)
    f12 = _pair_current_factor(sig12, config.pair12, (d[0], d[1]), label)
    f34 = _pair_current_factor(sig34, config.pair34, (d[2], d[3]), other)
    dphi = grid_derivative(x, phi)
    e = diffusion.charge_scale
    values = (config.pair12.q * f12 + config.pair34.q * f34) * e * dphi
    return CurrentProfile(x, values)


def _check_window(x1, x2):
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise BoundsError("window bounds must be finite")
    if x1 > x2:
        raise BoundsError("window bounds out of order: %g > %g" % (x1, x2))
    if x1 < -1.0 or x2 > 1.0:
        raise BoundsError("window must lie inside [-1, 1]")


def integral_current_x(profile, x1, x2):
    """Integrate a pointwise current profile over [x1, x2] on its grid.

    Composite Simpson quadrature over the grid nodes inside the window,
    with linearly interpolated values at the window endpoints.
    """
    _check_window(x1, x2)
    if x1 == x2:
        return 0.0
    x, v = profile.nodes, profile.values
    inside = (x > x1) & (x < x2)
    xs = np.concatenate(([x1], x[inside], [x2]))
    vs = np.concatenate(
        ([np.interp(x1, x, v)], v[inside], [np.interp(x2, x, v)])
    )
    return float(simpson(vs, x=xs))


def _sigma_integrand(pair, d_pair, branch_label):
    """Integrand of the sigma route for one pair on one branch.

    The A form subtracts the 1/s block, the B form adds it; both are
    smooth away from sigma_z and integrable through the turning point.
    """
    d1, d2 = d_pair
    g, z, q = pair.g, pair.z, pair.q
    sgn = -1.0 if branch_label == "A" else 1.0

    def integrand(sigma):
        E = math.exp(-(g + z) * sigma)
        s = math.sqrt(max(sigma * sigma - 4.0 * E, 0.0))
        first = 0.5 * (d2 - d1) * ((1.0 - q) - q * (g * sigma + (g * g - z * z) * E))
        second = (
            0.5
            * (d1 + d2)
            / s
            * (
                (1.0 - q) * sigma
                - q * g * sigma * sigma
                + (g + z) * (2.0 - q * (g - z) * sigma) * E
            )
        )
        return first + sgn * second

    return integrand


def _window_potentials(solution, x1, x2):
    x, phi = _nodes_values(solution)
    return float(np.interp(x1, x, phi)), float(np.interp(x2, x, phi))


def _warn_if_on_turning_point(sigma, pair):
    if abs(sigma - branch.sigma_c(pair)) < 1e-10:
        warnings.warn(
            "quadrature endpoint sits on the turning point sigma_c; "
            "the integrand is singular there",
            EndpointSingularityWarning,
        )


def integral_current_sigma_three(solution, config, diffusion, label, x1, x2):
    """Window-integrated excess current via the sigma change of variables."""
    _check_window(x1, x2)
    if x1 == x2:
        return 0.0
    pair = config.pair
    p1, p2 = _window_potentials(solution, x1, x2)
    s1 = float(_segment_sigmas(p1, pair, label))
    s2 = float(_segment_sigmas(p2, pair, label))
    for s in (s1, s2):
        _warn_if_on_turning_point(s, pair)
    d = diffusion.coefficients
    integrand = _sigma_integrand(pair, (d[0], d[1]), label)
    return diffusion.charge_scale * adaptive_simpson(integrand, s1, s2)


def integral_current_sigma_four(solution, config, diffusion, label, x1, x2):
    """Sigma-route window integral with two pairs, one term per pair.

    Each pair is integrated between its own sigma images of the window
    endpoints, with the second pair on the mirrored branch form.
    """
    _check_window(x1, x2)
    if x1 == x2:
        return 0.0
    d = diffusion.coefficients
    if len(d) < 4:
        raise DomainError("four diffusion coefficients required")
    p1, p2 = _window_potentials(solution, x1, x2)
    other = "B" if label == "A" else "A"
    total = 0.0
    for pair, d_pair, lab in (
        (config.pair12, (d[0], d[1]), label),
        (config.pair34, (d[2], d[3]), other),
    ):
        s1 = float(_segment_sigmas(p1, pair, lab))
        s2 = float(_segment_sigmas(p2, pair, lab))
        for s in (s1, s2):
            _warn_if_on_turning_point(s, pair)
        integrand = _sigma_integrand(pair, d_pair, lab)
        total += diffusion.charge_scale * adaptive_simpson(integrand, s1, s2)
    return total


def generic_current(solution, concentrations, valences, diffusion, coupling):
    """Excess current from raw concentration profiles and couplings.

    Evaluates I(x) = sum_i z_i * e * D_i * (dc_i/dx + z_i * c_i * dphi/dx)
    with grid derivatives, for any number of species.  Before doing so,
    the profiles are checked against the defining algebraic relations

        ln(c_i) + z_i * phi + sum_j G_ij * c_j = 0

    to 1e-8 along the grid; violations raise ConsistencyError.  Species
    with a zero coupling row and Boltzmann statistics contribute nothing.
    """
    x, phi = _nodes_values(solution)
    conc = [np.asarray(c, dtype=float) for c in concentrations]
    valences = [float(z) for z in valences]
    coupling = np.asarray(coupling, dtype=float)
    nspec = len(conc)
    if coupling.shape != (nspec, nspec):
        raise DomainError("coupling matrix must be %d x %d" % (nspec, nspec))
    if len(valences) != nspec or len(diffusion.coefficients) < nspec:
        raise DomainError("species count mismatch")

    for i in range(nspec):
        resid = np.log(conc[i]) + valences[i] * phi
        for j in range(nspec):
            resid += coupling[i, j] * conc[j]
        worst = float(np.max(np.abs(resid)))
        if worst > 1e-8:
            raise ConsistencyError(
                "species %d violates the algebraic relations by %.3e"
                % (i + 1, worst)
            )

    dphi = grid_derivative(x, phi)
    e = diffusion.charge_scale
    total = np.zeros_like(phi)
    for i in range(nspec):
        di = diffusion.coefficients[i]
        dci = grid_derivative(x, conc[i])
        total += valences[i] * e * di * (dci + valences[i] * conc[i] * dphi)
    return CurrentProfile(x, total)
