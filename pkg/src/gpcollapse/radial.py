"""Radial Townes-profile machinery.

Solves the 2D cubic ground-state equation

    Q'' + Q'/r - Q + Q^3 = 0,   Q'(0) = 0,   Q(r) -> 0 as r -> inf,

by shooting on Q(0) with bisection, and derives from the converged profile
the critical interaction strength (equal mass / kinetic / half-quartic
integrals) and weighted moments of the unit-mass profile Q0 = Q/||Q||_2.

The far field decays like r^(-1/2) e^(-r); past the matching radius the
profile is continued with the decaying Bessel mode A*K0(r), blended smoothly
into the outward integration so the ODE residual stays uniformly small.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly
from scipy.special import k0, k1


class BracketError(ValueError):
    """Both bracket endpoints fall on the same side of the critical Q(0)."""


class ConvergenceError(RuntimeError):
    """Iteration failed to reach the requested tolerance."""


class IdentityError(RuntimeError):
    """Integral identities of the converged profile are violated."""


_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)

# Outward integration is matched to the K0 tail around this radius, where
# Q/Q(0) ~ 2e-4: late enough that the cubic term is negligible in the tail,
# early enough that the unstable shooting mode has not contaminated the shot.
_R_MATCH = 8.0
_BLEND_HALFWIDTH = 1.0


def _rhs(r, y):
    q, qp = y
    return (qp, q - q * q * q - qp / r)


def _series_coefficients(q0):
    """Even-power Taylor coefficients of Q at r=0: Q = q0 + c2 r^2 + c4 r^4."""
    c2 = 0.25 * (q0 - q0**3)
    c4 = c2 * (1.0 - 3.0 * q0**2) / 16.0
    return c2, c4


def _series_start(q0, r0):
    c2, c4 = _series_coefficients(q0)
    q = q0 + c2 * r0**2 + c4 * r0**4
    qp = 2.0 * c2 * r0 + 4.0 * c4 * r0**3
    return q, qp


def _event_cross(r, y):
    return y[0]


_event_cross.terminal = True
_event_cross.direction = -1.0


def _event_turn(r, y):
    return y[1]


_event_turn.terminal = True
_event_turn.direction = 1.0


def _shoot(q0, rmax, rtol=1e-10, atol=1e-14):
    """Classify a shooting value as 'under' (Q crosses zero) or 'over'.

    Undershoot: Q crosses zero before rmax.  Overshoot: Q' turns positive
    at positive Q (the solution rebounds and diverges).  If neither event
    fires by rmax, the sign of the growing-mode coefficient decides; for
    Q = A K0 + B I0 the Wronskian identity gives B = r (Q K1 + Q' K0).
    """
    r0 = 1e-4
    sol = solve_ivp(
        _rhs,
        (r0, rmax),
        _series_start(q0, r0),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        events=(_event_cross, _event_turn),
    )
    if sol.t_events[0].size:
        return "under"
    if sol.t_events[1].size:
        return "over"
    r = sol.t[-1]
    q, qp = sol.y[:, -1]
    growing = r * (q * k1(r) + qp * k0(r))
    return "over" if growing > 0 else "under"


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def _smoothstep_deriv(t):
    tc = np.clip(t, 0.0, 1.0)
    return np.where((t > 0.0) & (t < 1.0), 30.0 * tc**2 * (1.0 - tc) ** 2, 0.0)


def _mesh(rmax, mesh_factor):
    """Graded node set on [0, rmax]: fine where curvature is large."""
    sections = (
        (0.0, 0.5, 0.0025),
        (0.5, 4.0, 0.005),
        (4.0, _R_MATCH + _BLEND_HALFWIDTH, 0.01),
        (_R_MATCH + _BLEND_HALFWIDTH, min(16.0, rmax), 0.025),
        (16.0, rmax, 0.05),
    )
    pieces = [np.array([0.0])]
    for a, b, step in sections:
        if b <= a:
            continue
        count = max(2, int(round((b - a) / (step / mesh_factor))) + 1)
        pieces.append(np.linspace(a, b, count)[1:])
    return np.concatenate(pieces)


@dataclass(frozen=True)
class RadialProfile:
    """Sampled Townes profile with derivative on a graded radial mesh."""

    nodes: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    q0: float
    rmax: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        derivs = np.asarray(self.derivs, dtype=float)
        if not (nodes.shape == values.shape == derivs.shape):
            raise ValueError("nodes/values/derivs must have matching shapes")
        if np.any(np.diff(nodes) <= 0) or nodes[0] != 0.0:
            raise ValueError("nodes must start at 0 and increase strictly")
        if values[0] != self.q0 or self.q0 <= 0.0 or derivs[0] != 0.0:
            raise ValueError("profile must satisfy Q(0)=q0>0, Q'(0)=0")
        if np.any(np.diff(values) >= 0):
            raise ValueError("profile values must decrease strictly")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivs", derivs)

    def series_coefficients(self):
        return _series_coefficients(self.q0)

    def second_derivs(self):
        """Q'' at the nodes, from the ODE (limit value at r=0)."""
        r, q, qp = self.nodes, self.values, self.derivs
        out = np.empty_like(q)
        out[0] = 0.5 * (self.q0 - self.q0**3)
        out[1:] = q[1:] - q[1:] ** 3 - qp[1:] / r[1:]
        return out

    @cached_property
    def _interp(self):
        data = np.column_stack([self.values, self.derivs, self.second_derivs()])
        return BPoly.from_derivatives(self.nodes, data)

    @cached_property
    def _interp_deriv(self):
        return self._interp.derivative()

    @cached_property
    def mass(self):
        """2*pi * integral of Q^2 r dr over the mesh."""
        return integrate_radial(self, lambda r, q, qp: q * q)

    def q_at(self, r):
        """Q at arbitrary radii (0 beyond the truncation radius)."""
        r = np.asarray(r, dtype=float)
        inside = r <= self.rmax
        out = np.zeros_like(r)
        out[inside] = self._interp(r[inside])
        return out

    def qprime_at(self, r):
        r = np.asarray(r, dtype=float)
        inside = r <= self.rmax
        out = np.zeros_like(r)
        out[inside] = self._interp_deriv(r[inside])
        return out

    def q0_at(self, r):
        """Unit-L2-mass profile Q0 = Q/||Q||, computed lazily from mass."""
        return self.q_at(r) / np.sqrt(self.mass)

    def q0prime_at(self, r):
        return self.qprime_at(r) / np.sqrt(self.mass)


@dataclass(frozen=True)
class CriticalConstants:
    """The equal integrals of the converged profile; astar is their value."""

    astar: float
    mass: float
    kinetic: float
    quartic: float


def _panel_points(edges):
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    pts = (mid[:, None] + half[:, None] * _GL_X).ravel()
    wts = (half[:, None] * _GL_W).ravel()
    return pts, wts


def integrate_radial(profile, integrand):
    """2*pi * integral of integrand(r, Q, Q') * r dr via per-panel Gauss rules."""
    pts, wts = _panel_points(profile.nodes)
    q = profile._interp(pts)
    qp = profile._interp_deriv(pts)
    return 2.0 * np.pi * float(np.sum(wts * integrand(pts, q, qp) * pts))


def solve_townes(q0_bracket=(2.0, 2.5), rmax=30.0, tol=1e-12, mesh_factor=1.0):
    """Shooting solve of the Townes equation, bisecting on Q(0).

    q0_bracket must straddle the critical shooting value and lie in (1, inf);
    rmax >= 20 (extended automatically until the far-field decay criterion
    Q(rmax) < 1e-10 Q(0) holds); tol is the bisection bracket width at which
    the search stops.
    """
    lo, hi = float(q0_bracket[0]), float(q0_bracket[1])
    if not (1.0 < lo < hi):
        raise ValueError("bracket must satisfy 1 < lo < hi")
    if rmax < 20.0:
        raise ValueError("rmax must be at least 20")
    if tol <= 0.0:
        raise ValueError("tol must be positive")

    # Near-critical shots only need integrating until the unstable mode
    # reveals itself; the classification accuracy required scales with the
    # current bracket width, so early shots run at loose tolerances.
    r_classify = min(rmax, 16.0)

    def classify(q0, width):
        rtol = float(np.clip(width * 1e-3, 1e-12, 1e-6))
        atol = float(np.clip(width * 1e-4, 1e-14, 1e-8))
        return _shoot(q0, r_classify, rtol=rtol, atol=atol)

    kind_lo = classify(lo, hi - lo)
    kind_hi = classify(hi, hi - lo)
    if kind_lo == kind_hi:
        raise BracketError(
            f"bracket [{lo}, {hi}] does not straddle: both endpoints {kind_lo}shoot"
        )

    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if classify(mid, hi - lo) == kind_lo:
            lo = mid
        else:
            hi = mid
    else:
        raise ConvergenceError("bisection failed to shrink the bracket")

    return _build_profile(0.5 * (lo + hi), rmax, mesh_factor)


def _build_profile(q0, rmax, mesh_factor):
    r0 = 1e-4
    r_blend_hi = _R_MATCH + _BLEND_HALFWIDTH
    sol = solve_ivp(
        _rhs,
        (r0, r_blend_hi),
        _series_start(q0, r0),
        method="DOP853",
        rtol=1e-13,
        atol=1e-16,
        dense_output=True,
    )
    if not sol.success:
        raise ConvergenceError("final outward integration failed")

    amp = float(sol.sol(_R_MATCH)[0]) / float(k0(_R_MATCH))

    rmax_eff = float(rmax)
    while amp * k0(rmax_eff) >= 1e-10 * q0:
        rmax_eff += 2.0

    nodes = _mesh(rmax_eff, mesh_factor)
    values = np.empty_like(nodes)
    derivs = np.empty_like(nodes)

    values[0], derivs[0] = q0, 0.0
    inner = (nodes > 0.0) & (nodes < r0 * 4)
    if np.any(inner):
        q, qp = _series_start(q0, nodes[inner])
        values[inner], derivs[inner] = q, qp

    shot = (nodes >= r0 * 4) & (nodes <= r_blend_hi)
    ys = sol.sol(nodes[shot])
    values[shot], derivs[shot] = ys[0], ys[1]

    tail = nodes > r_blend_hi
    values[tail] = amp * k0(nodes[tail])
    derivs[tail] = -amp * k1(nodes[tail])

    # Blend outward solve into the K0 tail over [_R_MATCH - 1, _R_MATCH + 1]
    # so the tiny derivative mismatch is spread over an O(1) window instead
    # of appearing as a kink at one node.
    blend = (nodes >= _R_MATCH - _BLEND_HALFWIDTH) & (nodes <= r_blend_hi)
    rb = nodes[blend]
    t = (rb - (_R_MATCH - _BLEND_HALFWIDTH)) / (2.0 * _BLEND_HALFWIDTH)
    s = _smoothstep(t)
    sprime = _smoothstep_deriv(t) / (2.0 * _BLEND_HALFWIDTH)
    q_tail = amp * k0(rb)
    qp_tail = -amp * k1(rb)
    q_shot, qp_shot = values[blend], derivs[blend]
    values[blend] = (1.0 - s) * q_shot + s * q_tail
    derivs[blend] = (
        (1.0 - s) * qp_shot + s * qp_tail + sprime * (q_tail - q_shot)
    )

    return RadialProfile(
        nodes=nodes, values=values, derivs=derivs, q0=q0, rmax=rmax_eff
    )


def critical_constants(profile, identity_rtol=1e-5):
    """Mass, kinetic and quartic integrals; raises if they disagree.

    For the converged profile mass = kinetic = quartic/2, and astar is that
    common value.  Disagreement beyond identity_rtol (relative) signals a
    non-solution input or a quadrature problem.
    """
    mass = integrate_radial(profile, lambda r, q, qp: q * q)
    kinetic = integrate_radial(profile, lambda r, q, qp: qp * qp)
    quartic = integrate_radial(profile, lambda r, q, qp: q**4)
    scale = abs(mass)
    if abs(mass - kinetic) > identity_rtol * scale or abs(
        mass - 0.5 * quartic
    ) > identity_rtol * scale:
        raise IdentityError(
            "profile identities violated: "
            f"mass={mass:.8g} kinetic={kinetic:.8g} quartic/2={0.5 * quartic:.8g}"
        )
    return CriticalConstants(astar=mass, mass=mass, kinetic=kinetic, quartic=quartic)


def singular_moment(profile, p):
    """I_p = integral of Q0(x)^2 / |x|^p over the plane, 0 < p < 2.

    Radially: 2*pi * int Q0(r)^2 r^(1-p) dr.  The integrable endpoint at
    r=0 is handled by integrating the even Taylor series of Q^2 against the
    r^(1-p) weight in closed form over the first mesh panel.
    """
    if not 0.0 < p < 2.0:
        raise ValueError(f"p must lie in (0, 2), got {p}")
    nodes = profile.nodes
    r1 = nodes[1]
    c2, c4 = profile.series_coefficients()
    q0 = profile.q0
    # Q^2 = q0^2 + 2 q0 c2 r^2 + (c2^2 + 2 q0 c4) r^4 + O(r^6)
    a0, a2, a4 = q0**2, 2.0 * q0 * c2, c2**2 + 2.0 * q0 * c4
    head = (
        a0 * r1 ** (2.0 - p) / (2.0 - p)
        + a2 * r1 ** (4.0 - p) / (4.0 - p)
        + a4 * r1 ** (6.0 - p) / (6.0 - p)
    )
    pts, wts = _panel_points(nodes[1:])
    q = profile._interp(pts)
    body = float(np.sum(wts * q * q * pts ** (1.0 - p)))
    return 2.0 * np.pi * (head + body) / profile.mass


@lru_cache(maxsize=4)
def default_profile(tol=1e-12, mesh_factor=1.0):
    """Shared Townes solve with standard parameters (cached)."""
    return solve_townes((2.0, 2.5), rmax=30.0, tol=tol, mesh_factor=mesh_factor)
