"""Independent reference computations used to freeze expected values.

Everything here deliberately avoids the production code paths: the profile
is recomputed by collocation (solve_bvp) and by a hand-rolled fixed-step
RK4 shooter, and the integrals use adaptive quadrature on the collocation
solution.  Run as a script to print the reference numbers that the test
suite pins.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import quad, solve_bvp
from scipy.special import k0, k1

RMAX = 30.0


def relaxation_profile(tol=1e-12):
    """Collocation solve of Q'' + Q'/r - Q + Q^3 = 0 with a Robin far field."""

    def rhs(r, y):
        return np.vstack([y[1], y[0] - y[0] ** 3 - y[1] / r])

    kratio = float(k1(RMAX) / k0(RMAX))
    r0 = 1e-3

    def bc(ya, yb):
        # regularity at the origin via the series Q' = (Q - Q^3) r / 2 + O(r^3)
        reg = ya[1] - 0.5 * r0 * (ya[0] - ya[0] ** 3)
        return np.array([reg, yb[1] + kratio * yb[0]])

    r = np.linspace(r0, RMAX, 2000)
    guess = np.vstack([2.2 / np.cosh(0.85 * r), -1.87 * np.tanh(0.85 * r) / np.cosh(0.85 * r)])
    sol = None
    for stage_tol in (1e-6, 1e-9, tol):
        sol = solve_bvp(rhs, bc, r, guess, tol=stage_tol, max_nodes=2_000_000)
        assert sol.success, sol.message
        r = sol.x
        guess = sol.y
        if stage_tol <= tol:
            break
    return sol


def rk4_shoot_q0(lo=2.0, hi=2.5, nsteps=60000, rmax=16.0):
    """Bisection on Q(0) with a plain fixed-step RK4 integrator."""

    def classify(q0):
        h = rmax / nsteps
        r = 1e-6
        c2 = 0.25 * (q0 - q0**3)
        y = np.array([q0 + c2 * r * r, 2 * c2 * r])

        def f(r, y):
            return np.array([y[1], y[0] - y[0] ** 3 - y[1] / r])

        for _ in range(nsteps):
            k1_ = f(r, y)
            k2_ = f(r + h / 2, y + h / 2 * k1_)
            k3_ = f(r + h / 2, y + h / 2 * k2_)
            k4_ = f(r + h, y + h * k3_)
            y = y + h / 6 * (k1_ + 2 * k2_ + 2 * k3_ + k4_)
            r += h
            if y[0] < 0:
                return "under"
            if y[1] > 0:
                return "over"
        return "over" if y[0] * k1(r) + y[1] * k0(r) > 0 else "under"

    klo = classify(lo)
    assert klo != classify(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if classify(mid) == klo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def oracle_integrals(sol):
    """mass/kinetic/quartic and I_p moments by adaptive quadrature."""

    def q(r):
        return sol.sol(r)[0]

    def qp(r):
        return sol.sol(r)[1]

    opts = dict(limit=400, epsabs=1e-13, epsrel=1e-13)
    mass = 2 * np.pi * quad(lambda r: q(r) ** 2 * r, 0, RMAX, **opts)[0]
    kin = 2 * np.pi * quad(lambda r: qp(r) ** 2 * r, 0, RMAX, **opts)[0]
    quartic = 2 * np.pi * quad(lambda r: q(r) ** 4 * r, 0, RMAX, **opts)[0]

    moments = {}
    for p in (0.5, 1.0, 1.5, 1.9):
        # substitute r = t^(1/(2-p)) so the integrand is regular at 0
        ex = 1.0 / (2.0 - p)

        def g(t, ex=ex):
            return q(t**ex) ** 2

        val = quad(g, 0, RMAX ** (2.0 - p), **opts)[0] / (2.0 - p)
        moments[p] = 2 * np.pi * val / mass
    return mass, kin, quartic, moments


def main():
    sol = relaxation_profile()
    q0_relax = float(sol.sol(0.0)[0])
    q0_rk4 = rk4_shoot_q0()
    mass, kin, quartic, moments = oracle_integrals(sol)
    print(f"q0 (relaxation)   = {q0_relax:.14f}")
    print(f"q0 (RK4 shooting) = {q0_rk4:.14f}")
    print(f"astar/mass        = {mass:.12f}")
    print(f"kinetic           = {kin:.12f}")
    print(f"quartic/2         = {quartic / 2:.12f}")
    for p, v in moments.items():
        print(f"I_{p:<4} = {v:.12f}")
    beta = mass * moments[1.0] / 2.0
    print(f"beta (p=1, h0=1)  = {beta:.12f}")
    limit = (moments[1.0]) ** 2 * mass * (0.25 - 0.5)
    print(f"energy limit (p=1, h0=1) = {limit:.12f}")


if __name__ == "__main__":
    main()
