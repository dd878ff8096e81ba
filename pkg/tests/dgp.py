"""Simulated processes shared by the regression and acceptance tests."""

import numpy as np

from mediasent.series import Month, MonthlySeries

START = Month(2000, 1)
BURN = 100


def ar1(rng, n, rho, sd=1.0):
    e = rng.normal(0.0, sd, n + BURN)
    x = np.zeros(n + BURN)
    for t in range(1, n + BURN):
        x[t] = rho * x[t - 1] + e[t]
    return x[BURN:]


def ar(rng, n, coefs):
    p = len(coefs)
    e = rng.normal(size=n + BURN)
    x = np.zeros(n + BURN)
    for t in range(p, n + BURN):
        x[t] = sum(c * x[t - j - 1] for j, c in enumerate(coefs)) + e[t]
    return x[BURN:]


def one_way_system(rng, n):
    """x_t = 0.5 x_{t-1} + e_t, y_t = 0.8 y_{t-1} + 0.5 x_{t-1} + u_t."""
    e = rng.normal(size=(n + BURN, 2))
    x = np.zeros(n + BURN)
    y = np.zeros(n + BURN)
    for t in range(1, n + BURN):
        x[t] = 0.5 * x[t - 1] + e[t, 0]
        y[t] = 0.8 * y[t - 1] + 0.5 * x[t - 1] + e[t, 1]
    return x[BURN:], y[BURN:]


def monthly(values, name=""):
    return MonthlySeries(START, np.asarray(values, dtype=float), name=name)


def ar1_error_regression(rng, n=300, rho=0.8, rho_x=0.5, beta=1.0):
    """y = 1 + beta x + u with AR(1) errors and an AR(1) regressor."""
    x = ar1(rng, n, rho_x)
    u = ar1(rng, n, rho)
    return x, 1.0 + beta * x + u
