#!/usr/bin/env python3
"""Regenerate the numeric fixtures used by the Rust test suites.

Every value here is computed independently of the Rust code: statistics by
exhaustive enumeration over index pairs with exact rationals, closed forms
with mpmath at 40 significant digits, and Psi by numerical quadrature of the
normal density. Run from the repository root:

    python3 scripts/gen_fixtures.py

and commit the refreshed crates/core/tests/fixtures/formula_values.json.
"""

import json
from fractions import Fraction
from pathlib import Path

from mpmath import mp, mpf, exp, sqrt, pi, quad, inf, gamma, log, erfc, ncdf

mp.dps = 40

OUT = Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/formula_values.json"


def psi(x):
    """Normal survival by quadrature of the density (not via erfc)."""
    x = mpf(x)
    # Psi(x) = phi(x) * int_0^inf exp(-x s - s^2/2) ds
    width = 1 / max(abs(x), 1)
    pts = [k * width for k in (0, 1, 2, 4, 8, 16, 32, 64)] + [inf]
    tail = quad(lambda s: exp(-x * s - s * s / 2), pts)
    v = exp(-x * x / 2) / sqrt(2 * pi) * tail
    assert abs(v / (erfc(x / sqrt(2)) / 2) - 1) < mpf(10) ** -25, x
    return v


def partial_sums(xs):
    s = [Fraction(0)]
    for v in xs:
        s.append(s[-1] + Fraction(v))
    return s


def brute(xs, term):
    """Exhaustive max over 0 <= i < j <= m with lexicographic tie-break."""
    m = len(xs)
    s = partial_sums(xs)
    best = None
    arg = None
    for i in range(m + 1):
        for j in range(i + 1, m + 1):
            v = term(s, m, i, j)
            if v is None:
                continue
            if best is None or v > best:
                best, arg = v, (i, j)
    return best, arg


def z1(xs, mu0, delta):
    mu0, delta = Fraction(mu0), Fraction(delta)
    return brute(xs, lambda s, m, i, j: delta * (s[j] - j * mu0 - (s[i] - i * mu0) - (j - i) * delta / 2))


def z2(xs, delta):
    delta = Fraction(delta)
    return brute(
        xs,
        lambda s, m, i, j: delta * (s[j] - j * s[m] / m - (s[i] - i * s[m] / m) - (j - i) * delta / 2),
    )


def z3(xs, delta):
    delta = Fraction(delta)
    return brute(
        xs,
        lambda s, m, i, j: delta
        * (s[j] - s[i] - (j - i) * s[m] / m - delta * (j - i) * (1 - Fraction(j - i, m)) / 2),
    )


def z4(xs):
    def term(s, m, i, j):
        k = j - i
        if k == m:
            return mpf(0)
        num = s[j] - s[i] - k * s[m] / m
        num = max(num, 0)
        return mpf(num.numerator) / num.denominator / sqrt(mpf(k) * (1 - mpf(k) / m))

    best, arg = brute(xs, term)
    if best == 0:
        arg = (0, 1)
    return best, arg


def p1(c, d, u):
    c, d, u = mpf(c), mpf(d), mpf(u)
    return 2 * c * (c - d) * u**2 * exp(-2 * c * d * u**2)


def p2(c, d, u):
    c, d, u = mpf(c), mpf(d), mpf(u)
    return 32 * d**2 * (d + c) ** 3 / (2 * d + c) ** 3 * u**2 * exp(-2 * d * (c + d) * u**2)


def p3(c, d, u):
    c, d, u = mpf(c), mpf(d), mpf(u)
    return 32 * c * d / sqrt(c * (c - 4 * d)) * u**2 * exp(-2 * c * d * u**2)


def p4(d):
    d = mpf(d)
    return 2 * d**4 * psi(d)


def free2(c, u):
    c, u = mpf(c), mpf(u)
    return 4 * u**2 * exp(-2 * u**2 - 2 * c * u)


def free3(c, u):
    c, u = mpf(c), mpf(u)
    return 4 * u**2 * exp(-((2 * u + c / 2) ** 2) / 2)


def kuiper_half(u, terms):
    u = mpf(u)
    return sum((4 * k * k * u * u - 1) * exp(-2 * k * k * u * u) for k in range(1, terms + 1))


def field_const_alpha_lt_beta(s1, s2, a, b, alpha, beta, c, h_alpha, linear=True):
    s1, s2, a, b, alpha, beta, c = map(mpf, (s1, s2, a, b, alpha, beta, c))
    trend = exp(c * c / (4 * b)) if (beta == 2 and linear) else 1
    return 2 * (s2 - s1) * a ** (2 / alpha) * mpf(h_alpha) ** 2 * b ** (-1 / beta) * gamma(1 / beta + 1) * trend


def h1_grid(step, horizons):
    """E max_{k: k*step <= lam} exp(sqrt2 B(k step) - k step) for Brownian B.

    Spitzer's identity gives sum_n s^n H(n) = (1-s)^-2 exp(-2 sum_k s^k Psi(sqrt(k step / 2)) / k),
    so H(n) = sum_{j<=n} (n - j + 1) l_j with l the coefficients of the exponential.
    """
    step = mpf(step)
    n = max(int(round(mpf(h) / step)) for h in horizons)
    a = [mpf(0)] + [-2 * erfc(sqrt(k * step / 2) / sqrt(2)) / 2 / k for k in range(1, n + 1)]
    ell = [mpf(1)]
    for j in range(1, n + 1):
        ell.append(sum(k * a[k] * ell[j - k] for k in range(1, j + 1)) / j)
    out = []
    for h in horizons:
        m = int(round(mpf(h) / step))
        out.append(sum((m - j + 1) * ell[j] for j in range(m + 1)))
    return out


def h2_grid(step, lam):
    """E max_k exp(sqrt2 Z t_k - t_k^2) over t_k = k step <= lam, Z standard normal.

    Grid point k is optimal for z between the midpoints (t_{k-1}+t_k)/sqrt2 and
    (t_k+t_{k+1})/sqrt2, and phi(z) exp(sqrt2 z t - t^2) = phi(z - sqrt2 t).
    """
    step = mpf(step)
    n = int(round(mpf(lam) / step))
    t = [k * step for k in range(n + 1)]
    total = mpf(0)
    for k in range(n + 1):
        lo = -inf if k == 0 else (t[k - 1] + t[k]) / sqrt(2)
        hi = inf if k == n else (t[k] + t[k + 1]) / sqrt(2)
        shift = sqrt(2) * t[k]
        total += (1 if hi == inf else ncdf(hi - shift)) - (0 if lo == -inf else ncdf(lo - shift))
    return total


def main():
    values = {}
    stats = {}

    def put(name, v):
        values[name] = float(v)

    def put_stat(name, res):
        v, (i, j) = res
        if isinstance(v, Fraction):
            v = mpf(v.numerator) / v.denominator
        stats[name] = {"value": float(v), "i": i, "j": j}

    put_stat("z1_alt_mu0_0_delta_1", z1([1, -1, 1, -1], 0, 1))
    put_stat("z1_step_mu0_0_delta_1", z1([0, 0, 2, 2], 0, 1))
    put_stat("z1_zeros3_mu0_0_delta_1", z1([0, 0, 0], 0, 1))
    put_stat("z2_step_delta_1", z2([0, 0, 2, 2], 1))
    put_stat("z2_const5_delta_1", z2([3, 3, 3, 3, 3], 1))
    put_stat("z2_alt_delta_1", z2([1, -1, 1, -1], 1))
    put_stat("z3_step_delta_1", z3([0, 0, 2, 2], 1))
    put_stat("z3_zeros4_delta_1", z3([0, 0, 0, 0], 1))
    put_stat("z3_alt_delta_1", z3([1, -1, 1, -1], 1))
    put_stat("z4_step", z4([0, 0, 2, 2]))
    put_stat("z4_const4", z4([2, 2, 2, 2]))
    put_stat("z4_alt", z4([1, -1, 1, -1]))

    put("psi_0", psi(0))
    put("psi_1.5", psi(1.5))
    put("psi_2", psi(2))
    put("psi_4", psi(4))
    put("psi_5", psi(5))
    put("psi_8", psi(8))
    put("psi_12", psi(12))
    put("psi_20", psi(20))
    put("psi_30", psi(30))
    put("psi_37.5", psi(37.5))
    put("psi_-1.5", 1 - psi(1.5))
    put("log_psi_40", log(psi(40)))
    put("log_psi_100", log(psi(100)))

    put("gamma_1.5", gamma(mpf(1.5)))
    put("gamma_1.25", gamma(mpf(1.25)))
    put("gamma_2", gamma(mpf(2)))

    put("field_const_linear_c0", field_const_alpha_lt_beta(0.5, 1, 1, 0.5, 1, 2, 0, 1))
    put("field_const_sqrt_pi_over_2", sqrt(pi / 2))
    c0 = mpf("0.7")
    put("field_const_shifted_c0_0.7", field_const_alpha_lt_beta(0.5, 1, 2, 2, 1, 2, 2 * c0, 1))
    put("field_const_sqrt_2pi_exp_c0sq_over_2_c0_0.7", sqrt(2 * pi) * exp(c0 * c0 / 2))

    put("p1_c1.5_d0.5_u2", p1(1.5, 0.5, 2))
    put("p1_12_exp_minus6", 12 * exp(-6))
    put("p2_c1_d1_u1", p2(1, 1, 1))
    put("p2_256_27_exp_minus4", mpf(256) / 27 * exp(-4))
    put("p2_c0.5_d0.25_u2", p2(0.5, 0.25, 2))
    put("p3_c5_d1_u1", p3(5, 1, 1))
    put("p3_c10_d1_u1", p3(10, 1, 1))
    put("p4_d4", p4(4))
    put("p4_d5", p4(5))
    put("p4_d3.25", p4(3.25))
    put("p4_d3.5", p4(3.5))
    put("p4_d2", p4(2))
    put("free2_c1_u1", free2(1, 1))
    put("free2_c0_u1.5", free2(0, 1.5))
    put("free2_c0_u1.25", free2(0, 1.25))
    put("free2_c0_u1.75", free2(0, 1.75))
    put("free3_c2_u1", free3(2, 1))
    put("free3_c0_u1", free3(0, 1))

    for u in ("1.25", "1.5", "1.75"):
        put(f"kuiper_half_u{u}", kuiper_half(u, 50))
        put(f"kuiper_half_u{u}_terms1", kuiper_half(u, 1))

    # stat + pvalue composition for the CLI: z4 on [0,0,2,2] is 2, so p = 2*2^4*Psi(2)
    put("cmd_stat_z4_step_pvalue", p4(2))

    # discrete-grid Pickands quantities (Monte Carlo targets)
    for step in ("0.01", "0.005"):
        h4, h8 = h1_grid(step, [4, 8])
        put(f"h1_grid_step{step}_lambda4", h4)
        put(f"h1_grid_step{step}_lambda8", h8)
        put(f"h1_grid_rate_step{step}_lambda8", (h8 - h4) / 4)
        g4, g8 = h2_grid(step, 4), h2_grid(step, 8)
        put(f"h2_grid_step{step}_lambda8", g8)
        put(f"h2_grid_rate_step{step}_lambda8", (g8 - g4) / 4)
    put("h1_grid_step0.02_lambda8", h1_grid("0.02", [8])[0])

    out = {"values": values, "statistics": stats}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(values)} values and {len(stats)} statistics to {OUT}")


if __name__ == "__main__":
    main()
