#!/usr/bin/env python3
"""Independent reference computations for the frozen test fixtures.

Every route here is deliberately different from the C++ implementation:
generic numpy eigensolves of i*Omega*Gamma instead of the standard-form
closed form, pseudo-inverse conditioning, midpoint quadrature instead of
Gauss-Legendre for the binned arrival-time table, and mpmath for the
finite-size arithmetic. Run it and paste the printed values into the tests.
"""
import math
from fractions import Fraction

import mpmath as mp
import numpy as np
from scipy import optimize, stats
from scipy.special import ndtr

mp.mp.dps = 40


def gamma(scoh, scor, k, eta, eps):
    u, v = 16 * scoh**2, 4 * scor**2
    c = (4 * k * k + u * v) / (4 * k * k * u * v)
    aa = np.array([[(u + v) / 16, -(u + v) / (8 * k)], [-(u + v) / (8 * k), (u + v) * c]])
    ab = np.array([[(u - v) / 16, (u - v) / (8 * k)], [-(u - v) / (8 * k), -(u - v) * c]])
    bb = np.array([[(u + v) / 16, (u + v) / (8 * k)], [(u + v) / (8 * k), (u + v) * c]])
    return np.block([[aa, (1 - eta) * ab], [(1 - eta) * ab.T, (1 + eps) * bb]])


OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic(g):
    ev = np.abs(np.linalg.eigvals(1j * OMEGA @ g))
    return np.sort(ev)[::-1][::2]


def g_entropy(nu):
    if nu <= 0.5 + 1e-15:
        return 0.0
    return (nu + 0.5) * np.log2(nu + 0.5) - (nu - 0.5) * np.log2(nu - 0.5)


def conditional(g):
    aa, ab, bb = g[:2, :2], g[:2, 2:], g[2:, 2:]
    proj = np.diag([1.0, 0.0])
    return bb - ab.T @ np.linalg.pinv(proj @ aa @ proj) @ ab


def eps_from_eta(eta, xi, d):
    return (-2 * eta * (d * d - 0.25) + xi) / (d * d + 0.25)


def chi(d, k, eta, xi):
    e = eps_from_eta(eta, xi, d)
    g = gamma(d, 1.0, k, eta, e)
    return sum(g_entropy(n) for n in symplectic(g)) - g_entropy(np.sqrt(np.linalg.det(conditional(g))))


def chi_worst(d, xi, k=1.0):
    hi = xi / (2 * (d * d - 0.25))
    grid = np.linspace(0, hi, 20001)
    vals = [chi(d, k, e, xi) for e in grid]
    i = int(np.argmax(vals))
    lo_, hi_ = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(lambda e: -chi(d, k, e, xi), bounds=(lo_, hi_), method="bounded",
                                   options={"xatol": 1e-13})
    best = max((vals[i], grid[i]), (-res.fun, res.x))
    return best


def link_weights(d, length_km=0.0, eff=0.93, dark=1000.0, frame_sigmas=8.0, unit=1e-11, mu=0.1, loss=0.2):
    frame = frame_sigmas * d
    t = 10 ** (-loss * length_km / 10)
    pd = dark * frame * unit
    ea, eb = eff, eff * t
    sig = mu * ea * eb * (1 - pd) ** 2
    ab = mu * ea * (1 - pd) * (1 - eb) * pd
    ba = mu * (1 - ea) * pd * eb * (1 - pd)
    dd = ((1 - mu) + mu * (1 - ea) * (1 - eb)) * pd * pd
    return frame, np.array([sig, ab, ba, dd])


def binned_mi(d, xi, jitter, bin_width, length_km=0.0, sub=1024):
    frame, w = link_weights(d, length_km)
    w = w / w.sum()
    sc2 = (1 + xi)
    var = d * d + sc2 / 4 + jitter**2
    cov = d * d - sc2 / 4
    k = int(np.ceil(frame / bin_width - 1e-9))
    edges = np.linspace(-frame / 2, frame / 2, k + 1)
    slope = cov / var
    s = np.sqrt(var - cov * cov / var)
    sig = np.zeros((k, k))
    for i in range(k):
        a = edges[i] + (np.arange(sub) + 0.5) / sub * (edges[i + 1] - edges[i])
        wa = stats.norm.pdf(a, scale=np.sqrt(var)) * (edges[i + 1] - edges[i]) / sub
        cdf = ndtr((edges[None, :] - slope * a[:, None]) / s)
        sig[i] = wa @ np.diff(cdf, axis=1)
    sig /= sig.sum()
    marg = np.diff(ndtr(edges / np.sqrt(var)))
    marg /= marg.sum()
    uni = np.full(k, 1.0 / k)
    p = w[0] * sig + w[1] * np.outer(marg, uni) + w[2] * np.outer(uni, marg) + w[3] * np.outer(uni, uni)
    pa, pb = p.sum(1), p.sum(0)
    q = np.outer(pa, pb)
    m = p > 0
    return float(np.sum(p[m] * np.log2(p[m] / q[m])))


def continuous_mi(d, xi, jitter):
    var = d * d + (1 + xi) / 4 + jitter**2
    cov = d * d - (1 + xi) / 4
    return -0.5 * np.log2(1 - cov * cov / (var * var))


def finite_key(r_do, n_total, p, eps_ec, eps_pa, eps_pe, eps_bar, d):
    # exact decimal sift count; binary 0.9 squared falls just below 0.81
    n = mp.mpf(math.floor(Fraction(str(p)) ** 2 * int(n_total)))
    return (n / n_total) * (r_do - mp.log(2 / mp.mpf(eps_ec), 2) / n - 2 / n * mp.log(1 / mp.mpf(eps_pa), 2)
                            - (2 * mp.log(d, 2) + 3) * mp.sqrt(mp.log(2 / mp.mpf(eps_bar), 2) / n))


if __name__ == "__main__":
    print("det gamma_AA (10,1,1):", np.linalg.det(gamma(10, 1, 1, 0, 0)[:2, :2]))
    print("symplectic pure (10,1,1):", symplectic(gamma(10, 1, 1, 0, 0)))
    gn = gamma(8, 1, 1, 0.001, 0.002)
    print("symplectic noisy (8,1,1,.001,.002): %.15g %.15g" % tuple(symplectic(gn)))
    print("sqrt det conditional noisy: %.15g" % np.sqrt(np.linalg.det(conditional(gn))))
    gk = gamma(8, 1, 0.37, 0.001, 0.002)
    print("symplectic noisy k=0.37: %.15g %.15g" % tuple(symplectic(gk)))

    # physicality boundary in eta at xi=0.21, d=8 (epsilon follows the constraint)
    def min_nu(eta):
        return min(symplectic(gamma(8, 1, 1, eta, eps_from_eta(eta, 0.21, 8)))) - 0.5
    lo, hi = 0.21 / 127.5, 0.05
    eta_b = optimize.brentq(min_nu, lo, hi, xtol=1e-15)
    print("physicality boundary eta: %.15g (eps there %.15g)" % (eta_b, eps_from_eta(eta_b, 0.21, 8)))

    for xi in (0.21, 0.30):
        c, e = chi_worst(8, xi)
        print("chi* d=8 xi=%.2f: %.15g at eta %.15g" % (xi, c, e))
    print("chi* d=8 xi=0.21 k=3: %.15g" % chi_worst(8, 0.21, 3.0)[0])

    print("continuous MI d=8 xi=.21 jitter 2/3: %.15g" % continuous_mi(8, 0.21, 2 / 3))
    print("binned MI d=8 defaults: %.12g" % binned_mi(8, 0.21, 2 / 3, 0.25))
    print("binned MI d=8 defaults 200km: %.12g" % binned_mi(8, 0.21, 2 / 3, 0.25, 200.0))
    print("binned MI d=8 noiseless: %.12g" % binned_mi(8, 0.0, 0.0, 0.25))
    frame, w = link_weights(8, 200.0)
    print("signal fraction 200 km: %.15g" % (w[0] / w.sum()))

    # evaluate_point fixture: N=1e6, p=0.9, equal split, centered bound
    eps_s, eps_ec = mp.mpf("1e-5"), mp.mpf("1e-10")
    share = (eps_s - eps_ec) / 3
    n_total, p = mp.mpf(10) ** 6, mp.mpf("0.9")
    m = mp.mpf(math.floor((1 - Fraction("0.9")) ** 2 * int(n_total)))
    margin = 2 / mp.sqrt(m) * mp.erfinv(1 - share) * mp.mpf("1.21")
    xi_max = mp.mpf("0.21") + margin
    c, e = chi_worst(8, float(xi_max))
    shannon = binned_mi(8, 0.21, 2 / 3, 0.25)
    r_do = mp.mpf("0.9") * shannon - c
    r_n = finite_key(r_do, n_total, "0.9", eps_ec, share, share, share, 8)
    print("point N=1e6 p=.9: m=%s xi_max=%s chi=%.12g r_do=%s r_n=%s" % (m, mp.nstr(xi_max, 15), c,
                                                                           mp.nstr(r_do, 12), mp.nstr(r_n, 12)))

    # expected one-sided violation probability of the centered bound under the chi-square law
    for m_, e_ in ((1000, 0.05), (1000, 0.01), (10000, 0.05), (10000, 0.01), (1000, 0.5)):
        cfac = 2 / np.sqrt(m_) * float(mp.erfinv(1 - e_))
        print("coverage m=%d eps=%.2f -> %.6g" % (m_, e_, stats.chi2.cdf((m_ - 1) / (1 + cfac), m_ - 1)))
