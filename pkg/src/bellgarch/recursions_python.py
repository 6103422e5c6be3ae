"""Pure NumPy implementations of the sequential inner loops.

These are the hot kernels of the package: the intensity recursion, the
conditional log-likelihood accumulation, and the one-pass score/Hessian
recursions.  Everything in this module must stay nopython-compilable,
because :mod:`bellgarch.recursions` wraps each function with ``@njit``
unless numba is unavailable or disabled via ``BELLGARCH_NO_NUMBA=1``.

Parameter vectors are ordered (alpha0, alpha1, beta1) for the linear
order-(1,1) recursion and (alpha0, alpha1, beta1, gamma) for the
nonlinear one.
"""

import numpy as np

FAMILY_BELL = 0
FAMILY_POISSON = 1

# exp(lam) overflows the conditional-mean scale long before the float64
# limit; likelihood evaluation rejects intensities above this cap.
LAMBDA_CAP = 30.0


def lambda_path_linear(x, alpha0, alphas, betas, lam0):
    """Intensity path for the linear order-(p, q) recursion.

    lam[t] = alpha0 + sum_i alphas[i] * x[t-1-i] + sum_j betas[j] * lam[t-1-j]

    The first max(p, q) entries are pinned to the initial value ``lam0``.
    """
    n = x.shape[0]
    p = alphas.shape[0]
    q = betas.shape[0]
    pstar = max(p, q)
    lam = np.empty(n)
    for t in range(min(pstar, n)):
        lam[t] = lam0
    for t in range(pstar, n):
        v = alpha0
        for i in range(p):
            v += alphas[i] * x[t - 1 - i]
        for j in range(q):
            v += betas[j] * lam[t - 1 - j]
        lam[t] = v
    return lam


def lambda_path_nonlinear(x, alpha0, a1, b1, gam, lam0):
    """Intensity path for the perturbed order-(1,1) recursion.

    lam[t] = alpha0 / (1 + lam[t-1])**gam + a1 * x[t-1] + b1 * lam[t-1]
    """
    n = x.shape[0]
    lam = np.empty(n)
    lam[0] = lam0
    for t in range(1, n):
        lp = lam[t - 1]
        lam[t] = alpha0 / (1.0 + lp) ** gam + a1 * x[t - 1] + b1 * lp
    return lam


def loglik_from_path(x, lam, start, family, logbell, logfact):
    """Sum of conditional log-densities over t >= start.

    Returns ``(loglik, bad_t)`` where ``bad_t`` is the first index at
    which the intensity left its admissible range (-1 when none did; the
    returned loglik is NaN in that case).
    """
    total = 0.0
    for t in range(start, x.shape[0]):
        lt = lam[t]
        if lt <= 0.0:
            return np.nan, t
        xt = x[t]
        if family == FAMILY_BELL:
            if lt > LAMBDA_CAP:
                return np.nan, t
            total += xt * np.log(lt) + (1.0 - np.exp(lt)) + logbell[xt] - logfact[xt]
        else:
            total += xt * np.log(lt) - lt - logfact[xt]
    return total, -1


def cml_parts_linear11(x, a0, a1, b1, lam0, dlam0, d2lam0, family, logbell, logfact):
    """One pass over the linear (1,1) recursion.

    Accumulates the log-likelihood, the score and the (negated) sum of
    second derivatives, propagating d(lam_t)/d(theta) and
    d2(lam_t)/d(theta)d(theta') alongside the intensity itself:

        u_t = (1, x[t-1], lam[t-1]) + b1 * u_{t-1}
        H_t = b1 * H_{t-1} + e_b u_{t-1}' + u_{t-1} e_b'

    with e_b the unit vector at the beta1 slot.  ``dlam0``/``d2lam0``
    carry the derivatives of the initial intensity (zero when the caller
    holds it fixed).

    Returns (loglik, score, nhess, lam, bad_t); ``nhess`` is
    -sum_t d2 l_t, i.e. the observed-information convention.
    """
    n = x.shape[0]
    lam = np.empty(n)
    score = np.zeros(3)
    hess = np.zeros((3, 3))
    u = dlam0.copy()
    H = d2lam0.copy()
    loglik = 0.0
    lam[0] = lam0
    for t in range(n):
        if t > 0:
            lp = lam[t - 1]
            lam[t] = a0 + a1 * x[t - 1] + b1 * lp
            un0 = 1.0 + b1 * u[0]
            un1 = x[t - 1] + b1 * u[1]
            un2 = lp + b1 * u[2]
            Hn = np.empty((3, 3))
            for i in range(3):
                for j in range(3):
                    Hn[i, j] = b1 * H[i, j]
            for j in range(3):
                Hn[2, j] += u[j]
                Hn[j, 2] += u[j]
            u[0] = un0
            u[1] = un1
            u[2] = un2
            H = Hn
        lt = lam[t]
        if lt <= 0.0 or (family == FAMILY_BELL and lt > LAMBDA_CAP):
            return np.nan, score, hess, lam, t
        xt = x[t]
        if family == FAMILY_BELL:
            elt = np.exp(lt)
            loglik += xt * np.log(lt) + (1.0 - elt) + logbell[xt] - logfact[xt]
            g1 = xt / lt - elt
            g2 = -xt / (lt * lt) - elt
        else:
            loglik += xt * np.log(lt) - lt - logfact[xt]
            g1 = xt / lt - 1.0
            g2 = -xt / (lt * lt)
        for i in range(3):
            score[i] += g1 * u[i]
            for j in range(3):
                hess[i, j] += g2 * u[i] * u[j] + g1 * H[i, j]
    return loglik, score, -hess, lam, -1


def cml_parts_nonlinear11(x, a0, a1, b1, gam, lam0, dlam0, d2lam0, logbell, logfact):
    """One pass over the nonlinear (1,1) recursion, Bell family only.

    Writing lam_t = g(lam_{t-1}, theta) with
    g = a0 * w**(-gam) + a1 * x + b1 * lam, w = 1 + lam, the chain rule
    gives

        u_t = g_theta + g_lam * u_{t-1}
        H_t = g_theta_theta + g_theta_lam u' + u g_theta_lam'
              + g_lam_lam u u' + g_lam H_{t-1}

    which is propagated below together with the likelihood parts.
    Returns (loglik, score, nhess, lam, bad_t) as in the linear kernel.
    """
    n = x.shape[0]
    lam = np.empty(n)
    score = np.zeros(4)
    hess = np.zeros((4, 4))
    u = dlam0.copy()
    H = d2lam0.copy()
    gl = np.empty(4)
    loglik = 0.0
    lam[0] = lam0
    for t in range(n):
        if t > 0:
            lp = lam[t - 1]
            w = 1.0 + lp
            wg = w ** (-gam)
            lnw = np.log(w)
            lam[t] = a0 * wg + a1 * x[t - 1] + b1 * lp
            glam = -gam * a0 * wg / w + b1
            glamlam = gam * (gam + 1.0) * a0 * wg / (w * w)
            # dg/dtheta at (lam_{t-1}, theta)
            gt0 = wg
            gt1 = 1.0 * x[t - 1]
            gt2 = lp
            gt3 = -a0 * wg * lnw
            # d2g/dtheta dlam
            gl[0] = -gam * wg / w
            gl[1] = 0.0
            gl[2] = 1.0
            gl[3] = a0 * (wg / w) * (gam * lnw - 1.0)
            un = np.empty(4)
            un[0] = gt0 + glam * u[0]
            un[1] = gt1 + glam * u[1]
            un[2] = gt2 + glam * u[2]
            un[3] = gt3 + glam * u[3]
            Hn = np.empty((4, 4))
            for i in range(4):
                for j in range(4):
                    Hn[i, j] = (
                        glam * H[i, j]
                        + gl[i] * u[j]
                        + u[i] * gl[j]
                        + glamlam * u[i] * u[j]
                    )
            # d2g/dtheta dtheta' has only the (alpha0, gamma) block
            Hn[0, 3] += -wg * lnw
            Hn[3, 0] += -wg * lnw
            Hn[3, 3] += a0 * wg * lnw * lnw
            u = un
            H = Hn
        lt = lam[t]
        if lt <= 0.0 or lt > LAMBDA_CAP:
            return np.nan, score, hess, lam, t
        xt = x[t]
        elt = np.exp(lt)
        loglik += xt * np.log(lt) + (1.0 - elt) + logbell[xt] - logfact[xt]
        g1 = xt / lt - elt
        g2 = -xt / (lt * lt) - elt
        for i in range(4):
            score[i] += g1 * u[i]
            for j in range(4):
                hess[i, j] += g2 * u[i] * u[j] + g1 * H[i, j]
    return loglik, score, -hess, lam, -1
