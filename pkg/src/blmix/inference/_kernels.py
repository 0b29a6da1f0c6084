"""SVI inner loops.

Each kernel advances the global variational parameters in place over a
block of pre-drawn document indices ``samples`` (iterations ``t0 ..
t0 + len(samples) - 1``). The numba and numpy versions perform the same
arithmetic; ``svi_chunk_bl`` / ``svi_chunk_dirichlet`` point at whichever
one ``BLMIX_DISABLE_NUMBA`` selects.
"""

import math

import numpy as np

from .._accel import USE_NUMBA, njit
from ..special import digamma, digamma_scalar


@njit
def _softmax_inplace(logw):
    m = logw.max()
    total = 0.0
    for g in range(logw.shape[0]):
        logw[g] = math.exp(logw[g] - m)
        total += logw[g]
    for g in range(logw.shape[0]):
        logw[g] /= total


@njit
def svi_chunk_bl_numba(indptr, indices, data, samples, t0, kappa, n, alphas, alpha, beta, psi,
                       phi, phi_alpha, phi_beta, eta, gamma, conjugate):
    G, pm1 = phi.shape
    logw = np.empty(G)
    ydense = np.zeros(pm1)
    for k in range(samples.shape[0]):
        s = samples[k]
        rho = (1.0 + (t0 + k)) ** (-kappa)
        lo, hi = indptr[s], indptr[s + 1]

        # local step
        eta_sum = 0.0
        for g in range(G):
            eta_sum += eta[g]
        dig_eta_sum = digamma_scalar(eta_sum)
        y_head = 0.0
        y_last = 0.0
        for j in range(lo, hi):
            if indices[j] == pm1:
                y_last += data[j]
            else:
                y_head += data[j]
                ydense[indices[j]] = data[j]
        for g in range(G):
            phi0 = 0.0
            for l in range(pm1):
                phi0 += phi[g, l]
            dab = digamma_scalar(phi_alpha[g] + phi_beta[g])
            shift = digamma_scalar(phi_alpha[g]) - dab - digamma_scalar(phi0)
            acc = 0.0
            for j in range(lo, hi):
                l = indices[j]
                if l != pm1:
                    acc += data[j] * (digamma_scalar(phi[g, l]) + shift)
            acc += y_last * (digamma_scalar(phi_beta[g]) - dab)
            logw[g] = digamma_scalar(eta[g]) - dig_eta_sum + acc
        _softmax_inplace(logw)

        # global step
        for g in range(G):
            gamma[s, g] = logw[g]
            w = n * logw[g]
            for l in range(pm1):
                phi[g, l] = (1.0 - rho) * phi[g, l] + rho * (alphas[l] + w * ydense[l])
            phi_beta[g] = (1.0 - rho) * phi_beta[g] + rho * (beta + w * y_last)
            if conjugate:
                phi_alpha[g] = (1.0 - rho) * phi_alpha[g] + rho * (alpha + w * y_head)
            eta[g] = (1.0 - rho) * eta[g] + rho * (psi + w)
        for j in range(lo, hi):
            if indices[j] != pm1:
                ydense[indices[j]] = 0.0


def svi_chunk_bl_numpy(indptr, indices, data, samples, t0, kappa, n, alphas, alpha, beta, psi,
                       phi, phi_alpha, phi_beta, eta, gamma, conjugate):
    pm1 = phi.shape[1]
    for k, s in enumerate(samples):
        rho = (1.0 + (t0 + k)) ** (-kappa)
        lo, hi = indptr[s], indptr[s + 1]
        idx, y = indices[lo:hi], data[lo:hi]
        head = idx != pm1
        ih, yh = idx[head], y[head]
        y_head = yh.sum()
        y_last = y[~head].sum()

        dab = digamma(phi_alpha + phi_beta)
        shift = digamma(phi_alpha) - dab - digamma(phi.sum(axis=1))
        acc = ((digamma(phi[:, ih]) + shift[:, None]) * yh).sum(axis=1)
        acc += y_last * (digamma(phi_beta) - dab)
        logw = digamma(eta) - digamma(eta.sum()) + acc
        w_local = np.exp(logw - logw.max())
        w_local /= w_local.sum()

        gamma[s] = w_local
        w = n * w_local
        hat = np.broadcast_to(alphas, phi.shape).copy()
        hat[:, ih] += w[:, None] * yh
        phi[:] = (1.0 - rho) * phi + rho * hat
        phi_beta[:] = (1.0 - rho) * phi_beta + rho * (beta + w * y_last)
        if conjugate:
            phi_alpha[:] = (1.0 - rho) * phi_alpha + rho * (alpha + w * y_head)
        eta[:] = (1.0 - rho) * eta + rho * (psi + w)


@njit
def svi_chunk_dirichlet_numba(indptr, indices, data, samples, t0, kappa, n, theta, psi,
                              phi, eta, gamma):
    G, p = phi.shape
    logw = np.empty(G)
    ydense = np.zeros(p)
    for k in range(samples.shape[0]):
        s = samples[k]
        rho = (1.0 + (t0 + k)) ** (-kappa)
        lo, hi = indptr[s], indptr[s + 1]
        eta_sum = 0.0
        for g in range(G):
            eta_sum += eta[g]
        dig_eta_sum = digamma_scalar(eta_sum)
        for j in range(lo, hi):
            ydense[indices[j]] = data[j]
        for g in range(G):
            total = 0.0
            for l in range(p):
                total += phi[g, l]
            shift = -digamma_scalar(total)
            acc = 0.0
            for j in range(lo, hi):
                acc += data[j] * (digamma_scalar(phi[g, indices[j]]) + shift)
            logw[g] = digamma_scalar(eta[g]) - dig_eta_sum + acc
        _softmax_inplace(logw)
        for g in range(G):
            gamma[s, g] = logw[g]
            w = n * logw[g]
            for l in range(p):
                phi[g, l] = (1.0 - rho) * phi[g, l] + rho * (theta + w * ydense[l])
            eta[g] = (1.0 - rho) * eta[g] + rho * (psi + w)
        for j in range(lo, hi):
            ydense[indices[j]] = 0.0


def svi_chunk_dirichlet_numpy(indptr, indices, data, samples, t0, kappa, n, theta, psi,
                              phi, eta, gamma):
    for k, s in enumerate(samples):
        rho = (1.0 + (t0 + k)) ** (-kappa)
        lo, hi = indptr[s], indptr[s + 1]
        idx, y = indices[lo:hi], data[lo:hi]
        shift = -digamma(phi.sum(axis=1))
        acc = ((digamma(phi[:, idx]) + shift[:, None]) * y).sum(axis=1)
        logw = digamma(eta) - digamma(eta.sum()) + acc
        w_local = np.exp(logw - logw.max())
        w_local /= w_local.sum()
        gamma[s] = w_local
        w = n * w_local
        hat = np.full(phi.shape, theta)
        hat[:, idx] += w[:, None] * y
        phi[:] = (1.0 - rho) * phi + rho * hat
        eta[:] = (1.0 - rho) * eta + rho * (psi + w)


if USE_NUMBA:
    svi_chunk_bl = svi_chunk_bl_numba
    svi_chunk_dirichlet = svi_chunk_dirichlet_numba
else:
    svi_chunk_bl = svi_chunk_bl_numpy
    svi_chunk_dirichlet = svi_chunk_dirichlet_numpy
