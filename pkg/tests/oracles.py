"""Independent reference implementations used only by the tests.

Nothing here imports the package's numerics: loops over Python complex
numbers, or numpy.linalg (LAPACK) where a factorization is needed.
"""

import cmath
import math

import numpy as np


def naive_matmul(a, b):
    n, m = len(a), len(a[0])
    p = len(b[0])
    out = [[0j] * p for _ in range(n)]
    for i in range(n):
        for j in range(p):
            s = 0j
            for t in range(m):
                s += complex(a[i][t]) * complex(b[t][j])
            out[i][j] = s
    return np.array(out, dtype=complex)


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def well_conditioned(rng, n, max_cond=1e3):
    while True:
        a = random_complex(rng, (n, n))
        if np.linalg.cond(a) < max_cond:
            return a


def proposed_design_direct(h1, g, h2, noise_var, p_s, p_r):
    """The proposed scheme written out with explicit inverses."""
    k = h1.shape[0]
    inv = np.linalg.inv
    alpha = k * noise_var / p_s
    gamma = k * noise_var / p_r
    p = h1.conj().T @ inv(h1 @ h1.conj().T + alpha * np.eye(k))
    f_t = h2.conj().T @ inv(h2 @ h2.conj().T + gamma * np.eye(k))
    gp = g @ p
    f = f_t @ inv(gp.conj().T @ gp) @ gp.conj().T
    rho_s = math.sqrt(p_s / np.trace(p @ p.conj().T).real)
    relay = np.trace(rho_s ** 2 * f @ g @ p @ p.conj().T @ g.conj().T @ f.conj().T
                     + noise_var * f @ f.conj().T).real
    rho_r = math.sqrt(p_r / relay)
    return p, f, f_t, rho_s, rho_r


def scalar_rates(h1, h2, p, f, f_t, rho_s, rho_r, noise_var):
    """
    Per-user (sinr1, sinr2, exact, lower) by scalar loops.

    The exact rate uses det(C + A A^H) / det(C) with hand-expanded 2x2
    determinants instead of forming A A^H C^{-1}.
    """
    h1 = [[complex(x) for x in row] for row in np.asarray(h1)]
    h2 = [[complex(x) for x in row] for row in np.asarray(h2)]
    p = [[complex(x) for x in row] for row in np.asarray(p)]
    f = [[complex(x) for x in row] for row in np.asarray(f)]
    f_t = [[complex(x) for x in row] for row in np.asarray(f_t)]
    K = len(h1)
    mb = len(p)
    mr = len(f)

    def gain(h, w, k, j, n):
        return sum(h[k][m] * w[m][j] for m in range(n))

    out = []
    for k in range(K):
        d = [rho_s * gain(h1, p, k, j, mb) for j in range(K)]
        r = [rho_r * rho_s * gain(h2, f_t, k, j, mr) for j in range(K)]
        fwd = sum(abs(gain(h2, f, k, j, mr)) ** 2 for j in range(len(f[0])))
        n11 = noise_var
        n22 = noise_var * rho_r ** 2 * fwd + noise_var
        i11 = sum(abs(d[j]) ** 2 for j in range(K) if j != k)
        i22 = sum(abs(r[j]) ** 2 for j in range(K) if j != k)
        i12 = sum(d[j] * r[j].conjugate() for j in range(K) if j != k)
        sinr1 = abs(d[k]) ** 2 / (i11 + n11)
        sinr2 = abs(r[k]) ** 2 / (i22 + n22)
        c11, c22, c12 = i11 + n11, i22 + n22, i12
        det_c = c11 * c22 - abs(c12) ** 2
        s11 = c11 + abs(d[k]) ** 2
        s22 = c22 + abs(r[k]) ** 2
        s12 = c12 + d[k] * r[k].conjugate()
        det_s = s11 * s22 - abs(s12) ** 2
        exact = 0.5 * math.log2(det_s / det_c)
        lower = 0.5 * math.log2(1 + sinr1 + sinr2)
        out.append((sinr1, sinr2, exact, lower))
    return out


def eig_logdet2(m):
    """log2 det via the eigenvalues of a general square matrix."""
    ev = np.linalg.eigvals(m)
    return float(np.sum(np.log2(ev)).real)


def draw_reference(rng, k, sigma2):
    """Channels from numpy's own Gaussian sampler (independent of the package RNG)."""
    s_h1, s_g, s_h2 = sigma2
    return (random_complex(rng, (k, k), math.sqrt(s_h1)),
            random_complex(rng, (k, k), math.sqrt(s_g)),
            random_complex(rng, (k, k), math.sqrt(s_h2)))
