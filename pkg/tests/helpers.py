"""Shared oracles for the test suite.

Everything here is an independent reference implementation: dense
Pauli-product Hamiltonians, a truncated-Fock boson propagator and
Poisson-binomial conditionals, all built from first principles so the
package code can be checked against them.
"""

import math

import numpy as np
import scipy.linalg as sla

TWO_PI = 2.0 * math.pi
JMAX = TWO_PI * 600.0     # rad/s, default strongest coupling
B_FIELD = TWO_PI * 10e3   # rad/s, default transverse field

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
# basis index 1 of each factor is spin up, matching the bitmask basis
SZ = np.array([[-1.0, 0.0], [0.0, 1.0]])


def site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Embed a single-site operator; site is 1-based, bit site-1 fastest."""
    out = np.eye(1)
    for k in range(n, 0, -1):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def dense_ising_oracle(j_script: np.ndarray, b: float) -> np.ndarray:
    """sum_{i<j} J_ij sx_i sx_j + B sum_i sz_i as explicit Pauli products."""
    n = j_script.shape[0]
    h = np.zeros((2**n, 2**n))
    for i in range(1, n + 1):
        h += b * site_operator(SZ, i, n)
        for j in range(i + 1, n + 1):
            if j_script[i - 1, j - 1] != 0.0:
                h += j_script[i - 1, j - 1] * (
                    site_operator(SX, i, n) @ site_operator(SX, j, n)
                )
    return h


def dense_xy_oracle(j_script: np.ndarray, b: float) -> np.ndarray:
    """Flip-flop truncation of the same chain, still on all 2^N states."""
    n = j_script.shape[0]
    sp = (SX + 1.0j * SY) / 2.0
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(1, n + 1):
        h += b * site_operator(SZ, i, n)
        for j in range(i + 1, n + 1):
            hop = site_operator(sp, i, n) @ site_operator(sp, j, n).conj().T
            h += j_script[i - 1, j - 1] * (hop + hop.conj().T)
    return h


def dense_sz_dynamics(h: np.ndarray, psi0: np.ndarray, times, n: int
                      ) -> np.ndarray:
    """<sigma^z_i(t)> for each site by brute-force eigendecomposition."""
    evals, evecs = np.linalg.eigh(h)
    amps = evecs.conj().T @ psi0
    zdiag = np.array([np.diag(site_operator(SZ, i, n)) for i in range(1, n + 1)])
    out = np.empty((len(times), n))
    for row, t in enumerate(times):
        psi = evecs @ (np.exp(-1j * evals * t) * amps)
        out[row] = zdiag @ (np.abs(psi) ** 2)
    return out


def product_state(flipped, n: int) -> np.ndarray:
    psi = np.zeros(2**n)
    psi[sum(1 << (i - 1) for i in flipped)] = 1.0
    return psi


# -- truncated-Fock boson model ---------------------------------------------

def fock_boson_hamiltonian(j_script: np.ndarray, b: float, n_max: int
                           ) -> tuple[np.ndarray, list[np.ndarray]]:
    """Dense H0 = sum_ij Jij [a+_i a_j + (a+_i a+_j + a_i a_j)/2] + 2B sum n_i.

    Bosons live on a per-site Fock ladder truncated at n_max; returns the
    Hamiltonian and the per-site number operators.
    """
    n = j_script.shape[0]
    d = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, d)), k=1)
    num = a.T @ a

    def embed(op, site):
        out = np.eye(1)
        for k in range(n, 0, -1):
            out = np.kron(out, op if k == site else np.eye(d))
        return out

    ops_a = [embed(a, s) for s in range(1, n + 1)]
    ops_n = [embed(num, s) for s in range(1, n + 1)]
    h = 2.0 * b * sum(ops_n)
    for i in range(n):
        for j in range(n):
            if i == j or j_script[i, j] == 0.0:
                continue
            h = h + j_script[i, j] * (ops_a[i].T @ ops_a[j])
            h = h + 0.5 * j_script[i, j] * (ops_a[i].T @ ops_a[j].T)
            h = h + 0.5 * j_script[i, j] * (ops_a[i] @ ops_a[j])
    return h, ops_n


def fock_occupation_dynamics(j_script: np.ndarray, b: float, occ0: np.ndarray,
                             times, n_max: int = 4) -> np.ndarray:
    """<n_i(t)> under the truncated-Fock H0 via scipy's expm."""
    n = len(occ0)
    d = n_max + 1
    h, ops_n = fock_boson_hamiltonian(j_script, b, n_max)
    idx = 0
    for site in range(1, n + 1):  # same fastest-bit layout as embed()
        idx += int(occ0[site - 1]) * d ** (site - 1)
    psi = np.zeros(h.shape[0], dtype=complex)
    psi[idx] = 1.0
    out = np.empty((len(times), n))
    t_prev = 0.0
    for row, t in enumerate(times):
        if t != t_prev:
            psi = sla.expm(-1j * h * (t - t_prev)) @ psi
            t_prev = t
        out[row] = [float(np.real(np.vdot(psi, op @ psi))) for op in ops_n]
    return out


# -- Poisson-binomial conditionals -------------------------------------------

def poisson_binomial_pmf(p: np.ndarray) -> np.ndarray:
    """Distribution of the total count of independent Bernoulli(p_i)."""
    pmf = np.zeros(len(p) + 1)
    pmf[0] = 1.0
    for pi in p:
        pmf[1:] = pmf[1:] * (1.0 - pi) + pmf[:-1] * pi
        pmf[0] *= 1.0 - pi
    return pmf


def conditional_marginals(p: np.ndarray, k: int) -> np.ndarray:
    """P(bit_i = 1 | total = k) for independent Bernoulli bits."""
    p = np.asarray(p, dtype=float)
    total = poisson_binomial_pmf(p)[k]
    out = np.empty(len(p))
    for i in range(len(p)):
        rest = np.delete(p, i)
        part = poisson_binomial_pmf(rest)[k - 1] if k >= 1 else 0.0
        out[i] = p[i] * part / total
    return out


def mixture_conditional_truth(components, k: int) -> np.ndarray:
    """Post-selected marginals of a mixture of independent-Bernoulli laws.

    components: iterable of (weight, p_vector); conditioning is on the
    detected count k, so each component is reweighted by its own
    probability of producing k.
    """
    num = None
    den = 0.0
    for w, p in components:
        pk = poisson_binomial_pmf(np.asarray(p))[k]
        if pk == 0.0:
            continue
        q = conditional_marginals(p, k)
        num = w * pk * q if num is None else num + w * pk * q
        den += w * pk
    return num / den


def detected_probability(p: np.ndarray, err: float) -> np.ndarray:
    """Per-site up probability after symmetric readout errors."""
    p = np.asarray(p, dtype=float)
    return p * (1.0 - err) + (1.0 - p) * err
