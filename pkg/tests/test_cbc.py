"""CBC search: kernel, criterion and construction against brute force.

Every oracle here is written from the definitions: literal frequency
sums, fast Walsh-Hadamard transforms of the weight sequence, and joint
dual-net enumeration. None of them share code with the library paths
they check.
"""

import math
from itertools import product as iter_product

import numpy as np
import pytest

from hoqmc import cbc, gf2, lattice
from hoqmc.weights import WeightSpec


# ---------------------------------------------------------------------------
# independent oracles


def mu_oracle(k, alpha):
    """Sum of the alpha largest 1-bit positions, from the expansion."""
    positions = [i + 1 for i in range(k.bit_length()) if k >> i & 1]
    return sum(sorted(positions, reverse=True)[:alpha])


def wal_oracle(k, y, precision):
    total = 0
    for a in range(1, precision + 1):
        total += (k >> (a - 1) & 1) * (y >> (precision - a) & 1)
    return -1 if total % 2 else 1


def omega_ksum_oracle(y, alpha, precision):
    """Literal frequency sum; exponential cost, tiny cases only."""
    return sum(
        2.0 ** (-mu_oracle(k, alpha)) * wal_oracle(k, y, precision)
        for k in range(1, 1 << precision)
    )


def omega_wht_oracle(alpha, precision):
    """All kernel values at once via a fast Walsh-Hadamard transform.

    omega(y) = sum_k w(k) (-1)^<bitrev(k), y>, so transforming the
    bit-reversed weight sequence gives the kernel on every coordinate.
    """
    P = precision
    w = np.zeros(1 << P)
    for k in range(1, 1 << P):
        rev = int(bin(k)[2:].zfill(P)[::-1], 2)
        w[rev] = 2.0 ** (-mu_oracle(k, alpha))
    # in-place butterfly
    h = 1
    while h < len(w):
        for start in range(0, len(w), 2 * h):
            a = w[start : start + h].copy()
            b = w[start + h : start + 2 * h].copy()
            w[start : start + h] = a + b
            w[start + h : start + 2 * h] = a - b
        h *= 2
    return w


def dual_net_criterion_oracle(coords, alpha, m, w):
    """Enumerate the joint dual net of every nonempty projection."""
    N, d = coords.shape
    P = alpha * m
    K = 1 << P
    walmat = [
        np.array(
            [[wal_oracle(k, int(y), P) for y in coords[:, j]] for k in range(K)],
            dtype=np.float64,
        )
        for j in range(d)
    ]

    def gamma(u):
        total = 0.0
        for nu in iter_product(range(1, alpha + 1), repeat=len(u)):
            fac = 1.0
            spod_sum = 0
            for j, nu_j in zip(u, nu):
                fac *= (2.0 if nu_j == alpha else 1.0) * w.beta(j) ** nu_j
                if w.is_product_dim(j):
                    fac *= math.factorial(nu_j)
                else:
                    spod_sum += nu_j
            total += fac * math.factorial(spod_sum)
        return total

    mu_tab = np.array([mu_oracle(k, alpha) for k in range(K)])
    weight_tab = 2.0 ** (-mu_tab.astype(float))
    total = 0.0
    dims = list(range(1, d + 1))
    for r in range(1, d + 1):
        from itertools import combinations

        for u in combinations(dims, r):
            mats = [walmat[j - 1][1:] for j in u]  # nonzero frequencies
            wt = [weight_tab[1:] for _ in u]
            if r == 1:
                member = mats[0].sum(axis=1) == N
                mass = float(np.sum(wt[0][member]))
            elif r == 2:
                prod = mats[0] @ mats[1].T  # (K-1, K-1) joint sums
                member = prod == N
                mass = float(wt[0] @ member @ wt[1])
            else:
                raise ValueError("vectorized oracle handles d <= 2 only")
            total += gamma(list(u)) * w.walsh_constant**r * mass
    return total


def dual_net_criterion_oracle_any(coords, alpha, m, w):
    """Plain nested enumeration, for very small sizes and any d."""
    N, d = coords.shape
    P = alpha * m
    K = 1 << P

    def gamma(u):
        total = 0.0
        for nu in iter_product(range(1, alpha + 1), repeat=len(u)):
            fac = 1.0
            spod_sum = 0
            for j, nu_j in zip(u, nu):
                fac *= (2.0 if nu_j == alpha else 1.0) * w.beta(j) ** nu_j
                if w.is_product_dim(j):
                    fac *= math.factorial(nu_j)
                else:
                    spod_sum += nu_j
            total += fac * math.factorial(spod_sum)
        return total

    from itertools import combinations

    total = 0.0
    for r in range(1, d + 1):
        for u in combinations(range(1, d + 1), r):
            mass = 0.0
            for ks in iter_product(range(1, K), repeat=r):
                char = 0
                for n in range(N):
                    prod = 1
                    for j, k in zip(u, ks):
                        prod *= wal_oracle(k, int(coords[n, j - 1]), P)
                    char += prod
                if char == N:
                    mass += 2.0 ** (-sum(mu_oracle(k, alpha) for k in ks))
            total += gamma(list(u)) * w.walsh_constant**r * mass
    return total


# ---------------------------------------------------------------------------
# mu_alpha and wal


def test_mu_alpha_values():
    assert cbc.mu_alpha(0, 2) == 0
    assert cbc.mu_alpha(6, 2) == 5       # binary 110: positions 3+2
    assert cbc.mu_alpha(7, 2) == 5       # 111: two largest of 3,2,1
    assert cbc.mu_alpha(7, 3) == 6
    for k in range(256):
        for alpha in (1, 2, 3, 4):
            assert cbc.mu_alpha(k, alpha) == mu_oracle(k, alpha)


def test_wal_values():
    assert cbc.wal(0, 0b11, 2) == 1
    assert cbc.wal(1, 0b10, 2) == -1     # y = 0.5, first digit 1
    assert cbc.wal(3, 0b11, 2) == 1      # y = 0.75, exponent 2
    for P in (3, 5):
        for k in range(1 << P):
            for y in range(1 << P):
                assert cbc.wal(k, y, P) == wal_oracle(k, y, P)


# ---------------------------------------------------------------------------
# kernel


def test_kernel_spot_values():
    assert cbc.kernel_omega(0, 2, 1) == pytest.approx(0.875, abs=1e-15)
    assert cbc.kernel_omega(0b10, 2, 1) == pytest.approx(-0.375, abs=1e-15)


def test_kernel_matches_literal_sum_small():
    for alpha, m in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)]:
        P = alpha * m
        for y in range(1 << P):
            want = omega_ksum_oracle(y, alpha, P)
            got = cbc.kernel_omega(y, alpha, m)
            assert got == pytest.approx(want, abs=1e-12), (alpha, m, y)


@pytest.mark.parametrize("alpha,m", [(2, 8), (3, 5), (2, 7), (3, 4)])
def test_kernel_matches_wht_oracle_all_coordinates(alpha, m):
    P = alpha * m
    want = omega_wht_oracle(alpha, P)
    ys = np.arange(1 << P, dtype=np.uint64)
    got = cbc.kernel_omega_batch(ys, alpha, m)
    assert np.max(np.abs(got - want)) <= 1e-12


def test_kernel_rejects_low_order():
    with pytest.raises(ValueError, match="order must be >= 2"):
        cbc.kernel_omega(0, 1, 4)


@pytest.mark.parametrize("alpha", [2, 3])
def test_kernel_poly_table_exact(alpha):
    for m in (1, 2, 3, 4):
        P = alpha * m
        coef, om0 = cbc.kernel_poly_table(alpha, P)
        ys = np.arange(1 << P, dtype=np.uint64)
        dp = cbc.kernel_omega_batch(ys, alpha, m)
        assert om0 == pytest.approx(dp[0], abs=1e-14)
        for y in range(1, 1 << P):
            z = P - int(y).bit_length() + 1
            v = y * 2.0 ** (-P)
            poly = sum(coef[z, t] * v**t for t in range(alpha))
            assert poly == pytest.approx(dp[y], abs=1e-12)


# ---------------------------------------------------------------------------
# criterion


def _coords(p, m, alpha, comps):
    return lattice.interlaced_coords(p, m, alpha, comps)


def test_criterion_single_dim_product_identity():
    # s = 1: E = (gamma_1 C / N) * sum_n omega(y_n1)
    m, alpha = 3, 2
    p = gf2.default_modulus(m)
    w = WeightSpec("product", 0.2, 2.0, alpha, walsh_constant=0.1)
    coords = _coords(p, m, alpha, [3, 5])
    om = cbc.kernel_omega_batch(coords[:, 0], alpha, m)
    want = w.product_gamma(1) * 0.1 * float(np.mean(om))
    assert cbc.criterion(coords, alpha, m, w) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("kind", ["product", "spod"])
def test_criterion_matches_dual_net_enumeration_m3(kind):
    m, alpha = 3, 2
    p = gf2.default_modulus(m)
    w = WeightSpec(kind, 0.25, 2.0, alpha, walsh_constant=0.1)
    comps = [3, 5, 1, 6, 2, 7]
    coords = _coords(p, m, alpha, comps)
    got = cbc.criterion(coords, alpha, m, w)
    want = dual_net_criterion_oracle_any(coords, alpha, m, w)
    assert got == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("kind", ["product", "spod", "hybrid"])
def test_criterion_matches_dual_net_enumeration_m4(kind):
    m, alpha = 4, 2
    p = gf2.default_modulus(m)
    w = WeightSpec(kind, 0.2, 2.0, alpha, walsh_constant=0.1, hybrid_cutoff=1)
    comps = [3, 9, 7, 13]
    coords = _coords(p, m, alpha, comps)
    got = cbc.criterion(coords, alpha, m, w)
    want = dual_net_criterion_oracle(coords, alpha, m, w)
    assert got == pytest.approx(want, rel=1e-10)


def test_criterion_partial_slot_uses_zero_digits():
    m, alpha = 3, 2
    p = gf2.default_modulus(m)
    w = WeightSpec("spod", 0.2, 2.0, alpha)
    # odd number of components: last dimension has a zero-padded slot
    c_partial = cbc.criterion(_coords(p, m, alpha, [3, 5, 6]), alpha, m, w)
    c_full = cbc.criterion(_coords(p, m, alpha, [3, 5, 6, 1]), alpha, m, w)
    assert c_partial != pytest.approx(c_full, rel=1e-6)


def test_criterion_vanishes_as_theta_to_zero():
    m, alpha = 3, 2
    p = gf2.default_modulus(m)
    coords = _coords(p, m, alpha, [3, 5])
    small = cbc.criterion(coords, alpha, m, WeightSpec("product", 1e-12, 2.0, alpha))
    assert abs(small) < 1e-12


def test_spod_reduces_to_product_at_one_dimension():
    m, alpha = 4, 2
    p = gf2.default_modulus(m)
    coords = _coords(p, m, alpha, [5, 11])
    for theta in (0.2, 0.25):
        a = cbc.criterion(coords, alpha, m, WeightSpec("spod", theta, 2.0, alpha))
        b = cbc.criterion(coords, alpha, m, WeightSpec("product", theta, 2.0, alpha))
        assert a == pytest.approx(b, rel=1e-13)


# ---------------------------------------------------------------------------
# construction


def _slot_values(p, m, alpha, prefix, w):
    out = {}
    for q in range(1, 1 << m):
        out[q] = cbc.criterion(_coords(p, m, alpha, prefix + [q]), alpha, m, w)
    return out


@pytest.mark.parametrize(
    "kind,s,m,alpha",
    [
        ("product", 3, 4, 2),
        ("spod", 3, 4, 2),
        ("product", 2, 3, 2),
        ("spod", 2, 3, 3),
        ("hybrid", 3, 3, 2),
    ],
)
def test_cbc_each_slot_is_argmin_of_recomputed_criterion(kind, s, m, alpha):
    w = WeightSpec(kind, 0.2, 2.0, alpha, walsh_constant=0.1, hybrid_cutoff=1)
    res = cbc.cbc_construct(s, m, w)
    p = res.vector.modulus
    for idx, chosen in enumerate(res.vector.components):
        prefix = list(res.vector.components[:idx])
        vals = _slot_values(p, m, alpha, prefix, w)
        vmin = min(vals.values())
        assert vals[chosen] <= vmin + 1e-9 * (1.0 + abs(vmin))
        # deterministic tie break: smallest encoding among value ties
        ties = [q for q, v in vals.items() if v <= vmin + 1e-11 * (1.0 + abs(vmin))]
        assert chosen == min(ties)
        # recorded trace equals the recomputed partial criterion
        assert res.criterion_trace[idx] == pytest.approx(
            vals[chosen], rel=1e-10, abs=1e-13
        )


def test_cbc_incremental_equals_full_recompute_larger():
    # s <= 4, m <= 5, both weight kinds: trace vs from-scratch values
    for kind in ("product", "spod"):
        w = WeightSpec(kind, 0.2, 2.0, 2, walsh_constant=0.1)
        res = cbc.cbc_construct(4, 5, w)
        p = res.vector.modulus
        for idx in range(len(res.vector.components)):
            comps = list(res.vector.components[: idx + 1])
            direct = cbc.criterion(_coords(p, 5, 2, comps), 2, 5, w)
            assert res.criterion_trace[idx] == pytest.approx(direct, rel=1e-10)


def test_cbc_exhaustive_global_minimum_s1():
    w = WeightSpec("product", 0.2, 2.0, 2, walsh_constant=0.1)
    res = cbc.cbc_construct(1, 3, w)
    p = res.vector.modulus
    best_val = None
    for q1 in range(1, 8):
        for q2 in range(1, 8):
            v = cbc.criterion(_coords(p, 3, 2, [q1, q2]), 2, 3, w)
            if best_val is None or v < best_val:
                best_val = v
    got = cbc.criterion(_coords(p, 3, 2, list(res.vector.components)), 2, 3, w)
    assert got == pytest.approx(best_val, rel=1e-12)


def test_cbc_deterministic():
    w = WeightSpec("spod", 0.2, 2.0, 2)
    a = cbc.cbc_construct(3, 4, w)
    b = cbc.cbc_construct(3, 4, w)
    assert a.vector == b.vector
    assert a.criterion_trace == b.criterion_trace


def test_cbc_trace_finite_positive():
    w = WeightSpec("spod", 0.25, 2.0, 3)
    res = cbc.cbc_construct(3, 3, w)
    assert len(res.criterion_trace) == 9
    assert all(math.isfinite(t) and t > 0 for t in res.criterion_trace)
    assert res.elapsed >= 0
    assert res.vector.weight_fingerprint == w.fingerprint()


def test_cbc_m1_single_candidate():
    w = WeightSpec("product", 0.2, 2.0, 2)
    res = cbc.cbc_construct(2, 1, w, modulus=3)
    assert res.vector.components == (1, 1, 1, 1)


def test_cbc_rejects_precision_overflow():
    w = WeightSpec("spod", 0.2, 2.0, 3)
    with pytest.raises(ValueError, match="precision overflow"):
        cbc.cbc_construct(2, 22, w)
