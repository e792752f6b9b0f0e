"""Worst-case-error criterion and fast CBC search for interlaced rules.

The quality criterion for a (partially built) point set is

    E = (1/N) sum_n sum_{nonempty u} gamma_u prod_{j in u} C * omega(y_nj)

where omega is the truncated Walsh kernel

    omega(y) = sum_{k=1}^{2^P - 1} 2^(-mu_alpha(k)) wal_k(y),   P = alpha*m.

Two facts make the search fast. First, for product / SPOD / hybrid
weights the subset sum collapses into per-point accumulators that are
updated once per dimension. Second, omega(y) is a polynomial of degree
alpha-1 in the coordinate value whose coefficients depend only on the
position of the leading one digit of y, so the per-slot candidate scan
becomes a handful of cyclic cross-correlations over the multiplicative
group of the residue field, evaluated with FFTs in O(N log N). The
closed form holds for alpha <= 3, which covers every supported
interlacing order here; higher orders would need extra digit moments.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from hoqmc import gf2, lattice
from hoqmc.weights import WeightSpec

_Z_INF = 1 << 30  # sentinel leading position for the zero coordinate
_TIE_BAND = 1e-11
_ORDER_CAP = 60
_LOG_TINY = math.log(5e-324)


# ---------------------------------------------------------------------------
# Walsh machinery


def mu_alpha(k: int, alpha: int) -> int:
    """Sum of the alpha largest one-digit positions of k (0 for k = 0).

    Positions are 1-based: bit a-1 of k sits at position a.
    """
    if alpha < 1:
        raise ValueError("order must be at least 1")
    total = 0
    for _ in range(alpha):
        if k == 0:
            break
        a = k.bit_length()
        total += a
        k ^= 1 << (a - 1)
    return total


def wal(k: int, y: int, precision: int) -> int:
    """Walsh character value, +1 or -1.

    y is a scaled-integer coordinate with the given number of digits;
    digit a of y (weight 2^-a, stored as bit precision-a) pairs with
    bit a-1 of k.
    """
    if not 0 <= k < (1 << precision):
        raise ValueError("frequency out of range")
    rev = 0
    for a in range(1, precision + 1):
        if k >> (a - 1) & 1:
            rev |= 1 << (precision - a)
    return 1 - 2 * ((rev & y).bit_count() & 1)


_TAIL_POSITIONS = 64  # frequency digits beyond this depth are below eps


def _kernel_dp(
    y: np.ndarray, alpha: int, precision: int, tail: bool = False
) -> np.ndarray:
    """Digit-position dynamic program for the Walsh kernel.

    Processes positions from the deepest digit up, tracking how many of
    the alpha most significant one-digit positions of the frequency
    have been placed. O(alpha^2 * precision) per coordinate, vectorized
    across the input array. With tail=True the frequency range extends
    past the coordinate precision (pairing with zero digits), which is
    the untruncated kernel up to double roundoff.
    """
    y = np.asarray(y, dtype=np.uint64)
    state = [np.zeros(y.shape, dtype=np.float64) for _ in range(alpha + 1)]
    state[0][...] = 1.0
    one = np.uint64(1)
    top = precision + _TAIL_POSITIONS if tail else precision
    for a in range(top, 0, -1):
        if a > precision:
            sgn = 1.0
        else:
            bit = ((y >> np.uint64(precision - a)) & one).astype(np.float64)
            sgn = 1.0 - 2.0 * bit
        wfac = 2.0 ** (-a)
        state[alpha] += state[alpha] * sgn + state[alpha - 1] * (wfac * sgn)
        for c in range(alpha - 1, 0, -1):
            state[c] += state[c - 1] * (wfac * sgn)
    out = state[1]
    for c in range(2, alpha + 1):
        out = out + state[c]
    return out


def kernel_omega_batch(y: np.ndarray, alpha: int, m: int) -> np.ndarray:
    """Truncated Walsh kernel on an array of alpha*m-digit coordinates."""
    if alpha < 2:
        raise ValueError("order must be >= 2")
    return _kernel_dp(y, alpha, alpha * m)


def kernel_omega(y: int, alpha: int, m: int) -> float:
    """Scalar kernel value for a coordinate y < 2^(alpha*m)."""
    return float(kernel_omega_batch(np.array([y], dtype=np.uint64), alpha, m)[0])


def kernel_poly_table(
    alpha: int, precision: int, tail: bool = False
) -> tuple[np.ndarray, float]:
    """Closed-form kernel coefficients per leading-digit position.

    Returns (coef, omega_zero): for every y whose leading one digit
    sits at position z in 1..precision,

        omega(y) = sum_{t < alpha} coef[z, t] * value(y)^t,

    and omega_zero is the kernel at y = 0. Rows are fitted exactly from
    alpha kernel evaluations within the class (fewer for the deepest
    classes, which hold fewer than alpha members).
    """
    if alpha < 2:
        raise ValueError("order must be >= 2")
    if alpha > 3:
        raise ValueError("polynomial kernel form implemented for alpha <= 3 only")
    P = precision
    coef = np.zeros((P + 1, alpha))
    u_choices = (0.0, 0.5, 0.25)
    for z in range(1, P + 1):
        npts = min(alpha, 1 << min(P - z, 2))
        base = 1 << (P - z)
        ys = [base]
        if npts >= 2:
            ys.append(base | (base >> 1))
        if npts >= 3:
            ys.append(base | (base >> 2))
        vals = _kernel_dp(np.array(ys, dtype=np.uint64), alpha, P, tail=tail)
        us = np.array(u_choices[:npts])
        vand = np.vander(us, N=npts, increasing=True)
        a = np.linalg.solve(vand, vals)  # omega = sum a_t u^t, y = 2^-z (1+u)
        a = np.concatenate([a, np.zeros(alpha - npts)])
        # convert the u-polynomial to a plain polynomial in the value
        if alpha == 2:
            c1 = a[1] * (1 << z)
            c0 = a[0] - a[1]
            coef[z, :] = (c0, c1)
        else:
            c2 = a[2] * float(1 << z) ** 2
            c1 = (a[1] - 2.0 * a[2]) * (1 << z)
            c0 = a[0] - a[1] + a[2]
            coef[z, :] = (c0, c1, c2)
    omega_zero = float(_kernel_dp(np.array([0], dtype=np.uint64), alpha, P, tail=tail)[0])
    return coef, omega_zero


# ---------------------------------------------------------------------------
# Criterion (direct evaluation)


def _spod_order_cap(w: WeightSpec, spod_dims, omega_zero: float) -> int:
    """Largest retained total order for the SPOD accumulator tables.

    Capped at min(alpha * #dims, 60); orders whose best-case magnitude
    l! * prod of the ceil(l/alpha) largest per-dimension factors
    underflows double precision are dropped as well.
    """
    spod_dims = list(spod_dims)
    if not spod_dims:
        return 0
    lmax = min(w.alpha * len(spod_dims), _ORDER_CAP)
    f = sorted(
        (
            2.0 * w.walsh_constant * abs(omega_zero) * max(w.beta(j), w.beta(j) ** w.alpha)
            for j in spod_dims
        ),
        reverse=True,
    )
    logf = np.log(np.maximum(f, 5e-324))
    cum = np.concatenate([[0.0], np.cumsum(logf)])
    cap = 0
    for l in range(1, lmax + 1):
        r = min((l + w.alpha - 1) // w.alpha, len(f))
        if math.lgamma(l + 1) + cum[r] >= _LOG_TINY:
            cap = l
    return cap


def _fold_spod(V: np.ndarray, om: np.ndarray, beta_j: float, w: WeightSpec) -> np.ndarray:
    """One-dimension update of the per-point order-table V."""
    cap = V.shape[1] - 1
    out = V.copy()
    cw = w.walsh_constant * om
    for nu in range(1, w.alpha + 1):
        if nu > cap:
            break
        fac = (2.0 if nu == w.alpha else 1.0) * beta_j**nu
        out[:, nu:] += (cw * fac)[:, None] * V[:, : cap - nu + 1]
    return out


def criterion(
    coords: np.ndarray, alpha: int, m: int, w: WeightSpec, kernel: str = "truncated"
) -> float:
    """Criterion value of a (partially built) coordinate table.

    coords is the integer table from lattice.interlaced_coords; a
    trailing dimension with unchosen digit slots scores with those
    digits at zero, which is exactly how the CBC search ranks partial
    vectors. kernel selects the frequency range of the Walsh kernel:
    "truncated" stops at 2^(alpha m), "infinite" keeps the tail.
    """
    if w.alpha != alpha:
        raise ValueError("weight order does not match interlacing factor")
    tail = _kernel_tail_flag(kernel)
    N, d = coords.shape
    C = w.walsh_constant
    omega_zero = float(_kernel_dp(np.array([0], dtype=np.uint64), alpha, alpha * m, tail=tail)[0])
    spod_dims = [j for j in range(1, d + 1) if not w.is_product_dim(j)]
    cap = _spod_order_cap(w, spod_dims, omega_zero)
    prod_acc = np.ones(N)
    V = None
    if spod_dims:
        V = np.zeros((N, cap + 1))
        V[:, 0] = 1.0
    for j in range(1, d + 1):
        om = _kernel_dp(coords[:, j - 1], alpha, alpha * m, tail=tail)
        if w.is_product_dim(j):
            prod_acc = prod_acc * (1.0 + C * w.product_gamma(j) * om)
        else:
            V = _fold_spod(V, om, w.beta(j), w)
    if V is not None:
        fact = np.array([math.factorial(l) for l in range(cap + 1)], dtype=np.float64)
        S = V @ fact
    else:
        S = 1.0
    E = float(np.sum(prod_acc * S - 1.0) / N)
    if not math.isfinite(E):
        raise ArithmeticError("criterion overflow")
    return E


# ---------------------------------------------------------------------------
# Fast CBC construction


@dataclass(frozen=True)
class CBCResult:
    vector: lattice.GeneratingVector
    criterion_trace: tuple[float, ...]
    elapsed: float


def _find_generator(p: int, m: int) -> int:
    """Generator of the cyclic group of nonzero residues mod p."""
    M = (1 << m) - 1
    if M == 1:
        return 1
    primes = []
    n = M
    d = 2
    while d * d <= n:
        if n % d == 0:
            primes.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        primes.append(n)
    for g in range(2, 1 << m):
        if all(gf2.pow_mod(g, M // r, p) != 1 for r in primes):
            return g
    raise AssertionError("no generator found")  # unreachable for irreducible p


def _exp_table(p: int, m: int) -> np.ndarray:
    """EXP[i] = g^i for i = 0..2^m-2, as polynomial encodings."""
    M = (1 << m) - 1
    g = _find_generator(p, m)
    out = np.empty(M, dtype=np.int64)
    v = 1
    for i in range(M):
        out[i] = v
        v = gf2.mul_mod(v, g, p)
    return out


def _digit_tables(p: int, m: int, alpha: int):
    """Per-residue digit words, slot-1 spread values and leading levels.

    DIG[r] is the m-digit word of r/p; BV[r] is the value of those
    digits spread to interlace slot 1 (so slot k scales it by 2^(1-k));
    LEAD[r] is the 1-based index of the leading digit, m+1 for r = 0.
    """
    r = np.arange(1 << m, dtype=np.uint64)
    dig = lattice._digit_word_vec(r, p, m)
    bv = np.zeros(1 << m)
    for l in range(1, m + 1):
        bit = ((dig >> np.uint64(m - l)) & np.uint64(1)).astype(np.float64)
        bv += bit * 2.0 ** (-(alpha * (l - 1) + 1))
    lead = (m - _bit_length_vec(dig) + 1).astype(np.int64)
    return dig, bv, lead


def _bit_length_vec(a: np.ndarray) -> np.ndarray:
    """Vectorized bit length for uint64 arrays (0 maps to 0)."""
    out = np.zeros(a.shape, dtype=np.int64)
    v = a.copy()
    while np.any(v):
        nz = v != 0
        out[nz] += 1
        v >>= np.uint64(1)
    return out


class _SlotScanner:
    """FFT evaluation of all candidate criterion values for one slot.

    Candidates q and nonzero points n are enumerated along the cyclic
    group, where the candidate digit word of point g^i under q = g^kappa
    depends only on (i + kappa) mod M. For each pairing of a point-side
    leading-position bucket with a candidate-side one, the kernel
    polynomial splits into separable value powers, so the scan is a sum
    of cyclic cross-correlations.
    """

    def __init__(self, p: int, m: int, alpha: int, tail: bool = False):
        self.m = m
        self.alpha = alpha
        self.P = alpha * m
        self.M = (1 << m) - 1
        self.exp = _exp_table(p, m)
        self.dig, self.bv, self.lead = _digit_tables(p, m, alpha)
        self.coef, self.omega_zero = kernel_poly_table(alpha, self.P, tail=tail)
        bv_log = self.bv[self.exp]
        lead_log = self.lead[self.exp]
        # candidate-side bucket transforms, slot independent
        self.cand_fft = np.empty((alpha, m + 1), dtype=object)
        for l0 in range(1, m + 1):
            mask = (lead_log == l0).astype(np.float64)
            powv = mask
            for t in range(alpha):
                self.cand_fft[t, l0] = np.fft.rfft(powv)
                powv = powv * bv_log
        # suffix sums over candidate levels: suf[t][l] = sum_{l0 >= l}
        self.cand_suffix = np.empty((alpha, m + 2), dtype=object)
        nfreq = len(self.cand_fft[0, 1])
        for t in range(alpha):
            acc = np.zeros(nfreq, dtype=complex)
            self.cand_suffix[t, m + 1] = acc.copy()
            for l0 in range(m, 0, -1):
                acc = acc + self.cand_fft[t, l0]
                self.cand_suffix[t, l0] = acc.copy()

    def scan(self, wv_log, yf_log, zf_log, slot_k):
        """Sum over nonzero points of wv * omega(partial y) per candidate."""
        alpha, m, M = self.alpha, self.m, self.M
        if M == 1:
            # single candidate q = 1 and single nonzero point n = 1
            znew = min(int(zf_log[0]), alpha * (int(self.lead[1]) - 1) + slot_k)
            yval = yf_log[0] + 2.0 ** (1 - slot_k) * self.bv[1]
            return np.array([wv_log[0] * self._poly_eval(znew, yval)])
        comb = math.comb
        kscale = 2.0 ** (1 - slot_k)  # bv holds slot-1 values
        occupied = np.unique(zf_log)
        nfreq = len(self.cand_fft[0, 1])
        point_fft = {}
        for z in occupied:
            mask = zf_log == z
            base = np.where(mask, wv_log, 0.0)
            row = []
            for t in range(alpha):
                row.append(np.fft.rfft(base))
                if t < alpha - 1:
                    base = base * yf_log
            point_fft[int(z)] = row
        occ_sorted = sorted(point_fft)
        # suffix sums of point buckets ordered by leading position
        suffix = {}
        acc = [np.zeros(nfreq, dtype=complex) for _ in range(alpha)]
        for z in reversed(occ_sorted):
            for t in range(alpha):
                acc[t] = acc[t] + point_fft[z][t]
            suffix[z] = [a.copy() for a in acc]

        out = np.zeros(nfreq, dtype=complex)
        # case A: candidate leading digit above every point digit
        for l0 in range(1, m + 1):
            zstar = alpha * (l0 - 1) + slot_k
            psi = self._suffix_above(suffix, occ_sorted, zstar)
            if psi is None:
                continue
            for t2 in range(alpha):
                g = np.zeros(nfreq, dtype=complex)
                for j in range(t2, alpha):
                    cj = self.coef[zstar, j]
                    if cj != 0.0:
                        g = g + (cj * comb(j, t2)) * psi[j - t2]
                out += (kscale**t2) * self.cand_fft[t2, l0] * np.conj(g)
        # case B: point leading digit at or above the candidate's
        for z in occ_sorted:
            if z >= _Z_INF:
                continue
            l0min = max(1, math.ceil((z - slot_k) / alpha) + 1)
            if l0min > m:
                continue
            for t2 in range(alpha):
                d = np.zeros(nfreq, dtype=complex)
                for j in range(t2, alpha):
                    cj = self.coef[z, j]
                    if cj != 0.0:
                        d = d + (cj * comb(j, t2)) * point_fft[z][j - t2]
                out += (kscale**t2) * self.cand_suffix[t2, l0min] * np.conj(d)
        return np.fft.irfft(out, M)

    @staticmethod
    def _suffix_above(suffix, occ_sorted, zstar):
        """Sum of point bucket transforms with leading position > zstar."""
        for z in occ_sorted:
            if z > zstar:
                return suffix[z]
        return None

    def _poly_eval(self, z, yval):
        if z >= _Z_INF:
            return self.omega_zero
        return float(sum(self.coef[z, t] * yval**t for t in range(self.alpha)))


def _kernel_tail_flag(kernel: str) -> bool:
    if kernel not in ("truncated", "infinite"):
        raise ValueError(f"unknown kernel mode {kernel!r}")
    return kernel == "infinite"


def cbc_construct(
    s: int,
    m: int,
    w: WeightSpec,
    modulus: int | None = None,
    kernel: str = "truncated",
) -> CBCResult:
    """Greedy slot-by-slot minimization of the criterion.

    Components are chosen in the order (dimension 1, slots 1..alpha),
    (dimension 2, slots 1..alpha), ...; while a dimension is under
    construction its unchosen digit slots contribute zero digits. Ties
    in a candidate scan are broken toward the smallest polynomial
    encoding, so the construction is fully deterministic.
    """
    t0 = time.perf_counter()
    if s < 1 or m < 1:
        raise ValueError("s and m must be positive")
    alpha = w.alpha
    if alpha * m > lattice.MAX_PRECISION:
        raise ValueError("precision overflow")
    p = gf2.default_modulus(m) if modulus is None else modulus
    if gf2.degree(p) != m or not gf2.is_irreducible(p):
        raise ValueError("modulus must be irreducible of degree m")
    N = 1 << m
    scanner = _SlotScanner(p, m, alpha, tail=_kernel_tail_flag(kernel))
    exp = scanner.exp
    C = w.walsh_constant
    omega_zero = scanner.omega_zero
    spod_dims = [j for j in range(1, s + 1) if not w.is_product_dim(j)]
    cap = _spod_order_cap(w, spod_dims, omega_zero)
    fact = np.array([math.factorial(l) for l in range(cap + 1)], dtype=np.float64)

    prod_acc = np.ones(N)
    V = None
    if spod_dims:
        V = np.zeros((N, cap + 1))
        V[:, 0] = 1.0

    n_nat = np.arange(N, dtype=np.uint64)
    components: list[int] = []
    trace: list[float] = []

    for j in range(1, s + 1):
        S = V @ fact if V is not None else np.ones(N)
        if w.is_product_dim(j):
            gj = w.product_gamma(j)
            wv = prod_acc * S
            scale = C * gj / N
        else:
            beta_j = w.beta(j)
            # W = sum_nu 2^d(nu) beta^nu sum_l (l+nu)! V[:, l]
            Wn = np.zeros(N)
            for nu in range(1, alpha + 1):
                if nu > cap:
                    break
                shifted = np.array(
                    [math.factorial(l + nu) for l in range(cap - nu + 1)],
                    dtype=np.float64,
                )
                fac = (2.0 if nu == alpha else 1.0) * beta_j**nu
                Wn += fac * (V[:, : cap - nu + 1] @ shifted)
            wv = prod_acc * Wn
            scale = C / N
        base = float(np.sum(prod_acc * S - 1.0) / N)
        w0 = wv[0]

        yf = np.zeros(N)
        zf = np.full(N, _Z_INF, dtype=np.int64)
        for k in range(1, alpha + 1):
            wv_log = wv[exp]
            yf_log = yf[exp]
            zf_log = zf[exp]
            T = scanner.scan(wv_log, yf_log, zf_log, k)
            E_all = base + scale * (w0 * omega_zero + T)
            band = _TIE_BAND * max(1.0, float(np.max(np.abs(E_all))))
            emin = float(np.min(E_all))
            tied = np.nonzero(E_all <= emin + band)[0]
            best = tied[np.argmin(exp[tied])]
            q = int(exp[best])
            e_best = float(E_all[best])
            if not math.isfinite(e_best):
                raise ArithmeticError("criterion overflow")
            components.append(q)
            trace.append(e_best)
            # fold the chosen digit stream into the partial coordinate
            r = lattice._mul_mod_vec(n_nat, q, p, m).astype(np.int64)
            yf = yf + 2.0 ** (1 - k) * scanner.bv[r]
            znew = alpha * (scanner.lead[r] - 1) + k
            znew[r == 0] = _Z_INF
            zf = np.minimum(zf, znew)
        # dimension complete: absorb it into the running state
        om = np.where(
            zf >= _Z_INF,
            omega_zero,
            sum(
                scanner.coef[np.minimum(zf, scanner.P), t] * yf**t
                for t in range(alpha)
            ),
        )
        if w.is_product_dim(j):
            prod_acc = prod_acc * (1.0 + C * w.product_gamma(j) * om)
        else:
            V = _fold_spod(V, om, w.beta(j), w)

    gv = lattice.GeneratingVector(
        modulus=p,
        m=m,
        alpha=alpha,
        s=s,
        components=tuple(components),
        weight_fingerprint=w.fingerprint(),
    )
    return CBCResult(
        vector=gv,
        criterion_trace=tuple(trace),
        elapsed=time.perf_counter() - t0,
    )
