"""Interlaced polynomial lattice point sets.

Coordinates are generated as exact scaled integers: the j-th coordinate
of point n is an unsigned integer v with value v * 2^(-alpha*m), built
by extracting m base-2 digits per component polynomial from the Laurent
expansion of n(x) q(x) / p(x) and interlacing alpha digit streams.
No floating point is involved until an integrand is evaluated, so a
saved generating vector always reproduces the identical table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hoqmc import gf2

MAX_PRECISION = 63  # alpha*m digits must fit one unsigned word


@dataclass(frozen=True)
class GeneratingVector:
    """CBC output: modulus plus alpha*s component polynomials.

    components[alpha*(j-1)+k-1] drives digit stream k of interlaced
    dimension j (both 1-based).
    """

    modulus: int
    m: int
    alpha: int
    s: int
    components: tuple[int, ...]
    weight_fingerprint: str = ""

    def __post_init__(self):
        if gf2.degree(self.modulus) != self.m:
            raise ValueError("modulus degree must equal m")
        if self.alpha < 1 or self.s < 1 or self.m < 1:
            raise ValueError("alpha, s, m must be positive")
        if self.alpha * self.m > MAX_PRECISION:
            raise ValueError("precision overflow")
        if len(self.components) != self.alpha * self.s:
            raise ValueError("need alpha*s components")
        for q in self.components:
            if q == 0 or gf2.degree(q) >= self.m:
                raise ValueError("invalid component")

    @property
    def n_points(self) -> int:
        return 1 << self.m

    @property
    def precision(self) -> int:
        return self.alpha * self.m


@dataclass(frozen=True)
class InterlacedPointSet:
    """N x s table of exact scaled-integer coordinates."""

    n_points: int
    s: int
    precision: int
    coords: np.ndarray  # uint64, shape (n_points, s)

    def as_floats(self) -> np.ndarray:
        """Coordinates in [0,1); exact while precision <= 52 bits."""
        return self.coords.astype(np.float64) * 2.0 ** (-self.precision)


def laurent_digits(n: int, q: int, p: int, m: int) -> tuple[int, ...]:
    """First m Laurent digits of n(x) q(x) / p(x).

    Digit l is the coefficient of x^(-l); the stream encodes the
    coordinate sum_l digit_l 2^(-l). Only r = n q mod p matters because
    the polynomial part of the quotient carries no negative powers.
    """
    if q == 0 or gf2.degree(q) >= m:
        raise ValueError("invalid component")
    if gf2.degree(p) != m:
        raise ValueError("modulus degree must equal m")
    if not 0 <= n < (1 << m):
        raise ValueError("point index out of range")
    r = gf2.mul_mod(n, q, p) if n else 0
    digits = []
    for _ in range(m):
        # multiply the remainder by x, reduce once, read the overflow bit
        r <<= 1
        bit = (r >> m) & 1
        if bit:
            r ^= p
        digits.append(bit)
    return tuple(digits)


def interlace(streams) -> int:
    """Merge alpha digit streams of length m into one alpha*m-digit word.

    Output digit at position alpha*(l-1)+k (1-based, most significant
    first) is digit l of stream k. The result is the coordinate scaled
    by 2^(alpha*m).
    """
    streams = [tuple(s) for s in streams]
    alpha = len(streams)
    if alpha == 0:
        raise ValueError("need at least one stream")
    m = len(streams[0])
    if any(len(s) != m for s in streams):
        raise ValueError("digit streams must have equal length")
    out = 0
    for l in range(m):
        for k in range(alpha):
            out = (out << 1) | streams[k][l]
    return out


def _mul_mod_vec(n: np.ndarray, q: int, p: int, m: int) -> np.ndarray:
    """Vectorized n*q mod p for an array of m-bit polynomials."""
    n = n.astype(np.uint64)
    r = np.zeros_like(n)
    acc = n.copy()
    pv = np.uint64(p)
    top = np.uint64(1 << m)
    qq = q
    while qq:
        if qq & 1:
            r ^= acc
        qq >>= 1
        if qq:
            acc <<= np.uint64(1)
            hit = (acc & top) != 0
            acc[hit] ^= pv
    return r


def _digit_word_vec(r: np.ndarray, p: int, m: int) -> np.ndarray:
    """First m Laurent digits of r(x)/p(x) packed MSB-first per entry."""
    r = r.astype(np.uint64).copy()
    out = np.zeros_like(r)
    pv = np.uint64(p)
    one = np.uint64(1)
    mm = np.uint64(m)
    for _ in range(m):
        r <<= one
        bit = (r >> mm) & one
        r ^= bit * pv
        out = (out << one) | bit
    return out


def _spread_vec(w: np.ndarray, m: int, alpha: int, slot: int) -> np.ndarray:
    """Place the m digits of each word into interlaced slot positions.

    Digit l (1-based, MSB-first) of w lands at interlaced position
    alpha*(l-1)+slot, i.e. bit alpha*m - (alpha*(l-1)+slot) of the
    output word.
    """
    out = np.zeros_like(w, dtype=np.uint64)
    one = np.uint64(1)
    total = alpha * m
    for l in range(1, m + 1):
        bit = (w >> np.uint64(m - l)) & one
        pos = alpha * (l - 1) + slot
        out |= bit << np.uint64(total - pos)
    return out


def interlaced_coords(p: int, m: int, alpha: int, components) -> np.ndarray:
    """Coordinate table for the given component list, zero-padding the
    final dimension's unchosen digit slots.

    components may have any length up to alpha*s; missing slots of the
    last dimension contribute zero digits, which is how partially built
    vectors are scored during CBC.
    """
    comps = list(components)
    n_dims = (len(comps) + alpha - 1) // alpha
    n = np.arange(1 << m, dtype=np.uint64)
    coords = np.zeros((1 << m, n_dims), dtype=np.uint64)
    for idx, q in enumerate(comps):
        j, k = divmod(idx, alpha)  # dimension j, slot k+1
        r = _mul_mod_vec(n, q, p, m)
        w = _digit_word_vec(r, p, m)
        coords[:, j] |= _spread_vec(w, m, alpha, k + 1)
    return coords


def generate_points(gv: GeneratingVector) -> InterlacedPointSet:
    """All N = 2^m interlaced points, row n = point n, deterministic."""
    if gv.precision > MAX_PRECISION:
        raise ValueError("precision overflow")
    coords = interlaced_coords(gv.modulus, gv.m, gv.alpha, gv.components)
    return InterlacedPointSet(
        n_points=gv.n_points, s=gv.s, precision=gv.precision, coords=coords
    )


def write_generating_vector(path, gv: GeneratingVector) -> None:
    """Plain-text format, one item per line; round-trips bit-exactly."""
    lines = [
        "b=2",
        f"m={gv.m}",
        f"alpha={gv.alpha}",
        f"s={gv.s}",
        f"modulus={gv.modulus}",
        f"weights={gv.weight_fingerprint}",
    ]
    lines += [f"q{i + 1}={q}" for i, q in enumerate(gv.components)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_generating_vector(path) -> GeneratingVector:
    fields = {}
    comps = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            if key.startswith("q") and key[1:].isdigit():
                comps[int(key[1:])] = int(value)
            else:
                fields[key] = value
    if fields.get("b") != "2":
        raise ValueError("only base 2 is supported")
    m = int(fields["m"])
    alpha = int(fields["alpha"])
    s = int(fields["s"])
    components = tuple(comps[i] for i in range(1, alpha * s + 1))
    return GeneratingVector(
        modulus=int(fields["modulus"]),
        m=m,
        alpha=alpha,
        s=s,
        components=components,
        weight_fingerprint=fields.get("weights", ""),
    )
