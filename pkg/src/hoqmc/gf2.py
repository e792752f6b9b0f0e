"""Carry-free polynomial arithmetic over the two-element field.

A binary polynomial is stored as a plain Python int: bit i is the
coefficient of x^i, so x^2 + x + 1 <-> 7. Addition is XOR, there are
no carries anywhere, and the zero polynomial is 0 with degree -1.
Everything here is exact integer arithmetic.
"""

from __future__ import annotations

import functools

MAX_DEGREE = 63  # one machine word; degrees above this are rejected


def degree(a: int) -> int:
    """Degree of the polynomial, -1 for the zero polynomial."""
    return a.bit_length() - 1


def mul(a: int, b: int) -> int:
    """Carry-free product of two binary polynomials."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def divmod_poly(a: int, b: int) -> tuple[int, int]:
    """Quotient and remainder of polynomial long division by b != 0."""
    if b == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    q = 0
    db = degree(b)
    while degree(a) >= db:
        shift = degree(a) - db
        q ^= 1 << shift
        a ^= b << shift
    return q, a


def mod(a: int, p: int) -> int:
    return divmod_poly(a, p)[1]


def mul_mod(a: int, b: int, p: int) -> int:
    """(a * b) mod p with deg(a), deg(b) < deg(p).

    Reduction is interleaved with the shift-and-add product so
    intermediate values stay below 2^(deg p + 1).
    """
    if p == 0:
        raise ValueError("invalid modulus")
    dp = degree(p)
    if dp < 1:
        raise ValueError("invalid modulus")
    if degree(a) >= dp or degree(b) >= dp:
        raise ValueError("operands must have degree < deg(modulus)")
    r = 0
    top = 1 << dp
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= p
    return r


def pow_mod(a: int, e: int, p: int) -> int:
    """a^e mod p by square and multiply; e >= 0."""
    r = 1
    a = mod(a, p)
    while e:
        if e & 1:
            r = mul_mod(r, a, p)
        e >>= 1
        if e:
            a = mul_mod(a, a, p)
    return r


def gcd(a: int, b: int) -> int:
    while b:
        a, b = b, mod(a, b)
    return a


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(p: int) -> bool:
    """Rabin irreducibility test over GF(2).

    p of degree m is irreducible iff x^(2^m) = x (mod p) and
    x^(2^(m/r)) - x is coprime to p for every prime r dividing m.
    """
    m = degree(p)
    if m < 1:
        raise ValueError("degree must be positive")
    if m == 1:
        return True
    x = 2  # the polynomial x
    # Frobenius: squaring m times sends x to x^(2^m)
    frob = {}
    t = x
    for i in range(1, m + 1):
        t = mul_mod(t, t, p)
        frob[i] = t
    if frob[m] != x:
        return False
    for r in _prime_factors(m):
        if gcd(frob[m // r] ^ x, p) != 1:
            return False
    return True


@functools.lru_cache(maxsize=None)
def default_modulus(m: int) -> int:
    """Smallest irreducible polynomial of degree m (by integer encoding).

    Cached so that generating vectors built in separate runs agree.
    """
    if not 1 <= m <= MAX_DEGREE:
        raise ValueError("degree must be positive")
    for p in range(1 << m, 1 << (m + 1)):
        if is_irreducible(p):
            return p
    raise AssertionError("no irreducible polynomial found")  # unreachable


def poly_str(a: int) -> str:
    """Readable form, e.g. 7 -> 'x^2+x+1'."""
    if a == 0:
        return "0"
    terms = []
    for i in range(degree(a), -1, -1):
        if a >> i & 1:
            terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
    return "+".join(terms)
