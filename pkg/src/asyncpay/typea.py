"""Symmetric pairing over a type A supersingular curve.

The curve is ``y^2 = x^3 + x`` over F_q with ``q = 3 (mod 4)``, which is
supersingular with ``#E(F_q) = q + 1 = h * r`` for a prime ``r``.  Points of
order ``r`` form the source group G; the target group is the order-``r``
subgroup of ``F_{q^2}*`` where ``F_{q^2} = F_q[i]/(i^2 + 1)``.

The symmetric map is the modified Tate pairing ``e(P, Q) =
f_{r,P}(phi(Q))^((q^2-1)/r)`` using the distortion map ``phi(x, y) =
(-x, i*y)``.  Because the embedding degree is 2 and vertical-line values land
in F_q*, they are annihilated by the final exponentiation, so the Miller loop
only accumulates the sloped line functions (denominator elimination).

The parameter set below is the stock 512-bit/160-bit type A configuration
shipped with the PBC library (``a.param``), the same family JPBC exposes by
default.  Group elements are affine coordinate pairs of ``gmpy2.mpz`` (or
``None`` for the identity); target elements are ``F_{q^2}`` pairs.
"""

from __future__ import annotations

import hashlib

import gmpy2
from gmpy2 import mpz

# PBC "a.param": q = h*r - 1 prime, q = 3 (mod 4), r = 2^159 + 2^107 + 1 prime.
Q = mpz(int(
    "8780710799663312522437781984754049815806883199414208211028653399266475630880"
    "222957078625179422662221423155858769582317459277713367317481324925129998224791"
))
R = mpz(730750818665451621361119245571504901405976559617)
COFACTOR = mpz(int(
    "1201601226489114607938882136674053420480295440125131182291961513104720728"
    "9359704531102844802183906537786776"
))

_SQRT_EXP = (Q + 1) // 4
_LEGENDRE_EXP = (Q - 1) // 2

GT_ONE = (mpz(1), mpz(0))

# --------------------------------------------------------------------------
# F_{q^2} = F_q[i] / (i^2 + 1), elements are (a, b) meaning a + b*i
# --------------------------------------------------------------------------


def fq2_mul(x, y):
    a, b = x
    c, d = y
    ac = a * c % Q
    bd = b * d % Q
    return ((ac - bd) % Q, ((a + b) * (c + d) - ac - bd) % Q)


def fq2_sqr(x):
    a, b = x
    t = a * b % Q
    return ((a + b) * (a - b) % Q, (t + t) % Q)


def fq2_inv(x):
    a, b = x
    d = gmpy2.invert((a * a + b * b) % Q, Q)
    return (a * d % Q, (-b * d) % Q)


def fq2_conj(x):
    return (x[0], (-x[1]) % Q)


def fq2_pow(x, e):
    e = int(e)
    if e < 0:
        x = fq2_inv(x)
        e = -e
    result = GT_ONE
    for bit in bin(e)[2:]:
        result = fq2_sqr(result)
        if bit == "1":
            result = fq2_mul(result, x)
    return result


# --------------------------------------------------------------------------
# Curve arithmetic. Affine points (x, y); None is the point at infinity.
# Jacobian triples (X, Y, Z) are used internally for inversion-free ladders.
# --------------------------------------------------------------------------


def is_on_curve(P) -> bool:
    if P is None:
        return True
    x, y = P
    return (y * y - (x * x * x + x)) % Q == 0


def affine_neg(P):
    if P is None:
        return None
    return (P[0], (-P[1]) % Q)


def affine_add(P1, P2):
    if P1 is None:
        return P2
    if P2 is None:
        return P1
    x1, y1 = P1
    x2, y2 = P2
    if x1 == x2:
        if (y1 + y2) % Q == 0:
            return None
        lam = (3 * x1 * x1 + 1) * gmpy2.invert(2 * y1 % Q, Q) % Q
    else:
        lam = (y2 - y1) * gmpy2.invert((x2 - x1) % Q, Q) % Q
    x3 = (lam * lam - x1 - x2) % Q
    y3 = (lam * (x1 - x3) - y1) % Q
    return (x3, y3)


def _jac_double(P):
    if P is None:
        return None
    X, Y, Z = P
    if Y == 0:
        return None
    Y2 = Y * Y % Q
    S = 4 * X * Y2 % Q
    Z2 = Z * Z % Q
    M = (3 * X * X + Z2 * Z2) % Q  # curve coefficient a = 1
    X3 = (M * M - 2 * S) % Q
    return (X3, (M * (S - X3) - 8 * Y2 * Y2) % Q, 2 * Y * Z % Q)


def _jac_add_affine(P, A):
    """Mixed addition: Jacobian P plus affine A."""
    if A is None:
        return P
    if P is None:
        return (A[0], A[1], mpz(1))
    X1, Y1, Z1 = P
    x2, y2 = A
    Z1Z1 = Z1 * Z1 % Q
    U2 = x2 * Z1Z1 % Q
    S2 = y2 * Z1 * Z1Z1 % Q
    if U2 == X1:
        if S2 == Y1:
            return _jac_double(P)
        return None
    H = (U2 - X1) % Q
    HH = H * H % Q
    I = 4 * HH % Q
    J = H * I % Q
    rr = 2 * (S2 - Y1) % Q
    V = X1 * I % Q
    X3 = (rr * rr - J - 2 * V) % Q
    return (X3, (rr * (V - X3) - 2 * Y1 * J) % Q, 2 * Z1 * H % Q)


def _jac_to_affine(P):
    if P is None:
        return None
    X, Y, Z = P
    zi = gmpy2.invert(Z, Q)
    zi2 = zi * zi % Q
    return (X * zi2 % Q, Y * zi2 * zi % Q)


def _wnaf_digits(k: int, w: int) -> list[int]:
    digits = []
    pow2w = 1 << w
    half = 1 << (w - 1)
    while k > 0:
        if k & 1:
            d = k % pow2w
            if d >= half:
                d -= pow2w
            k -= d
        else:
            d = 0
        digits.append(d)
        k >>= 1
    return digits


def _precompute_odd(A, w: int):
    """Affine table [A, 3A, 5A, ..., (2^(w-1)-1)A] with one shared inversion."""
    n = 1 << (w - 2)
    jac = [None] * n
    jac[0] = (A[0], A[1], mpz(1))
    if n > 1:
        dbl = _jac_to_affine(_jac_double(jac[0]))
        for i in range(1, n):
            jac[i] = _jac_add_affine(jac[i - 1], dbl)
    zs = [p[2] for p in jac]
    prefix = []
    acc = mpz(1)
    for z in zs:
        prefix.append(acc)
        acc = acc * z % Q
    inv = gmpy2.invert(acc, Q)
    out = [None] * n
    for i in range(n - 1, -1, -1):
        zi = prefix[i] * inv % Q
        inv = inv * zs[i] % Q
        zi2 = zi * zi % Q
        out[i] = (jac[i][0] * zi2 % Q, jac[i][1] * zi2 * zi % Q)
    return out


_WINDOW = 4


def scalar_mul(P, k: int):
    """k*P for affine P, windowed-NAF ladder.

    ``k`` is used as given (callers working inside the order-r subgroup
    reduce mod r themselves; cofactor clearing needs the full multiplier).
    """
    if P is None:
        return None
    k = int(k)
    if k < 0:
        raise ValueError("negative scalar")
    if k == 0:
        return None
    table = _precompute_odd(P, _WINDOW)
    acc = None
    for d in reversed(_wnaf_digits(k, _WINDOW)):
        acc = _jac_double(acc)
        if d:
            if d > 0:
                acc = _jac_add_affine(acc, table[d >> 1])
            else:
                t = table[(-d) >> 1]
                acc = _jac_add_affine(acc, (t[0], (-t[1]) % Q))
    return _jac_to_affine(acc)


def multi_scalar_mul(pairs, tables=None):
    """sum(k_i * P_i) with a shared-doubling interleaved wNAF ladder.

    ``tables`` may carry precomputed odd-multiple tables for the same base
    sequence so repeated calls over one base set share the setup cost.
    """
    entries = []
    for idx, (P, k) in enumerate(pairs):
        k = int(k) % R
        if P is None or k == 0:
            continue
        table = tables[idx] if tables is not None else _precompute_odd(P, _WINDOW)
        entries.append((table, _wnaf_digits(k, _WINDOW)))
    if not entries:
        return None
    top = max(len(d) for _, d in entries)
    acc = None
    for pos in range(top - 1, -1, -1):
        acc = _jac_double(acc)
        for table, digits in entries:
            if pos < len(digits):
                d = digits[pos]
                if d:
                    if d > 0:
                        acc = _jac_add_affine(acc, table[d >> 1])
                    else:
                        t = table[(-d) >> 1]
                        acc = _jac_add_affine(acc, (t[0], (-t[1]) % Q))
    return _jac_to_affine(acc)


def precompute_tables(points):
    """Odd-multiple tables for reuse across several multi_scalar_mul calls."""
    return [None if P is None else _precompute_odd(P, _WINDOW) for P in points]


# --------------------------------------------------------------------------
# Tate pairing with the distortion map
# --------------------------------------------------------------------------

_R_BITS = bin(int(R))[3:]  # bits below the most significant one


def _miller(P, Qpt):
    """f_{r,P}(phi(Q)) without vertical-line factors.

    phi(Q) = (-x_q, i*y_q); a sloped line ``Y - y_t - lam*(X - x_t)``
    evaluated there is ``(lam*(x_q + x_t) - y_t) + i*y_q``.
    """
    xq, yq = Qpt
    xp, yp = P
    xt, yt = P
    f = GT_ONE
    for bit in _R_BITS:
        lam = (3 * xt * xt + 1) * gmpy2.invert(2 * yt % Q, Q) % Q
        l0 = (lam * (xq + xt) - yt) % Q
        f = fq2_mul(fq2_sqr(f), (l0, yq))
        x3 = (lam * lam - 2 * xt) % Q
        yt = (lam * (xt - x3) - yt) % Q
        xt = x3
        if bit == "1":
            if xt == xp and (yt + yp) % Q == 0:
                # T + P = O: the line is vertical, killed by the final
                # exponentiation (only reachable on the last iteration).
                continue
            lam = (yt - yp) * gmpy2.invert((xt - xp) % Q, Q) % Q
            l0 = (lam * (xq + xt) - yt) % Q
            f = fq2_mul(f, (l0, yq))
            x3 = (lam * lam - xt - xp) % Q
            yt = (lam * (xt - x3) - yt) % Q
            xt = x3
    return f


def _final_exp(f):
    # z^((q^2-1)/r) = (conj(z) * z^-1)^cofactor since (q^2-1)/r = (q-1)*h.
    z = fq2_mul(fq2_conj(f), fq2_inv(f))
    return fq2_pow(z, COFACTOR)


def pairing(P, Qpt):
    if P is None or Qpt is None:
        return GT_ONE
    return _final_exp(_miller(P, Qpt))


def pairing_product(pairs):
    """prod e(P_i, Q_i): shared squaring chain and one final exponentiation."""
    live = [(P, Qpt) for P, Qpt in pairs if P is not None and Qpt is not None]
    if not live:
        return GT_ONE
    if len(live) == 1:
        return pairing(*live[0])
    states = []  # per pair: [xt, yt, xp, yp, xq, yq, done]
    for P, Qpt in live:
        states.append([P[0], P[1], P[0], P[1], Qpt[0], Qpt[1], False])
    f = GT_ONE
    for bit in _R_BITS:
        f = fq2_sqr(f)
        for s in states:
            xt, yt = s[0], s[1]
            lam = (3 * xt * xt + 1) * gmpy2.invert(2 * yt % Q, Q) % Q
            l0 = (lam * (s[4] + xt) - yt) % Q
            f = fq2_mul(f, (l0, s[5]))
            x3 = (lam * lam - 2 * xt) % Q
            s[1] = (lam * (xt - x3) - yt) % Q
            s[0] = x3
        if bit == "1":
            for s in states:
                xt, yt, xp, yp = s[0], s[1], s[2], s[3]
                if xt == xp and (yt + yp) % Q == 0:
                    continue
                lam = (yt - yp) * gmpy2.invert((xt - xp) % Q, Q) % Q
                l0 = (lam * (s[4] + xt) - yt) % Q
                f = fq2_mul(f, (l0, s[5]))
                x3 = (lam * lam - xt - xp) % Q
                s[1] = (lam * (xt - x3) - yt) % Q
                s[0] = x3
    return _final_exp(f)


# --------------------------------------------------------------------------
# Square roots, point decompression, hashing to the order-r subgroup
# --------------------------------------------------------------------------


def sqrt_fq(a):
    """Square root in F_q (q = 3 mod 4), or None if a is a non-residue."""
    a %= Q
    y = gmpy2.powmod(a, _SQRT_EXP, Q)
    if y * y % Q != a:
        return None
    return y


def point_from_x(x, y_parity: int):
    rhs = (x * x * x + x) % Q
    y = sqrt_fq(rhs)
    if y is None:
        return None
    if int(y) & 1 != y_parity:
        y = (-y) % Q
    return (x, y)


def hash_to_subgroup(data: bytes):
    """Try-and-increment onto the curve, then clear the cofactor.

    Never returns the identity: the counter advances until the cofactor
    multiple is a proper order-r point.
    """
    ctr = 0
    while True:
        digest = hashlib.sha256(data + ctr.to_bytes(4, "big")).digest()
        wide = hashlib.sha256(b"\x01" + digest).digest() + hashlib.sha256(
            b"\x02" + digest
        ).digest() + hashlib.sha256(b"\x03" + digest).digest()
        x = mpz(int.from_bytes(wide, "big")) % Q
        rhs = (x * x * x + x) % Q
        y = sqrt_fq(rhs)
        if y is not None:
            P = scalar_mul((x, y), int(COFACTOR))
            if P is not None:
                return P
        ctr += 1


def in_subgroup(P) -> bool:
    if P is None:
        return True
    return is_on_curve(P) and scalar_mul(P, int(R)) is None


def derive_generator(seed: bytes):
    g = hash_to_subgroup(seed)
    assert in_subgroup(g) and g is not None
    return g


GENERATOR = derive_generator(b"asyncpay/type-a/generator/v1")
