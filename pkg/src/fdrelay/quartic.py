"""Real roots of polynomials of degree <= 4.

The primary path is the closed-form Ferrari reduction (depressed quartic,
resolvent cubic, two quadratic factors) evaluated in complex arithmetic and
followed by damped Newton polishing. Rows whose closed-form evaluation is
ill-conditioned fall back to root isolation: real critical points (found
recursively on the derivative) split the real line into monotone pieces, and
each sign change is bracketed and bisected.

Everything is vectorized over rows of a ``(n, 5)`` coefficient array in
descending order; :func:`real_roots` is the scalar front end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuarticCoeffs",
    "RealRoots",
    "real_roots",
    "roots_in_interval",
    "real_roots_batch",
    "polyval_rows",
    "scaled_residual",
]

EPS = np.finfo(float).eps
IMAG_TOL = 1e-9
RESIDUAL_TOL = 1e-8
# relative cancellation above which a discriminant is considered ill-conditioned
CANCEL_TOL = 1e6 * EPS
# residual indistinguishable from rounding; used to recognize multiple roots
ROUNDING_TOL = 64 * EPS
# normalized leading coefficients below this are treated as zero; the roots they
# would carry have magnitude ~1/TINY_LEAD, where the resolvent-cubic terms overflow
TINY_LEAD = 1e-20
# relative separation below which two real roots are re-examined by isolation
CLOSE_ROOTS = 1e-6


@dataclass(frozen=True)
class QuarticCoeffs:
    """Coefficients of ``a4 x^4 + a3 x^3 + a2 x^2 + a1 x + a0``."""

    a4: float
    a3: float
    a2: float
    a1: float
    a0: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.descending())):
            raise ValueError("coefficients must be finite")

    @classmethod
    def from_ascending(cls, coeffs) -> "QuarticCoeffs":
        """Map an ``[a0, a1, a2, a3, a4]`` list (index = power) onto the descending layout."""
        c = list(map(float, coeffs)) + [0.0] * (5 - len(coeffs))
        return cls(c[4], c[3], c[2], c[1], c[0])

    def descending(self) -> np.ndarray:
        return np.array([self.a4, self.a3, self.a2, self.a1, self.a0], dtype=float)

    def __call__(self, x):
        return np.polyval(self.descending(), x)

    def scale(self, x):
        """Magnitude scale ``sum |a_i| |x|^i`` used to normalize residuals."""
        return np.polyval(np.abs(self.descending()), np.abs(x))


@dataclass(frozen=True)
class RealRoots:
    roots: tuple[float, ...]
    multiplicity: tuple[int, ...]

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __getitem__(self, i):
        return self.roots[i]

    def expanded(self) -> list[float]:
        """Roots repeated according to multiplicity."""
        return [r for r, m in zip(self.roots, self.multiplicity) for _ in range(m)]


def polyval_rows(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate row-wise polynomials ``c[i]`` (descending) at ``x[i, ...]``."""
    x = np.asarray(x)
    out = np.zeros(np.broadcast_shapes(x.shape, c.shape[:1] + (1,) * (x.ndim - 1)), dtype=np.result_type(c, x))
    shape = (c.shape[0],) + (1,) * (x.ndim - 1)
    for k in range(c.shape[1]):
        out = out * x + c[:, k].reshape(shape)
    return out


def _derivative_rows(c: np.ndarray) -> np.ndarray:
    n = c.shape[1] - 1
    return c[:, :-1] * np.arange(n, 0, -1, dtype=float)


def scaled_residual(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Row-wise ``|p(x)| / max(1, sum|a_i||x|^i)`` with coefficients normalized to unit max-norm.

    NaN entries of ``x`` give NaN.
    """
    c = np.asarray(c, dtype=float)
    c = c / np.max(np.abs(c), axis=1, keepdims=True)
    num = np.abs(polyval_rows(c, x))
    den = np.maximum(1.0, polyval_rows(np.abs(c), np.abs(x)))
    return num / den


def _vanishes(c: np.ndarray, x: np.ndarray, tol: float) -> np.ndarray:
    """Whether ``p(x)`` is zero within evaluation rounding plus the bisection location error."""
    ax = np.abs(x)
    delta = 4 * EPS * np.maximum(1.0, ax)
    a = np.abs(c)
    s0 = polyval_rows(a, ax)
    slack = polyval_rows(a, ax + delta) - s0
    return np.abs(polyval_rows(c, x)) <= tol * s0 + slack


# ---------------------------------------------------------------------------
# closed forms (complex, vectorized)


def _csqrt(z):
    return np.sqrt(np.asarray(z, dtype=complex))


def _quadratic(b, c):
    """Roots of monic ``x^2 + b x + c`` avoiding cancellation; also returns the conditioning flag."""
    b = np.asarray(b, dtype=complex)
    c = np.asarray(c, dtype=complex)
    disc = b * b - 4.0 * c
    sd = _csqrt(disc)
    sd = np.where((b.real * sd.real + b.imag * sd.imag) < 0, -sd, sd)
    w = -0.5 * (b + sd)
    with np.errstate(invalid="ignore", divide="ignore"):
        r2 = np.where(w != 0, c / w, 0.0)
    mag = np.abs(b * b) + 4.0 * np.abs(c)
    ill = (mag > 0) & (np.abs(disc) < CANCEL_TOL * mag)
    return w, r2, ill


def _cubic(b, c, d):
    """Three roots of monic ``x^3 + b x^2 + c x + d`` (complex) via Cardano / trigonometric form."""
    b, c, d = (np.asarray(v, dtype=float) for v in (b, c, d))
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    half_q = q / 2.0
    third_p = p / 3.0
    delta = half_q**2 + third_p**3

    # one real root
    with np.errstate(invalid="ignore", divide="ignore"):
        big = -np.sign(half_q) * np.cbrt(np.abs(half_q) + np.sqrt(np.maximum(delta, 0.0)))
        big = np.where(half_q == 0, np.cbrt(np.sqrt(np.maximum(delta, 0.0))), big)
        small = np.where(big != 0, -third_p / big, 0.0)
    t1 = big + small
    re = -0.5 * t1
    im = 0.5 * np.sqrt(3.0) * (big - small)
    one = np.stack([t1 + 0j, re + 1j * im, re - 1j * im], axis=-1)

    # three real roots
    with np.errstate(invalid="ignore", divide="ignore"):
        m = 2.0 * np.sqrt(np.maximum(-third_p, 0.0))
        arg = np.where(m > 0, 3.0 * q / (p * m), 0.0)
        theta = np.arccos(np.clip(arg, -1.0, 1.0)) / 3.0
    k = np.arange(3)
    three = (m[..., None] * np.cos(theta[..., None] - 2.0 * np.pi * k / 3.0)) + 0j

    roots = np.where((delta > 0)[..., None], one, three)
    return roots - shift[..., None]


def _horner(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(z)
    for k in range(c.shape[1]):
        out = out * z + c[:, k]
    return out


def _newton_polish(c: np.ndarray, z: np.ndarray, iters: int = 6) -> np.ndarray:
    """Damped Newton on row polynomials ``c`` started from ``z`` (rows x candidates).

    A step is halved (up to 4 times) until ``|p|`` decreases; entries that stop
    moving drop out of the working set.
    """
    rows, cols = np.nonzero(np.isfinite(z))
    zf = z[rows, cols]
    cf = c[rows]
    dcf = _derivative_rows(cf)
    idx = np.arange(zf.size)
    for _ in range(iters):
        if idx.size == 0:
            break
        zc, cc, dc = zf[idx], cf[idx], dcf[idx]
        pz = _horner(cc, zc)
        dpz = _horner(dc, zc)
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            step = pz / dpz
        moving = np.isfinite(step) & (np.abs(step) > 2 * EPS * (1.0 + np.abs(zc)))
        idx, zc, cc, pz, step = idx[moving], zc[moving], cc[moving], pz[moving], step[moving]
        cur = np.abs(pz)
        done = np.zeros(idx.size, dtype=bool)
        for _ in range(5):
            trial = zc - step
            with np.errstate(invalid="ignore", over="ignore"):
                better = ~done & (np.abs(_horner(cc, trial)) < cur)
            zc = np.where(better, trial, zc)
            done |= better
            if done.all():
                break
            step = step * 0.5
        zf[idx] = zc
        idx = idx[done]
    out = z.copy()
    out[rows, cols] = zf
    return out


def _quartic_ferrari(c: np.ndarray):
    """Complex roots of degree-4 rows plus a per-row ill-conditioning flag."""
    a = c[:, 0]
    b, cc, d, e = (c[:, k] / a for k in range(1, 5))
    b2 = b * b
    p = cc - 3.0 * b2 / 8.0
    q = d - b * cc / 2.0 + b2 * b / 8.0
    r = e - b * d / 4.0 + b2 * cc / 16.0 - 3.0 * b2 * b2 / 256.0

    size = np.maximum.reduce([np.ones_like(p), np.abs(p), np.sqrt(np.abs(r))])
    biquad = np.abs(q) <= 1e-14 * size**1.5

    # resolvent cubic z^3 + 2p z^2 + (p^2 - 4r) z - q^2, largest real root
    zc = _cubic(2.0 * p, p * p - 4.0 * r, -q * q)
    zr = np.where(np.abs(zc.imag) <= 1e-12 * (1.0 + np.abs(zc.real)), zc.real, -np.inf).max(axis=1)
    zr = np.maximum(zr, 0.0)
    res_c = np.stack([np.ones_like(p), 2.0 * p, p * p - 4.0 * r, -q * q], axis=1)
    zr = _newton_polish(res_c, zr[:, None].astype(complex), iters=3)[:, 0].real
    zr = np.maximum(zr, 0.0)
    s = np.sqrt(zr)
    ill = ~biquad & (s <= 1e-7 * np.sqrt(size))

    with np.errstate(invalid="ignore", divide="ignore"):
        qs = np.where(s > 0, q / np.where(s > 0, s, 1.0), 0.0)
    t = 0.5 * (p + zr - qs)
    u = 0.5 * (p + zr + qs)
    y1, y2, ill1 = _quadratic(s, t)
    y3, y4, ill2 = _quadratic(-s, u)
    gen = np.stack([y1, y2, y3, y4], axis=1)

    w1, w2, ill3 = _quadratic(p, r)
    sq1, sq2 = _csqrt(w1), _csqrt(w2)
    bi = np.stack([sq1, -sq1, sq2, -sq2], axis=1)

    y = np.where(biquad[:, None], bi, gen)
    ill = ill | np.where(biquad, ill3, ill1 | ill2)
    return y - (b / 4.0)[:, None], ill


def _closed_form(c: np.ndarray):
    """Complex roots (NaN padded to 4 columns) for rows of exact degree ``c.shape[1]-1``."""
    deg = c.shape[1] - 1
    n = c.shape[0]
    out = np.full((n, 4), np.nan + 0j)
    ill = np.zeros(n, dtype=bool)
    if deg == 4:
        roots, ill = _quartic_ferrari(c)
    elif deg == 3:
        roots = _cubic(c[:, 1] / c[:, 0], c[:, 2] / c[:, 0], c[:, 3] / c[:, 0])
        # repeated roots of the cubic are resolved by the isolation fallback
        ill = np.zeros(n, dtype=bool)
        spread = np.abs(roots[:, :, None] - roots[:, None, :])
        spread = np.where(np.eye(3, dtype=bool)[None], np.inf, spread)
        ill = spread.min(axis=(1, 2)) < 1e-5 * (1.0 + np.abs(roots).max(axis=1))
    elif deg == 2:
        r1, r2, ill = _quadratic(c[:, 1] / c[:, 0], c[:, 2] / c[:, 0])
        roots = np.stack([r1, r2], axis=1)
    else:
        roots = (-c[:, 1] / c[:, 0])[:, None] + 0j
    out[:, :deg] = roots
    return out, ill


# ---------------------------------------------------------------------------
# fallback: isolation by critical points + bisection


def _bisect_rows(c: np.ndarray, lo: np.ndarray, hi: np.ndarray, iters: int = 200) -> np.ndarray:
    flo = polyval_rows(c, lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = polyval_rows(c, mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
        if np.all((hi - lo) <= 4 * EPS * np.maximum(1.0, np.abs(lo))):
            break
    return 0.5 * (lo + hi)


def _isolate(c: np.ndarray) -> np.ndarray:
    """Real roots (with repetition, NaN padded to degree) of rows of exact degree ``c.shape[1]-1``."""
    deg = c.shape[1] - 1
    n = c.shape[0]
    if deg == 1:
        return (-c[:, 1] / c[:, 0])[:, None]
    bound = 1.0 + np.max(np.abs(c[:, 1:] / c[:, :1]), axis=1)
    crit = _isolate(_derivative_rows(c))  # (n, deg-1)
    crit = np.where(np.isfinite(crit), np.clip(crit, -bound[:, None], bound[:, None]), np.nan)
    crit = np.sort(crit, axis=1)
    crit_filled = np.where(np.isnan(crit), bound[:, None], crit)
    edges = np.concatenate([-bound[:, None], crit_filled, bound[:, None]], axis=1)
    lo, hi = edges[:, :-1], edges[:, 1:]

    flo, fhi = polyval_rows(c, lo), polyval_rows(c, hi)
    # endpoints that are themselves roots (multiple roots at critical points) are reported separately
    zlo = _vanishes(c, lo, ROUNDING_TOL)
    zhi = _vanishes(c, hi, ROUNDING_TOL)
    bracket = (hi > lo) & (np.sign(flo) * np.sign(fhi) < 0) & ~zlo & ~zhi
    found = np.where(bracket, _bisect_rows(c, lo, hi), np.nan)

    # multiple roots sitting on critical points; multiplicity from successive derivatives
    on = np.isfinite(crit) & _vanishes(c, crit, ROUNDING_TOL)
    mult = np.where(on, 2, 0)
    dc = _derivative_rows(_derivative_rows(c))
    while dc.shape[1] > 1:
        more = on & _vanishes(dc, crit, 1e3 * ROUNDING_TOL)
        mult = mult + more
        on = more
        dc = _derivative_rows(dc)

    out = np.full((n, deg), np.nan)
    for i in range(n):
        vals = list(found[i][np.isfinite(found[i])])
        for r, m in zip(crit[i], mult[i]):
            if m and not any(abs(r - v) <= 1e-9 * (1 + abs(r)) for v in vals):
                vals.extend([r] * int(m))
        vals = sorted(vals)[:deg]
        out[i, : len(vals)] = vals
    return out


# ---------------------------------------------------------------------------
# driver


def _classify(c: np.ndarray, z: np.ndarray):
    """Split polished complex roots into real values (NaN elsewhere) and flag ambiguous rows."""
    re, im = z.real, np.abs(z.imag)
    tol = IMAG_TOL * (1.0 + np.abs(re))
    is_real = im <= tol
    ambiguous = ((~is_real) & (im <= 1e-4 * (1.0 + np.abs(re)))).any(axis=1)
    return np.where(is_real, re, np.nan), ambiguous


def _solve_exact_degree(c: np.ndarray) -> np.ndarray:
    deg = c.shape[1] - 1
    z, ill = _closed_form(c)
    z = z[:, :deg]
    # roots far from the real axis cannot become real; only polish the rest
    near = np.abs(z.imag) <= 1e-4 * (1.0 + np.abs(z.real))
    z = np.where(near, _newton_polish(c, np.where(near, z, np.nan)), z)
    real, ambiguous = _classify(c, z)
    real = np.sort(real, axis=1)
    real = _newton_polish(c, real.astype(complex), iters=2).real
    res = scaled_residual(c, real)
    bad = ill | ambiguous | np.any(np.isfinite(real) & ~(res <= RESIDUAL_TOL), axis=1)
    # near-coincident real roots may be a close pair or a conjugate pair that
    # rounded onto the axis; isolation decides from the sign at the critical point
    with np.errstate(invalid="ignore"):
        gap = np.diff(real, axis=1)
        bad |= np.any(gap <= CLOSE_ROOTS * (np.abs(real[:, 1:]) + np.abs(real[:, :-1])), axis=1)
    bad |= ~np.all(np.isfinite(z), axis=1)
    if bad.any():
        real[bad] = _isolate(c[bad])
    out = np.full((c.shape[0], 4), np.nan)
    out[:, :deg] = np.sort(real, axis=1)
    return out


def real_roots_batch(coeffs) -> np.ndarray:
    """Real roots of each row of a ``(n, 5)`` descending coefficient array.

    Returns an ``(n, 4)`` array, ascending within each row, repeated roots
    repeated, NaN padded. Leading zeros lower the degree; so do leading
    coefficients below ``TINY_LEAD`` after normalization. All-zero rows raise.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if c.shape[1] != 5:
        raise ValueError("expected 5 coefficients per row (descending order)")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    norm = np.max(np.abs(c), axis=1)
    if np.any(norm == 0):
        raise ValueError("polynomial is identically zero")
    c = c / norm[:, None]

    lead = np.argmax(np.abs(c) >= TINY_LEAD, axis=1)
    out = np.full((c.shape[0], 4), np.nan)
    for k in range(4):  # k = number of leading zeros, degree 4 - k
        rows = np.nonzero(lead == k)[0]
        if rows.size:
            out[rows] = _solve_exact_degree(c[rows, k:])

    # rows where tiny nonzero leading terms were cut: re-polish on the full
    # polynomial and drop roots those terms dominate
    cut = np.nonzero(np.any((c != 0) & (np.arange(5) < lead[:, None]), axis=1))[0]
    if cut.size:
        with np.errstate(over="ignore", invalid="ignore"):
            z = _newton_polish(c[cut], out[cut].astype(complex), iters=4).real
            res = scaled_residual(c[cut], z)
        z = np.where(res <= RESIDUAL_TOL, z, np.nan)
        out[cut] = np.sort(z, axis=1)
    return out


def _group(values: list[float], poly: QuarticCoeffs) -> RealRoots:
    roots: list[float] = []
    mult: list[int] = []
    desc = poly.descending()
    for v in values:
        if roots and abs(v - roots[-1]) <= 1e-7 * max(abs(v), abs(roots[-1])):
            cand = (roots[-1] * mult[-1] + v) / (mult[-1] + 1)
            if scaled_residual(desc[None], np.array([[cand]]))[0, 0] <= RESIDUAL_TOL:
                roots[-1] = cand
                mult[-1] += 1
                continue
        roots.append(v)
        mult.append(1)
    return RealRoots(tuple(roots), tuple(mult))


def real_roots(q: QuarticCoeffs) -> RealRoots:
    """All real roots of ``q`` in ascending order, with multiplicities."""
    row = real_roots_batch(q.descending()[None])[0]
    return _group([float(v) for v in row if np.isfinite(v)], q)


def roots_in_interval(q: QuarticCoeffs, lo: float, hi: float) -> RealRoots:
    """Real roots strictly inside ``(lo, hi)``."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    rr = real_roots(q)
    keep = [(r, m) for r, m in zip(rr.roots, rr.multiplicity) if lo < r < hi]
    return RealRoots(tuple(r for r, _ in keep), tuple(m for _, m in keep))
