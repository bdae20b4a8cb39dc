"""Phase-space machinery: Wigner transform and star-product algebra.

wigner() builds F(X, P, t) = (2 pi)^-1 Integral conj(psi)(X - eta/2)
exp(-i eta P) psi(X + eta/2) d eta by an FFT over the offset eta at each
X.  The eta grid steps by dx (odd lags use spectrally interpolated
half-grid samples, exact for band-limited states), so the P axis comes
out identical to the momentum grid: spacing 2*pi/(n*dx), range
(-pi/dx, pi/dx).  Marginals then match |psi(X)|^2 and |phi(P)|^2 up to
band-limit aliasing.  F is real up to FFT rounding and may be negative;
it is a weighting function, not a probability density.

PolyObservable is a polynomial in the commuting symbols x, p with exact
complex-rational coefficients, so the Groenewold star product, the
Moyal/Baker brackets and their identities (associativity, antisymmetry,
hbar scaling) hold exactly on coefficients, not just to rounding.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import (
    BoundaryLeakError,
    ConsistencyError,
    DegreeOverflowError,
    ValidationError,
)
from .grid import Grid1D, WaveFunction

__all__ = [
    "WignerGrid",
    "wigner",
    "conditional_momentum",
    "PolyObservable",
    "star",
    "moyal_bracket",
    "baker_bracket",
    "poisson_bracket",
]

_LEAK_TOL = 1e-8
_IMAG_TOL = 1e-12


@dataclass(frozen=True)
class WignerGrid:
    """Real phase-space weighting function on the (X, P) lattice."""

    grid: Grid1D
    values: np.ndarray      # (n, n): axis 0 = X (grid.x), axis 1 = P (grid.p)
    t: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.grid.n, self.grid.n):
            raise ValidationError("Wigner values must be an n x n array")
        total = float(np.sum(vals) * self.grid.dx * self.grid.dp)
        if abs(total - 1.0) > 1e-8:
            raise ValidationError(f"Wigner function integrates to {total}, not 1")

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def p(self) -> np.ndarray:
        return self.grid.p

    def marginal_x(self) -> np.ndarray:
        """Integral over P; equals |psi(X)|^2."""
        return self.values.sum(axis=1) * self.grid.dp

    def marginal_p(self) -> np.ndarray:
        """Integral over X; equals |phi(P)|^2."""
        return self.values.sum(axis=0) * self.grid.dx


def _half_grid_samples(psi: WaveFunction) -> np.ndarray:
    """psi at x_j + dx/2 by spectral interpolation."""
    grid = psi.grid
    return np.fft.ifft(np.fft.fft(psi.amps) * np.exp(0.5j * grid.k * grid.dx))


def wigner(psi: WaveFunction) -> WignerGrid:
    """Wigner transform of a normalized, boundary-decayed state."""
    grid = psi.grid
    n = grid.n
    if abs(psi.norm2() - 1.0) > 1e-8:
        raise ValidationError("wigner() requires a normalized state")
    if psi.edge_amplitude() > _LEAK_TOL:
        raise BoundaryLeakError(
            "state does not decay at the boundary; the periodic eta range would wrap")

    amps = psi.amps
    half = _half_grid_samples(psi)
    a = np.arange(n)[:, None]

    # Correlation C[a, l] = conj(psi(X_a - eta_l/2)) psi(X_a + eta_l/2),
    # eta_l = l*dx for lags l = 0..n/2, then mirrored Hermitian.
    corr = np.empty((n, n), dtype=np.complex128)
    lags = np.arange(0, n // 2 + 1)
    m_even = lags[lags % 2 == 0] // 2
    corr[:, lags[lags % 2 == 0]] = (np.conj(amps[(a - m_even) % n])
                                    * amps[(a + m_even) % n])
    m_odd = (lags[lags % 2 == 1] - 1) // 2
    corr[:, lags[lags % 2 == 1]] = (np.conj(half[(a - m_odd - 1) % n])
                                    * half[(a + m_odd) % n])
    # Lag n/2 coincides with -n/2; keep the Hermitian (real) part.
    corr[:, n // 2] = np.real(corr[:, n // 2])
    corr[:, n // 2 + 1:] = np.conj(corr[:, 1:n // 2])[:, ::-1]

    f_complex = np.fft.fft(corr, axis=1) * (grid.dx / (2.0 * np.pi))
    resid = float(np.max(np.abs(f_complex.imag)))
    if resid > _IMAG_TOL:
        raise ConsistencyError(
            f"Wigner transform has imaginary residue {resid:.3e} > {_IMAG_TOL}")
    values = np.fft.fftshift(f_complex.real, axes=1)
    return WignerGrid(grid=grid, values=values, t=psi.t)


def conditional_momentum(w: WignerGrid, marginal_floor_rel: float = 1e-8):
    """Mean momentum of F at each X: Pbar(X) = Int P F dP / Int F dP.

    Returns (pbar, ok); points whose X-marginal falls below
    marginal_floor_rel times its maximum are masked (NaN, ok False).
    """
    marg = w.marginal_x()
    floor = marginal_floor_rel * float(np.max(marg))
    ok = marg > floor
    num = (w.values * w.p[None, :]).sum(axis=1) * w.grid.dp
    pbar = np.where(ok, num / np.where(ok, marg, 1.0), np.nan)
    return pbar, ok


# ----------------------------------------------------------------------
# Polynomial observables with exact coefficients
# ----------------------------------------------------------------------

MAX_DEGREE = 12

_Coef = tuple  # (Fraction, Fraction) as re, im


def _coef(value) -> _Coef:
    if isinstance(value, tuple):
        return (Fraction(value[0]), Fraction(value[1]))
    if isinstance(value, complex):
        return (Fraction(value.real), Fraction(value.imag))
    return (Fraction(value), Fraction(0))


def _cadd(a: _Coef, b: _Coef) -> _Coef:
    return (a[0] + b[0], a[1] + b[1])


def _cmul(a: _Coef, b: _Coef) -> _Coef:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


_ZERO = (Fraction(0), Fraction(0))


class PolyObservable:
    """Polynomial Weyl symbol Sum c_ab x^a p^b, exact coefficients.

    Coefficients are complex rationals (pairs of Fraction); float and
    complex inputs convert exactly.  Total degree is capped at
    MAX_DEGREE = 12.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs=None):
        data = {}
        if coeffs:
            for (ax, ap), value in coeffs.items():
                if ax < 0 or ap < 0:
                    raise ValidationError("monomial exponents must be non-negative")
                if ax + ap > MAX_DEGREE:
                    raise DegreeOverflowError(
                        f"monomial x^{ax} p^{ap} exceeds max total degree {MAX_DEGREE}")
                c = _coef(value)
                if c != _ZERO:
                    data[(int(ax), int(ap))] = c
        self._coeffs = data

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls) -> "PolyObservable":
        return cls()

    @classmethod
    def one(cls) -> "PolyObservable":
        return cls({(0, 0): 1})

    @classmethod
    def x(cls, power: int = 1) -> "PolyObservable":
        return cls({(power, 0): 1})

    @classmethod
    def p(cls, power: int = 1) -> "PolyObservable":
        return cls({(0, power): 1})

    @classmethod
    def monomial(cls, ax: int, ap: int, coefficient=1) -> "PolyObservable":
        return cls({(ax, ap): coefficient})

    # -- inspection -----------------------------------------------------
    def items(self):
        return self._coeffs.items()

    def coefficient(self, ax: int, ap: int) -> complex:
        c = self._coeffs.get((ax, ap), _ZERO)
        return complex(float(c[0]), float(c[1]))

    def coefficient_exact(self, ax: int, ap: int) -> _Coef:
        return self._coeffs.get((ax, ap), _ZERO)

    def degree(self) -> int:
        if not self._coeffs:
            return 0
        return max(ax + ap for ax, ap in self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    def has_real_coefficients(self) -> bool:
        return all(c[1] == 0 for c in self._coeffs.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyObservable):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        return hash(frozenset(self._coeffs.items()))

    def __repr__(self) -> str:
        if not self._coeffs:
            return "PolyObservable(0)"
        parts = []
        for (ax, ap) in sorted(self._coeffs):
            c = self.coefficient(ax, ap)
            parts.append(f"({c:g})*x^{ax}*p^{ap}")
        return "PolyObservable(" + " + ".join(parts) + ")"

    # -- ring operations -------------------------------------------------
    def _from_dict(self, data) -> "PolyObservable":
        out = PolyObservable.__new__(PolyObservable)
        out._coeffs = {k: v for k, v in data.items() if v != _ZERO}
        return out

    def __add__(self, other: "PolyObservable") -> "PolyObservable":
        data = dict(self._coeffs)
        for key, c in other._coeffs.items():
            data[key] = _cadd(data.get(key, _ZERO), c)
        return self._from_dict(data)

    def __sub__(self, other: "PolyObservable") -> "PolyObservable":
        return self + other.scaled(-1)

    def __neg__(self) -> "PolyObservable":
        return self.scaled(-1)

    def scaled(self, value) -> "PolyObservable":
        c = _coef(value)
        return self._from_dict({k: _cmul(v, c) for k, v in self._coeffs.items()})

    def __mul__(self, other: "PolyObservable") -> "PolyObservable":
        data = {}
        for (ax, ap), ca in self._coeffs.items():
            for (bx, bp), cb in other._coeffs.items():
                if ax + bx + ap + bp > MAX_DEGREE:
                    raise DegreeOverflowError(
                        f"product degree {ax + bx + ap + bp} exceeds {MAX_DEGREE}")
                key = (ax + bx, ap + bp)
                data[key] = _cadd(data.get(key, _ZERO), _cmul(ca, cb))
        return self._from_dict(data)

    def diff_x(self, order: int = 1) -> "PolyObservable":
        out = self
        for _ in range(order):
            data = {}
            for (ax, ap), c in out._coeffs.items():
                if ax > 0:
                    data[(ax - 1, ap)] = _cmul(c, (Fraction(ax), Fraction(0)))
            out = self._from_dict(data)
        return out

    def diff_p(self, order: int = 1) -> "PolyObservable":
        out = self
        for _ in range(order):
            data = {}
            for (ax, ap), c in out._coeffs.items():
                if ap > 0:
                    data[(ax, ap - 1)] = _cmul(c, (Fraction(ap), Fraction(0)))
            out = self._from_dict(data)
        return out

    def evaluate(self, x: float, p: float) -> complex:
        total = 0j
        for (ax, ap), _ in self._coeffs.items():
            total += self.coefficient(ax, ap) * x**ax * p**ap
        return total


def _i_power(k: int) -> _Coef:
    return ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)),
            (Fraction(-1), Fraction(0)), (Fraction(0), Fraction(-1)))[k % 4]


def star(a: PolyObservable, b: PolyObservable, hbar) -> PolyObservable:
    """Groenewold star product (finite series for polynomials).

    a * b = Sum_k (i hbar / 2)^k / k! *
            Sum_j (-1)^j C(k, j) (dx^(k-j) dp^j a) (dx^j dp^(k-j) b)
    """
    if a.degree() + b.degree() > MAX_DEGREE:
        raise DegreeOverflowError(
            f"star product of degrees {a.degree()} + {b.degree()} exceeds {MAX_DEGREE}")
    hbar_f = Fraction(hbar)
    result = PolyObservable.zero()
    for k in range(min(a.degree(), b.degree()) + 1):
        term = PolyObservable.zero()
        for j in range(k + 1):
            left = a.diff_x(k - j).diff_p(j)
            right = b.diff_x(j).diff_p(k - j)
            if left.is_zero() or right.is_zero():
                continue
            piece = left * right
            sign = -comb(k, j) if j % 2 else comb(k, j)
            term = term + piece.scaled(sign)
        if term.is_zero():
            continue
        factor = _cmul(_i_power(k), (hbar_f**k / (2**k * _factorial(k)), Fraction(0)))
        result = result + term.scaled(factor)
    return result


def _factorial(k: int) -> Fraction:
    out = Fraction(1)
    for i in range(2, k + 1):
        out *= i
    return out


def moyal_bracket(a: PolyObservable, b: PolyObservable, hbar) -> PolyObservable:
    """(a*b - b*a)/(i hbar); equals the Poisson bracket plus O(hbar^2)."""
    if Fraction(hbar) == 0:
        raise ValidationError("hbar = 0: use poisson_bracket")
    diff = star(a, b, hbar) - star(b, a, hbar)
    out = diff.scaled((Fraction(0), Fraction(-1) / Fraction(hbar)))  # 1/(i hbar)
    if a.has_real_coefficients() and b.has_real_coefficients():
        if not out.has_real_coefficients():
            raise ConsistencyError("Moyal bracket of real symbols is not real")
    return out


def baker_bracket(a: PolyObservable, b: PolyObservable, hbar) -> PolyObservable:
    """(a*b + b*a)/2, the symmetrized star product."""
    out = (star(a, b, hbar) + star(b, a, hbar)).scaled(Fraction(1, 2))
    if a.has_real_coefficients() and b.has_real_coefficients():
        if not out.has_real_coefficients():
            raise ConsistencyError("Baker bracket of real symbols is not real")
    return out


def poisson_bracket(a: PolyObservable, b: PolyObservable) -> PolyObservable:
    """dx a * dp b - dp a * dx b on coefficients."""
    return a.diff_x() * b.diff_p() - a.diff_p() * b.diff_x()
