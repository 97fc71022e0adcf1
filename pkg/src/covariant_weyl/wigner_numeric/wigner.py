"""Wigner transform of sections on flat periodic grids and the Moyal residual d * W.

Flat charts only: the van Vleck factor is 1 and transport is trivial, so the
exponent gamma plays no role here.  Quantization convention: p <-> -i eps d,
so the plane wave exp(i k x / eps) has momentum k.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from math import factorial
from typing import Mapping, Optional, Sequence

import numpy as np

from ..tensor_core.heads import DIM, METRIC, MOMENTUM
from ..tensor_core.errors import TensorError
from ..tensor_core.expr import TensorExpr

POINTS_PER_WAVELENGTH = 8


class GridMismatch(ValueError):
    pass


class UnderResolved(ValueError):
    pass


class DegreeTooHigh(TensorError):
    pass


@dataclass(frozen=True)
class GridSection:
    """Values of a section on a uniform periodic lattice.

    ``values`` has shape ``shape + (rank,)``; a missing trailing fiber axis is added.
    """

    lower: tuple
    upper: tuple
    values: np.ndarray
    epsilon: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == len(self.lower):
            v = v[..., None]
        if v.ndim != len(self.lower) + 1 or len(self.lower) not in (1, 2):
            raise GridMismatch("values must have one axis per dimension plus a fiber axis")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def shape(self) -> tuple:
        return self.values.shape[:-1]

    @property
    def spacing(self) -> np.ndarray:
        return (np.asarray(self.upper, float) - np.asarray(self.lower, float)) / np.asarray(self.shape)

    def axes(self) -> list:
        return [lo + h * np.arange(n) for lo, h, n in zip(self.lower, self.spacing, self.shape)]

    def momentum_axes(self) -> list:
        """Momentum lattice dual to the u = 2 j h lattice of the transform."""
        return [np.pi * self.epsilon * np.fft.fftshift(np.fft.fftfreq(n, 1.0 / n)) / (n * h)
                for n, h in zip(self.shape, self.spacing)]

    def resolution(self) -> float:
        """Points per shortest eps-wavelength carrying spectral weight above 1e-10."""
        spec = np.sum(np.abs(np.fft.fftn(self.values, axes=tuple(range(self.dim)))) ** 2, axis=-1)
        spec = spec / spec.max()
        freqs = np.meshgrid(*[np.fft.fftfreq(n, h) for n, h in zip(self.shape, self.spacing)],
                            indexing="ij")
        k = np.sqrt(sum(f ** 2 for f in freqs))
        kmax = float(np.max(k[spec > 1e-10]))
        return float("inf") if kmax == 0 else 1.0 / (kmax * float(np.max(self.spacing)))

    def check_resolved(self) -> None:
        ppw = self.resolution()
        if ppw < POINTS_PER_WAVELENGTH:
            raise UnderResolved(f"only {ppw:.2f} grid points per wavelength "
                                f"(need {POINTS_PER_WAVELENGTH})")


@dataclass
class PhaseSpaceGrid:
    """W at the lattice positions listed in ``index`` (all positions when built
    without ``centers``); ``values[k]`` has shape ``momentum shape + (rank_phi, rank_psi)``."""

    section: GridSection
    index: np.ndarray
    values: np.ndarray
    window: dict = field(default_factory=dict)

    @property
    def momentum(self) -> list:
        return self.section.momentum_axes()

    def lookup(self) -> dict:
        return {tuple(int(t) for t in row): k for k, row in enumerate(self.index)}

    def dp(self) -> float:
        return float(np.prod([a[1] - a[0] for a in self.momentum]))

    def dz(self) -> float:
        return float(np.prod(self.section.spacing))

    def marginal_p(self) -> np.ndarray:
        """Integral over momentum at each stored position."""
        axes = tuple(range(1, 1 + self.section.dim))
        return np.sum(self.values, axis=axes) * self.dp()


def _check_pair(psi: GridSection, phi: GridSection) -> None:
    if (psi.shape != phi.shape or psi.epsilon != phi.epsilon
            or not np.allclose(psi.lower, phi.lower) or not np.allclose(psi.upper, phi.upper)):
        raise GridMismatch("sections must share grid, box and epsilon")
    if any(n % 2 for n in psi.shape):
        raise GridMismatch("grid sizes must be even")


def _stencil(centers, shape, reach: int) -> np.ndarray:
    pts = set()
    offs = np.array(np.meshgrid(*[np.arange(-reach, reach + 1)] * len(shape),
                                indexing="ij")).reshape(len(shape), -1).T
    for c in np.atleast_2d(centers):
        for o in offs:
            pts.add(tuple(int(t) for t in (np.asarray(c) + o) % np.asarray(shape)))
    return np.array(sorted(pts), dtype=int)


def wigner_flat(psi: GridSection, phi: GridSection, centers=None, reach: int = 0,
                check: bool = True, boundary: str = "periodic") -> PhaseSpaceGrid:
    """W[psi, phi](z, p) = (2 pi eps)^-d int psi*(z - u/2) (x) phi(z + u/2) e^{-i p u / eps} du.

    With u = 2 j h on the lattice the transform is a DFT over j.  With
    ``centers`` only those lattice points and their neighbours within ``reach``
    are transformed; otherwise every position is.

    ``boundary="periodic"`` treats the sections as living on the torus; then a
    packet also interferes with its own periodic image, which shows up at
    z + L/2 with a sign alternating in p.  ``boundary="zero"`` treats them as
    vanishing outside the box, the right choice for packets localized on R^d.
    """
    if boundary not in ("periodic", "zero"):
        raise ValueError(f"unknown boundary {boundary!r}")
    _check_pair(psi, phi)
    if check:
        psi.check_resolved()
        phi.check_resolved()
    shape, d, eps = psi.shape, psi.dim, psi.epsilon
    if centers is None:
        index = np.array(np.meshgrid(*[np.arange(n) for n in shape], indexing="ij")
                         ).reshape(d, -1).T
    else:
        index = _stencil(centers, shape, reach)
    js = np.meshgrid(*[np.fft.fftfreq(n, 1.0 / n).astype(int) for n in shape], indexing="ij")
    norm = np.prod(2 * psi.spacing) / (2 * np.pi * eps) ** d
    out = np.empty((len(index),) + shape + (phi.values.shape[-1], psi.values.shape[-1]),
                   dtype=complex)
    axes = tuple(range(d))
    for k, z in enumerate(index):
        minus = tuple((z[a] - js[a]) % shape[a] for a in range(d))
        plus = tuple((z[a] + js[a]) % shape[a] for a in range(d))
        prod = np.einsum("...a,...b->...ab", phi.values[plus], np.conj(psi.values[minus]))
        if boundary == "zero":
            inside = np.ones(prod.shape[:d], dtype=bool)
            for a in range(d):
                inside &= (z[a] - js[a] >= 0) & (z[a] - js[a] < shape[a])
                inside &= (z[a] + js[a] >= 0) & (z[a] + js[a] < shape[a])
            prod = prod * inside[(Ellipsis, None, None)]
        out[k] = np.fft.fftshift(np.fft.fftn(prod, axes=axes), axes=axes) * norm
    kind = "periodic box" if boundary == "periodic" else "box, zero outside"
    return PhaseSpaceGrid(psi, index, out, {"kind": kind, "lower": list(psi.lower),
                                            "upper": list(psi.upper)})


# ----------------------------------------------------------------------------- symbols

_LETTERS = string.ascii_letters


def _factor_array(f, metric_inv, metric, values: Mapping, dim: int, p: np.ndarray):
    if f.v:
        raise DegreeTooHigh("vertical derivatives are not supported numerically")
    if f.cov or f.h:
        return None                                   # constant coefficients: derivatives vanish
    if any(s.bundle is not None for s in f.slots):
        raise GridMismatch("only scalar symbols with coordinate indices are supported")
    if f.head is METRIC:
        up = tuple(s.up for s in f.slots)
        return metric_inv if up == (True, True) else metric if up == (False, False) else np.eye(dim)
    if f.head is DIM:
        return np.array(float(dim))
    if f.head.role == "curvature":
        return None
    if f.head is MOMENTUM:
        arr = p
    else:
        if f.head.name not in values:
            raise KeyError(f"no numeric value for head {f.head.name!r}")
        arr = np.asarray(values[f.head.name], dtype=complex)
    for k, s in enumerate(f.slots):
        if s.up:
            arr = np.moveaxis(np.tensordot(metric_inv, arr, axes=([1], [k])), 0, k)
    return arr


def evaluate_symbol(expr: TensorExpr, p, metric, values: Optional[Mapping] = None,
                    eps: float = 1.0, gamma: float = 0.5) -> complex:
    """Numeric value of a scalar, constant-coefficient symbol at covector p.

    Tensor heads other than g, p and dim take covariant components from ``values``.
    """
    values = values or {}
    metric = np.asarray(metric, dtype=float)
    metric_inv = np.linalg.inv(metric)
    p = np.asarray(p, dtype=complex)
    total = 0j
    for coeff, factors in expr.terms():
        letters = {}
        arrays, subs = [], []
        for f in factors:
            arr = _factor_array(f, metric_inv, metric, values, len(p), p)
            if arr is None:
                arrays = None
                break
            arrays.append(arr)
            subs.append("".join(letters.setdefault(s.label, _LETTERS[len(letters)])
                                for s in f.slots))
        if arrays is None:
            continue
        val = np.einsum(",".join(subs) + "->", *arrays) if arrays else 1.0
        total += coeff.evaluate(gamma, eps) * complex(val)
    return total


def p_degree(expr: TensorExpr) -> int:
    return max((sum(1 for f in fs if f.head is MOMENTUM) for _, fs in expr.terms()), default=0)


def quadratic_coefficients(expr: TensorExpr, metric, values=None, eps: float = 1.0):
    """(a, b, c) with d(p) = a^{mn} p_m p_n + b^m p_m + c, exact for p-degree <= 2."""
    deg = p_degree(expr)
    if deg > 2:
        raise DegreeTooHigh(f"p-degree {deg} > 2: the flat expansion does not terminate")
    dim = np.asarray(metric).shape[0]
    ev = lambda q: evaluate_symbol(expr, q, metric, values, eps)
    e = np.eye(dim)
    c = ev(np.zeros(dim))
    b = np.array([(ev(e[m]) - ev(-e[m])) / 2 for m in range(dim)])
    a = np.zeros((dim, dim), dtype=complex)
    for m in range(dim):
        a[m, m] = (ev(e[m]) + ev(-e[m])) / 2 - c
    for m in range(dim):
        for n in range(m + 1, dim):
            a[m, n] = a[n, m] = (ev(e[m] + e[n]) - ev(e[m]) - ev(e[n]) + c) / 2
    return a, b, c


# ----------------------------------------------------------------------------- Moyal residual

def _shift(W: PhaseSpaceGrid, where: dict, z, offset) -> np.ndarray:
    shape = np.asarray(W.section.shape)
    key = tuple(int(t) for t in (np.asarray(z) + np.asarray(offset)) % shape)
    return W.values[where[key]]


def _z_derivatives(W: PhaseSpaceGrid, where: dict, z):
    """First and second central differences of W in z at lattice point z."""
    d = W.section.dim
    h = W.section.spacing
    eye = np.eye(d, dtype=int)
    w0 = _shift(W, where, z, 0 * eye[0])
    first = [(_shift(W, where, z, eye[a]) - _shift(W, where, z, -eye[a])) / (2 * h[a])
             for a in range(d)]
    second = [[None] * d for _ in range(d)]
    for a in range(d):
        second[a][a] = (_shift(W, where, z, eye[a]) - 2 * w0 + _shift(W, where, z, -eye[a])) / h[a] ** 2
        for b in range(a + 1, d):
            pp, pm = _shift(W, where, z, eye[a] + eye[b]), _shift(W, where, z, eye[a] - eye[b])
            mp, mm = _shift(W, where, z, -eye[a] + eye[b]), _shift(W, where, z, -eye[a] - eye[b])
            second[a][b] = second[b][a] = (pp - pm - mp + mm) / (4 * h[a] * h[b])
    return w0, first, second


@dataclass
class MoyalResidual:
    norm: float
    p_integral_norm: float
    relative: float
    p_integral_relative: float
    points: int
    values: dict = field(default_factory=dict)


def star_terms_flat(a, b, c, W: PhaseSpaceGrid, z, where=None, eps=None) -> np.ndarray:
    """(d * W)(z, .) for d = a pp + b p + c with constant coefficients:
    sum_k (1/k!) (-i eps / 2)^k (d_p^k d)(d_z^k W)."""
    where = W.lookup() if where is None else where
    eps = W.section.epsilon if eps is None else eps
    w0, first, second = _z_derivatives(W, where, z)
    grids = np.meshgrid(*W.momentum, indexing="ij")
    d = len(grids)
    dval = sum(a[m, n] * grids[m] * grids[n] for m in range(d) for n in range(d)) \
        + sum(b[m] * grids[m] for m in range(d)) + c
    dp = [2 * sum(a[m, n] * grids[n] for n in range(d)) + b[m] for m in range(d)]
    fiber = (Ellipsis, None, None)
    out = dval[fiber] * w0
    k1 = -1j * eps / 2
    for m in range(d):
        out = out + k1 * dp[m][fiber] * first[m]
    for m in range(d):
        for n in range(d):
            out = out + (k1 ** 2 / factorial(2)) * 2 * a[m, n] * second[m][n]
    return out


def moyal_residual_flat(d_symbol, W: PhaseSpaceGrid, metric=None, values=None,
                        centers=None) -> MoyalResidual:
    """Norms of d * W over phase space and of its momentum integral.

    ``d_symbol`` is a GradedSymbol or TensorExpr of p-degree <= 2 with constant
    coefficients; it is evaluated at eps = W's epsilon.  The flat star product
    terminates at second order for such symbols, so no truncation error enters;
    z-derivatives are central differences.  Points whose stencil is not stored are skipped.
    """
    expr = getattr(d_symbol, "expr", d_symbol)
    sec = W.section
    metric = np.eye(sec.dim) if metric is None else np.asarray(metric, dtype=float)
    if metric.shape != (sec.dim, sec.dim):
        raise GridMismatch("metric dimension differs from the grid dimension")
    a, b, c = quadratic_coefficients(expr, metric, values, sec.epsilon)
    where = W.lookup()
    if centers is None:
        centers = [z for z in W.index
                   if all(tuple(int(t) for t in (z + o) % np.asarray(sec.shape)) in where
                          for o in _offsets(sec.dim))]
    dzdp = W.dz() * W.dp()
    num = den = inum = iden = 0.0
    for z in centers:
        r = star_terms_flat(a, b, c, W, z, where)
        w = W.values[where[tuple(int(t) for t in z)]]
        axes = tuple(range(sec.dim))
        num += float(np.sum(np.abs(r) ** 2)) * dzdp
        den += float(np.sum(np.abs(w) ** 2)) * dzdp
        ir = np.sum(r, axis=axes) * W.dp()
        iw = np.sum(w, axis=axes) * W.dp()
        inum += float(np.sum(np.abs(ir) ** 2)) * W.dz()
        iden += float(np.sum(np.abs(iw) ** 2)) * W.dz()
    if not len(centers):
        raise GridMismatch("no stored position has its full difference stencil")
    rel = np.sqrt(num / den) if den else float("inf")
    irel = np.sqrt(inum / iden) if iden else float("inf")
    return MoyalResidual(float(np.sqrt(num)), float(np.sqrt(inum)), float(rel), float(irel),
                         len(centers), {"a": a.tolist(), "b": b.tolist(), "c": complex(c)})


def _offsets(d: int) -> np.ndarray:
    return np.array(np.meshgrid(*[np.arange(-1, 2)] * d, indexing="ij")).reshape(d, -1).T


# ----------------------------------------------------------------------------- packets

def sample(fun, lower: Sequence[float], upper: Sequence[float], shape: Sequence[int],
           epsilon: float) -> GridSection:
    """GridSection of a callable evaluated on the periodic lattice."""
    axes = [lo + (hi - lo) / n * np.arange(n) for lo, hi, n in zip(lower, upper, shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return GridSection(tuple(lower), tuple(upper), np.asarray(fun(*mesh), dtype=complex), epsilon)


def apply_constant_operator(a, b, c, section: GridSection) -> GridSection:
    """Quantization of a pp + b p + c with p -> -i eps d, applied spectrally."""
    eps, d = section.epsilon, section.dim
    ks = np.meshgrid(*[2 * np.pi * np.fft.fftfreq(n, h) for n, h in zip(section.shape,
                                                                          section.spacing)],
                     indexing="ij")
    sym = sum(a[m][n] * (eps * ks[m]) * (eps * ks[n]) for m in range(d) for n in range(d)) \
        + sum(b[m] * eps * ks[m] for m in range(d)) + c
    axes = tuple(range(d))
    vals = np.fft.ifftn(sym[..., None] * np.fft.fftn(section.values, axes=axes), axes=axes)
    return GridSection(section.lower, section.upper, vals, eps)
