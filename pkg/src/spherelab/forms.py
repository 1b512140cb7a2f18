"""Exact exterior calculus for polynomial-coefficient ambient forms.

Forms live on R^{2(n+1)} identified with C^{n+1}.  Internally every form
is stored in the complex covector basis dz_j, dconj(z_j) with monomial
coefficients in z and conj(z); this makes the exterior derivative and
its (1,0)/(0,1) split exact term manipulations, with no numerical
differentiation anywhere.  Constructors accept the real coordinates
x_0, ..., x_{2n+1} (x_{2j} + i x_{2j+1} = z_j) and convert exactly.

Directions for evaluation are (holomorphic, antiholomorphic) component
pairs: a real tangent vector u (complex packing) evaluates covectors as
dz_j -> u_j, dconj(z_j) -> conj(u_j); a (1,0) direction w evaluates as
dz_j -> w_j, dconj(z_j) -> 0.
"""

from __future__ import annotations

import numpy as np

__all__ = ["PolyForm", "dz", "dzbar", "dx", "z_coord", "zbar_coord", "x_coord", "real_direction", "holo_direction", "antiholo_direction"]


def _merge_sign(word_a, word_b):
    """Concatenate two strictly increasing covector words; None if repeated."""
    merged = list(word_a) + list(word_b)
    seen = set(merged)
    if len(seen) != len(merged):
        return None, 0
    # count inversions of the concatenation relative to sorted order
    inv = 0
    for i in range(len(merged)):
        for j in range(i + 1, len(merged)):
            if merged[i] > merged[j]:
                inv += 1
    order = tuple(sorted(merged))
    return order, (-1) ** inv


class PolyForm:
    """Differential form with polynomial coefficients, complex basis.

    terms maps (word, exps) -> complex coefficient, where word is a
    strictly increasing tuple of covector ids (2j = dz_j, 2j+1 =
    dconj(z_j)) and exps is a tuple of 2(n+1) nonnegative exponents
    (z_0, conj(z_0), z_1, conj(z_1), ...).
    """

    __slots__ = ("ncplx", "terms")

    def __init__(self, ncplx, terms=None):
        self.ncplx = int(ncplx)
        self.terms = {}
        if terms:
            for key, c in terms.items():
                if c != 0:
                    self.terms[key] = self.terms.get(key, 0.0 + 0.0j) + complex(c)
            self.terms = {k: v for k, v in self.terms.items() if v != 0}

    # ------------------------------------------------------------- basics
    @classmethod
    def zero(cls, ncplx):
        return cls(ncplx)

    @classmethod
    def constant(cls, value, ncplx):
        exps = (0,) * (2 * ncplx)
        return cls(ncplx, {((), exps): complex(value)})

    @classmethod
    def monomial(cls, ncplx, coeff, exps, word=()):
        word = tuple(word)
        if any(word[i] >= word[i + 1] for i in range(len(word) - 1)):
            raise ValueError("covector word must be strictly increasing")
        return cls(ncplx, {(word, tuple(exps)): complex(coeff)})

    @property
    def degree(self):
        degs = {len(w) for w, _ in self.terms}
        if not degs:
            return 0
        if len(degs) > 1:
            raise ValueError("mixed-degree form has no single degree")
        return degs.pop()

    @property
    def bidegree(self):
        """(p, q) type; raises for mixed-type forms."""
        types = set()
        for word, _ in self.terms:
            p = sum(1 for c in word if c % 2 == 0)
            types.add((p, len(word) - p))
        if not types:
            return (0, 0)
        if len(types) > 1:
            raise ValueError("mixed-type form has no single bidegree")
        return types.pop()

    def __add__(self, other):
        if not isinstance(other, PolyForm):
            other = PolyForm.constant(other, self.ncplx)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0.0 + 0.0j) + c
        return PolyForm(self.ncplx, out)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return PolyForm(self.ncplx, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PolyForm):
            other = PolyForm.constant(other, self.ncplx)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, PolyForm):
            return self.wedge(scalar)
        return PolyForm(self.ncplx, {k: c * scalar for k, c in self.terms.items()})

    def __rmul__(self, scalar):
        return self.__mul__(scalar)

    def conj(self):
        """Complex conjugate form (swaps dz_j with dconj(z_j))."""
        out = {}
        for (word, exps), c in self.terms.items():
            new_word = tuple(sorted(w ^ 1 for w in word))
            # sign from re-sorting the swapped word
            swapped = [w ^ 1 for w in word]
            inv = sum(1 for i in range(len(swapped)) for j in range(i + 1, len(swapped)) if swapped[i] > swapped[j])
            new_exps = list(exps)
            for j in range(self.ncplx):
                new_exps[2 * j], new_exps[2 * j + 1] = exps[2 * j + 1], exps[2 * j]
            key = (new_word, tuple(new_exps))
            out[key] = out.get(key, 0.0 + 0.0j) + (-1) ** inv * np.conj(c)
        return PolyForm(self.ncplx, out)

    # ---------------------------------------------------------- operations
    def wedge(self, other):
        if self.ncplx != other.ncplx:
            raise ValueError("dimension mismatch")
        out = {}
        for (wa, ea), ca in self.terms.items():
            for (wb, eb), cb in other.terms.items():
                word, sign = _merge_sign(wa, wb)
                if sign == 0:
                    continue
                exps = tuple(a + b for a, b in zip(ea, eb))
                key = (word, exps)
                out[key] = out.get(key, 0.0 + 0.0j) + sign * ca * cb
        return PolyForm(self.ncplx, out)

    def _derive(self, holomorphic):
        out = {}
        for (word, exps), c in self.terms.items():
            for j in range(self.ncplx):
                slot = 2 * j if holomorphic else 2 * j + 1
                cov = 2 * j if holomorphic else 2 * j + 1
                e = exps[slot]
                if e == 0 or cov in word:
                    continue
                new_exps = list(exps)
                new_exps[slot] -= 1
                # prepend the covector, then sort into the word
                merged, sign = _merge_sign((cov,), word)
                if sign == 0:
                    continue
                key = (merged, tuple(new_exps))
                out[key] = out.get(key, 0.0 + 0.0j) + sign * c * e
        return PolyForm(self.ncplx, out)

    def partial_z(self):
        """Holomorphic exterior derivative (the (1,0) part of d)."""
        return self._derive(True)

    def partial_zbar(self):
        """Antiholomorphic exterior derivative (the (0,1) part of d)."""
        return self._derive(False)

    def d(self):
        """Exterior derivative; d(d(form)) vanishes identically."""
        return self.partial_z() + self.partial_zbar()

    # ---------------------------------------------------------- evaluation
    def coefficient_values(self, points):
        """Coefficient polynomials evaluated at points, keyed by word."""
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        by_word = {}
        for (word, exps), c in self.terms.items():
            mono = np.ones(points.shape[0], dtype=complex)
            for j in range(self.ncplx):
                if exps[2 * j]:
                    mono = mono * points[:, j] ** exps[2 * j]
                if exps[2 * j + 1]:
                    mono = mono * np.conj(points[:, j]) ** exps[2 * j + 1]
            if word in by_word:
                by_word[word] = by_word[word] + c * mono
            else:
                by_word[word] = c * mono
        return by_word

    def evaluate(self, points, directions):
        """Value of the p-form on p direction fields at each point.

        directions is a sequence of (holo, antiholo) pairs of arrays with
        shape (ncplx,) or (npoints, ncplx).
        """
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        npts = points.shape[0]
        if not self.terms:
            return np.zeros(npts, dtype=complex)
        p = self.degree
        if len(directions) != p:
            raise ValueError(f"form of degree {p} requires {p} directions")
        cov_vals = []  # per direction: (npts, 2*ncplx) covector values
        for holo, anti in directions:
            holo = np.broadcast_to(np.asarray(holo, dtype=complex), (npts, self.ncplx))
            anti = np.broadcast_to(np.asarray(anti, dtype=complex), (npts, self.ncplx))
            vals = np.empty((npts, 2 * self.ncplx), dtype=complex)
            vals[:, 0::2] = holo
            vals[:, 1::2] = anti
            cov_vals.append(vals)
        out = np.zeros(npts, dtype=complex)
        if p == 0:
            for word, coeff in self.coefficient_values(points).items():
                out += coeff
            return out
        for word, coeff in self.coefficient_values(points).items():
            mat = np.empty((npts, p, p), dtype=complex)
            for r, cov in enumerate(word):
                for s in range(p):
                    mat[:, r, s] = cov_vals[s][:, cov]
            out += coeff * np.linalg.det(mat)
        return out

    def sampled_cnorm(self, points, order=0):
        """Sup over sample points of coefficient magnitudes and their
        z/zbar-derivatives up to the given order; a sampling proxy for the
        C^order norm sufficient for polynomial coefficients."""
        best = 0.0
        stack = [self]
        for _ in range(order + 1):
            next_stack = []
            for form in stack:
                for vals in form.coefficient_values(points).values():
                    m = float(np.max(np.abs(vals))) if vals.size else 0.0
                    best = max(best, m)
                next_stack.extend([form.partial_z(), form.partial_zbar()])
            stack = next_stack
        return best

    def __repr__(self):
        return f"PolyForm(ncplx={self.ncplx}, nterms={len(self.terms)})"


# ------------------------------------------------------------ constructors
def dz(j, ncplx=2):
    return PolyForm.monomial(ncplx, 1.0, (0,) * (2 * ncplx), (2 * j,))


def dzbar(j, ncplx=2):
    return PolyForm.monomial(ncplx, 1.0, (0,) * (2 * ncplx), (2 * j + 1,))


def z_coord(j, ncplx=2):
    exps = [0] * (2 * ncplx)
    exps[2 * j] = 1
    return PolyForm.monomial(ncplx, 1.0, exps)


def zbar_coord(j, ncplx=2):
    exps = [0] * (2 * ncplx)
    exps[2 * j + 1] = 1
    return PolyForm.monomial(ncplx, 1.0, exps)


def x_coord(i, ncplx=2):
    """Real coordinate x_i as a 0-form (x_{2j} = Re z_j, x_{2j+1} = Im z_j)."""
    j, odd = divmod(i, 2)
    if odd:
        return (z_coord(j, ncplx) - zbar_coord(j, ncplx)) * (1.0 / 2j)
    return (z_coord(j, ncplx) + zbar_coord(j, ncplx)) * 0.5


def dx(i, ncplx=2):
    """Real coordinate covector dx_i."""
    j, odd = divmod(i, 2)
    if odd:
        return (dz(j, ncplx) - dzbar(j, ncplx)) * (1.0 / 2j)
    return (dz(j, ncplx) + dzbar(j, ncplx)) * 0.5


# ------------------------------------------------------------- directions
def real_direction(u):
    """Direction pair of a real tangent vector given in complex packing."""
    u = np.asarray(u, dtype=complex)
    return (u, np.conj(u))


def holo_direction(w):
    """(1,0)-type direction represented by the complex vector w."""
    w = np.asarray(w, dtype=complex)
    return (w, np.zeros_like(w))


def antiholo_direction(w):
    """(0,1)-type direction conj(Z_w)."""
    w = np.asarray(w, dtype=complex)
    return (np.zeros_like(w), np.conj(w))
