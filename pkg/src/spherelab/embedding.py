"""The band component map into projective space and its metric data.

For a scale k the map sends a sphere point to the vector of cutoff-
weighted normalized monomials (optionally prefixed by a constant kappa
component).  Its projectivization is studied through

    normalized_overlap h(x, y) = |<F(x), F(y)>|^2 / (|F(x)|^2 |F(y)|^2),
    overlap_hessian    H(u, v) = Re(<uF, F> conj(<vF, F>)
                                  - <uF, vF> |F|^2) / |F|^4,

and the pullback of the Fubini-Study line element

    fs(u, v) = (|F|^2 <uF, vF> - <uF, F> conj(<vF, F>)) / |F|^4,

whose real part on real pairs is -H.  All inner products reduce to the
band kernel's exact diagonal data, so every quantity here is closed
form in the three band moments; finite differences only appear in tests.
"""

from __future__ import annotations

import math

import numpy as np

from spherelab.basis import DegreeTable, graded_indices
from spherelab.cutoffs import Cutoff
from spherelab.geometry import hermitian_pair, random_sphere_points, tangent_frame
from spherelab.kernels import KernelField

__all__ = ["EmbeddingMap"]


class EmbeddingMap:
    """Cutoff-weighted component map at scale k with kappa in {0, 1}."""

    def __init__(self, table: DegreeTable, cutoff: Cutoff, k, kappa=0):
        if kappa not in (0, 1):
            raise ValueError("kappa must be 0 or 1")
        self.table = table
        self.cutoff = cutoff
        self.k = float(k)
        self.kappa = float(kappa)
        self.field = KernelField(table, cutoff, k, weight="squared", kappa=kappa)
        self._alphas = []
        self._component_weights = []
        for m in self.field.degrees:
            w = float(cutoff.chi(m / self.k))
            for alpha in graded_indices(int(m), table.n):
                self._alphas.append(alpha)
                self._component_weights.append(w)

    @property
    def ncomponents(self):
        return len(self._alphas) + (1 if self.kappa else 0)

    def components(self, points):
        """Component vectors (npoints, ncomponents), graded-lex order."""
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        m = self.table.design_matrix(self._alphas, points, extra_scale=self._component_weights)
        if self.kappa:
            const = np.full((points.shape[0], 1), self.kappa, dtype=complex)
            return np.hstack([const, m])
        return m

    def component_eigenvalues(self):
        """Degree of each component (0 for the kappa slot)."""
        degs = [sum(a) for a in self._alphas]
        if self.kappa:
            return np.array([0] + degs)
        return np.array(degs)

    # ------------------------------------------------------------- overlap
    def squared_length(self):
        return self.field.squared_length()

    def overlap(self, x, y):
        """<F(x), F(y)> = kappa^2 + band kernel."""
        return self.kappa ** 2 + self.field.kernel(x, y)

    def normalized_overlap(self, x, y):
        """h(x, y) in [0, 1]; equals 1 iff the projective images agree."""
        num = np.abs(self.overlap(x, y)) ** 2
        return num / self.squared_length() ** 2

    def normalized_overlap_from_products(self, q):
        """h as a function of the Hermitian pairing <x, y> (unitary
        invariance makes this the full dependence)."""
        s = self.kappa ** 2 + self.field.kernel_from_products(q)
        return np.abs(s) ** 2 / self.squared_length() ** 2

    def fs_distance(self, x, y):
        """Fubini-Study distance sqrt(1 - sqrt(h))."""
        h = np.clip(self.normalized_overlap(x, y).real, 0.0, 1.0)
        return np.sqrt(1.0 - np.sqrt(h))

    # ----------------------------------------------------------- derivatives
    def _grad(self, x, u):
        return self.field.grad_diag_pair(x, u)

    def _second(self, x, u, v):
        return self.field.second_diag_pair(x, u, v)

    def fs_pullback(self, x, u, v):
        """Sesquilinear Fubini-Study pullback on directions (u, v)."""
        L = self.squared_length()
        return (L * self._second(x, u, v) - self._grad(x, u) * np.conj(self._grad(x, v))) / L ** 2

    def overlap_hessian_pair(self, x, u, v):
        """H(u, v) for real tangent directions in complex packing."""
        L = self.squared_length()
        val = self._grad(x, u) * np.conj(self._grad(x, v)) - self._second(x, u, v) * L
        return val.real / L ** 2

    def overlap_hessian_matrix(self, x, frame=None):
        """Symmetric matrix of H in a real tangent frame (default frame)."""
        frame = frame if frame is not None else tangent_frame(x)
        dim = len(frame)
        out = np.empty((dim, dim))
        for i in range(dim):
            for j in range(dim):
                out[i, j] = self.overlap_hessian_pair(x, frame[i], frame[j])
        return 0.5 * (out + out.T)

    def scaled_hessian_matrix(self, x):
        """H in the frame (Reeb scaled by 1/k, horizontals by 1/sqrt(k)).

        Converges entrywise to a fixed negative-definite matrix; the
        deviation decays like 1/sqrt(k)."""
        frame = tangent_frame(x)
        scales = np.array([1.0 / self.k] + [1.0 / math.sqrt(self.k)] * (len(frame) - 1))
        h = self.overlap_hessian_matrix(x, frame)
        return h * scales[:, None] * scales[None, :]

    # ------------------------------------------------------------- scans
    def separation_scan(self, sample_size=400, min_distance=0.5, rng=None):
        """Max normalized overlap over sampled pairs at chordal distance
        at least min_distance; flags any h above 1 or above 1 - margin."""
        rng = np.random.default_rng(rng)
        xs = random_sphere_points(sample_size, self.table.n, rng)
        ys = random_sphere_points(sample_size, self.table.n, rng)
        chordal = np.linalg.norm(xs - ys, axis=1)
        keep = chordal >= min_distance
        q = hermitian_pair(xs[keep], ys[keep])
        h = self.normalized_overlap_from_products(q).real
        return {
            "k": self.k,
            "pairs": int(keep.sum()),
            "min_distance": float(min_distance),
            "max_h": float(h.max()) if h.size else 0.0,
            "violations_above_one": int(np.sum(h > 1.0 + 1e-12)),
        }
