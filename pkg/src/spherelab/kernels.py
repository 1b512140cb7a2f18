"""Band-filtered reproducing kernels and their exact derivatives.

A KernelField fixes a cutoff, a scale k and a weight kind ("squared"
uses |chi|^2, "plain" uses chi).  Its kernel is the finite band sum

    S(x, y) = sum over band degrees m of  w_m c_m <x, y>^m,

with w_m the sampled cutoff and c_m the degree projector constants.  On
the round sphere unitary invariance collapses the diagonal data to three
band moments

    K0 = sum w_m c_m,  K1 = sum m w_m c_m,  K2 = sum m^2 w_m c_m,

so diagonal values, first derivatives and the mixed second derivative at
the diagonal are exact closed expressions in K0, K1, K2; no numerical
differentiation is performed anywhere (finite differences appear only as
test oracles).

Direction convention: derivative slots take ambient complex vectors.
For the first slot the derivative of <x, y> along u is <u, y>; for the
second slot it is <x, v>.  A real tangent vector enters via its complex
packing; a (1,0)-type direction via its representing vector, which makes
mixed (first slot, conjugated second slot) evaluations sesquilinear.
"""

from __future__ import annotations

import math

import numpy as np

from spherelab import _accel
from spherelab.basis import DegreeTable
from spherelab.cutoffs import Cutoff, band_moment, mean_value
from spherelab.geometry import hermitian_pair

__all__ = ["KernelField"]


class KernelField:
    """Band kernel with exact diagonal derivative data."""

    def __init__(self, table: DegreeTable, cutoff: Cutoff, k, weight="squared", kappa=0.0):
        if k <= 0:
            raise ValueError("k must be positive")
        if weight not in ("squared", "plain"):
            raise ValueError("weight must be 'squared' or 'plain'")
        self.table = table
        self.cutoff = cutoff
        self.k = float(k)
        self.weight = weight
        self.kappa = float(kappa)
        self.n = table.n
        ms = cutoff.band_degrees(k)
        if ms.size and ms.max() > table.max_degree:
            raise ValueError("degree table too small for this k and cutoff")
        wm = cutoff.chi(ms / self.k)
        if weight == "squared":
            wm = wm * wm
        keep = wm != 0.0
        self.degrees = ms[keep]
        self.band_weights = wm[keep]
        self.coeffs = self.band_weights * table.constants[self.degrees]
        self.moment0 = math.fsum(self.coeffs)
        self.moment1 = math.fsum(self.coeffs * self.degrees)
        self.moment2 = math.fsum(self.coeffs * self.degrees.astype(float) ** 2)
        if self.moment0 <= 0.0:
            raise ArithmeticError("empty or degenerate spectral band")

    # ------------------------------------------------------------ kernels
    def pair_product(self, x, y):
        """Hermitian pairing <x, y> broadcast over leading axes."""
        return hermitian_pair(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))

    def kernel(self, x, y):
        """S(x, y), compensated ascending-degree band sum."""
        q = self.pair_product(x, y)
        return _accel.band_power_sum(q, self.degrees, self.coeffs.astype(complex))

    def kernel_from_products(self, q):
        """S as a function of the pairing value <x, y> directly."""
        return _accel.band_power_sum(np.asarray(q, dtype=complex), self.degrees, self.coeffs.astype(complex))

    def diag(self):
        """S(x, x); constant on the sphere by unitary invariance."""
        return self.moment0

    def squared_length(self):
        """kappa^2 + S(x, x): squared length of the component vector."""
        return self.kappa ** 2 + self.moment0

    # --------------------------------------------------------- derivatives
    def grad_diag_pair(self, x, u):
        """First-slot derivative at the diagonal on the direction u."""
        return self.moment1 * self.pair_product(u, x)

    def second_diag_pair(self, x, u, v):
        """Mixed (first slot, second slot) derivative at the diagonal."""
        ux = self.pair_product(u, x)
        xv = self.pair_product(x, v)
        uv = self.pair_product(u, v)
        return (self.moment2 - self.moment1) * ux * xv + self.moment1 * uv

    def beta_pair(self, x, u):
        """The expected-zero one-form: grad / (2 pi i (kappa^2 + diag))."""
        return self.grad_diag_pair(x, u) / (2j * math.pi * self.squared_length())

    def beta_scale(self):
        """beta = beta_scale() * xi on the sphere (tested, not assumed)."""
        return self.moment1 / (2.0 * math.pi * self.squared_length())

    # ---------------------------------------------------- reference values
    def _weight_moment(self, j):
        return band_moment(self.cutoff, j, self.n, squared=(self.weight == "squared"))

    def diag_reference(self):
        """Leading-order diagonal value k^{n+1} (2 pi^{n+1})^{-1} moment0."""
        return self.k ** (self.n + 1) / (2.0 * math.pi ** (self.n + 1)) * self._weight_moment(0)

    def grad_reference(self):
        """Leading magnitude of the diagonal gradient along the Reeb form."""
        return self.k ** (self.n + 2) / (2.0 * math.pi ** (self.n + 1)) * self._weight_moment(1)

    def second_reference(self):
        """Leading magnitude of the mixed second derivative on Reeb pairs."""
        return self.k ** (self.n + 3) / (2.0 * math.pi ** (self.n + 1)) * self._weight_moment(2)

    def beta_reeb_limit(self):
        """Limit of (2 pi / k) * beta(Reeb): the band mean value."""
        return mean_value(self.cutoff, self.n, squared=(self.weight == "squared"))

    # ------------------------------------------------------- ball quantities
    def ball_amplitude(self, points):
        """Sum of squared moduli of the weighted extended components.

        Depends on |z|^2 only; vanishes at 0 because the band excludes
        degree zero; increases with |z|."""
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        q = np.sum(points * np.conj(points), axis=-1).real.astype(complex)
        return _accel.band_power_sum(q, self.degrees, self.coeffs.astype(complex)).real

    def ball_kernel(self, z, w):
        """Two-point extension S(z, w) on ball points."""
        return self.kernel(z, w)

    def ddbar_log(self, points, c=1.0):
        """Matrix of the complex Hessian of log(c + amplitude).

        Returns (npoints, n+1, n+1) with entries d^2/dz_j dconj(z_k); the
        matrix is Hermitian and positive semidefinite for c > 0.
        """
        if c <= 0.0:
            raise ValueError("c must be positive")
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        q = np.sum(points * np.conj(points), axis=-1).real
        ms = self.degrees.astype(float)
        qc = q.astype(complex)
        s0 = _accel.band_power_sum(qc, self.degrees, self.coeffs.astype(complex)).real
        # first and second radial band sums: sum m w c q^{m-1}, sum m(m-1) w c q^{m-2}
        d1_coeffs = (self.coeffs * ms).astype(complex)
        d2_coeffs = (self.coeffs * ms * (ms - 1.0)).astype(complex)
        s1 = np.zeros_like(s0)
        s2 = np.zeros_like(s0)
        if self.degrees.min() >= 1:
            s1 = _accel.band_power_sum(qc, self.degrees - 1, d1_coeffs).real
        if self.degrees.min() >= 2:
            s2 = _accel.band_power_sum(qc, self.degrees - 2, d2_coeffs).real
        denom = c + s0
        zbar = np.conj(points)
        outer = zbar[:, :, None] * points[:, None, :]
        eye = np.eye(points.shape[1])[None, :, :]
        h = ((s2 * denom - s1 ** 2) / denom ** 2)[:, None, None] * outer
        h = h + (s1 / denom)[:, None, None] * eye
        return h

    def log_amplitude_bound_constant(self, points, c=1.0):
        """max |log(c + amplitude)| / (log k + 1) over the given points."""
        vals = np.abs(np.log(c + self.ball_amplitude(points)))
        return float(np.max(vals)) / (math.log(self.k) + 1.0)
