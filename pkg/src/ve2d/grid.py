"""Periodic grid for a centered 2D box with integer wavenumbers."""

import numpy as np


class Grid:
    """Uniform n x n periodic grid on [-L/2, L/2)^2.

    Axis 0 is x1, axis 1 is x2 (row-major, 'ij' indexing).  Wavenumbers
    are k_j = 2*pi*m_j/L with m_j integer in [-n/2, n/2).
    """

    def __init__(self, n: int, box_len: float):
        if n < 8 or n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 8, got {n}")
        if box_len <= 0:
            raise ValueError(f"box length must be positive, got {box_len}")
        self.n = int(n)
        self.box_len = float(box_len)
        self.spacing = self.box_len / self.n

        axis = (np.arange(self.n) - self.n // 2) * self.spacing
        self.coords = axis
        self.x1, self.x2 = np.meshgrid(axis, axis, indexing="ij")
        self.r = np.hypot(self.x1, self.x2)

        k_axis = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)
        # zero the Nyquist mode: odd-order derivatives of real fields have
        # no Hermitian-consistent value there, and zeroing it makes all
        # multiplier compositions exact identities
        k_axis[self.n // 2] = 0.0
        self.k1, self.k2 = np.meshgrid(k_axis, k_axis, indexing="ij")
        # k_perp = (-k2, k1)
        self.k1_perp = -self.k2
        self.k2_perp = self.k1
        self.k_sq = self.k1 ** 2 + self.k2 ** 2
        inv = np.zeros_like(self.k_sq)
        nonzero = self.k_sq > 0.0
        inv[nonzero] = 1.0 / self.k_sq[nonzero]
        self.inv_k_sq = inv

        m = np.rint(np.fft.fftfreq(self.n) * self.n)
        m1, m2 = np.meshgrid(m, m, indexing="ij")
        # 2/3 rule: keep modes with max(|m1|, |m2|) <= n/3
        self.keep_mask = (np.abs(m1) <= self.n / 3.0) & (np.abs(m2) <= self.n / 3.0)

    def zeros(self) -> np.ndarray:
        return np.zeros((self.n, self.n))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Grid)
            and self.n == other.n
            and self.box_len == other.box_len
        )

    def __hash__(self):
        return hash((self.n, self.box_len))

    def __repr__(self) -> str:
        return f"Grid(n={self.n}, box_len={self.box_len})"
