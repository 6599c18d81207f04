"""Lattice bump symbols and their tensor-product Fourier decomposition.

The symbol is sigma(xi1, xi2) = sum_{mu1,mu2} a(mu1,mu2) Phi(xi1-mu1, xi2-mu2)
for a finitely supported coefficient array a on Z^n x Z^n and a smooth bump
Phi on R^(2n).  Expanding Phi in a Fourier series on the period box KQ x KQ
and multiplying by a plateau cutoff phi (== 1 on the half box, supported in
the box) rewrites the symbol as a rapidly converging sum of separable pieces

    sigma = sum_{k1,k2} b(k1,k2) sigma_{a, phi_k1 (x) phi_k2},
    phi_k(xi) = e^{2 pi i xi.k / K} phi(xi),

which is the basis of the fast operator path in :mod:`latticebump.operators`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bumps import BumpProfile, _axis_factor, bump_eval_axes, make_plateau
from .grid import GridSpec

__all__ = [
    "LatticeCoefficients",
    "SymbolGrid",
    "CMDecomposition",
    "lattice_delta",
    "lattice_from_dict",
    "random_lattice_coefficients",
    "synth_sigma",
    "cm_decompose",
    "cm_reconstruct",
    "sigma_from_cm",
]


def _key(mu, n: int) -> tuple[int, ...]:
    t = tuple(int(c) for c in np.atleast_1d(mu))
    if len(t) != n:
        raise ValueError(f"lattice point must have {n} components, got {mu!r}")
    return t


@dataclass
class LatticeCoefficients:
    """Finitely supported a : Z^n x Z^n -> C."""

    n: int
    entries: dict[tuple[tuple[int, ...], tuple[int, ...]], complex]

    def items(self):
        return self.entries.items()

    def __len__(self) -> int:
        return len(self.entries)

    def sup_norm(self) -> float:
        return max((abs(v) for v in self.entries.values()), default=0.0)

    def support_radius(self) -> int:
        """max |mu|_inf over both coordinates of the support."""
        r = 0
        for (m1, m2) in self.entries:
            r = max(r, max(abs(c) for c in m1 + m2))
        return r

    def scaled(self, c: complex) -> "LatticeCoefficients":
        return LatticeCoefficients(self.n, {k: c * v for k, v in self.entries.items()})

    def shifted(self, nu1, nu2) -> "LatticeCoefficients":
        nu1, nu2 = _key(nu1, self.n), _key(nu2, self.n)
        return LatticeCoefficients(self.n, {
            (tuple(a + b for a, b in zip(m1, nu1)), tuple(a + b for a, b in zip(m2, nu2))): v
            for (m1, m2), v in self.entries.items()})

    def __add__(self, other: "LatticeCoefficients") -> "LatticeCoefficients":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0.0) + v
        return LatticeCoefficients(self.n, out)


def lattice_from_dict(n: int, entries: dict) -> LatticeCoefficients:
    """Normalize {(mu1, mu2): value} keys; scalars allowed for n = 1."""
    norm = {}
    for (m1, m2), v in entries.items():
        norm[(_key(m1, n), _key(m2, n))] = complex(v)
    return LatticeCoefficients(n, norm)


def lattice_delta(n: int, mu1=None, mu2=None, value: complex = 1.0) -> LatticeCoefficients:
    """Single-entry coefficients, default at the origin."""
    z = (0,) * n
    m1 = _key(mu1, n) if mu1 is not None else z
    m2 = _key(mu2, n) if mu2 is not None else z
    return LatticeCoefficients(n, {(m1, m2): complex(value)})


def random_lattice_coefficients(n: int, radius: int, count: int,
                                seed: int) -> LatticeCoefficients:
    """``count`` standard complex gaussian entries drawn without replacement
    from the index box |mu1|_inf, |mu2|_inf <= radius."""
    rng = np.random.default_rng(seed)
    side = 2 * radius + 1
    total = side ** (2 * n)
    if count > total:
        raise ValueError(f"count {count} exceeds {total} available positions")
    flat = rng.choice(total, size=count, replace=False)
    entries = {}
    for pos in flat:
        digits = []
        p = int(pos)
        for _ in range(2 * n):
            digits.append(p % side - radius)
            p //= side
        m1, m2 = tuple(digits[:n]), tuple(digits[n:])
        entries[(m1, m2)] = complex(rng.standard_normal(), rng.standard_normal())
    return LatticeCoefficients(n, entries)


@dataclass
class SymbolGrid:
    """Symbol samples over frequency-grid pairs (xi1, xi2), shape (N,)*(2n)."""

    spec: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        shape = (self.spec.N,) * (2 * self.spec.n)
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.shape != shape:
            raise ValueError(f"symbol shape {self.samples.shape}, expected {shape}")

    def save(self, prefix) -> None:
        """Write raw complex128 little-endian C-order data and a JSON header."""
        prefix = Path(prefix)
        data = np.ascontiguousarray(self.samples.astype("<c16"))
        prefix.with_suffix(".bin").write_bytes(data.tobytes())
        header = {
            "dtype": "complex128-le",
            "order": "C",
            "shape": list(self.samples.shape),
            "grid": {"n": self.spec.n, "L": self.spec.L, "s": self.spec.s},
            "layout": "centered: index i -> frequency (i - N/2)/L per axis",
        }
        prefix.with_suffix(".json").write_text(json.dumps(header, indent=2, sort_keys=True))

    @classmethod
    def load(cls, prefix) -> "SymbolGrid":
        prefix = Path(prefix)
        header = json.loads(prefix.with_suffix(".json").read_text())
        g = header["grid"]
        spec = GridSpec(n=g["n"], L=g["L"], s=g["s"])
        data = np.frombuffer(prefix.with_suffix(".bin").read_bytes(), dtype="<c16")
        return cls(spec, data.reshape(header["shape"]).astype(complex))


def _check_supports(a: LatticeCoefficients, phi: BumpProfile, spec: GridSpec) -> None:
    if a.n != spec.n:
        raise ValueError(f"coefficients are {a.n}-dimensional, grid is {spec.n}")
    if phi.d != 2 * spec.n:
        raise ValueError(f"Phi must live on R^(2n) = R^{2 * spec.n}, got d={phi.d}")
    if a.support_radius() > spec.L // 4:
        raise ValueError(
            f"coefficient support radius {a.support_radius()} exceeds L/4 = {spec.L // 4}")
    if max(phi.radius) >= spec.L / 2:
        raise ValueError(f"Phi support radius {max(phi.radius)} must be < L/2 = {spec.L / 2}")


def _shifted_axes(spec: GridSpec, shift: tuple[int, ...] | tuple[float, ...]) -> list[np.ndarray]:
    """Per-axis frequency coordinates minus the shift, shaped for broadcasting
    over the (N,)*(2n) symbol grid."""
    xi = spec.axis_xi()
    d = 2 * spec.n
    axes = []
    for j, sh in enumerate(shift):
        shape = [1] * d
        shape[j] = spec.N
        axes.append((xi - sh).reshape(shape))
    return axes


def synth_sigma(a: LatticeCoefficients, phi: BumpProfile, spec: GridSpec) -> SymbolGrid:
    """Sample sigma_{a,Phi} exactly at the frequency grid points."""
    _check_supports(a, phi, spec)
    out = np.zeros((spec.N,) * (2 * spec.n), dtype=complex)
    for (m1, m2), val in a.items():
        axes = _shifted_axes(spec, m1 + m2)
        out += val * bump_eval_axes(phi, axes)
    return SymbolGrid(spec, out)


# ---------------------------------------------------------------------------
# Fourier-series decomposition with plateau cutoff
# ---------------------------------------------------------------------------


@dataclass
class CMDecomposition:
    """Truncated Fourier coefficients b(k1,...,k_{2n}) of Phi on KQ^(2n),
    together with the plateau cutoff phi (== 1 on 2^{-1}KQ, supported in KQ).

    ``tail`` is sum |b| over the computed coefficients outside the stored
    |k|_inf <= M block (plus nothing beyond the computation range, where the
    coefficients are below roundoff of the quadrature)."""

    n: int
    K: float
    M: int
    coeffs: np.ndarray  # shape (2M+1,)*(2n), index k+M per axis
    cutoff: BumpProfile
    tail: float

    def coefficient(self, k) -> complex:
        idx = tuple(int(c) + self.M for c in np.atleast_1d(k))
        return complex(self.coeffs[idx])

    def decay_constant(self, J: int = 4) -> float:
        """Fitted C_J with |b(k)| <= C_J (1 + sum|k_i|)^{-J} over stored coeffs."""
        grids = np.meshgrid(*(np.arange(-self.M, self.M + 1),) * (2 * self.n),
                            indexing="ij")
        weight = (1.0 + sum(np.abs(g) for g in grids)) ** J
        return float(np.max(np.abs(self.coeffs) * weight))

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n, "K": self.K, "M": self.M,
            "tail": self.tail,
            "cutoff": {"inner": list(self.cutoff.inner), "outer": list(self.cutoff.radius)},
            "coeffs_re": self.coeffs.real.ravel().tolist(),
            "coeffs_im": self.coeffs.imag.ravel().tolist(),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CMDecomposition":
        doc = json.loads(text)
        n, M = doc["n"], doc["M"]
        shape = (2 * M + 1,) * (2 * n)
        coeffs = (np.asarray(doc["coeffs_re"]) + 1j * np.asarray(doc["coeffs_im"])).reshape(shape)
        cutoff = make_plateau(n, doc["cutoff"]["inner"], doc["cutoff"]["outer"])
        return cls(n=n, K=doc["K"], M=M, coeffs=coeffs, cutoff=cutoff, tail=doc["tail"])


def default_period(phi: BumpProfile) -> float:
    """K = 2 * (smallest integer >= 2 * max support radius)."""
    return 2.0 * int(np.ceil(2.0 * max(phi.radius)))


def _axis_series(phi: BumpProfile, axis: int, K: float, kmax: int,
                 points: int) -> np.ndarray:
    """Fourier coefficients of one axis factor on [-K/2, K/2), k = -kmax..kmax."""
    u = -K / 2 + K * np.arange(points) / points
    samples = _axis_factor(phi, axis, u)
    F = np.fft.fft(np.fft.ifftshift(samples)) / points
    ks = np.arange(-kmax, kmax + 1)
    return F[ks % points]


def cm_decompose(phi: BumpProfile, K: float | None = None, M: int = 16,
                 points_per_unit: int | None = None) -> CMDecomposition:
    """Fourier coefficients of Phi on KQ x KQ, truncated to |k|_inf <= M.

    The coefficient quadrature runs at ``points_per_unit`` nodes per unit
    length (default max(128, 8*(M+32)/K), well beyond the 4x-working-grid
    rule so that quadrature error sits far below the truncation tail).
    """
    n = phi.d // 2
    if phi.d != 2 * n:
        raise ValueError("Phi must have even dimension 2n")
    if K is None:
        K = default_period(phi)
    for j in range(phi.d):
        if abs(phi.center[j]) + phi.radius[j] > K / 4 + 1e-12:
            raise ValueError(
                f"supp Phi must fit in 2^-1 KQ per axis: axis {j} reaches "
                f"{abs(phi.center[j]) + phi.radius[j]} > K/4 = {K / 4}")
    if points_per_unit is None:
        points_per_unit = max(128, int(np.ceil(8 * (M + 32) / K)))
    points = int(points_per_unit * K)
    kmax = points // 2 - 1
    if kmax < M:
        raise ValueError("quadrature too coarse for the requested truncation M")

    cutoff = make_plateau(n, inner=K / 4, outer=3 * K / 8)

    if phi.separable:
        axis_c = [_axis_series(phi, j, K, kmax, points) for j in range(phi.d)]
        axis_c[0] = axis_c[0] * phi.amplitude
        sl = slice(kmax - M, kmax + M + 1)
        coeffs = axis_c[0][sl]
        for c in axis_c[1:]:
            coeffs = np.multiply.outer(coeffs, c[sl])
        total = np.prod([np.sum(np.abs(c)) for c in axis_c])
        kept = np.prod([np.sum(np.abs(c[sl])) for c in axis_c])
        tail = float(max(total - kept, 0.0))
        return CMDecomposition(n=n, K=float(K), M=M, coeffs=coeffs,
                               cutoff=cutoff, tail=tail)

    if n != 1:
        raise ValueError("non-separable Phi decomposition is only supported for n = 1")
    u = -K / 2 + K * np.arange(points) / points
    samples = bump_eval_axes(phi, [u[:, None], u[None, :]])
    F = np.fft.fft2(np.fft.ifftshift(samples)) / points**2
    ks = np.arange(-kmax, kmax + 1)
    full = F[np.ix_(ks % points, ks % points)]
    sl = slice(kmax - M, kmax + M + 1)
    coeffs = full[sl, sl]
    tail = float(np.sum(np.abs(full)) - np.sum(np.abs(coeffs)))
    return CMDecomposition(n=1, K=float(K), M=M, coeffs=coeffs, cutoff=cutoff, tail=tail)


def cm_reconstruct(d: CMDecomposition, xi1, xi2):
    """Truncated series sum_k b(k1,k2) e^{2pi i (xi1.k1 + xi2.k2)/K} phi(xi1) phi(xi2).

    xi1, xi2: scalars (n = 1) or length-n points; arrays broadcast pointwise.
    """
    xi1 = np.atleast_1d(np.asarray(xi1, dtype=float))
    xi2 = np.atleast_1d(np.asarray(xi2, dtype=float))
    n = d.n
    if n == 1:
        shape = np.broadcast(xi1, xi2).shape
        x1, x2 = np.broadcast_to(xi1, shape).ravel(), np.broadcast_to(xi2, shape).ravel()
        ks = np.arange(-d.M, d.M + 1)
        e1 = np.exp(2j * np.pi * np.outer(x1, ks) / d.K)
        e2 = np.exp(2j * np.pi * np.outer(x2, ks) / d.K)
        series = np.einsum("xk,kl,xl->x", e1, d.coeffs, e2, optimize=True)
        cut = (_axis_factor(d.cutoff, 0, x1) * _axis_factor(d.cutoff, 0, x2))
        out = (series * cut).reshape(shape)
        return complex(out.reshape(-1)[0]) if out.size == 1 else out
    # general n: contract per-axis phase matrices against the coefficient tensor
    if xi1.shape[-1] != n or xi2.shape[-1] != n:
        raise ValueError(f"points must have {n} components")
    pts = [xi1[..., j] for j in range(n)] + [xi2[..., j] for j in range(n)]
    shape = np.broadcast(*pts).shape
    flat = [np.broadcast_to(p, shape).ravel() for p in pts]
    ks = np.arange(-d.M, d.M + 1)
    series = d.coeffs
    for ax, p in enumerate(flat):
        e = np.exp(2j * np.pi * np.outer(p, ks) / d.K)  # (X, 2M+1)
        if ax == 0:
            series = np.einsum("xk,k...->x...", e, series)
        else:
            series = np.einsum("xk,xk...->x...", e, series)
    cut = np.ones(len(flat[0]), dtype=float)
    for j in range(n):
        cut = cut * _axis_factor(d.cutoff, j, flat[j])
        cut = cut * _axis_factor(d.cutoff, j, flat[n + j])
    out = (series * cut).reshape(shape)
    return complex(out.reshape(-1)[0]) if out.size == 1 else out


def sigma_from_cm(a: LatticeCoefficients, d: CMDecomposition,
                  spec: GridSpec) -> SymbolGrid:
    """Assemble sigma_{a,Phi} through the truncated decomposition.

    Agrees with synth_sigma within the recorded truncation tail times
    ||a||_inf times the translate overlap count.
    """
    if spec.n != d.n:
        raise ValueError("dimension mismatch between decomposition and grid")
    N, n = spec.N, spec.n
    xi = spec.axis_xi()
    ks = np.arange(-d.M, d.M + 1)
    if n == 1:
        out = np.zeros((N, N), dtype=complex)
        for (m1, m2), val in a.items():
            u = xi - m1[0]
            v = xi - m2[0]
            e1 = np.exp(2j * np.pi * np.outer(u, ks) / d.K) * _axis_factor(d.cutoff, 0, u)[:, None]
            e2 = np.exp(2j * np.pi * np.outer(v, ks) / d.K) * _axis_factor(d.cutoff, 0, v)[:, None]
            out += val * (e1 @ d.coeffs @ e2.T)
        return SymbolGrid(spec, out)
    # general n: contract one cutoff-weighted phase matrix per coefficient axis
    out = np.zeros((N,) * (2 * n), dtype=complex)
    for (m1, m2), val in a.items():
        series = d.coeffs
        for ax, shift in enumerate(m1 + m2):
            u = xi - shift
            e = (np.exp(2j * np.pi * np.outer(u, ks) / d.K)
                 * _axis_factor(d.cutoff, ax % n, u)[:, None])  # (N, 2M+1)
            series = np.tensordot(series, e, axes=([0], [1]))   # rotates axes
        out += val * series
    return SymbolGrid(spec, out)
