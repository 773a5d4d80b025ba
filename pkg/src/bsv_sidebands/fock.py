"""
Brute-force two-mode Fock-space oracle for the sideband interaction.

The perturbation mode (0) and the sideband mode (sb) are kept as truncated
Fock spaces; the two harmonic fields are classical amplitudes absorbed into
the couplings g and f.  States evolve under exp(K) with the anti-Hermitian
generator K = g a0 asb^+ + f a0^+ asb^+ - h.c., applied either through a
dense eigendecomposition (small spaces) or a Chebyshev expansion of the
exponential driven by slice-wise ladder products (large spaces).

Everything here is deliberately independent of the closed forms in
:mod:`bsv_sidebands.model`; agreement between the two routes is the main
correctness check of the package.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.special import gammaln, jv

from .model import ModelParams, SqueezeParams, derive_couplings

try:  # the jit kernel is a large speedup but not a hard requirement
    import numba

    @numba.njit(
        "void(c16[:, ::1], c16[:, ::1], f8[::1], f8[::1], c16, c16)",
        cache=True,
        boundscheck=False,
    )
    def _apply_kernel_padded(pad, out, sq0, sqsb, g, f):  # pragma: no cover - jitted
        # pad/out carry a zero border so every stencil read is in range;
        # pad[a, b] = psi[a-1, b-1]
        c0 = pad.shape[0] - 2
        csb = pad.shape[1] - 2
        gc = np.conj(g)
        fc = np.conj(f)
        for i in range(c0):
            w_lo = sq0[i]
            w_hi = sq0[i + 1]
            row_dn = pad[i]
            row_up = pad[i + 2]
            row_out = out[i + 1]
            for j in range(csb):
                acc = g * (w_hi * sqsb[j]) * row_up[j]
                acc += f * (w_lo * sqsb[j]) * row_dn[j]
                acc -= gc * (w_lo * sqsb[j + 1]) * row_dn[j + 2]
                acc -= fc * (w_hi * sqsb[j + 1]) * row_up[j + 2]
                row_out[j + 1] = acc

    @numba.njit(
        "void(f8[:, ::1], f8[:, ::1], f8[:, ::1], f8[:, ::1], f8[:, ::1], f8[:, ::1],"
        " f8[::1], f8[::1], f8, f8, f8, f8, f8, f8, f8)",
        cache=True,
        fastmath=True,
        boundscheck=False,
    )
    def _cheb_step_kernel(  # pragma: no cover - jitted
        bre, bim, are, aim, acc_re, acc_im, sq0, sqsb, gr, gi, fr, fi, fac, cr, ci
    ):
        # One fused Chebyshev step on split re/im padded grids:
        #   w      = K t_cur          (stencil on b)
        #   t_next = fac * (-i) * w - t_prev   (overwrites a in place)
        #   acc   += (cr + i ci) * t_next
        c0 = bre.shape[0] - 2
        csb = bre.shape[1] - 2
        for i in range(c0):
            w_lo = sq0[i]
            w_hi = sq0[i + 1]
            dn_re = bre[i]
            dn_im = bim[i]
            up_re = bre[i + 2]
            up_im = bim[i + 2]
            ta_re = are[i + 1]
            ta_im = aim[i + 1]
            ac_re = acc_re[i + 1]
            ac_im = acc_im[i + 1]
            for j in range(csb):
                w1 = w_hi * sqsb[j]
                w2 = w_lo * sqsb[j]
                w3 = w_lo * sqsb[j + 1]
                w4 = w_hi * sqsb[j + 1]
                wr = (
                    w1 * (gr * up_re[j] - gi * up_im[j])
                    + w2 * (fr * dn_re[j] - fi * dn_im[j])
                    - w3 * (gr * dn_re[j + 2] + gi * dn_im[j + 2])
                    - w4 * (fr * up_re[j + 2] + fi * up_im[j + 2])
                )
                wi = (
                    w1 * (gr * up_im[j] + gi * up_re[j])
                    + w2 * (fr * dn_im[j] + fi * dn_re[j])
                    - w3 * (gr * dn_im[j + 2] - gi * dn_re[j + 2])
                    - w4 * (fr * up_im[j + 2] - fi * up_re[j + 2])
                )
                tre = fac * wi - ta_re[j + 1]
                tim = -fac * wr - ta_im[j + 1]
                ta_re[j + 1] = tre
                ta_im[j + 1] = tim
                ac_re[j + 1] += cr * tre - ci * tim
                ac_im[j + 1] += cr * tim + ci * tre

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

ANTI_HERMITIAN_TOL = 1e-12
NORM_DRIFT_TOL = 1e-9
INITIAL_LEAKAGE_TOL = 1e-6
# crossover measured on this hardware: eigh beats the Chebyshev recurrence
# only for very small spaces
DENSE_DIM_MAX = 256
DEFAULT_MAX_TOTAL_DIM = 4096


class FockError(RuntimeError):
    pass


class TruncationError(FockError):
    """Requested accuracy cannot be reached within the allowed cutoffs."""


class PropagationError(FockError):
    """Norm drift beyond tolerance: truncation or exponential inaccuracy."""


def squeezed_pair_log_probs(r: float, m_max: int) -> np.ndarray:
    """log P(n = 2m) of a squeezed vacuum for m = 0..m_max.

    P(2m) = tanh(r)^{2m} (2m)! / (4^m m!^2) / cosh(r); odd occupations
    vanish.  Evaluated through gammaln so large m stays finite.
    """
    if r < 0.0:
        raise ValueError("squeezing magnitude must be >= 0")
    m = np.arange(m_max + 1, dtype=float)
    if r == 0.0:
        out = np.full(m_max + 1, -np.inf)
        out[0] = 0.0
        return out
    log_tanh = math_log_tanh(r)
    return (
        2.0 * m * log_tanh
        + gammaln(2.0 * m + 1.0)
        - m * np.log(4.0)
        - 2.0 * gammaln(m + 1.0)
        - np.log(np.cosh(r))
    )


def math_log_tanh(r: float) -> float:
    # log(tanh r) without underflow for large r: tanh r = (1-e^{-2r})/(1+e^{-2r})
    e = np.exp(-2.0 * r)
    return float(np.log1p(-e) - np.log1p(e))


def squeezed_photon_distribution(
    r: float, max_leakage: float = 1e-12
) -> tuple[np.ndarray, np.ndarray]:
    """(photon numbers, probabilities) of a squeezed vacuum, truncated so the
    omitted tail mass is below ``max_leakage``.  Photon numbers are the even
    integers 2m."""
    if r == 0.0:
        return np.array([0]), np.array([1.0])
    m_max = 32
    while True:
        probs = np.exp(squeezed_pair_log_probs(r, m_max))
        tail = 1.0 - probs.sum()
        if tail <= max_leakage:
            break
        if m_max > 50_000_000:
            raise TruncationError(
                f"squeezed photon table for r={r} does not reach leakage {max_leakage}"
            )
        m_max *= 2
    keep = np.nonzero(np.cumsum(probs[::-1])[::-1] > max_leakage * 1e-3)[0]
    last = int(keep[-1]) if keep.size else 0
    probs = probs[: last + 1]
    return 2 * np.arange(last + 1), probs


def squeezed_vacuum_vector(
    squeeze: SqueezeParams, cutoff: int
) -> tuple[np.ndarray, float]:
    """Truncated single-mode squeezed-vacuum amplitudes and the leakage.

    Amplitude of |2m> is (-e^{i phi} tanh r)^m sqrt((2m)!)/(2^m m!) / sqrt(cosh r);
    odd components are zero.  The returned vector is renormalised; leakage is
    the truncated tail mass.  Raises if leakage exceeds the tolerance.
    """
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    m_max = (cutoff - 1) // 2
    probs = np.exp(squeezed_pair_log_probs(squeeze.r, m_max))
    total = probs.sum()
    leakage = float(1.0 - total)
    if leakage > INITIAL_LEAKAGE_TOL:
        raise TruncationError(
            f"squeezed vacuum leakage {leakage:.3e} at cutoff {cutoff} "
            f"exceeds {INITIAL_LEAKAGE_TOL:.0e} (r={squeeze.r})"
        )
    amps = np.zeros(cutoff, dtype=complex)
    phases = np.exp(1j * np.arange(m_max + 1) * (squeeze.phi + np.pi))
    amps[: 2 * m_max + 1 : 2] = phases * np.sqrt(probs)
    amps /= np.sqrt(total)
    return amps, leakage


@dataclass(frozen=True)
class FockStateVec:
    """Two-mode amplitude vector over |n0, n_sb>, flattened C-order."""

    cutoff0: int
    cutoff_sb: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if self.cutoff0 < 2 or self.cutoff_sb < 2:
            raise ValueError("cutoffs must be >= 2")
        if self.amps.shape != (self.cutoff0 * self.cutoff_sb,):
            raise ValueError(
                f"amplitude vector has shape {self.amps.shape}, "
                f"expected ({self.cutoff0 * self.cutoff_sb},)"
            )

    def grid(self) -> np.ndarray:
        return self.amps.reshape(self.cutoff0, self.cutoff_sb)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "FockStateVec":
        return FockStateVec(self.cutoff0, self.cutoff_sb, self.amps / self.norm())

    def marginal(self, mode: str) -> np.ndarray:
        """Photon-number distribution of one mode ('0' or 'sb')."""
        probs = np.abs(self.grid()) ** 2
        return probs.sum(axis=1) if mode == "0" else probs.sum(axis=0)

    def top_two_population(self, mode: str) -> float:
        """Occupation of the two highest retained levels of a mode (the
        ground level never counts as truncation boundary)."""
        marg = self.marginal(mode)
        return float(marg[max(1, marg.size - 2) :].sum())

    @classmethod
    def vacuum(cls, cutoff0: int, cutoff_sb: int) -> "FockStateVec":
        amps = np.zeros(cutoff0 * cutoff_sb, dtype=complex)
        amps[0] = 1.0
        return cls(cutoff0, cutoff_sb, amps)

    @classmethod
    def squeezed_initial(
        cls, squeeze: SqueezeParams, cutoff0: int, cutoff_sb: int
    ) -> "FockStateVec":
        """|squeezed>_0 (x) |0>_sb."""
        mode0, _ = squeezed_vacuum_vector(squeeze, cutoff0)
        amps = np.zeros((cutoff0, cutoff_sb), dtype=complex)
        amps[:, 0] = mode0
        return cls(cutoff0, cutoff_sb, amps.ravel())


def _ladder(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, cutoff)), offsets=1, format="csr")


@dataclass
class TwoModeGenerator:
    """Anti-Hermitian generator K = g a0 asb^+ + f a0^+ asb^+ - h.c."""

    g: complex
    f: complex
    cutoff0: int
    cutoff_sb: int
    anti_hermitian: bool = True
    _sq0: np.ndarray = field(default=None, repr=False)
    _sqsb: np.ndarray = field(default=None, repr=False)
    _weights: np.ndarray = field(default=None, repr=False)
    _matrix: sp.csr_matrix = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.cutoff0 < 2 or self.cutoff_sb < 2:
            raise ValueError("cutoffs must be >= 2")
        self._sq0 = np.sqrt(np.arange(self.cutoff0 + 1, dtype=float))
        self._sqsb = np.sqrt(np.arange(self.cutoff_sb + 1, dtype=float))
        # shared weight sqrt(n0 * nsb) for the slice fallback path
        self._weights = np.outer(self._sq0[1 : self.cutoff0], self._sqsb[1 : self.cutoff_sb])

    @property
    def dim(self) -> int:
        return self.cutoff0 * self.cutoff_sb

    @property
    def matrix(self) -> sp.csr_matrix:
        """Explicit sparse matrix of K (built on first use)."""
        if self._matrix is None:
            a0 = sp.kron(_ladder(self.cutoff0), sp.identity(self.cutoff_sb), format="csr")
            asb = sp.kron(sp.identity(self.cutoff0), _ladder(self.cutoff_sb), format="csr")
            k = (
                self.g * (a0 @ asb.getH())
                + self.f * (a0.getH() @ asb.getH())
                - np.conj(self.g) * (a0.getH() @ asb)
                - np.conj(self.f) * (a0 @ asb)
            )
            self._matrix = k.tocsr()
        return self._matrix

    def _pad(self, vec: np.ndarray) -> np.ndarray:
        pad = np.zeros((self.cutoff0 + 2, self.cutoff_sb + 2), dtype=complex)
        pad[1:-1, 1:-1] = vec.reshape(self.cutoff0, self.cutoff_sb)
        return pad

    def apply_padded(self, pad: np.ndarray, out: np.ndarray) -> None:
        """K applied to a zero-border-padded grid, writing the padded out."""
        if HAVE_NUMBA:
            _apply_kernel_padded(
                pad, out, self._sq0, self._sqsb, complex(self.g), complex(self.f)
            )
            return
        psi = pad[1:-1, 1:-1]
        res = out[1:-1, 1:-1]
        res[...] = 0.0
        w = self._weights
        res[:-1, 1:] += self.g * (w * psi[1:, :-1])
        res[1:, 1:] += self.f * (w * psi[:-1, :-1])
        res[1:, :-1] -= np.conj(self.g) * (w * psi[:-1, 1:])
        res[:-1, :-1] -= np.conj(self.f) * (w * psi[1:, 1:])

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """K @ vec via shifted ladder products (no matrix needed)."""
        pad = self._pad(vec)
        out = np.zeros_like(pad)
        self.apply_padded(pad, out)
        return out[1:-1, 1:-1].reshape(vec.shape).copy()

    def one_norm(self) -> float:
        """Exact max column absolute sum of K; upper bound on the spectrum."""
        c0, csb = self.cutoff0, self.cutoff_sb
        n0 = np.arange(c0, dtype=float)[:, None]
        nsb = np.arange(csb, dtype=float)[None, :]
        down0_up = np.sqrt(n0 * (nsb + 1.0))
        down0_up[:, -1] = 0.0  # nsb+1 out of range
        up0_down = np.sqrt((n0 + 1.0) * nsb)
        up0_down[-1, :] = 0.0
        up_both = np.sqrt((n0 + 1.0) * (nsb + 1.0))
        up_both[-1, :] = 0.0
        up_both[:, -1] = 0.0
        down_both = np.sqrt(n0 * nsb)
        col = abs(self.g) * (down0_up + up0_down) + abs(self.f) * (
            up_both + down_both
        )
        return float(col.max())


def verify_anti_hermitian(gen: TwoModeGenerator, tol: float = ANTI_HERMITIAN_TOL) -> None:
    """Entrywise K^+ = -K check (matrix form below ~66k dimensions, adjoint
    pairing on seeded random vectors above)."""
    if gen.dim <= 66_000:
        delta = gen.matrix + gen.matrix.getH()
        worst = np.abs(delta.data).max() if delta.nnz else 0.0
    else:
        rng = np.random.default_rng(1729)
        worst = 0.0
        scale = max(gen.one_norm(), 1.0)
        for _ in range(4):
            u = rng.standard_normal(gen.dim) + 1j * rng.standard_normal(gen.dim)
            v = rng.standard_normal(gen.dim) + 1j * rng.standard_normal(gen.dim)
            u /= np.linalg.norm(u)
            v /= np.linalg.norm(v)
            lhs = np.vdot(u, gen.apply(v))
            rhs = -np.vdot(gen.apply(u), v).conjugate()
            worst = max(worst, abs(lhs - rhs) / scale)
    if worst > tol:
        raise FockError(f"generator is not anti-Hermitian: deviation {worst:.3e}")


def build_generator(
    params: ModelParams, cutoff0: int, cutoff_sb: int
) -> TwoModeGenerator:
    """Generator for the model couplings, verified anti-Hermitian."""
    cs = derive_couplings(params)
    gen = TwoModeGenerator(g=cs.g, f=cs.f, cutoff0=cutoff0, cutoff_sb=cutoff_sb)
    verify_anti_hermitian(gen)
    return gen


def _spectral_bound(gen: TwoModeGenerator, vec: np.ndarray) -> float:
    """Upper bound on the spectrum of H = -iK restricted to the evolution of
    ``vec``.

    With f = 0 the generator conserves the total photon number, so only the
    sectors populated by the vector matter: |g| * max(n0 + nsb) bounds them
    (principal-submatrix interlacing keeps truncated sectors inside).  With
    f != 0 no sector is invariant and the exact 1-norm is used.
    """
    norm1 = gen.one_norm()
    if gen.f == 0 and gen.g != 0:
        nz = np.nonzero(np.abs(vec.reshape(gen.cutoff0, gen.cutoff_sb)) > 0.0)
        if nz[0].size == 0:
            return 0.0
        t_max = int((nz[0] + nz[1]).max())
        return min(norm1, abs(gen.g) * max(t_max, 1))
    return norm1


def _chebyshev_expm_apply(gen: TwoModeGenerator, vec: np.ndarray) -> np.ndarray:
    """exp(K) @ vec through the Chebyshev expansion of exp(i H), H = -iK.

    The Bessel coefficients J_k(lam) die superexponentially past k = lam, so
    the series is cut where they drop below 1e-15.
    """
    lam = _spectral_bound(gen, vec)
    if lam == 0.0:
        return vec.copy()
    k_guess = int(lam + 12.0 * lam ** (1.0 / 3.0) + 60.0)
    while True:
        ks = np.arange(k_guess + 1)
        bess = jv(ks, lam)
        below = np.nonzero(np.abs(bess) > 1e-15)[0]
        degree = int(below[-1]) + 1 if below.size else 1
        if degree <= k_guess:
            break
        k_guess = int(k_guess * 1.5) + 50
    coeffs = (2.0 - (ks[: degree + 1] == 0)) * (1j ** ks[: degree + 1]) * bess[: degree + 1]

    if HAVE_NUMBA:
        return _chebyshev_split_loop(gen, vec, lam, coeffs)

    scale = -1j / lam  # H/lam applied as scale * K
    t_prev = gen._pad(vec)
    t_cur = np.zeros_like(t_prev)
    gen.apply_padded(t_prev, t_cur)
    t_cur *= scale
    acc = coeffs[0] * t_prev + coeffs[1] * t_cur
    buf = np.zeros_like(t_prev)
    scratch = np.empty_like(t_prev)
    for k in range(2, degree + 1):
        gen.apply_padded(t_cur, buf)
        buf *= 2.0 * scale
        buf -= t_prev
        np.multiply(buf, coeffs[k], out=scratch)
        acc += scratch
        t_prev, t_cur, buf = t_cur, buf, t_prev
    return acc[1:-1, 1:-1].reshape(vec.shape).copy()


def _chebyshev_split_loop(
    gen: TwoModeGenerator, vec: np.ndarray, lam: float, coeffs: np.ndarray
) -> np.ndarray:
    """Chebyshev recurrence on split re/im padded grids (jit fast path)."""
    degree = coeffs.size - 1
    psi = vec.reshape(gen.cutoff0, gen.cutoff_sb)
    shape = (gen.cutoff0 + 2, gen.cutoff_sb + 2)
    a_re = np.zeros(shape)
    a_im = np.zeros(shape)
    a_re[1:-1, 1:-1] = psi.real
    a_im[1:-1, 1:-1] = psi.imag
    acc_re = coeffs[0].real * a_re
    acc_im = coeffs[0].real * a_im
    b_re = np.zeros(shape)
    b_im = np.zeros(shape)
    gr, gi = complex(gen.g).real, complex(gen.g).imag
    fr, fi = complex(gen.f).real, complex(gen.f).imag
    sq0, sqsb = gen._sq0, gen._sqsb
    # first order: t1 = (-i/lam) K t0, same update form with zero "previous"
    _cheb_step_kernel(
        a_re, a_im, b_re, b_im, acc_re, acc_im,
        sq0, sqsb, gr, gi, fr, fi, 1.0 / lam,
        coeffs[1].real, coeffs[1].imag,
    )
    for k in range(2, degree + 1):
        _cheb_step_kernel(
            b_re, b_im, a_re, a_im, acc_re, acc_im,
            sq0, sqsb, gr, gi, fr, fi, 2.0 / lam,
            coeffs[k].real, coeffs[k].imag,
        )
        a_re, b_re = b_re, a_re
        a_im, b_im = b_im, a_im
    out = acc_re[1:-1, 1:-1] + 1j * acc_im[1:-1, 1:-1]
    return out.reshape(vec.shape)


def propagate(
    state: FockStateVec,
    gen: TwoModeGenerator,
    method: str = "auto",
    norm_tol: float = NORM_DRIFT_TOL,
) -> FockStateVec:
    """exp(K) applied to the state; norm preserved to ``norm_tol``.

    method: 'auto' picks dense eigendecomposition for small spaces and the
    Chebyshev action otherwise; 'dense' / 'chebyshev' force a path.
    """
    if (state.cutoff0, state.cutoff_sb) != (gen.cutoff0, gen.cutoff_sb):
        raise ValueError("state and generator dimensions do not match")
    if gen.g == 0 and gen.f == 0:
        return FockStateVec(state.cutoff0, state.cutoff_sb, state.amps.copy())
    if method == "auto":
        method = "dense" if gen.dim <= DENSE_DIM_MAX else "chebyshev"
    if method == "dense":
        h = (-1j * gen.matrix).toarray()
        evals, evecs = eigh(h)
        out = evecs @ (np.exp(1j * evals) * (evecs.conj().T @ state.amps))
    elif method == "chebyshev":
        out = _chebyshev_expm_apply(gen, state.amps)
    else:
        raise ValueError(f"unknown propagation method {method!r}")
    drift = abs(float(np.linalg.norm(out)) - state.norm())
    if drift > norm_tol:
        raise PropagationError(
            f"norm drift {drift:.3e} exceeds {norm_tol:.0e}; truncation too "
            f"small or exponential inaccurate (dims {gen.cutoff0}x{gen.cutoff_sb})"
        )
    return FockStateVec(state.cutoff0, state.cutoff_sb, out)


def _mode_axis(state: FockStateVec, mode: str) -> int:
    if mode not in ("0", "sb"):
        raise ValueError("mode must be '0' or 'sb'")
    return 0 if mode == "0" else 1


def _ladder_moment(state: FockStateVec, mode: str, power: int) -> complex:
    """<a^power> of one mode (power 1 or 2)."""
    psi = state.grid()
    if mode == "0":
        psi = psi.T
    n = psi.shape[1]
    if power == 1:
        w = np.sqrt(np.arange(1.0, n))
        return complex(np.sum(np.conj(psi[:, :-1]) * w[None, :] * psi[:, 1:]))
    w = np.sqrt(np.arange(1.0, n - 1) * np.arange(2.0, n))
    return complex(np.sum(np.conj(psi[:, :-2]) * w[None, :] * psi[:, 2:]))


def expectation(state: FockStateVec, which: str, mode: str = "sb"):
    """Observable of one mode of a normalised state.

    which: 'n', 'n2', 'a', 'a2', 'var_x', 'var_p' or 'g2'.
    g2 = (<n^2> - <n>) / <n>^2 and is refused when <n> = 0.
    """
    _mode_axis(state, mode)
    marg = state.marginal(mode)
    levels = np.arange(marg.size, dtype=float)
    if which == "n":
        return float(np.dot(levels, marg))
    if which == "n2":
        return float(np.dot(levels**2, marg))
    if which == "a":
        return _ladder_moment(state, mode, 1)
    if which == "a2":
        return _ladder_moment(state, mode, 2)
    if which in ("var_x", "var_p"):
        mean_n = float(np.dot(levels, marg))
        a1 = _ladder_moment(state, mode, 1)
        a2 = _ladder_moment(state, mode, 2)
        if which == "var_x":
            return 1.0 + 2.0 * mean_n + 2.0 * a2.real - (2.0 * a1.real) ** 2
        return 1.0 + 2.0 * mean_n - 2.0 * a2.real - (2.0 * a1.imag) ** 2
    if which == "g2":
        mean_n = float(np.dot(levels, marg))
        if mean_n == 0.0:
            raise ValueError(f"g2 undefined: mode {mode} has <n> = 0")
        mean_n2 = float(np.dot(levels**2, marg))
        return (mean_n2 - mean_n) / mean_n**2
    raise ValueError(f"unknown observable {which!r}")


def _initial_cutoff0(squeeze: SqueezeParams, target: float) -> int:
    """Mode-0 cutoff whose truncated initial state carries tail mass well
    below the convergence target."""
    values, probs = squeezed_photon_distribution(squeeze.r, max_leakage=1e-13)
    tail = np.concatenate([np.cumsum(probs[::-1])[::-1][1:], [0.0]])
    want = min(target * 0.1, 1e-9)
    ok = np.nonzero(tail <= want)[0]
    m = int(ok[0]) if ok.size else len(values) - 1
    return max(2 * m + 2, 4)


def _converged_propagation(
    params: ModelParams,
    target_leakage: float,
    max_total_dim: int,
) -> tuple[FockStateVec, tuple[int, int], dict]:
    if not (0.0 < target_leakage < 1e-3):
        raise ValueError("target_leakage must lie in (0, 1e-3)")
    cs = derive_couplings(params)
    g_abs, f_abs = abs(cs.g), abs(cs.f)
    squeeze = params.squeeze

    if g_abs == 0.0 and f_abs == 0.0:
        c0 = max(_initial_cutoff0(squeeze, target_leakage), 2)
        if squeeze.r == 0.0:
            c0 = 2
        state = FockStateVec.squeezed_initial(squeeze, c0, 2)
        info = {
            "leak0": state.top_two_population("0"),
            "leak_sb": state.top_two_population("sb"),
            "iterations": 0,
        }
        if max(info["leak0"], info["leak_sb"]) >= target_leakage:
            raise TruncationError("uncoupled initial state exceeds target leakage")
        return state, (c0, 2), info

    base0 = _initial_cutoff0(squeeze, target_leakage)
    drive = (f_abs * squeeze.cosh_r + g_abs * squeeze.sinh_r) ** 2
    # the sum-frequency channel can hand the whole mode-0 distribution to the
    # sideband (beam-splitter swap fraction sin^2 |g|)
    swap = np.sin(min(g_abs, np.pi / 2.0)) ** 2
    csb = int(8 + np.ceil(2.0 * drive + 6.0 * np.sqrt(drive) + swap * base0))
    # mode 0 only grows through pair creation (the f channel)
    pairs = (f_abs * (squeeze.cosh_r + squeeze.sinh_r)) ** 2
    c0 = base0 + (int(np.ceil(2.0 * pairs)) + 2 if f_abs > 0.0 else 0)

    for iteration in range(16):
        if c0 * csb > max_total_dim:
            raise TruncationError(
                f"required cutoffs {c0}x{csb} exceed the {max_total_dim} "
                f"total-dimension cap at leakage {target_leakage:.0e}"
            )
        gen = TwoModeGenerator(g=cs.g, f=cs.f, cutoff0=c0, cutoff_sb=csb)
        state = FockStateVec.squeezed_initial(squeeze, c0, csb)
        out = propagate(state, gen)
        leak0 = out.top_two_population("0")
        leak_sb = out.top_two_population("sb")
        if leak0 < target_leakage and leak_sb < target_leakage:
            return out, (c0, csb), {
                "leak0": leak0,
                "leak_sb": leak_sb,
                "iterations": iteration + 1,
            }
        if leak0 >= target_leakage:
            c0 = _grow_cutoff(out.marginal("0"), leak0, target_leakage)
        if leak_sb >= target_leakage:
            csb = _grow_cutoff(out.marginal("sb"), leak_sb, target_leakage)
    raise TruncationError("cutoff growth did not converge within 16 rounds")


def _grow_cutoff(marginal: np.ndarray, leak: float, target: float) -> int:
    """Next cutoff for a mode whose tail is still too heavy, extrapolating the
    observed exponential decay of its marginal."""
    size = marginal.size
    window = max(6, size // 4)
    tail = marginal[-window:]
    levels = np.arange(size - window, size, dtype=float)
    keep = tail > 0.0
    new = int(np.ceil(size * 1.6)) + 2
    if keep.sum() >= 3:
        slope = np.polyfit(levels[keep], np.log(tail[keep]), 1)[0]
        if slope < -1e-12:
            extra = (np.log(leak) - np.log(0.3 * target)) / (-slope)
            new = size + int(np.ceil(extra)) + 4
    return int(np.clip(new, size + 4, 3 * size))


def converge_cutoff(
    params: ModelParams,
    target_leakage: float,
    max_total_dim: int = DEFAULT_MAX_TOTAL_DIM,
) -> tuple[int, int]:
    """Smallest tried cutoff pair whose propagated state keeps the top two
    levels of both modes below ``target_leakage``."""
    _, cutoffs, _ = _converged_propagation(params, target_leakage, max_total_dim)
    return cutoffs


def oracle_observables(
    params: ModelParams,
    target_leakage: float = 1e-8,
    max_total_dim: int = DEFAULT_MAX_TOTAL_DIM,
) -> dict:
    """Sideband observables from the converged brute-force propagation."""
    out, (c0, csb), info = _converged_propagation(params, target_leakage, max_total_dim)
    a1 = _ladder_moment(out, "sb", 1)
    a2 = _ladder_moment(out, "sb", 2)
    mean_n = expectation(out, "n", "sb")
    return {
        "mean_n": mean_n,
        "var_x": 1.0 + 2.0 * mean_n + 2.0 * a2.real - (2.0 * a1.real) ** 2,
        "var_p": 1.0 + 2.0 * mean_n - 2.0 * a2.real - (2.0 * a1.imag) ** 2,
        "a_sq": a2,
        "cutoff0": c0,
        "cutoff_sb": csb,
        "leak0": info["leak0"],
        "leak_sb": info["leak_sb"],
    }


def dump_state_csv(state: FockStateVec, path, include_zeros: bool = False) -> None:
    """Write the state as CSV rows n0,n_sb,re,im (text, debug-friendly)."""
    psi = state.grid()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n0", "n_sb", "re", "im"])
        for n0 in range(state.cutoff0):
            for nsb in range(state.cutoff_sb):
                amp = psi[n0, nsb]
                if include_zeros or amp != 0:
                    writer.writerow([n0, nsb, repr(float(amp.real)), repr(float(amp.imag))])


def dump_generator_csv(gen: TwoModeGenerator, path) -> None:
    """Write the generator as CSV rows row,col,re,im over nonzero entries."""
    coo = gen.matrix.tocoo()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "re", "im"])
        for r, c, v in zip(coo.row, coo.col, coo.data):
            writer.writerow([int(r), int(c), repr(float(v.real)), repr(float(v.imag))])
