"""Von Neumann pointer model of the weak measurement.

The system observable ``R`` is coupled impulsively to the pointer momentum,
``exp(-i g R (x) P)`` (hbar = 1). In the eigenbasis of ``R`` each branch
translates the pointer wavefunction by ``g * r_k``; the translation is done
spectrally on a periodic grid so it is exact for band-limited states.
After post-selection the pointer position and momentum shifts are read out:

    Re(w) ~ <dx> / g,     Im(w) ~ <dp> / (2 g Var_P)

where ``Var_P`` is the momentum variance of the initial pointer.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarse, NegativeEigenvalue, OrthogonalSelection
from .linalg import as_matrix, as_state, hermitian_eig, polar_decompose
from .weak import EPS_OVERLAP, weak_value

BLOCK_TRIALS = 1 << 16
NORM_TOL = 1e-12

_NAN = float("nan")


@dataclass(frozen=True)
class PointerConfig:
    grid_points: int = 1024
    grid_halfwidth: float = 16.0
    sigma: float = 1.0
    g: float = 0.05
    seed: int = 0
    momentum: float = 0.0  # initial mean momentum of the pointer

    def __post_init__(self):
        n = self.grid_points
        if n < 2 or n & (n - 1):
            raise GridTooCoarse(f"grid_points must be a power of two, got {n}")
        if self.sigma <= 0:
            raise GridTooCoarse("sigma must be positive")
        if self.sigma < 8 * self.spacing:
            raise GridTooCoarse(
                f"sigma={self.sigma} is below 8 grid spacings ({8 * self.spacing})"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.grid_halfwidth / self.grid_points

    def positions(self) -> np.ndarray:
        return -self.grid_halfwidth + self.spacing * np.arange(self.grid_points)

    def momenta(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.grid_points, d=self.spacing)

    def initial_pointer(self) -> np.ndarray:
        x = self.positions()
        phi = np.exp(-(x**2) / (4.0 * self.sigma**2) + 1j * self.momentum * x)
        return phi / np.sqrt(np.sum(np.abs(phi) ** 2) * self.spacing)


@dataclass(frozen=True)
class PointerRecord:
    post_prob_exact: float
    post_prob_firstorder: float
    mean_position_shift: float
    mean_momentum_shift: float
    wv_estimate: complex
    n_trials: int = 0
    n_postselected: int = 0
    wv_stderr: complex = 0j
    joint_norm: float = 1.0

    @property
    def defined(self) -> bool:
        return not np.isnan(self.wv_estimate.real)


@dataclass(frozen=True)
class _PostSelected:
    prob: float
    position_density: np.ndarray  # normalized over grid points
    momentum_density: np.ndarray
    x0: float
    p0: float
    var_p0: float
    joint_norm: float
    x: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)


def _moments(values: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    mean = float(np.sum(values * weights))
    return mean, float(np.sum((values - mean) ** 2 * weights))


def _branches(r, pre, post, cfg: PointerConfig):
    r = as_matrix(r)
    pre = as_state(pre)
    post = as_state(post)
    if abs(np.vdot(post, pre)) <= EPS_OVERLAP:
        raise OrthogonalSelection("post-selection is orthogonal to pre-selection")
    evals, evecs = hermitian_eig(r)
    if evals.min() < -1e-10:
        raise NegativeEigenvalue("pointer observable must be positive semi-definite")
    if cfg.g * np.abs(evals).max() > cfg.grid_halfwidth / 4:
        raise GridTooCoarse(
            f"pointer shift g*max|r| = {cfg.g * np.abs(evals).max():.3g} exceeds "
            f"grid_halfwidth/4 = {cfg.grid_halfwidth / 4:.3g}"
        )
    pre_amp = evecs.conj().T @ pre
    post_amp = evecs.conj().T @ post
    return evals, pre_amp, post_amp


def _postselect(r, pre, post, cfg: PointerConfig) -> _PostSelected:
    evals, pre_amp, post_amp = _branches(r, pre, post, cfg)
    x, p, dx = cfg.positions(), cfg.momenta(), cfg.spacing
    phi0 = cfg.initial_pointer()
    phi0_k = np.fft.fft(phi0)
    kicks = np.exp(-1j * cfg.g * np.outer(evals, p))  # one row per R-branch

    # Joint state norm before post-selection: sum_k |<k|pre>|^2 ||Phi_k||^2.
    branch_norms = np.sum(np.abs(kicks * phi0_k) ** 2, axis=1) / cfg.grid_points * dx
    joint_norm = float(np.sum(np.abs(pre_amp) ** 2 * branch_norms))

    weights = post_amp.conj() * pre_amp
    post_k = phi0_k * (weights @ kicks)
    post_x = np.fft.ifft(post_k)
    dens_x = np.abs(post_x) ** 2 * dx
    prob = float(np.sum(dens_x))
    dens_p = np.abs(post_k) ** 2
    dens_p = dens_p / dens_p.sum()

    x0, _ = _moments(x, np.abs(phi0) ** 2 * dx)
    init_p = np.abs(phi0_k) ** 2
    p0, var_p0 = _moments(p, init_p / init_p.sum())
    return _PostSelected(
        prob=prob,
        position_density=dens_x / prob,
        momentum_density=dens_p,
        x0=x0,
        p0=p0,
        var_p0=var_p0,
        joint_norm=joint_norm,
        x=x,
        p=p,
    )


def evolve_and_postselect(r, pre, post, cfg: PointerConfig | None = None) -> PointerRecord:
    """Exact wavefunction-level simulation of one weak measurement of ``r``.

    Parameters
    ----------
    r : (d, d) array_like
        Hermitian positive semi-definite system observable.
    pre, post : (d,) array_like
        Normalized pre- and post-selected states.
    cfg : PointerConfig, optional

    Returns
    -------
    PointerRecord
        Exact post-selection probability, its first-order prediction
        ``|<post|pre>|^2 (1 + 2 g Im(w) <P>)``, the pointer shifts and the
        weak value read out from them.
    """
    cfg = cfg or PointerConfig()
    ps = _postselect(r, pre, post, cfg)
    mean_x = float(np.sum(ps.x * ps.position_density))
    mean_p = float(np.sum(ps.p * ps.momentum_density))
    dx_shift = mean_x - ps.x0
    dp_shift = mean_p - ps.p0

    pre = np.asarray(pre, dtype=complex)
    post = np.asarray(post, dtype=complex)
    exact_wv = weak_value(r, pre, post)
    ov2 = abs(np.vdot(post, pre)) ** 2
    first_order = ov2 * (1.0 + 2.0 * cfg.g * exact_wv.imag * ps.p0)
    estimate = complex(dx_shift / cfg.g, dp_shift / (2.0 * cfg.g * ps.var_p0))
    return PointerRecord(
        post_prob_exact=min(1.0, ps.prob),
        post_prob_firstorder=first_order,
        mean_position_shift=dx_shift,
        mean_momentum_shift=dp_shift,
        wv_estimate=estimate,
        joint_norm=ps.joint_norm,
    )


def _block_rng(seed: int, block: int) -> np.random.Generator:
    # Philox counter space is 256 bits; the high word selects the block so
    # block streams never overlap.
    bits = np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF, counter=[0, 0, 0, block])
    return np.random.Generator(bits)


def _run_block(args):
    seed, block, start, count, prob, cdf_x, cdf_p, x, p = args
    rng = _block_rng(seed, block)
    u = rng.random((count, 2))
    clicked = u[:, 0] < prob
    trial = start + np.arange(count)
    use_x = clicked & (trial % 2 == 0)
    use_p = clicked & (trial % 2 == 1)
    ix = np.minimum(np.searchsorted(cdf_x, u[use_x, 1], side="right"), len(x) - 1)
    ip = np.minimum(np.searchsorted(cdf_p, u[use_p, 1], side="right"), len(p) - 1)
    return x[ix], p[ip]


def monte_carlo_clicks(
    r, pre, post, cfg: PointerConfig | None = None, n_trials: int = 0, workers: int = 1
) -> PointerRecord:
    """Stochastic version of :func:`evolve_and_postselect`.

    Each trial is post-selected with the exact probability; surviving trials
    read out the pointer position (even trial index) or momentum (odd trial
    index), sampled from the exact post-selected pointer distributions.
    Random numbers come from per-block Philox streams keyed by ``cfg.seed``,
    so results do not depend on ``workers``.
    """
    cfg = cfg or PointerConfig()
    exact = evolve_and_postselect(r, pre, post, cfg)
    if n_trials <= 0:
        return PointerRecord(
            post_prob_exact=exact.post_prob_exact,
            post_prob_firstorder=exact.post_prob_firstorder,
            mean_position_shift=_NAN,
            mean_momentum_shift=_NAN,
            wv_estimate=complex(_NAN, _NAN),
            n_trials=0,
            n_postselected=0,
            wv_stderr=complex(_NAN, _NAN),
            joint_norm=exact.joint_norm,
        )
    ps = _postselect(r, pre, post, cfg)
    cdf_x = np.cumsum(ps.position_density)
    cdf_p = np.cumsum(ps.momentum_density)
    jobs = []
    for block, start in enumerate(range(0, n_trials, BLOCK_TRIALS)):
        count = min(BLOCK_TRIALS, n_trials - start)
        jobs.append((cfg.seed, block, start, count, ps.prob, cdf_x, cdf_p, ps.x, ps.p))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(job) for job in jobs]
    xs = np.concatenate([part[0] for part in parts])
    ps_ = np.concatenate([part[1] for part in parts])

    def mean_se(samples: np.ndarray) -> tuple[float, float]:
        if samples.size == 0:
            return _NAN, _NAN
        if samples.size == 1:
            return float(samples[0]), _NAN
        return float(np.mean(samples)), float(np.std(samples, ddof=1) / np.sqrt(samples.size))

    mx, se_x = mean_se(xs)
    mp, se_p = mean_se(ps_)
    dx_shift = mx - ps.x0
    dp_shift = mp - ps.p0
    scale_p = 2.0 * cfg.g * ps.var_p0
    return PointerRecord(
        post_prob_exact=exact.post_prob_exact,
        post_prob_firstorder=exact.post_prob_firstorder,
        mean_position_shift=dx_shift,
        mean_momentum_shift=dp_shift,
        wv_estimate=complex(dx_shift / cfg.g, dp_shift / scale_p),
        n_trials=n_trials,
        n_postselected=int(xs.size + ps_.size),
        wv_stderr=complex(se_x / cfg.g, se_p / scale_p),
        joint_norm=exact.joint_norm,
    )


@dataclass(frozen=True)
class StochasticExpectation:
    value: complex
    stderr: complex  # real part: s.e. of Re(value); imaginary part: s.e. of Im(value)
    overlap: complex
    record: PointerRecord


def reconstruct_expectation_stochastic(
    a, psi, cfg: PointerConfig | None = None, n_trials: int = 100_000, workers: int = 1
) -> StochasticExpectation:
    """End-to-end protocol: polar-decompose ``a``, weakly measure ``R`` by
    Monte Carlo with post-selection on ``U^dagger psi``, and multiply by the
    computed overlap ``<U^dagger psi|psi>``."""
    cfg = cfg or PointerConfig()
    psi = as_state(psi)
    pf = polar_decompose(a)
    phi = pf.unitary.conj().T @ psi
    overlap = complex(np.vdot(phi, psi))
    rec = monte_carlo_clicks(pf.psd, psi, phi, cfg, n_trials, workers=workers)
    value = rec.wv_estimate * overlap
    sa, sb = rec.wv_stderr.real, rec.wv_stderr.imag
    c, d = overlap.real, overlap.imag
    stderr = complex(np.hypot(c * sa, d * sb), np.hypot(d * sa, c * sb))
    return StochasticExpectation(value=value, stderr=stderr, overlap=overlap, record=rec)
