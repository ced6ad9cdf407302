"""
Regularity diagnostics: Sobolev norms, the BKM integrand and its running
integral, the a-priori growth envelope, integral-form residuals and run verdicts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import astuple, dataclass, fields

import numpy as np
from scipy.optimize import brentq

from tqg.dynamics import TqgParams, TqgState
from tqg.helmholtz import velocity_from_vorticity, w1inf_norm
from tqg.spectral import (
    Grid,
    ScalarField,
    grad_sup_norm,
    rfft,
    sobolev_norm,
    sobolev_norm_hat,
    sup_norm,
)

TAIL_THRESHOLD = 0.01


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    b_sob3: float
    q_sob2: float
    pair_norm: float
    q_sup: float
    grad_b_sup: float
    bkm_integrand: float
    bkm_integral: float
    g_val: float
    u_w1inf: float
    b_l2: float
    spectral_tail_frac: float

    @classmethod
    def columns(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.as_tuple())


def spectral_tail_fraction(q: ScalarField, dealias_on: bool = True) -> float:
    """Share of the fluctuation energy of ``q`` in the top third of the resolved band.

    The resolved band ends at ``n/3`` with dealiasing and ``n/2`` without; the
    tail is every mode with ``max(|m_x|, |m_y|)`` above two thirds of that.
    """
    g = q.grid
    c = rfft(q.values)
    energy = g.multiplicity * np.abs(c) ** 2
    energy[0, 0] = 0.0
    total = float(energy.sum())
    if total == 0.0:
        return 0.0
    resolved = g.n / 3 if dealias_on else g.n / 2
    tail = np.maximum(np.abs(g.mx), np.abs(g.my)) > (2.0 / 3.0) * resolved
    return float(energy[tail].sum()) / total


def record(state: TqgState, params: TqgParams,
           prev: DiagnosticsRecord | None = None) -> DiagnosticsRecord:
    """Sample every monitored quantity; the BKM integral is extended from ``prev``
    by the trapezoid rule."""
    if not state.is_finite():
        raise ValueError(f"cannot record diagnostics of a non-finite state at t={state.t!r}")
    b, q = state.b, state.q
    b_sob3 = sobolev_norm(b, 3)
    q_sob2 = sobolev_norm(q, 2)
    pair = b_sob3 + q_sob2
    q_sup = sup_norm(q)
    grad_b_sup = grad_sup_norm(b)
    integrand = q_sup + grad_b_sup
    if prev is None:
        integral = 0.0
    else:
        if state.t < prev.t:
            raise ValueError(f"time went backwards: {state.t} < {prev.t}")
        integral = prev.bkm_integral + 0.5 * (state.t - prev.t) * (prev.bkm_integrand + integrand)
    return DiagnosticsRecord(
        t=state.t,
        b_sob3=b_sob3,
        q_sob2=q_sob2,
        pair_norm=pair,
        q_sup=q_sup,
        grad_b_sup=grad_b_sup,
        bkm_integrand=integrand,
        bkm_integral=integral,
        g_val=math.e + pair,
        u_w1inf=w1inf_norm(velocity_from_vorticity(q, params.f)),
        b_l2=sobolev_norm(b, 0),
        spectral_tail_frac=spectral_tail_fraction(q, params.dealias_on),
    )


def _check_series(series) -> None:
    if not series:
        raise ValueError("diagnostics series is empty")
    times = np.array([r.t for r in series])
    if np.any(np.diff(times) <= 0):
        raise ValueError("diagnostics times must be strictly increasing")


@dataclass(frozen=True)
class EnvelopeVerdict:
    c_calibrated: float
    K_used: float
    bound_curve: list[tuple[float, float]]
    violated: bool
    margin: float
    calibrated: bool
    n_checked: int


def _lnln_bound(c: float, K: np.ndarray, t: np.ndarray, ln_g0: float) -> np.ndarray:
    # ln ln of g0^{exp(cK)} exp(c t exp(cK)) is c K + ln(ln g0 + c t)
    return c * K + np.log(ln_g0 + c * t)


def _required_c(K: float, t: float, ln_g0: float, lnln_g: float) -> float:
    """Smallest ``c >= 0`` whose envelope reaches ``g`` at this sample."""
    def gap(c):
        return c * K + math.log(ln_g0 + c * t) - lnln_g

    if gap(0.0) >= 0.0:
        return 0.0
    if K == 0.0 and t == 0.0:
        return math.inf
    hi = 1.0
    while gap(hi) < 0.0:
        hi *= 2.0
    c = brentq(gap, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    # brentq may land a hair below the root
    while gap(c) < 0.0:
        c = np.nextafter(c, math.inf)
    return float(c)


def envelope_verdict(series: list[DiagnosticsRecord], c: float | None = None,
                     calib_window: float = 0.5) -> EnvelopeVerdict:
    """Check ``g(t) <= g(0)^{exp(c K_t)} exp(c t exp(c K_t))`` along a run.

    ``g = e + ||b||_{3,2} + ||q||_{2,2}`` and ``K_t`` is the running BKM integral.
    Without ``c`` the smallest admissible constant is fitted on the first
    ``calib_window`` fraction of the samples and only the remainder is checked;
    with ``c`` every sample after the first is checked (at the first sample the
    envelope equals ``g(0)`` identically). The margin is the minimum of
    ``ln ln bound - ln ln g`` over the checked samples.
    """
    _check_series(series)
    t0 = series[0].t
    K0 = series[0].bkm_integral
    t = np.array([r.t - t0 for r in series])
    K = np.array([r.bkm_integral - K0 for r in series])
    lnln_g = np.log(np.log([r.g_val for r in series]))
    ln_g0 = math.log(series[0].g_val)

    if c is None:
        if not 0.0 < calib_window < 1.0:
            raise ValueError(f"calib_window must lie in (0, 1) (got {calib_window})")
        n_cal = max(1, int(round(calib_window * len(series))))
        c = max(_required_c(K[i], t[i], ln_g0, lnln_g[i]) for i in range(n_cal))
        check = slice(n_cal, None)
        calibrated = True
    else:
        if c < 0:
            raise ValueError(f"c must be >= 0 (got {c})")
        check = slice(1, None)
        calibrated = False

    lnln_bound = _lnln_bound(c, K, t, ln_g0)
    with np.errstate(over="ignore"):
        bound = np.exp(np.exp(lnln_bound))
    gaps = (lnln_bound - lnln_g)[check]
    margin = float(gaps.min()) if gaps.size else 0.0
    return EnvelopeVerdict(
        c_calibrated=float(c),
        K_used=float(K[-1]),
        bound_curve=[(r.t, float(v)) for r, v in zip(series, bound)],
        violated=bool(gaps.size and gaps.min() < 0.0),
        margin=margin,
        calibrated=calibrated,
        n_checked=int(gaps.size),
    )


def strong_solution_residual(snapshots: list[TqgState], params: TqgParams) -> tuple[float, float]:
    """Residuals of the integral (divergence) form of the equations along a trajectory.

    Evaluates ``b(t) - b0 + int_0^t div(b u)`` and
    ``q(t) - q0 + int_0^t [div((q - b) u) + div(b u_h)]`` with trapezoid time
    quadrature over uniformly spaced snapshots, and returns the largest L2 norm
    over the snapshot times, relative to ``||b0||_2`` and ``||q0||_2`` (absolute
    when those vanish).
    """
    if len(snapshots) < 3:
        raise ValueError(f"need at least 3 snapshots (got {len(snapshots)})")
    times = np.array([s.t for s in snapshots])
    steps = np.diff(times)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps.mean():
        raise ValueError("snapshots must be uniformly spaced in time")
    g: Grid = snapshots[0].grid
    ops = params._ops

    def fluxes(s: TqgState):
        q_hat = rfft(s.q.values)
        ux, uy = ops.velocity(q_hat)
        b = s.b.values
        fb = ops.flux_divergence(b, ux, uy)
        fq = ops.flux_divergence(s.q.values - b, ux, uy) + ops.flux_divergence(b, ops.uhx, ops.uhy)
        return fb, fq

    b0_hat, q0_hat = rfft(snapshots[0].b.values), rfft(snapshots[0].q.values)
    nb = sobolev_norm_hat(g, b0_hat, 0) or 1.0
    nq = sobolev_norm_hat(g, q0_hat, 0) or 1.0
    int_b = np.zeros(g.spectral_shape, complex)
    int_q = np.zeros(g.spectral_shape, complex)
    prev = fluxes(snapshots[0])
    res_b = res_q = 0.0
    for dt, s in zip(steps, snapshots[1:]):
        cur = fluxes(s)
        int_b += 0.5 * dt * (prev[0] + cur[0])
        int_q += 0.5 * dt * (prev[1] + cur[1])
        rb = rfft(s.b.values) - b0_hat + int_b
        rq = rfft(s.q.values) - q0_hat + int_q
        res_b = max(res_b, sobolev_norm_hat(g, rb, 0) / nb)
        res_q = max(res_q, sobolev_norm_hat(g, rq, 0) / nq)
        prev = cur
    return res_b, res_q


class Verdict(enum.Enum):
    COMPLETED = 0
    NORM_DIVERGENCE = 3
    RESOLUTION_EXHAUSTED = 4
    NAN_ABORT = 5

    @property
    def exit_code(self) -> int:
        return self.value


@dataclass(frozen=True)
class BlowupVerdict:
    kind: Verdict
    t_final: float
    final_K: float
    integrand_growing: bool
    reason: str


def blowup_verdict(series: list[DiagnosticsRecord], *, aborted: bool = False,
                   ceiling_factor: float = 1e6,
                   tail_threshold: float = TAIL_THRESHOLD) -> BlowupVerdict:
    """Classify how a run ended.

    Resolution exhaustion is checked first: fast norm growth in an
    under-resolved run says nothing about the continuum solution. The norm
    ceiling is ``ceiling_factor * max(initial pair norm, 1)``, a finite proxy for
    divergence.
    """
    if not series:
        raise ValueError("diagnostics series is empty")
    last = series[-1]
    finite = [r for r in series if r.is_finite()]
    final_K = finite[-1].bkm_integral if finite else math.nan
    growing = len(finite) > 1 and finite[-1].bkm_integrand > finite[0].bkm_integrand
    ceiling = ceiling_factor * max(series[0].pair_norm, 1.0)

    exhausted = [r for r in series if r.spectral_tail_frac > tail_threshold]
    if exhausted:
        r = exhausted[0]
        kind = Verdict.RESOLUTION_EXHAUSTED
        reason = f"spectral tail fraction {r.spectral_tail_frac:.3g} > {tail_threshold:g} at t={r.t:g}"
    elif aborted or len(finite) < len(series):
        kind = Verdict.NAN_ABORT
        reason = "non-finite values in state or diagnostics"
    elif any(r.pair_norm > ceiling for r in series):
        r = next(r for r in series if r.pair_norm > ceiling)
        kind = Verdict.NORM_DIVERGENCE
        reason = f"pair norm {r.pair_norm:.3g} exceeded ceiling {ceiling:.3g} (proxy) at t={r.t:g}"
    else:
        kind = Verdict.COMPLETED
        reason = "norms stayed finite and below the ceiling"
    return BlowupVerdict(kind, last.t, final_K, growing, reason)
