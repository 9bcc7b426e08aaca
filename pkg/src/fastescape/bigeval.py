"""Positive-axis evaluation of quadratic-zero products at radii far beyond
direct summation.

For sequences whose tail is exactly a_n = C (n + d)^2 the axis log-product

    S(r) = sum_n log(1 + B^2/(n+d)^2),     B = sqrt(r / C),

has the antiderivative  F(u) = u log(1 + B^2/u^2) + 2B atan(u/B), so a
direct head up to Mc plus an Euler-Maclaurin tail

    sum_{n>=Mc} g(n) = [pi B - F(Mc+d)] + g/2 - g'/12 + g'''/720 + R

evaluates S for any radius whose log fits a double, and the leading term
pi*B alone covers radii whose log only fits a WideFloat.  |R| is bounded
through the first omitted Bernoulli term (g'''' is single-signed here).

Everything in this module assumes all zeros are positive reals, which also
pins the circle maximum of |f| to the positive axis.  Error returns are
relative to the computed log value.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import EvaluationRange
from .logmag import WideFloat

# Head length for direct regime-1 evaluation before switching to EM.
AXIS_HEAD_BUDGET = 120_000

# ln B above which only the leading pi*B term is kept.
_LNB_ASYMPTOTIC = 1e280

_EM_REMAINDER = 0.0056  # 4 * 2*zeta(4)/(2pi)^4, safety factor included


# A wide exponent may not occupy more bits than this: one tower level past
# it, the integer itself stops being storable.
_EXP_FIELD_BITS = 4_000_000


def exp_wide(x: WideFloat) -> WideFloat:
    """e**x as a WideFloat for x of any magnitude the type can hold.

    Raises EvaluationRange when the result's exponent field would itself
    be astronomically long (the representability horizon of LogMag).
    """
    xf = x.to_float()
    if math.isfinite(xf) and abs(xf) < 1e307:
        return WideFloat.exp_of(xf)
    if x.sign < 0:
        raise EvaluationRange("exp_wide: argument underflows every scale")
    # beyond double range x is an exact huge integer: e^x = 2^(x/ln2)
    t = x / math.log(2.0)
    shift = t.e - 53
    if shift < 0 or shift > _EXP_FIELD_BITS:
        raise EvaluationRange("exp_wide: exponent beyond LogMag capacity")
    m53 = int(t.m * (1 << 53))
    return WideFloat(1.0, m53 << shift)


def axis_loglog_f(fn, ell: WideFloat) -> WideFloat:
    """ln(log f(r)) on the axis, computed without materialising log f(r).

    Only for radii deep in the asymptotic regime (log f = pi sqrt(r/C) up
    to relative e^-600 corrections), where log f itself may exceed every
    exponent budget but its log is plain: ln(pi) + (ell - ln C)/2.
    """
    coeff, _d, _n_model, _head = _axis_model(fn)
    lnB = (ell - math.log(coeff)) * 0.5
    if not lnB > WideFloat(600.0):
        raise EvaluationRange("axis_loglog_f needs the deep asymptotic regime")
    return lnB + math.log(math.pi)


def _axis_model(fn):
    """(C, d, first_model_index, head_moduli) for a p=2 positive-real model."""
    model = fn.zeros.power_model()
    if model is None or not fn.zeros.all_real_positive:
        raise EvaluationRange("big-radius axis evaluation needs a positive-real power model")
    coeff, p, offset, n_model = model
    if p != 2.0:
        raise EvaluationRange(f"big-radius axis evaluation supports exponent 2, not {p}")
    if n_model > 1:
        head = np.abs(fn.zeros.values(np.arange(1, n_model)))
    else:
        head = np.empty(0)
    return coeff, offset, n_model, head


def _gppp(u: float, B2: float) -> float:
    """g'''(u) for g(u) = log(1 + B^2/u^2), in overflow-safe ratio form."""
    tau = u * u / B2
    return -4.0 * (6.0 * tau * tau + 3.0 * tau + 1.0) / (u**3 * (1.0 + tau) ** 3)


def axis_log_f(fn, ell: WideFloat, eps: float = 1e-10) -> tuple[WideFloat, float]:
    """log f(r) on the positive axis at r = exp(ell); here |f(r)| = |c| f(r)/c.

    Returns (log_value, relative_error_bound).
    """
    coeff, d, n_model, head = _axis_model(fn)
    ell_f = ell.to_float()
    ln_c = math.log(abs(complex(fn.c)))

    ln_B = (ell - math.log(coeff)) * 0.5
    ln_B_f = ln_B.to_float()

    if not math.isfinite(ln_B_f) or ln_B_f > _LNB_ASYMPTOTIC:
        # leading term only; dropped terms are O((Mc + q + |head|) * lnB / B)
        pi_B = exp_wide(ln_B) * math.pi
        rel = ((abs(ln_B) + abs(WideFloat.of(ln_c))) * 50000.0 / pi_B).to_float()
        return pi_B, abs(rel)

    Mc = max(n_model + 8, 2048)
    while _EM_REMAINDER * (4.0 / Mc**3) > eps and Mc < (1 << 22):
        Mc *= 2
    u0 = Mc + d

    if ell_f <= 690.0:
        # exact float formulas
        r = math.exp(ell_f)
        B = math.exp(ln_B_f)
        B2 = B * B
        total = float(np.sum(np.log1p(r / head))) if head.size else 0.0
        u = np.arange(n_model, Mc, dtype=float) + d
        total += float(np.sum(np.log1p(B2 / (u * u))))
        F = u0 * math.log1p(B2 / (u0 * u0)) + 2.0 * B * math.atan(u0 / B)
        g0 = math.log1p(B2 / (u0 * u0))
        gp = -2.0 / (u0 * (1.0 + u0 * u0 / B2))
        gppp = _gppp(u0, B2)
        tail = math.pi * B - F + 0.5 * g0 - gp / 12.0 + gppp / 720.0
        value = WideFloat(total + tail + ln_c) + WideFloat(float(fn.q) * ell_f)
        err = _EM_REMAINDER * abs(gppp)
        vf = value.to_float()
        # 1e-15 floor covers head-sum roundoff
        return value, err / max(abs(vf), 1.0) + 1e-15

    # radius beyond double range: per-term asymptotic forms, wide accumulation
    head_sum = head.size * ell_f - float(np.sum(np.log(head))) if head.size else 0.0
    u = np.arange(n_model, Mc, dtype=float) + d
    direct = 2.0 * ((Mc - n_model) * ln_B_f - float(np.sum(np.log(u))))
    F = 2.0 * u0 * (ln_B_f - math.log(u0)) + 2.0 * u0
    g0 = 2.0 * (ln_B_f - math.log(u0))
    corr = head_sum + direct - F + 0.5 * g0 + 1.0 / (6.0 * u0) - 4.0 / (720.0 * u0**3)
    corr += ln_c + float(fn.q) * ell_f
    pi_B = exp_wide(ln_B) * math.pi
    value = pi_B + WideFloat(corr)
    err = _EM_REMAINDER * (4.0 / u0**3) + 1e-250
    rel = (WideFloat(err) / abs(value)).to_float()
    return value, abs(rel)


def axis_log_log_derivative(fn, ell: WideFloat, eps: float = 1e-10) -> tuple[WideFloat, float]:
    """ln(Lambda) with Lambda = r f'(r)/f(r) > 0 at r = exp(ell).

    Returns (ln_Lambda as WideFloat, relative_error_bound on Lambda).
    """
    coeff, d, n_model, head = _axis_model(fn)
    ell_f = ell.to_float()
    ln_B = (ell - math.log(coeff)) * 0.5
    ln_B_f = ln_B.to_float()

    if not math.isfinite(ln_B_f) or ln_B_f > _LNB_ASYMPTOTIC:
        return ln_B + math.log(math.pi / 2.0), 1e-200

    Mc = max(n_model + 8, 2048)
    while Mc**3 < 1.0 / max(eps, 1e-300) and Mc < (1 << 20):
        Mc *= 2
    u0 = Mc + d

    if ell_f <= 690.0:
        r = math.exp(ell_f)
        B = math.exp(ln_B_f)
        B2 = B * B
        lam = float(fn.q)
        if head.size:
            lam += float(np.sum(r / (r + head)))
        u = np.arange(n_model, Mc, dtype=float) + d
        lam += float(np.sum(1.0 / (1.0 + u * u / B2)))
        tau = u0 * u0 / B2
        inv_B2 = math.exp(-2.0 * ln_B_f)  # underflow-safe 1/B^2
        phi0 = 1.0 / (1.0 + tau)
        phip = -2.0 * u0 * inv_B2 / (1.0 + tau) ** 2
        phippp = 24.0 * u0 * (1.0 - tau) * inv_B2 * inv_B2 / (1.0 + tau) ** 4
        lam += B * (math.pi / 2.0 - math.atan(u0 / B)) + 0.5 * phi0 - phip / 12.0 + phippp / 720.0
        # |phi'''| peaks at ~4/B^3 near u ~ B/2; EM remainder is well under that
        err_rel = (0.1 * math.exp(-3.0 * ln_B_f) + abs(phippp)) / lam
        return WideFloat(math.log(lam)), err_rel

    # huge radius: Lambda = pi B / 2 + (q + |head| + (Mc - n_model) - u0) + tiny
    lam_small = float(fn.q) + head.size + (Mc - n_model) - u0
    lam = exp_wide(ln_B) * (math.pi / 2.0) + WideFloat(lam_small)
    return WideFloat(lam.ln()), 1e-12
