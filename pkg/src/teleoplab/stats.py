"""Two-way repeated-measures ANOVA and the distribution machinery behind it.

The factorial analysis treats Control and Delay as within-subject factors:
each effect is tested against its own interaction-with-subjects error term.
P-values come from a local regularized-incomplete-beta implementation so the
pipeline has no statistics-library dependency at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance, NonPositiveValue, UnbalancedDesign

_BETA_EPS = 1e-15
_BETA_MAX_ITER = 400


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (Lentz's method)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < 1e-300:
        d = 1e-300
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < 1e-300:
            d = 1e-300
        c = 1.0 + aa / c
        if abs(c) < 1e-300:
            c = 1e-300
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < 1e-300:
            d = 1e-300
        c = 1.0 + aa / c
        if abs(c) < 1e-300:
            c = 1e-300
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_bt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
             + a * math.log(x) + b * math.log1p(-x))
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def f_cdf(x: float, d1: float, d2: float) -> float:
    """CDF of the F distribution with (d1, d2) degrees of freedom."""
    if d1 < 1 or d2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if x <= 0.0:
        return 0.0
    return betainc(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))


def f_sf(x: float, d1: float, d2: float) -> float:
    return 1.0 - f_cdf(x, d1, d2)


def t_sf_two_sided(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t."""
    if df < 1:
        raise ValueError("df must be >= 1")
    t = abs(t)
    if t == 0.0:
        return 1.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class EffectRow:
    ss: float
    df: int
    ms: float
    f: float
    p: float


@dataclass(frozen=True)
class AnovaTable:
    """F-tests for factor A, factor B and their interaction."""

    effects: dict           # name -> EffectRow for A, B, AxB
    error_terms: dict       # name -> (ss, df) for the matching error strata
    ss_subject: float
    ss_total: float
    level_names: tuple      # (A levels, B levels)


class CellTable:
    """Balanced subject x A x B table of metric means."""

    def __init__(self, values, a_levels, b_levels):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3:
            raise UnbalancedDesign("cell table must be subjects x A x B")
        if np.isnan(values).any():
            raise UnbalancedDesign("cell table has missing cells")
        if values.shape[1] != len(a_levels) or values.shape[2] != len(b_levels):
            raise UnbalancedDesign("level labels do not match table shape")
        self.values = values
        self.a_levels = tuple(a_levels)
        self.b_levels = tuple(b_levels)

    @property
    def n_subjects(self):
        return self.values.shape[0]


def rm_anova(table: CellTable) -> AnovaTable:
    """Two-way within-subjects ANOVA on a balanced cell table."""
    y = table.values
    n, a, b = y.shape
    if n < 2 or a < 2 or b < 2:
        raise UnbalancedDesign("need >= 2 subjects and >= 2 levels per factor")
    grand = y.mean()
    m_s = y.mean(axis=(1, 2))
    m_a = y.mean(axis=(0, 2))
    m_b = y.mean(axis=(0, 1))
    m_ab = y.mean(axis=0)
    m_as = y.mean(axis=2)
    m_bs = y.mean(axis=1)

    ss_s = a * b * ((m_s - grand) ** 2).sum()
    ss_a = n * b * ((m_a - grand) ** 2).sum()
    ss_b = n * a * ((m_b - grand) ** 2).sum()
    ss_ab = n * ((m_ab - m_a[:, None] - m_b[None, :] + grand) ** 2).sum()
    ss_as = b * ((m_as - m_a[None, :] - m_s[:, None] + grand) ** 2).sum()
    ss_bs = a * ((m_bs - m_b[None, :] - m_s[:, None] + grand) ** 2).sum()
    ss_total = ((y - grand) ** 2).sum()
    ss_abs = ss_total - (ss_s + ss_a + ss_b + ss_ab + ss_as + ss_bs)

    df_a, df_b = a - 1, b - 1
    df_ab = df_a * df_b
    df_as = df_a * (n - 1)
    df_bs = df_b * (n - 1)
    df_abs = df_ab * (n - 1)

    def effect(ss_eff, df_eff, ss_err, df_err):
        ms_err = ss_err / df_err
        if ms_err <= 1e-300:
            raise DegenerateVariance("zero error mean square")
        ms_eff = ss_eff / df_eff
        f = ms_eff / ms_err
        return EffectRow(ss=ss_eff, df=df_eff, ms=ms_eff, f=f,
                         p=f_sf(f, df_eff, df_err))

    effects = {
        "A": effect(ss_a, df_a, ss_as, df_as),
        "B": effect(ss_b, df_b, ss_bs, df_bs),
        "AxB": effect(ss_ab, df_ab, ss_abs, df_abs),
    }
    error_terms = {
        "AxS": (ss_as, df_as),
        "BxS": (ss_bs, df_bs),
        "AxBxS": (ss_abs, df_abs),
    }
    return AnovaTable(effects=effects, error_terms=error_terms,
                      ss_subject=ss_s, ss_total=ss_total,
                      level_names=(table.a_levels, table.b_levels))


def paired_t(x, y):
    """Paired t-test. Returns (t, p, df)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise UnbalancedDesign("paired samples must be equal-length vectors")
    d = x - y
    n = len(d)
    mean = d.mean()
    sd = d.std(ddof=1)
    if sd == 0.0:
        if mean == 0.0:
            return 0.0, 1.0, n - 1
        raise DegenerateVariance("zero variance of paired differences")
    t = mean / (sd / math.sqrt(n))
    return float(t), t_sf_two_sided(t, n - 1), n - 1


def pairwise(cell_means: dict, alpha: float = 0.05) -> dict:
    """Bonferroni-corrected paired t-tests between every pair of conditions.

    cell_means maps condition name -> per-subject vector (aligned order).
    """
    names = list(cell_means)
    n_pairs = len(names) * (len(names) - 1) // 2
    corrected = alpha / max(1, n_pairs)
    out = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            t, p, df = paired_t(cell_means[a], cell_means[b])
            out[(a, b)] = {
                "t": t, "p": p, "df": df,
                "significant": bool(p < corrected),
                "alpha_corrected": corrected,
            }
    return out


def log_transform(values):
    """Natural log, elementwise; rejects non-positive input."""
    arr = np.asarray(values, dtype=float)
    if (arr <= 0.0).any():
        raise NonPositiveValue("log transform needs strictly positive values")
    return np.log(arr)
