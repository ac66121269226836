"""Complex-eigenfunction lower bounds for the three-slot shuffle.

The walk drops the top card into one of the bottom three positions, i.e. it
multiplies by a generator drawn uniformly from {sigma_{n-2}, sigma_{n-1},
sigma_n}.  Lower-bounding its mixing time goes through a lifted chain: track
the inverse positions X^{-1} together with a step counter Y mod n, and give
each card the winding number

    Z(j) = (X^{-1}(j) - X_0^{-1}(j) + Y) mod n.

With w = e^{2 pi i / n} the function

    Psi = sum_j v(X^{-1}(j)) * w^{Z(j)}

is an exact eigenfunction of the lifted transition operator once v is the
list lambda^{n-3}, ..., lambda, 1, chi_1, chi_0 and lambda is the root near 1
of

    f(lambda) = 9 lambda^n - 9 w lambda^{n-1} + 2 w^2 lambda^{n-2}
                - 3 w^{-2} lambda^2 + w^{-1} lambda.

The root is found by Newton iteration from 1; chi_1 = 2/(3 lambda - w) and
chi_0 = 2/((3 lambda - w)(3 lambda - 2 w)) make the boundary cases of the
eigenvalue equation hold, and a third constraint, chi_0 + chi_1 w^{-1} +
w^{-2} = 3 lambda^{n-2}, certifies the root independently.  From gamma =
1 - Re(lambda), a bound R on the expected squared increment of Psi, and
Psi_max = sum |v|, the walk is still far from uniform (total variation at
least 1 - eps) for

    t <= (log Psi_max + (1/2) log(gamma eps / (4 R))) / (-log(1 - gamma))

steps.  Everything here is certified numerically by the eigenfunction
residual rather than trusted from the algebra; see tests.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError

NEWTON_N_MIN = 16
NEWTON_N_MAX = 1024

POLY_N_MIN = 5


def unit_root(n: int) -> complex:
    """w = e^{2 pi i / n}."""
    return cmath.exp(2j * math.pi / n)


def cpow(z: complex, m: int) -> complex:
    """z**m for m >= 0 by repeated squaring; |z| near 1 so no scaling issues."""
    if m < 0:
        raise ValueError(f"negative exponent {m}")
    out = 1 + 0j
    base = complex(z)
    while m:
        if m & 1:
            out *= base
        base *= base
        m >>= 1
    return out


def wilson_poly(lam: complex, n: int) -> tuple[complex, complex]:
    """(f(lam), f'(lam)) for the degree-n eigenvalue polynomial.

    Evaluated as a Horner pair on the 5-term form: the three high-degree
    terms share the factor lam^{n-3}.
    """
    if n < POLY_N_MIN:
        raise ValueError(f"n={n} below minimum {POLY_N_MIN}")
    w = unit_root(n)
    w2 = w * w
    winv = 1 / w
    winv2 = winv * winv
    head = ((9 * lam - 9 * w) * lam + 2 * w2) * lam * cpow(lam, n - 3)
    f = head + (-3 * winv2 * lam + winv) * lam
    dhead = ((9 * n * lam - 9 * (n - 1) * w) * lam + 2 * (n - 2) * w2) * cpow(lam, n - 3)
    fp = dhead - 6 * winv2 * lam + winv
    return f, fp


@dataclass(frozen=True)
class NewtonResult:
    """Root plus the full iteration trace (diagnostics on failure)."""

    lam: complex
    iterates: tuple[complex, ...]
    residuals: tuple[float, ...]


def newton_root(n: int, tol: float | None = None, max_iter: int = 64) -> NewtonResult:
    """Newton iteration from z = 1 for the eigenvalue polynomial.

    Supported only for n in [16, 1024]: below, the starting point is not
    reliably inside the basin of the root near 1; above, unverified.
    """
    if not NEWTON_N_MIN <= n <= NEWTON_N_MAX:
        raise ValueError(f"n={n} outside supported range [{NEWTON_N_MIN}, {NEWTON_N_MAX}]")
    if tol is None:
        tol = 1e-12 * n
    z = 1 + 0j
    iterates = [z]
    residuals = []
    for _ in range(max_iter):
        f, fp = wilson_poly(z, n)
        residuals.append(abs(f))
        if abs(f) <= tol:
            return NewtonResult(z, tuple(iterates), tuple(residuals))
        if fp == 0:
            break
        z = z - f / fp
        iterates.append(z)
    raise NumericError(
        f"Newton did not reach |f| <= {tol:g} in {max_iter} iterations at n={n}",
        trace={"iterates": tuple(iterates), "residuals": tuple(residuals)},
    )


@dataclass(frozen=True)
class ChiReport:
    """Boundary coefficients and the residuals of their three constraints."""

    chi0: complex
    chi1: complex
    residuals: tuple[float, float, float]


def chi_values(lam: complex, w: complex, n: int) -> ChiReport:
    """chi_1 = 2/(3 lam - w), chi_0 = chi_1/(3 lam - 2w), with residuals.

    The first two residuals are algebraic identities of the formulas; the
    third, |chi_0 + chi_1 w^{-1} + w^{-2} - 3 lam^{n-2}|, is independent and
    vanishes only at a true root.
    """
    d1 = 3 * lam - w
    d2 = 3 * lam - 2 * w
    if min(abs(d1), abs(d2)) < 1e-8:
        raise NumericError(f"near-singular chi denominator at lam={lam!r}, w={w!r}")
    chi1 = 2 / d1
    chi0 = chi1 / d2
    r1 = abs(2 / chi1 + w - 3 * lam)
    r2 = abs(chi1 / chi0 + 2 * w - 3 * lam)
    r3 = abs(chi0 + chi1 / w + 1 / (w * w) - 3 * cpow(lam, n - 2))
    return ChiReport(chi0, chi1, (r1, r2, r3))


def v_list(n: int, lam: complex, chi0: complex, chi1: complex) -> np.ndarray:
    """Position weights v(1..n) = lam^{n-3}, ..., lam, 1, chi_1, chi_0.

    Returned 0-indexed: v[x-1] is the weight of position x.
    """
    v = np.empty(n, dtype=np.complex128)
    p = 1 + 0j
    for x in range(n - 2, 0, -1):
        v[x - 1] = p
        p *= lam
    v[n - 2] = chi1
    v[n - 1] = chi0
    return v


@dataclass(frozen=True)
class WilsonParams:
    """Everything the step bound needs, frozen after certification.

    gamma may be set directly (the lazy transfer halves it exactly), so it is
    only required to match 1 - Re(lam) to rounding.
    """

    n: int
    w: complex
    lam: complex
    chi0: complex
    chi1: complex
    gamma: float
    psi_max: float
    r_bound: float
    eps: float
    v: np.ndarray = field(compare=False, repr=False)

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma={self.gamma} outside (0, 1)")
        if abs(self.gamma - (1 - self.lam.real)) > 1e-12:
            raise ValueError("gamma inconsistent with lam")
        if self.lam.real < 0.5 - 1e-12:
            raise ValueError(f"Re(lam)={self.lam.real} below 1/2")
        if not self.psi_max > 1:
            raise ValueError(f"psi_max={self.psi_max} must exceed 1")
        if not self.r_bound > 0:
            raise ValueError(f"r_bound={self.r_bound} must be positive")
        if not 0 < self.eps < 1:
            raise ValueError(f"eps={self.eps} outside (0, 1)")


@dataclass(frozen=True)
class LiftedState:
    """Inverse positions, the step counter mod n, and per-card windings."""

    n: int
    inv_pos: tuple[int, ...]
    y: int
    z: tuple[int, ...]

    def __post_init__(self):
        n = self.n
        if sorted(self.inv_pos) != list(range(1, n + 1)):
            raise ValueError("inv_pos is not a bijection of 1..n")
        if not 0 <= self.y < n:
            raise ValueError(f"y={self.y} outside [0, {n})")
        if len(self.z) != n or not all(0 <= zj < n for zj in self.z):
            raise ValueError("z entries must lie in [0, n)")


def lifted_start(n: int) -> LiftedState:
    return LiftedState(n, tuple(range(1, n + 1)), 0, (0,) * n)


def card_update(pos: int, z: int, l: int, n: int) -> tuple[int, int]:
    """One card's (position, winding) after multiplying by sigma_l.

    >>> card_update(5, 0, 8, 8)    # full cycle: everyone shifts down
    (4, 0)
    >>> card_update(1, 0, 7, 8)    # top card lands at l, winding slips by n-l
    (7, 7)
    >>> card_update(1, 0, 6, 8)
    (6, 6)
    >>> card_update(7, 3, 6, 8)    # below the insertion point: untouched, Y ticks
    (7, 4)
    """
    if l == n:
        return (n if pos == 1 else pos - 1), z
    if pos > l:
        return pos, (z + 1) % n
    if pos == 1:
        return l, (z + l) % n
    return pos - 1, z


def lifted_step(state: LiftedState, l: int) -> LiftedState:
    """Advance the lifted chain by the generator sigma_l, l in {n-2, n-1, n}."""
    n = state.n
    if l not in (n - 2, n - 1, n):
        raise ValueError(f"l={l} is not one of the three bottom slots for n={n}")
    pairs = [card_update(p, z, l, n) for p, z in zip(state.inv_pos, state.z)]
    return LiftedState(
        n,
        tuple(p for p, _ in pairs),
        (state.y + 1) % n,
        tuple(z for _, z in pairs),
    )


def psi(state: LiftedState, params: WilsonParams) -> complex:
    """Psi = sum_j v(pos(j)) w^{Z(j)}; reads only inv_pos and z, never y."""
    pos = np.asarray(state.inv_pos)
    zz = np.asarray(state.z)
    phase = np.exp(2j * np.pi * zz / state.n)
    return complex((params.v[pos - 1] * phase).sum())


def _bulk_step(pos: np.ndarray, z: np.ndarray, l: int, n: int):
    """card_update applied to whole (samples, n) arrays."""
    if l == n:
        return np.where(pos == 1, n, pos - 1), z
    top = pos == 1
    stay = pos > l
    new_pos = np.where(stay, pos, np.where(top, l, pos - 1))
    new_z = np.where(stay, z + 1, np.where(top, z + l, z)) % n
    return new_pos, new_z


def _bulk_psi(pos: np.ndarray, z: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    phase = np.exp(2j * np.pi * z / n)
    return (v[pos - 1] * phase).sum(axis=-1)


def _sample_states(n: int, samples: int, seed: int):
    rng = np.random.Generator(np.random.Philox(seed))
    pos = np.argsort(rng.random((samples, n)), axis=1) + 1
    z = rng.integers(0, n, size=(samples, n))
    return pos, z


def eigenfunction_residual(params: WilsonParams, samples: int = 10_000,
                           seed: int = 0, lam: complex | None = None) -> float:
    """max over sampled states of |E[Psi'] - lam Psi| / max(1, |Psi|).

    This is the certificate for the whole construction: the case table, the
    v-list indexing, and the root must all be right for it to vanish.  lam
    may be overridden to demonstrate sensitivity.
    """
    n = params.n
    if lam is None:
        lam = params.lam
    pos, z = _sample_states(n, samples, seed)
    base = _bulk_psi(pos, z, params.v, n)
    mean = np.zeros(samples, dtype=np.complex128)
    for l in (n - 2, n - 1, n):
        p2, z2 = _bulk_step(pos, z, l, n)
        mean += _bulk_psi(p2, z2, params.v, n)
    mean /= 3
    err = np.abs(mean - lam * base) / np.maximum(1.0, np.abs(base))
    return float(err.max())


def r_estimate(params: WilsonParams, samples: int = 4_000, seed: int = 1) -> float:
    """max over sampled states of E[|Psi' - Psi|^2] under a uniform slot."""
    n = params.n
    pos, z = _sample_states(n, samples, seed)
    base = _bulk_psi(pos, z, params.v, n)
    acc = np.zeros(samples, dtype=np.float64)
    for l in (n - 2, n - 1, n):
        p2, z2 = _bulk_step(pos, z, l, n)
        acc += np.abs(_bulk_psi(p2, z2, params.v, n) - base) ** 2
    return float(acc.max() / 3)


def compute_params(n: int, eps: float = 0.9, tol: float | None = None,
                   r_samples: int = 4_000, seed: int = 0) -> WilsonParams:
    """Newton root, boundary coefficients, Psi_max = sum |v|, sampled R."""
    root = newton_root(n, tol)
    w = unit_root(n)
    chi = chi_values(root.lam, w, n)
    if chi.residuals[2] > 1e-8:
        raise NumericError(
            f"chi certification residual {chi.residuals[2]:g} above 1e-8 at n={n}",
            trace={"residuals": chi.residuals},
        )
    v = v_list(n, root.lam, chi.chi0, chi.chi1)
    psi_max = float(np.abs(v).sum())
    probe = WilsonParams(
        n=n, w=w, lam=root.lam, chi0=chi.chi0, chi1=chi.chi1,
        gamma=1 - root.lam.real, psi_max=psi_max, r_bound=1.0, eps=eps, v=v,
    )
    r = r_estimate(probe, r_samples, seed)
    return WilsonParams(
        n=n, w=w, lam=root.lam, chi0=chi.chi0, chi1=chi.chi1,
        gamma=1 - root.lam.real, psi_max=psi_max, r_bound=r, eps=eps, v=v,
    )


def step_bound(params: WilsonParams) -> int:
    """Largest t with t <= (log Psi_max + (1/2) log(gamma eps/(4R))) / (-log(1-gamma)).

    Up to step t the walk is guaranteed at total variation distance at least
    1 - eps from uniform.  A nonpositive numerator yields 0: the bound is
    then uninformative, not an error.
    """
    num = math.log(params.psi_max) + 0.5 * math.log(
        params.gamma * params.eps / (4 * params.r_bound)
    )
    if num <= 0:
        return 0
    return int(math.floor(num / -math.log1p(-params.gamma)))


def lazy_transfer(params: WilsonParams) -> WilsonParams:
    """Parameters for the half-lazy walk: lam -> 1/2 + lam/2, gamma and R halve.

    Psi is unchanged, so psi_max carries over.  gamma is halved exactly (set
    directly rather than recomputed from the new lam, which could round).
    The halving of gamma and R cancels inside the bound's numerator, so the
    lazy bound differs from the plain one only through -log(1 - gamma/2).
    """
    return WilsonParams(
        n=params.n,
        w=params.w,
        lam=0.5 + 0.5 * params.lam,
        chi0=params.chi0,
        chi1=params.chi1,
        gamma=params.gamma / 2,
        psi_max=params.psi_max,
        r_bound=params.r_bound / 2,
        eps=params.eps,
        v=params.v,
    )


def wilson_report(n: int, eps: float = 0.9, samples: int = 10_000,
                  r_samples: int = 4_000, seed: int = 0) -> dict:
    """Payload for the `wilson` subcommand."""
    params = compute_params(n, eps, r_samples=r_samples, seed=seed)
    chi = chi_values(params.lam, params.w, n)
    resid = eigenfunction_residual(params, samples, seed)
    return {
        "n": n,
        "lambda": {"re": params.lam.real, "im": params.lam.imag},
        "gamma": params.gamma,
        "chi0": {"re": params.chi0.real, "im": params.chi0.imag},
        "chi1": {"re": params.chi1.real, "im": params.chi1.imag},
        "chi_residuals": list(chi.residuals),
        "psi_max": params.psi_max,
        "R": params.r_bound,
        "residual": resid,
        "eps": eps,
        "bound_t": step_bound(params),
        "lazy_bound_t": step_bound(lazy_transfer(params)),
    }
