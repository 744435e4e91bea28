"""Constructors for drift functions b and shifts h with certified norms.

The exponential-moment theorems hypothesize sup-norm certificates:

    |b(t, x)|_H <= 1            everywhere,
    (sum_n lam_n e^(2 lam_n) b_n(t, x)^2)^(1/2) <= 1,
    h: [0,1] -> H bounded with sum_n |h_n(t)|^2 lam_n^2 < infinity.

Everything built here is rank-one,

    b(t, x) = phi(t, <x, e_d>) * v,     v_n = s_n c_n,

with |phi| <= 1 a scalar profile, e_d a coordinate direction, and
per-component scales

    s_n = min(lam_n^(-1/2) e^(-lam_n), 1).

The scale makes lam_n e^(2 lam_n) v_n^2 = min(1, lam_n e^(2 lam_n)) c_n^2,
so sum c_n^2 <= 1 certifies both norms at once.  (Without the cap at 1
the weighted scale alone exceeds one below lam ~ 0.4263, which would
break the plain sup-norm hypothesis for small rates.)  Certificates are
computed from the construction, never estimated from samples; sampling
only audits them.

Profiles are module-level functions (partial-bound for parameters) so
descriptors pickle cleanly into worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import DomainError

KIND_SMOOTH = "smooth"
KIND_LIPSCHITZ = "lipschitz"
KIND_DISCONTINUOUS = "discontinuous"

SHIFT_SUP_GRID = 4097  # 2^12 intervals, endpoints included, hits t = 1/2 exactly


# ----------------------------------------------------------------------
# scalar profiles phi(t, xi)
# ----------------------------------------------------------------------


def _phi_sin(t, xi, omega=1.0):
    return np.sin(omega * np.asarray(xi, dtype=np.float64))


def _dphi_sin(t, xi, omega=1.0):
    return omega * np.cos(omega * np.asarray(xi, dtype=np.float64))


def _phi_cos(t, xi, omega=1.0):
    return np.cos(omega * np.asarray(xi, dtype=np.float64))


def _dphi_cos(t, xi, omega=1.0):
    return -omega * np.sin(omega * np.asarray(xi, dtype=np.float64))


def _phi_tanh(t, xi, omega=1.0):
    return np.tanh(omega * np.asarray(xi, dtype=np.float64))


def _dphi_tanh(t, xi, omega=1.0):
    y = np.tanh(omega * np.asarray(xi, dtype=np.float64))
    return omega * (1.0 - y * y)


def _phi_sign(t, xi):
    return np.sign(np.asarray(xi, dtype=np.float64))


def _phi_one(t, xi):
    return np.ones_like(np.asarray(xi, dtype=np.float64))


def _phi_zero(t, xi):
    return np.zeros_like(np.asarray(xi, dtype=np.float64))


def _phi_time_sin(t, xi):
    # depends on t only; broadcast to the state's shape
    t_arr, xi_arr = np.broadcast_arrays(np.asarray(t, dtype=np.float64), np.asarray(xi, dtype=np.float64))
    return np.sin(math.pi * t_arr)


def _dphi_zero(t, xi):
    return np.zeros_like(np.asarray(xi, dtype=np.float64))


# name -> (phi, dphi or None, kind, sup |dphi/dxi| or None, formula)
_PROFILES = {
    "sin": (_phi_sin, _dphi_sin, KIND_SMOOTH, 1.0, "sin(omega xi)"),
    "cos": (_phi_cos, _dphi_cos, KIND_SMOOTH, 1.0, "cos(omega xi)"),
    "tanh": (_phi_tanh, _dphi_tanh, KIND_SMOOTH, 1.0, "tanh(omega xi)"),
    "sign": (_phi_sign, None, KIND_DISCONTINUOUS, None, "sign(xi)"),
    "one": (_phi_one, _dphi_zero, KIND_SMOOTH, 0.0, "1"),
    "zero": (_phi_zero, _dphi_zero, KIND_SMOOTH, 0.0, "0"),
    "time_sin": (_phi_time_sin, _dphi_zero, KIND_SMOOTH, 0.0, "sin(pi t)"),
}


@dataclass(frozen=True)
class FunctionDescriptor:
    """Rank-one drift function b(t, x) = phi(t, xi) * vector.

    For a scalar state (one-dimensional process) xi is the state itself;
    for a truncated Hilbert state xi = x[direction].  `norm_inf` and
    `norm_inf_A` are certified analytically by the constructor; np.inf
    marks an uncertified descriptor, which the theorem checkers refuse.
    `profile_dx_sup` bounds |d phi / d xi| when the profile is smooth.
    """

    name: str
    kind: str
    profile: object
    profile_dx: object
    vector: np.ndarray
    direction: int
    norm_inf: float
    norm_inf_A: float
    metadata: str
    profile_dx_sup: object = None

    @property
    def depends_on(self):
        return (self.direction,)

    @property
    def vector_norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def _xi(self, x):
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim == 0:
            return arr
        return arr[..., self.direction]

    def evaluate(self, t, x) -> np.ndarray:
        """b(t, x) as a vector; scalar x is read directly as xi."""
        phi = self.profile(t, self._xi(x))
        return np.multiply.outer(np.asarray(phi, dtype=np.float64), self.vector)

    def derivative(self, t, x) -> np.ndarray:
        """d b / d xi, the derivative along the read coordinate."""
        if self.profile_dx is None:
            raise DomainError(f"descriptor {self.name!r} is not smooth; no derivative")
        dphi = self.profile_dx(t, self._xi(x))
        return np.multiply.outer(np.asarray(dphi, dtype=np.float64), self.vector)

    @property
    def smooth(self) -> bool:
        return self.profile_dx is not None


def weighted_scales(spectrum_values) -> np.ndarray:
    """s_n = min(lam_n^(-1/2) e^(-lam_n), 1)."""
    lam = np.asarray(spectrum_values, dtype=np.float64)
    return np.minimum(np.exp(-lam) / np.sqrt(lam), 1.0)


def make_b_weighted(spectrum_values, profile="sin", coefficients=None, direction=0, omega=1.0) -> FunctionDescriptor:
    """Spectrally weighted rank-one b with both norms certified <= 1.

    coefficients default to the uniform unit vector c_n = N^(-1/2).
    Rejects sum c_n^2 > 1.
    """
    lam = np.asarray(spectrum_values, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0 or np.any(lam <= 0) or not np.all(np.isfinite(lam)):
        raise DomainError("spectrum must be a nonempty list of positive rates")
    n = lam.size
    if coefficients is None:
        c = np.full(n, 1.0 / math.sqrt(n))
    else:
        c = np.asarray(coefficients, dtype=np.float64)
        if c.shape != (n,):
            raise DomainError(f"need {n} coefficients, got shape {c.shape}")
    csq = float(np.sum(c * c))
    if csq > 1.0 + 1e-12:
        raise DomainError(f"sum of squared coefficients is {csq:.6g} > 1")
    if not 0 <= direction < n:
        raise DomainError(f"direction {direction} outside spectrum of size {n}")
    if profile not in _PROFILES:
        raise DomainError(f"unknown profile {profile!r}; have {sorted(_PROFILES)}")

    phi, dphi, kind, dsup, formula = _PROFILES[profile]
    if profile in ("sin", "cos", "tanh"):
        if not (math.isfinite(omega) and omega > 0):
            raise DomainError("omega must be positive and finite")
        phi = partial(phi, omega=omega)
        dphi = partial(dphi, omega=omega)
        dsup = omega
        formula = formula.replace("omega", repr(omega)) if omega != 1.0 else formula.replace("omega ", "")

    scales = weighted_scales(lam)
    vector = scales * c
    with np.errstate(over="ignore"):
        weights = np.minimum(1.0, lam * np.exp(2.0 * lam))  # lam e^(2 lam) s_n^2
    norm = float(np.linalg.norm(vector))
    anorm = float(math.sqrt(np.sum(weights * c * c)))
    if profile == "zero":
        norm = 0.0
        anorm = 0.0
        dsup = 0.0

    name = f"weighted:{profile}"
    if omega != 1.0 and profile in ("sin", "cos", "tanh"):
        name += f":omega={omega:g}"
    return FunctionDescriptor(
        name=name,
        kind=kind,
        profile=phi,
        profile_dx=dphi,
        vector=vector,
        direction=direction,
        norm_inf=norm,
        norm_inf_A=anorm,
        metadata=f"b(t,x) = {formula} * sum_n s_n c_n e_n with xi = x[{direction}], s_n = min(lam_n^-1/2 e^-lam_n, 1)",
        profile_dx_sup=dsup,
    )


def raw_profile_b(profile, profile_dx, vector, direction=0, kind=KIND_SMOOTH, name="raw", metadata="") -> FunctionDescriptor:
    """Uncertified descriptor for quadrature work and oracles.

    norm certificates are set to infinity, so the theorem checkers will
    refuse it; the grid integrals accept anything.
    """
    v = np.atleast_1d(np.asarray(vector, dtype=np.float64))
    return FunctionDescriptor(
        name=name,
        kind=kind,
        profile=profile,
        profile_dx=profile_dx,
        vector=v,
        direction=direction,
        norm_inf=math.inf,
        norm_inf_A=math.inf,
        metadata=metadata or name,
        profile_dx_sup=None,
    )


# ----------------------------------------------------------------------
# shifts h(t)
# ----------------------------------------------------------------------


def _sh_sin_pi_t(t, scale=1.0):
    return scale * np.sin(math.pi * np.asarray(t, dtype=np.float64))


def _sh_const(t, scale=1.0):
    return np.full_like(np.asarray(t, dtype=np.float64), scale)


_SHIFT_PROFILES = {
    "sin_pi_t": (_sh_sin_pi_t, "sin(pi t)"),
    "const": (_sh_const, "1"),
}


@dataclass(frozen=True)
class ShiftDescriptor:
    """h: [0,1] -> truncated H, one scalar profile per live component.

    Sup norms are grid-approximated (`sup_grid` points, endpoints
    included); `grid_approximate` records that disclaimer.  The weighted
    certificate a_norm_sq_max bounds sum_n h_n(t)^2 lam_n^2 on the grid.
    """

    name: str
    truncation: int
    eigenvalues: tuple
    components: tuple  # ((index, callable, label), ...)
    norm_inf: float
    a_norm_sq_max: float
    sup_grid: int = SHIFT_SUP_GRID
    grid_approximate: bool = True

    @property
    def depends_on(self):
        return tuple(idx for idx, _, _ in self.components)

    def component(self, index: int, t) -> np.ndarray:
        t_arr = np.asarray(t, dtype=np.float64)
        for idx, fn, _ in self.components:
            if idx == index:
                return np.asarray(fn(t_arr), dtype=np.float64)
        return np.zeros_like(t_arr)

    def evaluate(self, t) -> np.ndarray:
        """h(t): shape (N,) for scalar t, (T, N) for a time grid."""
        t_arr = np.asarray(t, dtype=np.float64)
        out = np.zeros(t_arr.shape + (self.truncation,))
        for idx, fn, _ in self.components:
            out[..., idx] = fn(t_arr)
        return out

    def a_norm_sq(self, t) -> np.ndarray:
        """sum_n h_n(t)^2 lam_n^2 (a finite sum on the truncation)."""
        t_arr = np.asarray(t, dtype=np.float64)
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        total = np.zeros_like(t_arr)
        for idx, fn, _ in self.components:
            vals = np.asarray(fn(t_arr), dtype=np.float64)
            total = total + vals * vals * lam[idx] ** 2
        return total


def _build_shift(name, spectrum_values, profiles, allow_zero):
    lam = np.asarray(spectrum_values, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0:
        raise DomainError("spectrum must be a nonempty list of rates")
    n = lam.size
    comps = []
    for idx, entry in sorted(profiles.items()):
        if not 0 <= idx < n:
            raise DomainError(f"shift component {idx} outside truncation {n}")
        if callable(entry):
            comps.append((idx, entry, getattr(entry, "__name__", "custom")))
        else:
            pname = entry
            scale = 1.0
            if ":" in str(entry):
                pname, s = str(entry).split(":", 1)
                scale = float(s)
            if pname not in _SHIFT_PROFILES:
                raise DomainError(f"unknown shift profile {pname!r}; have {sorted(_SHIFT_PROFILES)}")
            fn, label = _SHIFT_PROFILES[pname]
            comps.append((idx, partial(fn, scale=scale) if scale != 1.0 else fn, label))
    tgrid = np.linspace(0.0, 1.0, SHIFT_SUP_GRID)
    norm_sq = np.zeros_like(tgrid)
    a_sq = np.zeros_like(tgrid)
    for idx, fn, _ in comps:
        vals = np.asarray(fn(tgrid), dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise DomainError(f"shift component {idx} is not finite on [0,1]")
        norm_sq += vals * vals
        a_sq += vals * vals * lam[idx] ** 2
    norm_inf = float(math.sqrt(np.max(norm_sq))) if comps else 0.0
    if norm_inf == 0.0 and not allow_zero:
        raise DomainError("shift vanishes identically; the theorems need sup |h| in (0, inf)")
    return ShiftDescriptor(
        name=name,
        truncation=n,
        eigenvalues=tuple(float(v) for v in lam),
        components=tuple(comps),
        norm_inf=norm_inf,
        a_norm_sq_max=float(np.max(a_sq)) if comps else 0.0,
    )


def make_h(spectrum_values, profiles, name="h") -> ShiftDescriptor:
    """Shift from per-component scalar profiles {index: profile}.

    A profile is a callable t -> value or a registry name
    ("sin_pi_t", "const", optionally "const:0.5" for a scale).
    All-zero shifts are rejected here; see zero_shift for the degenerate
    object used as a comparison baseline.
    """
    return _build_shift(name, spectrum_values, profiles, allow_zero=False)


def zero_shift(spectrum_values) -> ShiftDescriptor:
    """The identically zero shift (norm_inf = 0).

    Not admissible where a theorem requires sup |h| > 0; fine as one leg
    of a difference.
    """
    return _build_shift("zero", spectrum_values, {}, allow_zero=True)


def shift_difference_norm(h1: ShiftDescriptor, h2: ShiftDescriptor, r=0.0, u=1.0, grid=SHIFT_SUP_GRID) -> float:
    """Grid sup over t in [r, u] of |h1(t) - h2(t)|_H."""
    if h1.truncation != h2.truncation:
        raise DomainError("shift truncations differ")
    if not 0.0 <= r < u <= 1.0:
        raise DomainError("need 0 <= r < u <= 1")
    tgrid = np.linspace(r, u, grid)
    diff = h1.evaluate(tgrid) - h2.evaluate(tgrid)
    return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))


# ----------------------------------------------------------------------
# window rescaling
# ----------------------------------------------------------------------
#
# Mapping a window [r, u] of length l = u - r onto unit time sends the
# process to one with rates l * lam_n and the data to
#
#   b~(t, x) = b(l t + r, sqrt(l) x),    h~(t) = l^(-1/2) h(l t + r).
#
# The window sees a subset of the original arguments, so the parent sup
# certificates remain valid for b~ (if conservative).  The shift scales
# by l^(-1/2), which can grow, so its norms are recomputed from scratch.


def _phi_windowed(t, xi, base, ell, r):
    return base(ell * np.asarray(t, dtype=np.float64) + r, math.sqrt(ell) * np.asarray(xi, dtype=np.float64))


def _dphi_windowed(t, xi, base_dx, ell, r):
    inner = base_dx(ell * np.asarray(t, dtype=np.float64) + r, math.sqrt(ell) * np.asarray(xi, dtype=np.float64))
    return math.sqrt(ell) * np.asarray(inner, dtype=np.float64)


def _sh_windowed(t, base, ell, r):
    vals = base(ell * np.asarray(t, dtype=np.float64) + r)
    return np.asarray(vals, dtype=np.float64) / math.sqrt(ell)


def window_rescaled_b(b: FunctionDescriptor, r: float, u: float) -> FunctionDescriptor:
    """b~(t, x) = b(l t + r, sqrt(l) x) for the unit-time picture of [r, u]."""
    if not 0.0 <= r < u <= 1.0:
        raise DomainError("need 0 <= r < u <= 1")
    ell = u - r
    dphi = None
    dsup = None
    if b.profile_dx is not None:
        dphi = partial(_dphi_windowed, base_dx=b.profile_dx, ell=ell, r=r)
        if b.profile_dx_sup is not None:
            dsup = math.sqrt(ell) * b.profile_dx_sup
    return FunctionDescriptor(
        name=f"{b.name}:window={r:g}..{u:g}",
        kind=b.kind,
        profile=partial(_phi_windowed, base=b.profile, ell=ell, r=r),
        profile_dx=dphi,
        vector=b.vector,
        direction=b.direction,
        norm_inf=b.norm_inf,
        norm_inf_A=b.norm_inf_A,
        metadata=f"{b.metadata}; time window [{r:g}, {u:g}] mapped to [0, 1]",
        profile_dx_sup=dsup,
    )


def window_rescaled_h(h: ShiftDescriptor, r: float, u: float) -> ShiftDescriptor:
    """h~(t) = l^(-1/2) h(l t + r); norms recomputed on the unit grid."""
    if not 0.0 <= r < u <= 1.0:
        raise DomainError("need 0 <= r < u <= 1")
    ell = u - r
    profiles = {
        idx: partial(_sh_windowed, base=fn, ell=ell, r=r)
        for idx, fn, _ in h.components
    }
    return _build_shift(
        f"{h.name}:window={r:g}..{u:g}",
        h.eigenvalues,
        profiles,
        allow_zero=True,
    )


# ----------------------------------------------------------------------
# registry names for the command line
# ----------------------------------------------------------------------


def resolve_b(name: str, spectrum_values) -> FunctionDescriptor:
    """Descriptor from a config name.

    weighted:<profile>[:omega=<w>]   spectrally weighted rank-one family
    const[:<c>]                      constant vector c * e_1
    zero                             the zero function
    """
    parts = str(name).split(":")
    family = parts[0]
    if family == "weighted":
        if len(parts) < 2:
            raise DomainError("weighted descriptor needs a profile, e.g. weighted:sin")
        omega = 1.0
        for extra in parts[2:]:
            key, _, val = extra.partition("=")
            if key != "omega" or not val:
                raise DomainError(f"unknown descriptor option {extra!r}")
            omega = float(val)
        return make_b_weighted(spectrum_values, profile=parts[1], omega=omega)
    if family == "const":
        c = float(parts[1]) if len(parts) > 1 else 1.0
        if not 0.0 <= abs(c) <= 1.0:
            raise DomainError("constant drift must have |c| <= 1 to stay certified")
        lam = np.asarray(spectrum_values, dtype=np.float64)
        vector = np.zeros(lam.size)
        vector[0] = c
        with np.errstate(over="ignore"):
            w0 = lam[0] * np.exp(2.0 * lam[0])
        return FunctionDescriptor(
            name=f"const:{c:g}",
            kind=KIND_SMOOTH,
            profile=_phi_one,
            profile_dx=_dphi_zero,
            vector=vector,
            direction=0,
            norm_inf=abs(c),
            norm_inf_A=float(abs(c) * math.sqrt(w0)) if math.isfinite(w0) else math.inf,
            metadata=f"b(t,x) = {c:g} e_1",
            profile_dx_sup=0.0,
        )
    if family == "zero":
        return make_b_weighted(spectrum_values, profile="zero")
    if family == "time":
        if len(parts) < 2 or parts[1] != "sin_pi":
            raise DomainError("time family supports time:sin_pi")
        return make_b_weighted(spectrum_values, profile="time_sin")
    raise DomainError(f"unknown drift function {name!r}")


def resolve_h(name: str, spectrum_values) -> ShiftDescriptor:
    """Shift from a config name: e<k>:<profile>[:<scale>], or zero."""
    text = str(name)
    if text == "zero":
        return zero_shift(spectrum_values)
    parts = text.split(":")
    if not parts[0].startswith("e") or not parts[0][1:].isdigit():
        raise DomainError(f"unknown shift {name!r}; expected e<k>:<profile> or zero")
    index = int(parts[0][1:]) - 1
    if len(parts) < 2:
        raise DomainError(f"shift {name!r} needs a profile, e.g. e1:sin_pi_t")
    profile = ":".join(parts[1:])
    return _build_shift(text, spectrum_values, {index: profile}, allow_zero=False)
