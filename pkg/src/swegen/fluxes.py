"""Physical fluxes, wave speeds, and approximate Riemann solvers for the 2D
shallow-water equations, plus the exact 1D dam-break similarity solution used
as a verification oracle.

All functions are written for numpy arrays but accept plain floats; states
are passed as (h, hu, hv) triples. The y-direction variants are computed by
routing through the x-direction formulas with the momentum components
swapped, so rotational symmetry holds bitwise.

Dry-state policy: cells with h below ``h_dry`` are treated as having zero
velocity and contribute zero wave speed.

Each interface solver accepts an optional ``bed_jump`` (s_right - s_left at
the interface). When given, the depth component of the jump that feeds the
dissipation term is replaced by the free-surface difference
(h_r + s_r) - (h_l + s_l). With ``bed_jump=None`` (the default) the classic
textbook formulas apply unchanged; the engine passes bed jumps so that the
lake-at-rest equilibrium produces identically zero dissipation over terrain.
"""

from __future__ import annotations

import numpy as np

DEFAULT_H_DRY = 1e-6

Triple = tuple  # (h, hu, hv) or (f_h, f_hu, f_hv); floats or ndarrays


def _velocity(h, m, h_dry):
    """Momentum / depth, zero where the cell is dry."""
    h = np.asarray(h, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    wet = h >= h_dry
    return np.where(wet, m / np.where(wet, h, 1.0), 0.0)


def physical_flux_x(q: Triple, g: float, h_dry: float = DEFAULT_H_DRY) -> Triple:
    """Flux of (h, hu, hv) through a unit x-interface: (hu, hu*u + g h^2/2, hu*v)."""
    h, hu, hv = (np.asarray(a, dtype=np.float64) for a in q)
    u = _velocity(h, hu, h_dry)
    v = _velocity(h, hv, h_dry)
    return hu, hu * u + 0.5 * g * h * h, hu * v


def physical_flux_y(q: Triple, g: float, h_dry: float = DEFAULT_H_DRY) -> Triple:
    """Flux through a unit y-interface; mirror of the x flux with u, v swapped."""
    h, hu, hv = q
    f0, f2, f1 = physical_flux_x((h, hv, hu), g, h_dry)
    return f0, f1, f2


def max_wave_speed(q: Triple, g: float, axis: str = "x", h_dry: float = DEFAULT_H_DRY):
    """Spectral radius |u_axis| + sqrt(g h) of the flux Jacobian; 0 where dry."""
    h, hu, hv = (np.asarray(a, dtype=np.float64) for a in q)
    m = hu if axis == "x" else hv
    wet = h >= h_dry
    u = np.where(wet, m / np.where(wet, h, 1.0), 0.0)
    return np.where(wet, np.abs(u) + np.sqrt(g * np.maximum(h, 0.0)), 0.0)


def _swap(q: Triple) -> Triple:
    h, hu, hv = q
    return h, hv, hu


def rusanov_flux(
    ql: Triple,
    qr: Triple,
    g: float,
    axis: str = "x",
    h_dry: float = DEFAULT_H_DRY,
    bed_jump=None,
) -> Triple:
    """Local Lax-Friedrichs flux: central average minus a * jump / 2 with
    a = max of the two cells' wave speeds."""
    if axis == "y":
        f0, f2, f1 = rusanov_flux(_swap(ql), _swap(qr), g, "x", h_dry, bed_jump)
        return f0, f1, f2
    a = np.maximum(
        max_wave_speed(ql, g, "x", h_dry), max_wave_speed(qr, g, "x", h_dry)
    )
    fl = physical_flux_x(ql, g, h_dry)
    fr = physical_flux_x(qr, g, h_dry)
    jump_h = np.asarray(qr[0], dtype=np.float64) - np.asarray(ql[0], dtype=np.float64)
    if bed_jump is not None:
        jump_h = jump_h + bed_jump
    return (
        0.5 * (fl[0] + fr[0]) - 0.5 * a * jump_h,
        0.5 * (fl[1] + fr[1]) - 0.5 * a * (np.asarray(qr[1]) - np.asarray(ql[1])),
        0.5 * (fl[2] + fr[2]) - 0.5 * a * (np.asarray(qr[2]) - np.asarray(ql[2])),
    )


def lax_friedrichs_flux(
    ql: Triple,
    qr: Triple,
    g: float,
    a_global: float,
    axis: str = "x",
    h_dry: float = DEFAULT_H_DRY,
    bed_jump=None,
) -> Triple:
    """Global Lax-Friedrichs flux; a_global must bound every wave speed in the
    field for the step being taken."""
    if a_global <= 0:
        same = all(
            np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(ql, qr)
        )
        if not same:
            raise ValueError(f"a_global must be positive, got {a_global}")
    if axis == "y":
        f0, f2, f1 = lax_friedrichs_flux(
            _swap(ql), _swap(qr), g, a_global, "x", h_dry, bed_jump
        )
        return f0, f1, f2
    fl = physical_flux_x(ql, g, h_dry)
    fr = physical_flux_x(qr, g, h_dry)
    jump_h = np.asarray(qr[0], dtype=np.float64) - np.asarray(ql[0], dtype=np.float64)
    if bed_jump is not None:
        jump_h = jump_h + bed_jump
    return (
        0.5 * (fl[0] + fr[0]) - 0.5 * a_global * jump_h,
        0.5 * (fl[1] + fr[1]) - 0.5 * a_global * (np.asarray(qr[1]) - np.asarray(ql[1])),
        0.5 * (fl[2] + fr[2]) - 0.5 * a_global * (np.asarray(qr[2]) - np.asarray(ql[2])),
    )


def _harten(lam, delta):
    """Entropy-fixed |lambda|: (lam^2 + delta^2) / (2 delta) below delta."""
    a = np.abs(lam)
    safe = np.where(delta > 0, delta, 1.0)
    fixed = (lam * lam + delta * delta) / (2.0 * safe)
    return np.where((a < delta) & (delta > 0), fixed, a)


def roe_flux(
    ql: Triple,
    qr: Triple,
    g: float,
    axis: str = "x",
    h_dry: float = DEFAULT_H_DRY,
    entropy_fix: bool = True,
    bed_jump=None,
) -> Triple:
    """Roe flux with the standard shallow-water linearization.

    Roe averages: u_hat weighted by sqrt(h), h_hat the arithmetic mean,
    c_hat = sqrt(g h_hat). Eigenvalues {u-c, u, u+c} get a Harten entropy
    fix with delta = 0.1 c_hat so transonic rarefactions do not form
    expansion shocks. Dry cell pairs return zero flux.
    """
    if axis == "y":
        f0, f2, f1 = roe_flux(_swap(ql), _swap(qr), g, "x", h_dry, entropy_fix, bed_jump)
        return f0, f1, f2

    hl, hul, hvl = (np.asarray(a, dtype=np.float64) for a in ql)
    hr, hur, hvr = (np.asarray(a, dtype=np.float64) for a in qr)
    ul = _velocity(hl, hul, h_dry)
    vl = _velocity(hl, hvl, h_dry)
    ur = _velocity(hr, hur, h_dry)
    vr = _velocity(hr, hvr, h_dry)

    sl = np.sqrt(np.maximum(hl, 0.0))
    sr = np.sqrt(np.maximum(hr, 0.0))
    wsum = sl + sr
    wet_pair = wsum > 0
    wsafe = np.where(wet_pair, wsum, 1.0)
    u_hat = np.where(wet_pair, (sl * ul + sr * ur) / wsafe, 0.0)
    v_hat = np.where(wet_pair, (sl * vl + sr * vr) / wsafe, 0.0)
    h_hat = 0.5 * (hl + hr)
    c_hat = np.sqrt(g * np.maximum(h_hat, 0.0))
    c_safe = np.where(c_hat > 0, c_hat, 1.0)

    dh = hr - hl
    if bed_jump is not None:
        dh = dh + bed_jump
    dhu = hur - hul
    dhv = hvr - hvl

    lam1 = u_hat - c_hat
    lam2 = u_hat
    lam3 = u_hat + c_hat
    if entropy_fix:
        delta = 0.1 * c_hat
        a1 = _harten(lam1, delta)
        a2 = _harten(lam2, delta)
        a3 = _harten(lam3, delta)
    else:
        a1, a2, a3 = np.abs(lam1), np.abs(lam2), np.abs(lam3)

    w1 = (lam3 * dh - dhu) / (2.0 * c_safe)
    w3 = (dhu - lam1 * dh) / (2.0 * c_safe)
    w2 = dhv - v_hat * dh

    # Right eigenvectors: r1=(1, u-c, v), r2=(0, 0, 1), r3=(1, u+c, v).
    active = (c_hat > 0).astype(np.float64)
    diss_h = (a1 * w1 + a3 * w3) * active
    diss_hu = (a1 * w1 * lam1 + a3 * w3 * lam3) * active
    diss_hv = (a1 * w1 * v_hat + a2 * w2 + a3 * w3 * v_hat) * active

    fl = physical_flux_x(ql, g, h_dry)
    fr = physical_flux_x(qr, g, h_dry)
    return (
        0.5 * (fl[0] + fr[0]) - 0.5 * diss_h,
        0.5 * (fl[1] + fr[1]) - 0.5 * diss_hu,
        0.5 * (fl[2] + fr[2]) - 0.5 * diss_hv,
    )


def interface_flux(
    scheme: str,
    ql: Triple,
    qr: Triple,
    g: float,
    axis: str = "x",
    h_dry: float = DEFAULT_H_DRY,
    a_global: float | None = None,
    bed_jump=None,
) -> Triple:
    """Dispatch an interface flux by scheme name."""
    if scheme == "rusanov":
        return rusanov_flux(ql, qr, g, axis, h_dry, bed_jump)
    if scheme == "lax_friedrichs":
        if a_global is None:
            raise ValueError("lax_friedrichs needs a_global")
        return lax_friedrichs_flux(ql, qr, g, a_global, axis, h_dry, bed_jump)
    if scheme == "roe":
        return roe_flux(ql, qr, g, axis, h_dry, bed_jump=bed_jump)
    raise ValueError(f"unknown flux scheme {scheme!r}")


# ---------------------------------------------------------------------------
# Exact dam-break (Stoker) similarity solution, used as a test oracle.
# ---------------------------------------------------------------------------

def dam_break_middle_state(h_l: float, h_r: float, g: float) -> tuple[float, float, float]:
    """Middle state (h_m, u_m) and shock speed of the wet-wet dam break.

    Solves the rarefaction/shock matching condition
        2 (sqrt(g h_l) - sqrt(g h_m)) = (h_m - h_r) sqrt(g (h_m + h_r) / (2 h_m h_r))
    for h_m in (h_r, h_l) by bisection.
    """
    if not (h_l > h_r > 0):
        raise ValueError(f"need h_l > h_r > 0, got h_l={h_l}, h_r={h_r}")
    c_l = np.sqrt(g * h_l)

    def match(h):
        return 2.0 * (c_l - np.sqrt(g * h)) - (h - h_r) * np.sqrt(
            g * (h + h_r) / (2.0 * h * h_r)
        )

    lo, hi = h_r, h_l
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if match(mid) > 0:
            lo = mid
        else:
            hi = mid
    h_m = 0.5 * (lo + hi)
    u_m = 2.0 * (c_l - np.sqrt(g * h_m))
    shock_speed = h_m * u_m / (h_m - h_r)
    return float(h_m), float(u_m), float(shock_speed)


def exact_dam_break(h_l: float, h_r: float, g: float, x_over_t) -> Triple:
    """Exact self-similar dam-break state at similarity coordinate x/t.

    Initial data: depth h_l for x < 0 and h_r for x > 0, both at rest, with
    h_l > h_r >= 0. Returns (h, hu, hv) with hv = 0; accepts scalar or array
    x/t. The wet-dry case (h_r = 0) ends in a rarefaction running to the dry
    front at x/t = 2 sqrt(g h_l).
    """
    if not (h_l > h_r >= 0):
        raise ValueError(f"need h_l > h_r >= 0, got h_l={h_l}, h_r={h_r}")
    xi = np.asarray(x_over_t, dtype=np.float64)
    c_l = np.sqrt(g * h_l)

    # Rarefaction fan: xi = u - c with u + 2c = 2 c_l.
    c_fan = (2.0 * c_l - xi) / 3.0
    h_fan = c_fan * c_fan / g
    u_fan = 2.0 * (xi + c_l) / 3.0

    if h_r == 0.0:
        head, tail = -c_l, 2.0 * c_l
        h = np.where(xi <= head, h_l, np.where(xi >= tail, 0.0, h_fan))
        u = np.where(xi <= head, 0.0, np.where(xi >= tail, 0.0, u_fan))
    else:
        h_m, u_m, s = dam_break_middle_state(h_l, h_r, g)
        c_m = np.sqrt(g * h_m)
        head, tail = -c_l, u_m - c_m
        h = np.select(
            [xi <= head, xi < tail, xi < s],
            [h_l, h_fan, h_m],
            default=h_r,
        )
        u = np.select(
            [xi <= head, xi < tail, xi < s],
            [0.0, u_fan, u_m],
            default=0.0,
        )
    hu = h * u
    if np.ndim(x_over_t) == 0:
        return float(h), float(hu), 0.0
    return h, hu, np.zeros_like(h)


def exact_dam_break_periodic(
    h_l: float, h_r: float, g: float, x, t: float, x_dam: float, length: float
) -> Triple:
    """Exact solution of the dam-break problem on a periodic domain of the
    given length, valid while the two wave fans stay disjoint.

    The initial data has depth h_l on (0, x_dam) and h_r on (x_dam, length);
    the periodic seam at x = 0 carries the mirrored jump. The result composes
    the central fan with the mirrored seam fan and raises if t is large
    enough for them to touch.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    c_l = np.sqrt(g * h_l)
    if h_r == 0.0:
        right_speed = 2.0 * c_l
    else:
        _, _, right_speed = dam_break_middle_state(h_l, h_r, g)
    left_reach = c_l * t
    right_reach = right_speed * t
    if x_dam - left_reach <= left_reach or x_dam + right_reach >= length - right_reach:
        raise ValueError(
            f"wave fans interact at t={t} on a domain of length {length}; "
            "shorten t or widen the domain"
        )

    x = np.asarray(x, dtype=np.float64)
    h_c, hu_c, _ = exact_dam_break(h_l, h_r, g, (x - x_dam) / t)
    # Seam jump at x = 0 (== length): mirror image of the central problem.
    d = np.mod(x + 0.5 * length, length) - 0.5 * length
    h_s, hu_s, _ = exact_dam_break(h_l, h_r, g, -d / t)
    hu_s = -hu_s
    background = np.where((x > 0) & (x < x_dam), h_l, h_r)
    h = h_c + h_s - background
    hu = hu_c + hu_s
    return h, hu, np.zeros_like(h)
