"""Variational core for the singular biharmonic problem.

Energy functional on clamped grid fields:

    J(u) = 1/2 int |L u|^2 - int F(xi, u) / rho^a,

whose critical points solve  L^2 u = f(xi, u) / rho^a  with clamped boundary
values.  Because the discrete quadratic form is exactly the square of the
symmetric sublaplacian matrix (see operators), the gradient representer

    grad J(u) = L(L u) - w_a f(xi, u)

pairs exactly with directional derivatives: <grad, v> * cellVolume matches
central differences of J to quadrature rounding.

The saddle search follows the classical path-deformation recipe: push a
segment from 0 to a negative-energy endpoint downhill at its maximizer,
redistribute, repeat; an optional damped-Newton polish then drives the
stationarity residual to tight tolerances once the deformation phase has
located the basin of the saddle.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .grids import GridDomain, GridField, zeros
from .operators import dirichlet_energy, integrate_weighted, sublaplacian

Array = np.ndarray


# -- nonlinearities -----------------------------------------------------------

@dataclass(frozen=True)
class NonlinearitySpec:
    """A nonlinearity f(xi, u), its u-primitive F, and growth metadata.

    f, bigF, fprime are vectorized callables (X, Y, T, U) -> array; the
    built-in models ignore the space arguments.  growth_class is either
    "subcritical" or "critical"; alpha0 is the critical exponent scale when
    critical.  theta, bigM, r0 parametrize the superlinearity hypotheses and
    beta1 the asymptotic lower bound used in the critical level estimate.
    """

    name: str
    f: Callable[..., Array]
    bigF: Callable[..., Array]
    fprime: Callable[..., Array]
    growth_class: str
    theta: float
    bigM: float
    r0: float
    alpha0: float | None = None
    beta1: float | None = None
    params: dict = dc_field(default_factory=dict)


def cubic_model() -> NonlinearitySpec:
    """f(u) = u^3, F = u^4/4: subcritical, superquadratic with theta = 4."""
    return NonlinearitySpec(
        name="cubic",
        f=lambda X, Y, T, U: U ** 3,
        bigF=lambda X, Y, T, U: 0.25 * U ** 4,
        fprime=lambda X, Y, T, U: 3.0 * U ** 2,
        growth_class="subcritical",
        theta=4.0,
        bigM=25.0,   # primitive bound F <= M f holds up to u = 4 M on samples
        r0=1.0,
    )


def critical_model(lam: float, alpha0: float = 1.0) -> NonlinearitySpec:
    """f(u) = lam * u * exp(alpha0 u^2): critical exponential growth.

    F = lam/(2 alpha0) (exp(alpha0 u^2) - 1); u f / F -> 2 alpha0 u^2, so any
    theta > 2 works for large u; u f(u) exp(-alpha0 u^2) = lam u^2 -> inf, so
    the asymptotic lower bound holds with any beta1 (recorded as inf).
    """
    if lam <= 0 or alpha0 <= 0:
        raise ValueError("critical model needs lam > 0 and alpha0 > 0")
    return NonlinearitySpec(
        name="critical-exp",
        f=lambda X, Y, T, U: lam * U * np.exp(alpha0 * U ** 2),
        bigF=lambda X, Y, T, U: lam / (2 * alpha0) * (np.exp(alpha0 * U ** 2) - 1.0),
        fprime=lambda X, Y, T, U: lam * (1.0 + 2.0 * alpha0 * U ** 2) * np.exp(alpha0 * U ** 2),
        growth_class="critical",
        theta=3.0,
        bigM=1.0,
        r0=1.0,
        alpha0=alpha0,
        beta1=np.inf,
        params={"lam": lam, "alpha0": alpha0},
    )


MODELS = {"cubic": cubic_model}


# -- functional and gradient --------------------------------------------------

def _check_a(a: float):
    if not (0.0 <= a < 4.0):
        raise ValueError(f"potential exponent a must lie in [0, 4), got {a}")


def energy(u: GridField, nl: NonlinearitySpec, a: float) -> float:
    """J(u) = 1/2 ||L u||^2 - int F(xi, u)/rho^a."""
    _check_a(a)
    X, Y, T = u.domain.coords()
    Ffield = GridField(u.domain, nl.bigF(X, Y, T, u.values))
    return 0.5 * dirichlet_energy(u) - integrate_weighted(Ffield, a)


def grad_energy(u: GridField, nl: NonlinearitySpec, a: float) -> GridField:
    """Representer L(Lu) - w_a f(xi, u) on free cells (zero elsewhere).

    <grad_energy(u), v> * cellVolume is the exact directional derivative of
    energy at u along any free-supported v.
    """
    _check_a(a)
    dom = u.domain
    X, Y, T = dom.coords()
    w = dom.singular_weight(a)
    LLu = sublaplacian(sublaplacian(u)).values
    g = LLu - w * nl.f(X, Y, T, u.values)
    g = np.where(dom.free_mask(), g, 0.0)
    return GridField(dom, g)


def grad_norm(g: GridField) -> float:
    return float(np.sqrt(np.sum(g.values ** 2) * g.domain.cell_volume))


# -- Rayleigh constant --------------------------------------------------------

@dataclass
class LambdaResult:
    value: float
    residual: float
    iterations: int
    converged: bool


def lambda_estimate(domain: GridDomain, a: float, tol: float = 1e-10,
                    max_outer: int = 200, cg_tol: float = 1e-12,
                    cg_max_iter: int = 200000) -> LambdaResult:
    """Smallest Rayleigh quotient ||u||^2 / int u^2/rho^a by inverse iteration.

    The pencil is (L^2, diag(w_a)) on free cells; L^2 is SPD there, so each
    inverse-power step is one conjugate-gradient solve.  Residual reported is
    ||L^2 x - lambda w x|| / ||w x||.
    """
    _check_a(a)
    free = domain.free_mask()
    w = domain.singular_weight(a)[free]

    def apply_A(x):
        u = np.zeros(domain.shape)
        u[free] = x
        return sublaplacian(sublaplacian(GridField(domain, u))).values[free]

    rng = np.random.default_rng(7)
    x = rng.standard_normal(int(free.sum()))
    x /= np.sqrt(x @ x)
    lam_prev = np.inf
    lam = np.inf
    res = np.inf
    it = 0
    for it in range(1, max_outer + 1):
        b = w * x
        y, _, _ = _cg_solve(apply_A, b, cg_tol, cg_max_iter, x0=x / max(lam, 1e-30) if np.isfinite(lam) else None)
        x = y / np.sqrt(y @ y)
        Ax = apply_A(x)
        lam = float(x @ Ax) / float(x @ (w * x))
        r = Ax - lam * w * x
        res = float(np.sqrt(r @ r)) / float(np.sqrt((w * x) @ (w * x)))
        if abs(lam - lam_prev) <= tol * abs(lam) and res <= np.sqrt(tol):
            return LambdaResult(value=lam, residual=res, iterations=it, converged=True)
        lam_prev = lam
    return LambdaResult(value=lam, residual=res, iterations=it, converged=False)


def _cg_solve(apply_op, b, tol, max_iter, x0=None):
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_op(x)
    p = r.copy()
    rs = float(r @ r)
    b2 = max(float(b @ b), 1e-300)
    it = 0
    for it in range(1, max_iter + 1):
        Ap = apply_op(p)
        alpha = rs / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        if rs_new <= tol * tol * b2:
            rs = rs_new
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x, it, np.sqrt(rs / b2)


def rayleigh_quotient(u: GridField, a: float) -> float:
    """||u||^2 / int u^2/rho^a; scale-invariant in u."""
    usq = GridField(u.domain, u.values ** 2)
    denom = integrate_weighted(usq, a)
    if denom == 0.0:
        raise ValueError("quotient undefined: field vanishes on the weighted domain")
    return dirichlet_energy(u) / denom


# -- hypothesis validation ----------------------------------------------------

@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    witness: dict
    detail: str


@dataclass
class ValidationReport:
    checks: list[HypothesisCheck]
    sampled_range: tuple[float, float]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def passed_geometry(self) -> bool:
        """The four checks the subcritical saddle search relies on."""
        need = {"sign", "primitive_bound", "superquadratic", "origin_gap"}
        return all(c.passed for c in self.checks if c.name in need)


def validate_hypotheses(nl: NonlinearitySpec, a: float, lam: float,
                        domain: GridDomain, u_max: float = 8.0,
                        n_u: int = 400, n_xi: int = 64,
                        bigR: float = 1.0, m_estimate: float | None = None,
                        seed: int = 0) -> ValidationReport:
    """Sampled check of the structural conditions on f.

    All statements are verified on u in [-u_max, u_max] at n_xi sampled grid
    points only; the report records that range and claims nothing beyond it.

      sign             f(xi,u) >= 0 for u >= 0 and <= 0 for u <= 0
      primitive_bound  0 < F <= M f on [r0, u_max]
      superquadratic   theta F <= u f for |u| in [r0, u_max]
      origin_gap       2 F / u^2 < lam for 0 < |u| <= delta (delta reported)
      exp_lower_bound  u f exp(-alpha0 u^2) at u_max >= beta1 > threshold
                       (critical class only; threshold needs an M estimate)
    """
    _check_a(a)
    rng = np.random.default_rng(seed)
    X, Y, T = domain.coords()
    m = domain.mask
    idx = rng.choice(int(m.sum()), size=min(n_xi, int(m.sum())), replace=False)
    xs = X[m][idx]
    ys = Y[m][idx]
    ts = T[m][idx]

    checks: list[HypothesisCheck] = []

    u_pos = np.linspace(1e-9, u_max, n_u)
    u_all = np.concatenate([-u_pos[::-1], u_pos])

    def sample(fn, uu):
        return fn(xs[:, None], ys[:, None], ts[:, None], uu[None, :])

    fv = sample(nl.f, u_all)
    ok = bool(np.all(fv[:, u_all >= 0] >= 0) and np.all(fv[:, u_all <= 0] <= 0))
    worst = np.unravel_index(np.argmin(np.sign(u_all)[None, :] * fv), fv.shape)
    checks.append(HypothesisCheck(
        "sign", ok,
        {"xi": (float(xs[worst[0]]), float(ys[worst[0]]), float(ts[worst[0]])),
         "u": float(u_all[worst[1]])},
        "f has the sign of u at all samples" if ok else "sign violation found",
    ))

    big_u = u_pos[u_pos >= nl.r0]
    if big_u.size == 0:
        big_u = np.array([nl.r0])
    Fv = sample(nl.bigF, big_u)
    fv2 = sample(nl.f, big_u)
    pos = bool(np.all(Fv > 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(fv2 > 0, Fv / fv2, np.inf)
    min_M = float(np.max(ratio))
    okF = pos and min_M <= nl.bigM
    wi = np.unravel_index(np.argmax(ratio), ratio.shape)
    checks.append(HypothesisCheck(
        "primitive_bound", okF,
        {"u": float(big_u[wi[1]]), "minimal_M": min_M},
        f"F <= M f on [r0, u_max] with minimal M = {min_M:.4g} (declared {nl.bigM})",
    ))

    u_abs = np.concatenate([-big_u[::-1], big_u])
    Fv = sample(nl.bigF, u_abs)
    fv3 = sample(nl.f, u_abs)
    gap = u_abs[None, :] * fv3 - nl.theta * Fv
    okT = bool(np.all(gap >= -1e-12 * np.maximum(1.0, np.abs(u_abs[None, :] * fv3))))
    wi = np.unravel_index(np.argmin(gap), gap.shape)
    checks.append(HypothesisCheck(
        "superquadratic", okT,
        {"u": float(u_abs[wi[1]]), "theta_F_minus_uf": float(-gap[wi])},
        f"theta F <= u f for |u| >= r0 with theta = {nl.theta}",
    ))

    delta = min(0.1, u_max / 10.0)
    u_small = np.linspace(1e-8, delta, 200)
    Fs = sample(nl.bigF, u_small)
    quot = 2.0 * Fs / u_small[None, :] ** 2
    sup_q = float(np.max(quot))
    okG = sup_q < lam
    checks.append(HypothesisCheck(
        "origin_gap", okG,
        {"delta": delta, "sup_2F_over_u2": sup_q, "lambda": lam},
        f"2F/u^2 <= {sup_q:.4g} < lambda = {lam:.4g} on (0, {delta}]"
        if okG else f"2F/u^2 reaches {sup_q:.4g} >= lambda = {lam:.4g}",
    ))

    if nl.growth_class == "critical":
        alpha0 = nl.alpha0 or 1.0
        tail = sample(lambda X_, Y_, T_, U: U * nl.f(X_, Y_, T_, U) * np.exp(-alpha0 * U ** 2),
                      np.array([u_max]))
        beta1_emp = float(np.min(tail))
        if m_estimate is not None and m_estimate > 0:
            thresh = (4.0 - a) * (32.0 / 9.0) / (4.0 * alpha0 * bigR ** (4.0 - a) * m_estimate)
            okH = beta1_emp > thresh
            detail = (f"u f exp(-alpha0 u^2) at u_max is {beta1_emp:.4g}; "
                      f"threshold (4-a)A/(4 alpha0 R^(4-a) M) = {thresh:.4g}")
        else:
            okH = beta1_emp > 0
            detail = (f"u f exp(-alpha0 u^2) at u_max is {beta1_emp:.4g}; "
                      "no plateau-growth estimate supplied, checked positivity only")
        checks.append(HypothesisCheck(
            "exp_lower_bound", okH, {"beta1_empirical": beta1_emp}, detail,
        ))

    return ValidationReport(checks=checks, sampled_range=(-u_max, u_max))


# -- level bound ---------------------------------------------------------------

def level_bound(a: float, alpha0: float, bigA: float = 32.0 / 9.0) -> float:
    """Critical-level ceiling ((4-a)/8) * A / alpha0."""
    _check_a(a)
    if alpha0 <= 0:
        raise ValueError("alpha0 must be positive")
    return (4.0 - a) / 8.0 * bigA / alpha0


# -- mountain pass ---------------------------------------------------------------

@dataclass
class SolveOptions:
    tol: float = 1e-6
    max_deform_iters: int = 2000
    path_points: int = 32
    t_max: float = 1e12
    armijo: float = 1e-4
    triviality_floor: float = 1e-6
    newton_polish: bool = True
    newton_switch: float = 1e-1      # relative residual at which polish may start
    newton_max_iters: int = 60
    redistribute_every: int = 10
    seed: int = 0


@dataclass
class MountainPassState:
    levelEstimate: float
    maximizerIndex: int
    gradResidual: float
    history: list[tuple[int, float, float, float]]   # iteration, level, residual, norm
    converged: bool
    geometry_failure: bool = False
    newton_iterations: int = 0
    e_scale: float = 0.0
    message: str = ""
    pathPoints: list = dc_field(default_factory=list)   # final deformed path (arrays)


class GeometryFailure(RuntimeError):
    """No descent endpoint with negative energy exists along the seed ray."""


def default_bump(domain: GridDomain) -> GridField:
    """Smooth positive clamped bump, the seed direction for the ray search."""
    X, Y, T = domain.coords()
    Lx, Ly, Lt = domain.extents
    prof = ((1 - (X / Lx) ** 2) * (1 - (Y / Ly) ** 2) * (1 - (T / Lt) ** 2))
    vals = np.clip(prof, 0.0, None) ** 2
    vals = np.where(domain.free_mask(), vals, 0.0)
    return GridField(domain, vals)


def find_descent_endpoint(nl: NonlinearitySpec, a: float, domain: GridDomain,
                          t_max: float, u0: GridField | None = None) -> tuple[GridField, float]:
    """Find e = t u0 with J(e) < 0 along a normalized positive ray.

    t doubles until the energy goes negative; it is then bisected down so the
    positive ridge J > 0 sits well inside the segment [0, e] rather than in
    its first sliver, which keeps a uniform path discretization meaningful.
    """
    seed = u0 if u0 is not None else default_bump(domain)
    nrm = np.sqrt(dirichlet_energy(seed))
    if nrm == 0.0:
        raise GeometryFailure("seed direction has zero norm")
    seed = seed * (1.0 / nrm)

    t = 1.0
    while t <= t_max and energy(seed * t, nl, a) >= 0.0:
        t *= 2.0
    if t > t_max:
        raise GeometryFailure(
            f"energy stayed nonnegative along the seed ray up to t = {t_max:g}"
        )
    # shrink toward the sign change: keep the smallest dyadic negative scale
    while t > 1e-8:
        if energy(seed * (t / 2.0), nl, a) < 0.0:
            t /= 2.0
        else:
            break
    t *= 1.5   # margin past the zero crossing so J(e) is strictly negative
    if energy(seed * t, nl, a) >= 0.0:
        t = 2.0 * t / 1.5
    return seed * t, t


def _interp_path(points: list[np.ndarray], n_out: int) -> list[np.ndarray]:
    """Arclength re-interpolation of a polyline of fields (flat arrays)."""
    seg = np.array([np.sqrt(np.sum((points[i + 1] - points[i]) ** 2))
                    for i in range(len(points) - 1)])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    if cum[-1] == 0.0:
        return [points[0].copy() for _ in range(n_out)]
    targets = np.linspace(0.0, cum[-1], n_out)
    out = []
    j = 0
    for s in targets:
        while j < len(seg) - 1 and cum[j + 1] < s:
            j += 1
        denom = seg[j] if seg[j] > 0 else 1.0
        w = (s - cum[j]) / denom
        out.append((1 - w) * points[j] + w * points[j + 1])
    return out


def mountain_pass_solve(nl: NonlinearitySpec, a: float, domain: GridDomain,
                        opts: SolveOptions | None = None,
                        warm_start: GridField | None = None) -> tuple[GridField, MountainPassState]:
    """Saddle search by path deformation with optional Newton polish.

    Builds a segment from 0 to a negative-energy endpoint (doubling along a
    positive bump, or along the warm start), then repeatedly takes an Armijo
    backtracking descent step at the path maximizer and re-inserts it,
    redistributing the path by arclength when spacing degenerates.  The
    recorded level estimate (max of J over the path) is non-increasing by
    construction.  Once the maximizer's residual is small the solver may
    switch to damped Newton on the stationarity system to reach tight
    tolerances; the deformation level history is left untouched by polish.
    """
    opts = opts or SolveOptions()
    P = opts.path_points
    dom = domain

    try:
        e_field, t_scale = find_descent_endpoint(nl, a, dom, opts.t_max, warm_start)
    except GeometryFailure as exc:
        state = MountainPassState(
            levelEstimate=np.nan, maximizerIndex=-1, gradResidual=np.inf,
            history=[], converged=False, geometry_failure=True, message=str(exc),
        )
        return zeros(dom), state

    e = e_field.values
    path = [s * e for s in np.linspace(0.0, 1.0, P)]
    history: list[tuple[int, float, float, float]] = []

    def J_of(vals):
        return energy(GridField(dom, vals), nl, a)

    def grad_of(vals):
        return grad_energy(GridField(dom, vals), nl, a).values

    vol = dom.cell_volume

    def l2(vals):
        return np.sqrt(float(np.sum(vals * vals)) * vol)

    Js = [J_of(p) for p in path]
    level = max(Js)          # running best certified path maximum
    step = 1.0
    res = np.inf
    istar = int(np.argmax(Js[1:-1])) + 1
    converged = False
    stall = 0
    switch = opts.newton_switch

    for it in range(1, opts.max_deform_iters + 1):
        istar = int(np.argmax(Js[1:-1])) + 1
        u = path[istar]
        g = grad_of(u)
        gnorm2 = float(np.sum(g * g)) * vol
        gnorm = np.sqrt(gnorm2)
        res = gnorm
        unorm = np.sqrt(dirichlet_energy(GridField(dom, u)))
        level = min(level, max(Js))
        history.append((it, level, res, unorm))
        if res <= opts.tol * max(1.0, unorm):
            converged = True
            break
        if opts.newton_polish and res <= switch * max(1.0, unorm):
            polished, pres, its, ok = _newton_polish(u, nl, a, dom, opts, history)
            pnorm = np.sqrt(dirichlet_energy(GridField(dom, polished)))
            if ok and pnorm > opts.triviality_floor and J_of(polished) > 0.0:
                u, res, converged = polished, pres, True
                path[istar] = polished
                Js[istar] = J_of(polished)
                return _finish(GridField(dom, u), nl, a, istar, level, res,
                               history, converged, its, t_scale, opts, path)
            # polish fell into the wrong basin: keep deforming, arm it later
            switch *= 0.25
            stall = 0

        # Armijo backtracking along -grad, displacement capped by the local
        # path spacing so the maximizer cannot be thrown off the ridge
        seg = max(l2(path[istar + 1] - u), l2(path[istar - 1] - u), 1e-300)
        s_cap = 0.5 * seg / max(l2(g), 1e-300)
        Ju = Js[istar]
        s = min(step, s_cap)
        accepted = False
        for _ in range(60):
            trial = u - s * g
            Jt = J_of(trial)
            if Jt <= Ju - opts.armijo * s * gnorm2:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            stall += 1
            step *= 0.25   # retry the maximizer from a shorter trust step
            if stall >= 5:
                break
            continue
        stall = 0
        step = min(s * 2.0, 1e6)
        path[istar] = trial
        Js[istar] = Jt
        # arclength re-spacing keeps the ridge sampled; the certified level is
        # a running minimum, so an interpolation bump cannot corrupt it
        if it % opts.redistribute_every == 0:
            candidate = _interp_path(path, P)
            candidate[0] = path[0]
            candidate[-1] = path[-1]
            path = candidate
            Js = [J_of(p) for p in candidate]

    istar = int(np.argmax(Js[1:-1])) + 1
    u = path[istar]
    newton_its = 0
    if not converged and opts.newton_polish:
        polished, pres, newton_its, ok = _newton_polish(u, nl, a, dom, opts, history)
        pnorm = np.sqrt(dirichlet_energy(GridField(dom, polished)))
        if ok and pnorm > opts.triviality_floor and J_of(polished) > 0.0:
            u, res, converged = polished, pres, True

    return _finish(GridField(dom, u), nl, a, istar, level, res, history,
                   converged, newton_its, t_scale, opts, path)


def _finish(uf: GridField, nl, a, istar, level, res, history, converged,
            newton_its, t_scale, opts, path=None) -> tuple[GridField, MountainPassState]:
    unorm = np.sqrt(dirichlet_energy(uf))
    nontrivial = unorm > opts.triviality_floor
    state = MountainPassState(
        levelEstimate=level,
        maximizerIndex=istar,
        gradResidual=res,
        history=history,
        converged=bool(converged and nontrivial),
        geometry_failure=False,
        newton_iterations=newton_its,
        e_scale=t_scale,
        message="" if converged else "descent stagnated; returning best iterate",
        pathPoints=list(path) if path is not None else [],
    )
    if converged and not nontrivial:
        state.message = "converged to the trivial state below the triviality floor"
    return uf, state


def _newton_polish(u0: Array, nl: NonlinearitySpec, a: float, dom: GridDomain,
                   opts: SolveOptions, history: list) -> tuple[Array, float, int, bool]:
    """Damped Newton on  L^2 u = w f(u)  from the deformation iterate.

    The linearization L^2 - w f'(u) is symmetric but indefinite at a saddle;
    steps are computed with MINRES on free cells.
    """
    from scipy.sparse.linalg import LinearOperator, minres

    free = dom.free_mask()
    nfree = int(free.sum())
    X, Y, T = dom.coords()
    w = dom.singular_weight(a)
    vol = dom.cell_volume

    def residual(uvals):
        LLu = sublaplacian(sublaplacian(GridField(dom, uvals))).values
        r = LLu - w * nl.f(X, Y, T, uvals)
        return np.where(free, r, 0.0)

    def res_norm(r):
        return float(np.sqrt(np.sum(r * r) * vol))

    u = u0.copy()
    r = residual(u)
    rn = res_norm(r)
    level = history[-1][1] if history else np.nan
    it = 0
    for it in range(1, opts.newton_max_iters + 1):
        unorm = np.sqrt(dirichlet_energy(GridField(dom, u)))
        if rn <= opts.tol * max(1.0, unorm):
            return u, rn, it - 1, True

        fp = nl.fprime(X, Y, T, u)

        def jac_mv(x):
            v = np.zeros(dom.shape)
            v[free] = x
            LLv = sublaplacian(sublaplacian(GridField(dom, v))).values
            out = LLv - w * fp * v
            return out[free]

        op = LinearOperator((nfree, nfree), matvec=jac_mv)
        rhs = -r[free]
        delta, info = minres(op, rhs, rtol=1e-10, maxiter=4000)
        if info != 0 and not np.isfinite(delta).all():
            break
        # damped update with residual-decrease backtracking
        s = 1.0
        improved = False
        for _ in range(30):
            trial = u.copy()
            trial[free] += s * delta
            rt = residual(trial)
            rtn = res_norm(rt)
            if rtn < rn:
                u, r, rn = trial, rt, rtn
                improved = True
                break
            s *= 0.5
        unorm = np.sqrt(dirichlet_energy(GridField(dom, u)))
        history.append((history[-1][0] + 1 if history else 1, level, rn, unorm))
        if not improved:
            break
    unorm = np.sqrt(dirichlet_energy(GridField(dom, u)))
    return u, rn, it, rn <= opts.tol * max(1.0, unorm)


# -- continuation --------------------------------------------------------------

@dataclass
class ContinuationStep:
    n: int
    a: float
    solution: GridField
    state: MountainPassState
    norm: float
    diff_from_previous: float
    weighted_uf: float    # int f(xi,u) u / rho^a
    weighted_F: float     # int F(xi,u) / rho^a


def critical_continuation(nl: NonlinearitySpec, nmax: int, domain: GridDomain,
                          opts: SolveOptions | None = None) -> list[ContinuationStep]:
    """Approach the borderline potential through a_n = 4 - 1/n.

    Each stage solves the subcritical problem at a_n, warm-starting the path
    from the previous solution; diagnostics record the solution drift and the
    weighted superlinearity integrals, which stay bounded along the family.
    Any stage failure aborts with the steps obtained so far.
    """
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    opts = opts or SolveOptions()
    steps: list[ContinuationStep] = []
    prev: GridField | None = None
    X, Y, T = domain.coords()
    for n in range(1, nmax + 1):
        a_n = 4.0 - 1.0 / n
        u, state = mountain_pass_solve(nl, a_n, domain, opts, warm_start=prev)
        if not state.converged:
            steps.append(_continuation_step(n, a_n, u, state, prev, nl, X, Y, T))
            break
        steps.append(_continuation_step(n, a_n, u, state, prev, nl, X, Y, T))
        prev = u
    return steps


def tail_differences_decreasing(steps: list[ContinuationStep], window: int = 3) -> bool:
    """True when the last `window` solution drifts ||u_{n+1} - u_n|| decrease."""
    diffs = [s.diff_from_previous for s in steps if np.isfinite(s.diff_from_previous)]
    if len(diffs) < window:
        return False
    tail = diffs[-window:]
    return all(tail[i + 1] < tail[i] for i in range(len(tail) - 1))


def _continuation_step(n, a_n, u, state, prev, nl, X, Y, T) -> ContinuationStep:
    dom = u.domain
    fu = GridField(dom, nl.f(X, Y, T, u.values) * u.values)
    Fu = GridField(dom, nl.bigF(X, Y, T, u.values))
    diff = np.nan
    if prev is not None:
        diff = np.sqrt(dirichlet_energy(u - prev))
    return ContinuationStep(
        n=n, a=a_n, solution=u, state=state,
        norm=np.sqrt(dirichlet_energy(u)),
        diff_from_previous=diff,
        weighted_uf=integrate_weighted(fu, a_n),
        weighted_F=integrate_weighted(Fu, a_n),
    )
