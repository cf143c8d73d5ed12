"""Pseudo-arclength continuation with event detection and branch switching.

A point on a branch is ``y = (u, mu)``. Distances use the weighted inner product

    <a, b>_w = xi / N * a_u . b_u + (1 - xi) * a_mu * b_mu,

with ``N`` the state dimension, so ``ds`` does not grow with the mesh. Every
converged point gets the exact tangent from the bordered matrix

    E(r) = [[G_u, G_mu], [W r]],      E t = e_{N+1},

whose LU also yields sign(det E): it flips at simple branch points but not at
folds, which makes it the branch-point indicator (signs only, so no overflow).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConvergenceFailure,
    DegenerateKernel,
    DomainError,
    InvalidParameter,
    NoConvergence,
    SingularJacobian,
    SingularMatrix,
    StartNotConverged,
    StepCollapse,
    SwitchFailed,
)
from .linalg_kernels import DENSE_EIG_LIMIT, Which, factor_general, generalized_eigs, near_null_vector
from .models import ModelSpec

log = logging.getLogger(__name__)

UNSTABLE_TOL = 1e-8
COMPLEX_TOL = 1e-6
ALL_DETECT = ("folds", "branch_points", "hopf")


class Event(str, enum.Enum):
    REGULAR = "Regular"
    FOLD = "Fold"
    BRANCH_POINT = "BranchPoint"
    HOPF = "Hopf"


@dataclass(frozen=True)
class ContinuationSettings:
    ds0: float = 0.01
    ds_min: float = 1e-5
    ds_max: float = 0.1
    xi: float = 0.5
    newton_tol: float = 1e-8
    newton_max_iter: int = 10
    max_steps: int = 400
    mu_range: tuple = (-math.inf, math.inf)
    detect: tuple = ALL_DETECT
    bisection_tol: float = 1e-6
    bisection_max: int = 40
    # stop once this many branch points were found on the branch (0: never)
    stop_after_branch_points: int = 0
    # largest accepted angle (radians, weighted metric) between consecutive tangents
    max_turn: float = 0.3
    # stop at a branch point that coincides with a fold to within this distance
    # in mu and norm2, where a snake reconnects (0: never)
    reconnect_tol: float = 0.0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise InvalidParameter("; ".join(problems))
        object.__setattr__(self, "mu_range", (float(self.mu_range[0]), float(self.mu_range[1])))
        object.__setattr__(self, "detect", tuple(self.detect))

    def problems(self) -> list:
        out = []
        if not (0 < self.ds_min <= self.ds0 <= self.ds_max):
            out.append("need 0 < ds_min <= ds0 <= ds_max")
        if not (0 < self.xi < 1):
            out.append("xi must lie in (0,1)")
        if not self.newton_tol > 0:
            out.append("newton_tol must be positive")
        if self.newton_max_iter < 1 or self.max_steps < 1 or self.bisection_max < 1:
            out.append("iteration limits must be positive")
        if len(self.mu_range) != 2 or not self.mu_range[0] < self.mu_range[1]:
            out.append("mu_range must be an ordered pair")
        bad = set(self.detect) - set(ALL_DETECT)
        if bad:
            out.append(f"unknown detect flags {sorted(bad)}")
        if not self.bisection_tol > 0:
            out.append("bisection_tol must be positive")
        if not self.reconnect_tol >= 0:
            out.append("reconnect_tol must be non-negative")
        if not (0 < self.max_turn <= math.pi):
            out.append("max_turn must lie in (0, pi]")
        return out

    def with_(self, **kw) -> "ContinuationSettings":
        return replace(self, **kw)


@dataclass
class BranchPointRecord:
    index: int
    mu: float
    u: np.ndarray = field(repr=False)
    norm2: float
    norm8: float
    n_unstable: int
    event: Event
    tangent_mu: float
    step_used: float
    # diagnostics, not persisted in branch CSVs
    tangent: np.ndarray | None = field(default=None, repr=False)
    rightmost: complex = 0j
    n_unstable_complex: int = 0
    det_sign: float = 1.0
    loc_residual: float = 0.0
    low_confidence: bool = False

    @property
    def y(self) -> np.ndarray:
        return np.append(self.u, self.mu)


@dataclass
class Branch:
    model_id: str
    settings: ContinuationSettings
    records: list = field(default_factory=list)
    parent: tuple | None = None
    termination: str = ""
    name: str = ""

    def __len__(self):
        return len(self.records)

    def events(self, kind: Event | str) -> list:
        kind = Event(kind)
        return [r for r in self.records if r.event is kind]

    @property
    def folds(self) -> list:
        return self.events(Event.FOLD)

    @property
    def branch_points(self) -> list:
        return self.events(Event.BRANCH_POINT)

    def fold_width(self) -> float:
        """mu-extent spanned by the fold points (0 with fewer than two)."""
        mus = [r.mu for r in self.folds]
        return max(mus) - min(mus) if len(mus) > 1 else 0.0

    def fold_pairs(self) -> int:
        """Number of complete left/right turn pairs."""
        return len(self.folds) // 2

    def snake_width(self) -> float:
        """mu-extent between the outermost folds of the localized part of a
        snake: the entry and exit folds are dropped when there are at least
        four, since the state there is not localized."""
        mus = [r.mu for r in self.folds]
        if len(mus) >= 4:
            mus = mus[1:-1]
        return max(mus) - min(mus) if len(mus) > 1 else 0.0

    def reindex(self):
        for i, r in enumerate(self.records):
            r.index = i


# --------------------------------------------------------------------------- #
# stability

@dataclass(frozen=True)
class _Spectrum:
    n_unstable: int
    n_unstable_complex: int
    rightmost: complex
    closest_complex: complex | None


def _spectrum(model: ModelSpec, u: np.ndarray, mu: float) -> _Spectrum:
    A = -model.jacobian(u, mu)
    B = model.dyn_mass
    N = A.shape[0]
    if N <= DENSE_EIG_LIMIT or model.name.value != "schnakenberg":
        vals = generalized_eigs(A, B, None, Which.LARGEST_REAL).eigenvalues
    else:
        k = 24
        sigma = 0.0
        while True:
            try:
                vals = generalized_eigs(A, B, k, Which.LARGEST_REAL, sigma=sigma).eigenvalues
            except SingularMatrix:
                if sigma != 0.0:
                    raise
                # u sits on a bifurcation point: A itself is singular, shift off the axis
                sigma = -1e-3
                continue
            # all requested eigenvalues unstable: some may lie outside the window
            if np.count_nonzero(vals.real > UNSTABLE_TOL) < len(vals) - 4 or k >= N // 4:
                break
            k *= 2
    unstable = vals.real > UNSTABLE_TOL
    cplx = np.abs(vals.imag) > COMPLEX_TOL
    rightmost = complex(vals[np.argmax(vals.real)]) if len(vals) else 0j
    closest = None
    if cplx.any():
        c = vals[cplx]
        closest = complex(c[np.argmin(np.abs(c.real))])
    return _Spectrum(int(unstable.sum()), int((unstable & cplx).sum()), rightmost, closest)


def stability(model: ModelSpec, u: np.ndarray, mu: float) -> tuple:
    """(number of eigenvalues with real part > 1e-8, rightmost eigenvalue) of the
    linearization ``B v' = -G_u v``."""
    sp = _spectrum(model, np.asarray(u, dtype=float), float(mu))
    return sp.n_unstable, sp.rightmost


# --------------------------------------------------------------------------- #
# core machinery

@dataclass(frozen=True)
class _Plane:
    """Linear constraint <tau, y - y0>_w = ds."""

    tau: np.ndarray
    y0: np.ndarray
    ds: float


class _Solver:
    def __init__(self, model: ModelSpec, settings: ContinuationSettings):
        self.model = model
        self.st = settings
        self.N = model.size
        self.w = np.full(self.N + 1, settings.xi / self.N)
        self.w[-1] = 1.0 - settings.xi

    # weighted geometry
    def dot(self, a, b) -> float:
        return float(np.dot(self.w * a, b))

    def norm(self, a) -> float:
        return math.sqrt(max(self.dot(a, a), 0.0))

    def unit(self, a):
        n = self.norm(a)
        if n == 0.0:
            raise InvalidParameter("zero direction vector")
        return a / n

    def bordered(self, y, r):
        u, mu = y[:-1], y[-1]
        E = np.empty((self.N + 1, self.N + 1))
        E[:-1, :-1] = self.model.jacobian(u, mu)
        E[:-1, -1] = self.model.dmu(u, mu)
        E[-1] = self.w * r
        return E

    def converged(self, G, u) -> bool:
        return np.linalg.norm(G) <= self.st.newton_tol * (1.0 + np.linalg.norm(u))

    def newton(self, y, plane: _Plane | None):
        """Returns (y, iterations). Raises NoConvergence / SingularJacobian / DomainError."""
        y = np.array(y, dtype=float)
        r0 = None
        for it in range(self.st.newton_max_iter + 1):
            u, mu = y[:-1], y[-1]
            G = self.model.residual(u, mu)
            if not np.all(np.isfinite(G)):
                raise NoConvergence("non-finite residual")
            rn = np.linalg.norm(G)
            p = 0.0 if plane is None else self.dot(plane.tau, y - plane.y0) - plane.ds
            if self.converged(G, u) and abs(p) <= 1e-10 * (1.0 + abs(plane.ds if plane else 0.0)):
                return y, it
            if it == self.st.newton_max_iter:
                break
            r0 = rn if r0 is None else r0
            if rn > 1e8 * (r0 + 1e-300):
                raise NoConvergence(f"Newton diverged (|G| = {rn:.3e})")
            try:
                if plane is None:
                    fact = factor_general(self.model.jacobian(u, mu))
                    y[:-1] -= fact.solve(G)
                else:
                    fact = factor_general(self.bordered(y, plane.tau))
                    y -= fact.solve(np.append(G, p))
            except SingularMatrix as exc:
                raise SingularJacobian(str(exc)) from exc
            if not np.all(np.isfinite(y)):
                raise NoConvergence("non-finite Newton iterate")
        raise NoConvergence(f"no convergence after {self.st.newton_max_iter} iterations (|G| = {rn:.3e})")

    def tangent(self, y, r):
        """Unit tangent with <r, t>_w > 0 and sign(det E(r))."""
        try:
            fact = factor_general(self.bordered(y, r))
        except SingularMatrix as exc:
            raise SingularJacobian(f"bordered Jacobian singular: {exc}") from exc
        rhs = np.zeros(self.N + 1)
        rhs[-1] = 1.0
        t = fact.solve(rhs)
        return self.unit(t), fact.logdet_sign()

    def record(self, y, r, step_used, event=Event.REGULAR, t=None, det_sign=None) -> BranchPointRecord:
        if t is None:
            t, det_sign = self.tangent(y, r)
        u, mu = y[:-1].copy(), float(y[-1])
        sp = _spectrum(self.model, u, mu)
        n2, n8 = self.model.norms(u)
        return BranchPointRecord(
            index=-1, mu=mu, u=u, norm2=n2, norm8=n8, n_unstable=sp.n_unstable, event=event,
            tangent_mu=float(t[-1]), step_used=float(step_used), tangent=t, rightmost=sp.rightmost,
            n_unstable_complex=sp.n_unstable_complex, det_sign=float(det_sign),
        )


# --------------------------------------------------------------------------- #
# event detection

def _flags(a: BranchPointRecord, b: BranchPointRecord, detect) -> dict:
    return {
        "fold": "folds" in detect and np.sign(a.tangent_mu) * np.sign(b.tangent_mu) < 0,
        "bp": "branch_points" in detect and a.det_sign != b.det_sign,
        "hopf": "hopf" in detect and a.n_unstable_complex != b.n_unstable_complex,
    }


def _needs_split(a, b, f) -> bool:
    expected = int(f["fold"]) + int(f["bp"]) + 2 * int(f["hopf"])
    hidden = abs(b.n_unstable - a.n_unstable) > expected
    return hidden or (f["fold"] and f["bp"]) or (f["hopf"] and (f["fold"] or f["bp"]))


class _Segment:
    """Points between two records, parametrized by the arclength offset along
    the step's predictor direction."""

    def __init__(self, solver: _Solver, a: BranchPointRecord, b: BranchPointRecord, tau):
        self.s = solver
        self.a, self.b, self.tau = a, b, tau
        self.ya, self.yb = a.y, b.y
        self.length = solver.dot(tau, self.yb - self.ya)

    def point(self, sig, event=Event.REGULAR):
        frac = sig / self.length
        guess = self.ya + frac * (self.yb - self.ya)
        y, _ = self.s.newton(guess, _Plane(self.tau, self.ya, sig))
        t, det = self.s.tangent(y, self.tau)
        return y, t, det

    def make(self, sig, event=Event.REGULAR):
        y, t, det = self.point(sig)
        return self.s.record(y, self.tau, sig, event, t, det)


def _illinois(f, lo, hi, flo, fhi, tol, max_iter):
    """Root of a continuous f on [lo, hi] with a sign change. Returns (x, fx, ok)."""
    side = 0
    x, fx = lo, flo
    for _ in range(max_iter):
        x = (lo * fhi - hi * flo) / (fhi - flo) if fhi != flo else 0.5 * (lo + hi)
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx) <= tol:
            return x, fx, True
        if np.sign(fx) == np.sign(fhi):
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1
        else:
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5
            side = -1
        if hi - lo <= 1e-14 * max(1.0, abs(hi)):
            break
    return x, fx, abs(fx) <= tol


def _localize(seg: _Segment, kind: str, st: ContinuationSettings) -> BranchPointRecord:
    a, b = seg.a, seg.b
    lo, hi = 0.0, seg.length
    if kind == "fold":
        cache = {}

        def f(sig):
            y, t, det = seg.point(sig)
            cache[sig] = (y, t, det)
            return t[-1]

        sig, val, ok = _illinois(f, lo, hi, a.tangent_mu, b.tangent_mu, st.bisection_tol, st.bisection_max)
        y, t, det = cache.get(sig) or seg.point(sig)
        rec = seg.s.record(y, seg.tau, sig, Event.FOLD, t, det)
        rec.loc_residual = abs(val)
    elif kind == "bp":
        best = None
        for _ in range(st.bisection_max):
            if hi - lo <= st.bisection_tol:
                break
            mid = 0.5 * (lo + hi)
            y, t, det = seg.point(mid)
            if det == a.det_sign:
                lo = mid
            else:
                hi, best = mid, (y, t, det)
        sig = 0.5 * (lo + hi)
        y, t, det = seg.point(sig)
        rec = seg.s.record(y, seg.tau, sig, Event.BRANCH_POINT, t, det)
        rec.loc_residual = hi - lo
        ok = hi - lo <= st.bisection_tol
    else:  # hopf: secant on the real part of the complex pair nearest the axis
        na = a.n_unstable_complex

        def signed(y):
            sp = _spectrum(seg.s.model, y[:-1], y[-1])
            re = abs(sp.closest_complex.real) if sp.closest_complex is not None else 1.0
            return re if sp.n_unstable_complex != na else -re

        cache = {}

        def f(sig):
            y, t, det = seg.point(sig)
            cache[sig] = (y, t, det)
            return signed(y)

        fa, fb = signed(a.y), signed(b.y)
        sig, val, ok = _illinois(f, lo, hi, -abs(fa), abs(fb), st.bisection_tol, st.bisection_max)
        y, t, det = cache.get(sig) or seg.point(sig)
        rec = seg.s.record(y, seg.tau, sig, Event.HOPF, t, det)
        rec.loc_residual = abs(val)
    rec.low_confidence = not ok
    return rec


class _Unresolved(Exception):
    """An event in the step could not be localized; retry with a shorter step."""


def _resolve(seg: _Segment, st: ContinuationSettings, depth: int = 0, strict: bool = False) -> list:
    """Records strictly between seg.a and seg.b (events and any helper points).

    With ``strict`` a failed localization raises _Unresolved instead of
    dropping the event.
    """
    f = _flags(seg.a, seg.b, st.detect)
    if not any(f.values()) and abs(seg.b.n_unstable - seg.a.n_unstable) == 0:
        return []
    if _needs_split(seg.a, seg.b, f) and depth < 5:
        try:
            mid = seg.make(0.5 * seg.length)
        except (NoConvergence, SingularJacobian, DomainError) as exc:
            if strict:
                raise _Unresolved(str(exc)) from exc
            mid = None
        if mid is not None:
            left = _Segment(seg.s, seg.a, mid, seg.tau)
            right_tau = seg.s.unit(seg.b.y - mid.y)
            right = _Segment(seg.s, mid, seg.b, right_tau)
            return _resolve(left, st, depth + 1, strict) + [mid] + _resolve(right, st, depth + 1, strict)
    out = []
    ambiguous = f["fold"] and f["bp"]
    for kind in ("fold", "bp", "hopf"):
        if not f[kind]:
            continue
        try:
            rec = _localize(seg, kind, st)
        except (NoConvergence, SingularJacobian, DomainError, ConvergenceFailure) as exc:
            if strict:
                raise _Unresolved(f"{kind}: {exc}") from exc
            log.warning("localization of %s failed: %s", kind, exc)
            continue
        if ambiguous:
            rec.low_confidence = True
        out.append(rec)
    out.sort(key=lambda r: r.step_used)
    return out


# --------------------------------------------------------------------------- #
# public operations

def newton_correct(model: ModelSpec, u_guess, mu_guess: float, settings: ContinuationSettings | None = None,
                   constraint: tuple | None = None):
    """Newton's method on G(u; mu) = 0.

    Without ``constraint`` mu is frozen. With ``constraint = (tau, y0, ds)`` the
    bordered system adds <tau, (u, mu) - y0>_w = ds and mu is free.
    Returns ``(u, mu, iterations)``.
    """
    st = settings or ContinuationSettings()
    solver = _Solver(model, st)
    y = np.append(np.asarray(u_guess, dtype=float), float(mu_guess))
    if y.shape != (model.size + 1,):
        raise InvalidParameter(f"state has {y.size - 1} entries, model expects {model.size}")
    plane = None if constraint is None else _Plane(np.asarray(constraint[0], float), np.asarray(constraint[1], float), float(constraint[2]))
    y, it = solver.newton(y, plane)
    return y[:-1], float(y[-1]), it


def _reconnects(branch: Branch, ev: BranchPointRecord, tol: float) -> bool:
    """True if ``ev`` is a fold or branch point lying on top of an earlier
    event of the other kind."""
    other = {Event.FOLD: Event.BRANCH_POINT, Event.BRANCH_POINT: Event.FOLD}.get(ev.event)
    if other is None:
        return False
    return any(abs(r.mu - ev.mu) <= tol and abs(r.norm2 - ev.norm2) <= tol
               for r in branch.records[:-1] if r.event is other)


def continue_branch(model: ModelSpec, start, direction: int | np.ndarray = 1,
                    settings: ContinuationSettings | None = None, *, name: str = "", parent=None) -> Branch:
    """Follow the solution curve through ``start = (u, mu)``.

    ``direction`` is +1/-1 (increasing/decreasing mu at the start) or a full
    direction vector in (u, mu) space, e.g. the offset from a branch point.
    On step collapse the partial branch is attached to the StepCollapse error.
    """
    st = settings or ContinuationSettings()
    s = _Solver(model, st)
    u0, mu0 = start
    y = np.append(np.asarray(u0, dtype=float), float(mu0))
    G = model.residual(y[:-1], y[-1])
    if not s.converged(G, y[:-1]):
        try:
            y, _ = s.newton(y, None)
        except (NoConvergence, SingularJacobian, DomainError) as exc:
            raise StartNotConverged(f"start point is not a root: {exc}") from exc

    if np.ndim(direction) == 0:
        r = np.zeros(model.size + 1)
        r[-1] = 1.0 if direction >= 0 else -1.0
    else:
        r = s.unit(np.asarray(direction, dtype=float))
    branch = Branch(model.name.value, st, [], parent, "", name)
    rec = s.record(y, r, 0.0)
    branch.records.append(rec)
    tau = rec.tangent
    ds = st.ds0
    n_bp = 0
    lo, hi = st.mu_range
    cos_turn = math.cos(st.max_turn)

    for _ in range(st.max_steps):
        y_prev = rec.y
        while True:
            # a step may be shortened further only while ds/2 stays admissible
            can_shrink = 0.5 * ds >= st.ds_min
            try:
                y_new, iters = s.newton(y_prev + ds * tau, _Plane(tau, y_prev, ds))
                t_new, det_new = s.tangent(y_new, tau)
                if can_shrink and s.dot(rec.tangent, t_new) < cos_turn:
                    raise _Unresolved(f"tangent turned by {math.acos(max(-1.0, s.dot(rec.tangent, t_new))):.2f} rad")
                new = s.record(y_new, tau, ds, t=t_new, det_sign=det_new)
                inner = _resolve(_Segment(s, rec, new, tau), st, strict=can_shrink)
                break
            except (NoConvergence, SingularJacobian, DomainError, ConvergenceFailure, _Unresolved) as exc:
                log.debug("step ds=%.3e rejected: %s", ds, exc)
                ds *= 0.5
                if ds < st.ds_min:
                    branch.termination = "step_collapse"
                    branch.reindex()
                    err = StepCollapse(f"step size fell below ds_min={st.ds_min:g} at mu={y_prev[-1]:.6g}")
                    err.branch = branch
                    raise err from exc
        stop = ""
        for ev in inner:
            branch.records.append(ev)
            if ev.event is not Event.REGULAR:
                log.info("%s at mu=%.8g (norm2=%.6g)", ev.event.value, ev.mu, ev.norm2)
            if ev.event is Event.BRANCH_POINT:
                n_bp += 1
                if st.stop_after_branch_points and n_bp >= st.stop_after_branch_points:
                    stop = "branch_point"
            if st.reconnect_tol and _reconnects(branch, ev, st.reconnect_tol):
                stop = "reconnection"
            if stop:
                break
        if stop:
            branch.termination = stop
            break
        branch.records.append(new)
        log.debug("step %d: mu=%.6g norm2=%.6g ds=%.3g iters=%d n_unstable=%d",
                  len(branch.records) - 1, new.mu, new.norm2, ds, iters, new.n_unstable)
        secant = new.y - y_prev
        tau = s.unit(secant)
        rec = new
        if iters <= 3:
            ds = min(ds * 1.3, st.ds_max)
        if not (lo <= rec.mu <= hi):
            branch.termination = "mu_range"
            break
    else:
        branch.termination = "max_steps"
    branch.reindex()
    return branch


def detect_and_localize(model: ModelSpec, rec_prev: BranchPointRecord, rec_next: BranchPointRecord,
                        settings: ContinuationSettings | None = None) -> list:
    """Localized events between two consecutive converged records."""
    st = settings or ContinuationSettings()
    s = _Solver(model, st)
    tau = s.unit(rec_next.y - rec_prev.y)
    return [r for r in _resolve(_Segment(s, rec_prev, rec_next, tau), st) if r.event is not Event.REGULAR]


@dataclass(frozen=True)
class SwitchResult:
    u: np.ndarray
    mu: float
    direction: np.ndarray
    kernel: np.ndarray
    attempt: int


def switch_branch(model: ModelSpec, record: BranchPointRecord, amplitude: float = 0.1,
                  settings: ContinuationSettings | None = None) -> SwitchResult:
    """Start point on the branch crossing ``record`` transversally.

    The new direction is the near-null vector of the bordered Jacobian at the
    branch point (the kernel direction orthogonal to the old tangent). A point
    at weighted distance ``amplitude`` along it is corrected with mu free; if
    that fails the opposite sign is tried, then frozen-mu corrections at
    mu +- ds0.
    """
    st = settings or ContinuationSettings()
    s = _Solver(model, st)
    if record.event is not Event.BRANCH_POINT:
        raise SwitchFailed(f"record {record.index} is a {record.event.value} point, not a branch point")
    y_bp = record.y
    t = record.tangent if record.tangent is not None else s.tangent(y_bp, np.eye(model.size + 1)[-1])[0]
    E = s.bordered(y_bp, t)
    try:
        phi = near_null_vector(E)
    except DegenerateKernel as exc:
        raise SwitchFailed(f"kernel at the branch point is not simple: {exc}") from exc
    # remove any residual component along the old tangent, then scale to unit weighted length
    phi = phi - s.dot(phi, t) * t
    phi = s.unit(phi)
    a = float(amplitude)

    attempts = [("plane", a), ("plane", -a), ("frozen", st.ds0), ("frozen", -st.ds0)]
    for i, (kind, val) in enumerate(attempts):
        try:
            if kind == "plane":
                y, _ = s.newton(y_bp + val * phi, _Plane(phi, y_bp, val))
                moved = s.dot(phi, y - y_bp)
            else:
                guess = y_bp + a * phi
                guess[-1] = y_bp[-1] + val
                y, _ = s.newton(guess, None)
                moved = s.dot(phi, y - y_bp)
            # must have left the old branch along the kernel direction
            if abs(moved) < 0.25 * abs(a):
                continue
            d = s.unit(y - y_bp)
            return SwitchResult(y[:-1], float(y[-1]), d, phi, i)
        except (NoConvergence, SingularJacobian, DomainError) as exc:
            log.debug("switch attempt %d failed: %s", i, exc)
    raise SwitchFailed(f"all branch-switching attempts failed at mu={record.mu:.6g}")
