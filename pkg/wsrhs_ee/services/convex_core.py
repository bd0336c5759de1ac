"""
Convex Optimization Core for WsRHS Energy Efficiency.

This module provides the convex engines the solvers are built on:

- concave objective terms with analytic gradients and Hessians,
- a log-barrier interior-point method over sets defined by linear, convex
  quadratic and linear-matrix-inequality constraints, with a phase-1 search,
- Dinkelbach's algorithm for concave-over-convex ratios,
- a determinant maximizer over Hermitian matrices with trace and LMI constraints,
- a concave maximizer over complex vectors under convex quadratic constraints.

Complex variables are handled in real-composite form: a complex vector q maps
to x = [Re q; Im q] and a Hermitian matrix to its coordinates in
``HermitianBasis``.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from wsrhs_ee.models.report import SolveReport, SolverOptions, Termination
from wsrhs_ee.services.numerics import normalize_phase
from wsrhs_ee.utils.arrays import PSD_TOL, hermitian_part
from wsrhs_ee.utils.errors import DimensionError, DomainError, InfeasibleError, NotPSDError

logger = logging.getLogger(__name__)

LOG2E = 1.0 / math.log(2.0)

# Newton centering
NEWTON_TOL = 1e-10  # half squared Newton decrement ending a centering step
ARMIJO_ALPHA = 0.25
BACKTRACK_BETA = 0.5
MIN_STEP = 1e-16
QUADRATIC_REGION = 0.25  # squared decrement below which the full step is taken


# Real-composite helpers

def to_real(q: np.ndarray) -> np.ndarray:
    """Complex vector to [Re q; Im q]."""
    q = np.asarray(q, dtype=complex).ravel()
    return np.concatenate([q.real, q.imag])


def to_complex(x: np.ndarray) -> np.ndarray:
    """Inverse of ``to_real``."""
    n = x.size // 2
    return x[:n] + 1j * x[n:]


def real_block(a: np.ndarray) -> np.ndarray:
    """Real symmetric matrix P with qᴴAq = xᵀPx for Hermitian A."""
    a = hermitian_part(np.asarray(a, dtype=complex))
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


class HermitianBasis:
    """
    Real coordinates of d × d Hermitian matrices.

    Coordinates are ordered as the d diagonal entries, then the real parts
    of the upper triangle, then its imaginary parts (row-major pairs i < j).
    """

    def __init__(self, d: int):
        self.d = d
        self.rows, self.cols = np.triu_indices(d, k=1)
        self.n_pairs = self.rows.size
        self.size = d + 2 * self.n_pairs

    def matrix(self, x: np.ndarray) -> np.ndarray:
        """Hermitian matrix with coordinates x."""
        d, p = self.d, self.n_pairs
        out = np.diag(x[:d].astype(complex))
        upper = x[d : d + p] + 1j * x[d + p :]
        out[self.rows, self.cols] = upper
        out[self.cols, self.rows] = upper.conj()
        return out

    def vector(self, X: np.ndarray) -> np.ndarray:
        """Coordinates of a Hermitian matrix."""
        X = np.asarray(X, dtype=complex)
        upper = X[self.rows, self.cols]
        return np.concatenate([np.diag(X).real, upper.real, upper.imag])

    def trace_coefficients(self, D: np.ndarray) -> np.ndarray:
        """Vector c with tr(D X) = cᵀx for Hermitian X."""
        D = np.asarray(D, dtype=complex)
        dij = D[self.rows, self.cols]
        dji = D[self.cols, self.rows]
        return np.concatenate([np.diag(D).real, (dij + dji).real, dij.imag - dji.imag])

    def combine(self, units: np.ndarray) -> np.ndarray:
        """
        Images of the basis matrices under a linear map.

        Args:
            units: Array whose [i, j] entry is the image of e_i e_jᵀ

        Returns:
            Array of shape (size, ...) stacking the images of the basis matrices
        """
        idx = np.arange(self.d)
        diag = units[idx, idx]
        uij = units[self.rows, self.cols]
        uji = units[self.cols, self.rows]
        return np.concatenate([diag, uij + uji, 1j * (uij - uji)], axis=0)

    def basis_matrices(self) -> np.ndarray:
        """All basis matrices, shape (size, d, d)."""
        eye = np.eye(self.d, dtype=complex)
        units = np.einsum("ia,jb->ijab", eye, eye)
        return self.combine(units)


class AffineHermitianMap:
    """F(x) = F₀ + Σ_k x_k F_k with Hermitian F₀, F_k."""

    def __init__(self, constant: np.ndarray, coefficients: np.ndarray):
        self.constant = np.asarray(constant, dtype=complex)
        self.coefficients = np.asarray(coefficients, dtype=complex)
        if self.coefficients.ndim != 3 or self.coefficients.shape[1:] != self.constant.shape:
            raise DimensionError(
                f"coefficient stack {self.coefficients.shape} does not match constant {self.constant.shape}"
            )

    @property
    def dim(self) -> int:
        return self.coefficients.shape[0]

    @property
    def size(self) -> int:
        return self.constant.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.constant + np.tensordot(x, self.coefficients, axes=1)

    def padded(self, dim: int, offset: int = 0) -> "AffineHermitianMap":
        """Same map embedded in a larger variable, its variables starting at ``offset``."""
        coeffs = np.zeros((dim,) + self.constant.shape, dtype=complex)
        coeffs[offset : offset + self.dim] = self.coefficients
        return AffineHermitianMap(self.constant, coeffs)


def _logdet_derivatives(fmap: AffineHermitianMap, x: np.ndarray) -> Optional[Tuple[float, np.ndarray, np.ndarray]]:
    """Natural log det F(x), its gradient and Hessian; None if F(x) is not positive definite."""
    try:
        factor = scipy.linalg.cholesky(hermitian_part(fmap(x)), lower=True)
    except np.linalg.LinAlgError:
        return None
    value = 2.0 * float(np.sum(np.log(np.real(np.diag(factor)))))
    n, d = fmap.dim, fmap.size
    linv = scipy.linalg.solve_triangular(factor, np.eye(d), lower=True)
    k = linv[None, :, :] @ fmap.coefficients @ linv.conj().T[None, :, :]
    grad = np.real(np.trace(k, axis1=1, axis2=2))
    v = k.reshape(n, d * d)
    hess = -np.real(v @ v.conj().T)
    return value, grad, hess


# Objective terms. Each exposes evaluate(x) -> (f, g, H) and value(x), the latter -inf off-domain.

class Affine:
    """f(x) = cᵀx + c₀."""

    def __init__(self, c: np.ndarray, c0: float = 0.0):
        self.c = np.asarray(c, dtype=float)
        self.c0 = float(c0)

    def value(self, x: np.ndarray) -> float:
        return float(self.c @ x) + self.c0

    def evaluate(self, x: np.ndarray):
        return self.value(x), self.c, np.zeros((x.size, x.size))


class Quadratic:
    """f(x) = xᵀPx + cᵀx + c₀."""

    def __init__(self, P: np.ndarray, c: Optional[np.ndarray] = None, c0: float = 0.0):
        self.P = 0.5 * (np.asarray(P, dtype=float) + np.asarray(P, dtype=float).T)
        self.c = np.zeros(self.P.shape[0]) if c is None else np.asarray(c, dtype=float)
        self.c0 = float(c0)

    def value(self, x: np.ndarray) -> float:
        return float(x @ self.P @ x + self.c @ x) + self.c0

    def evaluate(self, x: np.ndarray):
        return self.value(x), 2.0 * self.P @ x + self.c, 2.0 * self.P


class LogAffine:
    """f(x) = scale·ln(aᵀx + a₀); scale = 1/ln 2 gives log₂."""

    def __init__(self, a: np.ndarray, a0: float, scale: float = LOG2E):
        self.a = np.asarray(a, dtype=float)
        self.a0 = float(a0)
        self.scale = scale

    def value(self, x: np.ndarray) -> float:
        s = float(self.a @ x) + self.a0
        return self.scale * math.log(s) if s > 0 else -math.inf

    def evaluate(self, x: np.ndarray):
        s = float(self.a @ x) + self.a0
        if not s > 0:
            raise DomainError("log argument left its domain")
        return self.scale * math.log(s), self.scale * self.a / s, -self.scale * np.outer(self.a, self.a) / s**2


class LogDet:
    """f(x) = scale·ln det F(x) for an affine Hermitian map F."""

    def __init__(self, fmap: AffineHermitianMap, scale: float = LOG2E):
        self.fmap = fmap
        self.scale = scale

    def value(self, x: np.ndarray) -> float:
        try:
            factor = scipy.linalg.cholesky(hermitian_part(self.fmap(x)), lower=True)
        except np.linalg.LinAlgError:
            return -math.inf
        return self.scale * 2.0 * float(np.sum(np.log(np.real(np.diag(factor)))))

    def evaluate(self, x: np.ndarray):
        out = _logdet_derivatives(self.fmap, x)
        if out is None:
            raise DomainError("log-det argument is not positive definite")
        value, grad, hess = out
        return self.scale * value, self.scale * grad, self.scale * hess


class SeparableLog:
    """f(x) = scale·Σ ln(1 + g_i x_i)."""

    def __init__(self, gains: np.ndarray, scale: float = LOG2E):
        self.gains = np.asarray(gains, dtype=float)
        self.scale = scale

    def value(self, x: np.ndarray) -> float:
        s = 1.0 + self.gains * x
        return self.scale * float(np.sum(np.log(s))) if np.all(s > 0) else -math.inf

    def evaluate(self, x: np.ndarray):
        s = 1.0 + self.gains * x
        if not np.all(s > 0):
            raise DomainError("log argument left its domain")
        grad = self.scale * self.gains / s
        hess = np.diag(-self.scale * self.gains**2 / s**2)
        return self.scale * float(np.sum(np.log(s))), grad, hess


class Combination:
    """Weighted sum Σ w_i f_i of terms."""

    def __init__(self, parts: Sequence[Tuple[float, object]]):
        self.parts = [(float(w), term) for w, term in parts if w != 0.0]

    def value(self, x: np.ndarray) -> float:
        total = 0.0
        for w, term in self.parts:
            v = term.value(x)
            if not math.isfinite(v):
                return -math.inf
            total += w * v
        return total

    def evaluate(self, x: np.ndarray):
        f, g, h = 0.0, np.zeros(x.size), np.zeros((x.size, x.size))
        for w, term in self.parts:
            fi, gi, hi = term.evaluate(x)
            f += w * fi
            g = g + w * gi
            h = h + w * hi
        return f, g, h


# Feasible sets and the barrier method

def _newton_direction(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Solve hess·dx = −grad, regularizing a numerically singular Hessian."""
    hess = 0.5 * (hess + hess.T)
    scale = max(float(np.max(np.abs(np.diag(hess)))), 1e-300)
    for ridge in (0.0, 1e-14, 1e-10):
        try:
            cf = scipy.linalg.cho_factor(hess + ridge * scale * np.eye(hess.shape[0]), lower=True)
            return scipy.linalg.cho_solve(cf, -grad)
        except np.linalg.LinAlgError:
            continue
    return np.linalg.lstsq(hess, -grad, rcond=None)[0]


class FeasibleSet:
    """
    Convex set {x : Ax ≤ b, xᵀP_k x + c_kᵀx + d_k ≤ 0, F_j(x) ⪰ 0} in R^dim.

    Each quadratic needs P_k ⪰ 0. Linear rows and quadratics are normalized
    internally; ``residuals`` reports the values of the constraints as given.
    """

    def __init__(
        self,
        dim: int,
        linear: Optional[Tuple[np.ndarray, np.ndarray]] = None,
        quadratics: Optional[Sequence[Tuple[np.ndarray, np.ndarray, float]]] = None,
        lmis: Optional[Sequence[AffineHermitianMap]] = None,
    ):
        self.dim = dim
        if linear is not None and len(linear[1]):
            a = np.atleast_2d(np.asarray(linear[0], dtype=float))
            b = np.asarray(linear[1], dtype=float).ravel()
            if a.shape != (b.size, dim):
                raise DimensionError(f"linear constraints must be {b.size}x{dim}, got {a.shape}")
            norms = np.linalg.norm(a, axis=1)
            norms[norms == 0] = 1.0
            self.A_raw, self.b_raw = a, b
            self.A, self.b = a / norms[:, None], b / norms
        else:
            self.A_raw = self.A = np.zeros((0, dim))
            self.b_raw = self.b = np.zeros(0)

        self.quadratics_raw = []
        self.quadratics = []
        for P, c, d in quadratics or []:
            P = 0.5 * (np.asarray(P, dtype=float) + np.asarray(P, dtype=float).T)
            c = np.asarray(c, dtype=float)
            if P.shape != (dim, dim) or c.shape != (dim,):
                raise DimensionError(f"quadratic constraint does not match dimension {dim}")
            scale = max(float(np.linalg.norm(P, 2)), float(np.linalg.norm(c)), abs(float(d)), 1e-300)
            self.quadratics_raw.append((P, c, float(d)))
            self.quadratics.append((P / scale, c / scale, float(d) / scale))

        self.lmis = list(lmis or [])
        for fmap in self.lmis:
            if fmap.dim != dim:
                raise DimensionError(f"LMI acts on {fmap.dim} variables, set has {dim}")

    @property
    def barrier_weight(self) -> int:
        """Barrier parameter m: the duality gap at parameter t is at most m/t."""
        return self.A.shape[0] + len(self.quadratics) + sum(f.size for f in self.lmis)

    def residuals(self, x: np.ndarray) -> List[float]:
        """Constraint values, nonpositive when feasible; −λ_min(F) for each LMI."""
        out = list(self.A_raw @ x - self.b_raw)
        out += [float(x @ P @ x + c @ x + d) for P, c, d in self.quadratics_raw]
        for fmap in self.lmis:
            out.append(-float(np.linalg.eigvalsh(hermitian_part(fmap(x)))[0]))
        return out

    def is_strictly_feasible(self, x: np.ndarray) -> bool:
        return math.isfinite(self.barrier_value(x))

    def barrier_value(self, x: np.ndarray) -> float:
        """Log-barrier φ(x), +inf outside the interior."""
        phi = 0.0
        if self.A.shape[0]:
            s = self.b - self.A @ x
            if np.any(s <= 0):
                return math.inf
            phi -= float(np.sum(np.log(s)))
        for P, c, d in self.quadratics:
            r = -float(x @ P @ x + c @ x + d)
            if r <= 0:
                return math.inf
            phi -= math.log(r)
        for fmap in self.lmis:
            try:
                factor = scipy.linalg.cholesky(hermitian_part(fmap(x)), lower=True)
            except np.linalg.LinAlgError:
                return math.inf
            phi -= 2.0 * float(np.sum(np.log(np.real(np.diag(factor)))))
        return phi

    def barrier(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        """Log-barrier value, gradient and Hessian at an interior point."""
        phi, g, h = 0.0, np.zeros(self.dim), np.zeros((self.dim, self.dim))
        if self.A.shape[0]:
            s = self.b - self.A @ x
            phi -= float(np.sum(np.log(s)))
            g += self.A.T @ (1.0 / s)
            h += (self.A.T / s**2) @ self.A
        for P, c, d in self.quadratics:
            r = -float(x @ P @ x + c @ x + d)
            dq = 2.0 * P @ x + c
            phi -= math.log(r)
            g += dq / r
            h += 2.0 * P / r + np.outer(dq, dq) / r**2
        for fmap in self.lmis:
            out = _logdet_derivatives(fmap, x)
            if out is None:
                raise DomainError("barrier evaluated outside the interior")
            phi -= out[0]
            g -= out[1]
            h -= out[2]
        return phi, g, h

    def _center(self, objective, x: np.ndarray, t: float, opts: SolverOptions) -> Tuple[np.ndarray, int]:
        """Newton centering: minimize −t·f + φ from an interior x."""
        steps = 0
        for _ in range(opts.max_newton_iters):
            f, gf, hf = objective.evaluate(x)
            phi, gp, hp = self.barrier(x)
            grad = -t * gf + gp
            dx = _newton_direction(-t * hf + hp, grad)
            dec2 = float(-grad @ dx)
            if dec2 / 2.0 <= NEWTON_TOL:
                break
            psi0 = -t * f + phi
            step = 1.0
            accepted = False
            while step > MIN_STEP:
                xn = x + step * dx
                phin = self.barrier_value(xn)
                fn = objective.value(xn)
                if math.isfinite(phin) and math.isfinite(fn):
                    if dec2 < QUADRATIC_REGION or -t * fn + phin <= psi0 - ARMIJO_ALPHA * step * dec2:
                        accepted = True
                        break
                step *= BACKTRACK_BETA
            if not accepted:
                break
            x = xn
            steps += 1
        return x, steps

    def maximize(
        self,
        objective,
        x0: np.ndarray,
        opts: SolverOptions,
        stop: Optional[Callable[[np.ndarray], bool]] = None,
    ) -> Tuple[np.ndarray, float, int]:
        """
        Maximize a concave objective over the set by the barrier method.

        Args:
            objective: Concave term with ``evaluate`` and ``value``
            x0: Start point; found by ``find_interior`` when not strictly feasible
            opts: Solver options (barrier_mu, inner_tol, iteration caps)
            stop: Optional predicate checked after each centering

        Returns:
            Tuple of (x, duality-gap bound m/t, Newton steps)
        """
        x = np.asarray(x0, dtype=float).copy()
        if not self.is_strictly_feasible(x):
            x = self.find_interior(x, opts)
        if not math.isfinite(objective.value(x)):
            raise DomainError("objective is undefined at the start point")

        m = self.barrier_weight
        if m == 0:
            x, steps = self._center(objective, x, 1.0, opts)
            return x, 0.0, steps

        t, total = 1.0, 0
        for _ in range(opts.max_barrier_stages):
            x, steps = self._center(objective, x, t, opts)
            total += steps
            if stop is not None and stop(x):
                break
            if m / t <= opts.inner_tol:
                break
            t *= opts.barrier_mu
        return x, m / t, total

    def find_interior(self, x0: np.ndarray, opts: SolverOptions) -> np.ndarray:
        """
        Phase 1: a strictly feasible point near ``x0``.

        Solves max −s over (x, s) with every constraint relaxed by s and s ≥ −1,
        stopping as soon as the original set is strictly feasible.

        Raises:
            InfeasibleError: if the set has no interior
        """
        x0 = np.asarray(x0, dtype=float)
        n = self.dim
        worst = max([0.0] + self._normalized_violations(x0))
        s0 = worst + 1.0

        lin_a = np.hstack([self.A, -np.ones((self.A.shape[0], 1))])
        lin_a = np.vstack([lin_a, np.concatenate([np.zeros(n), [-1.0]])])
        lin_b = np.concatenate([self.b, [1.0]])
        quads = []
        for P, c, d in self.quadratics:
            Pa = np.zeros((n + 1, n + 1))
            Pa[:n, :n] = P
            quads.append((Pa, np.concatenate([c, [-1.0]]), d))
        lmis = []
        for fmap in self.lmis:
            coeffs = np.concatenate([fmap.coefficients, np.eye(fmap.size, dtype=complex)[None]], axis=0)
            lmis.append(AffineHermitianMap(fmap.constant, coeffs))
        phase1 = FeasibleSet(n + 1, (lin_a, lin_b), quads, lmis)

        y0 = np.concatenate([x0, [s0]])
        objective = Affine(np.concatenate([np.zeros(n), [-1.0]]))
        y, _, _ = phase1.maximize(objective, y0, opts, stop=lambda y: y[-1] < 0 and self.is_strictly_feasible(y[:n]))
        x = y[:n]
        if not self.is_strictly_feasible(x):
            raise InfeasibleError(f"constraint set has no strictly feasible point (phase-1 level {y[-1]:.3e})")
        logger.debug(f"Phase 1 found an interior point at level {y[-1]:.3e}")
        return x

    def _normalized_violations(self, x: np.ndarray) -> List[float]:
        out = list(self.A @ x - self.b)
        out += [float(x @ P @ x + c @ x + d) for P, c, d in self.quadratics]
        for fmap in self.lmis:
            out.append(-float(np.linalg.eigvalsh(hermitian_part(fmap(x)))[0]))
        return out


# Dinkelbach

def dinkelbach(
    numerator,
    denominator,
    feasible_set: FeasibleSet,
    x0: np.ndarray,
    opts: Optional[SolverOptions] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """
    Maximize numerator/denominator over a convex set.

    Iterates η ← num(x)/den(x) and x ← argmax num − η·den until the auxiliary
    optimum F(η) drops to obj_tol.

    Args:
        numerator: Concave term
        denominator: Convex term, positive on the set
        feasible_set: The feasible set
        x0: Start point
        opts: Solver options

    Returns:
        Tuple of (best x, SolveReport) with the ratio trace and |F(η)| as certificate
    """
    opts = opts or SolverOptions()
    x = np.asarray(x0, dtype=float).copy()
    if not feasible_set.is_strictly_feasible(x):
        try:
            x = feasible_set.find_interior(x, opts)
        except InfeasibleError:
            return x, SolveReport([], 0, Termination.INFEASIBLE)

    def ratio(point: np.ndarray) -> float:
        den = denominator.value(point)
        if not den > 0:
            raise DomainError(f"denominator must stay positive, got {den}")
        return numerator.value(point) / den

    eta = ratio(x)
    report = SolveReport([eta], 0, Termination.MAX_ITERS)
    for it in range(1, opts.max_dinkelbach_iters + 1):
        inner = Combination([(1.0, numerator), (-eta, denominator)])
        x_new, gap, _ = feasible_set.maximize(inner, x, opts)
        f_val = numerator.value(x_new) - eta * denominator.value(x_new)
        eta_new = ratio(x_new)
        report.iterations = it
        report.certificate = abs(f_val)
        report.kkt_residual = gap
        if eta_new >= eta:
            x, eta = x_new, eta_new
        report.objective_trace.append(eta)
        logger.debug(f"Dinkelbach iteration {it}: η = {eta:.12g}, F(η) = {f_val:.3e}")
        if f_val <= opts.obj_tol:
            report.termination = Termination.CONVERGED
            break
    report.constraint_residuals = feasible_set.residuals(x)
    return x, report


# Determinant maximization

class MaxDetProblem:
    """
    log₂|I + Σ (w_m/σ²) R_m Γ̃ R_mᴴ| over Hermitian Γ̃ with linear trace constraints.

    Without a link the set also requires Γ̃ ⪰ 0. With an anchor γ₀ the variable
    is (Γ̃, γ) with [[Γ̃, γ],[γᴴ, 1]] ⪰ 0 and tr Γ̃ + ‖γ₀‖² − 2Re{γ₀ᴴγ} ≤ 0.
    """

    def __init__(
        self,
        terms: Sequence[Tuple[float, np.ndarray]],
        trace_constraints: Sequence[Tuple[np.ndarray, float]],
        size: int,
        sigma2: float = 1.0,
        anchor: Optional[np.ndarray] = None,
    ):
        self.basis = HermitianBasis(size)
        self.size = size
        self.anchor = None if anchor is None else np.asarray(anchor, dtype=complex).ravel()
        nb = self.basis.size
        self.dim = nb + (0 if self.anchor is None else 2 * size)

        weights = np.array([max(float(w), 0.0) for w, _ in terms])
        maps = [np.asarray(r, dtype=complex) for _, r in terms]
        out_dim = maps[0].shape[0] if maps else 1
        if maps:
            stack = np.stack(maps)
            if stack.shape[2] != size:
                raise DimensionError(f"maps act on {stack.shape[2]} elements, variable has {size}")
            units = np.einsum("m,mai,mbj->ijab", weights / sigma2, stack, stack.conj())
            coeffs = self.basis.combine(units)
        else:
            coeffs = np.zeros((nb, out_dim, out_dim), dtype=complex)
        self.objective_map = AffineHermitianMap(np.eye(out_dim, dtype=complex), coeffs).padded(self.dim)
        self.objective = LogDet(self.objective_map)

        rows, bounds = [], []
        for D, b in trace_constraints:
            row = np.zeros(self.dim)
            row[:nb] = self.basis.trace_coefficients(D)
            rows.append(row)
            bounds.append(float(b))
        lmis = []
        if self.anchor is None:
            lmis.append(AffineHermitianMap(np.zeros((size, size), dtype=complex), self.basis.basis_matrices()))
        else:
            lmis.append(self._schur_map())
            cap = np.zeros(self.dim)
            cap[:nb] = self.basis.trace_coefficients(np.eye(size))
            cap[nb:] = -2.0 * to_real(self.anchor)
            rows.append(cap)
            bounds.append(-float(np.vdot(self.anchor, self.anchor).real))
        linear = (np.array(rows), np.array(bounds)) if rows else None
        self.feasible_set = FeasibleSet(self.dim, linear, None, lmis)

    def _schur_map(self) -> AffineHermitianMap:
        size, nb = self.size, self.basis.size
        constant = np.zeros((size + 1, size + 1), dtype=complex)
        constant[size, size] = 1.0
        coeffs = np.zeros((self.dim, size + 1, size + 1), dtype=complex)
        coeffs[:nb, :size, :size] = self.basis.basis_matrices()
        for k in range(size):
            coeffs[nb + k, k, size] = 1.0
            coeffs[nb + k, size, k] = 1.0
            coeffs[nb + size + k, k, size] = 1j
            coeffs[nb + size + k, size, k] = -1j
        return AffineHermitianMap(constant, coeffs)

    def split(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(Γ̃, γ) from a point; γ is the principal factor of Γ̃ when unlinked."""
        nb = self.basis.size
        gamma_mat = self.basis.matrix(x[:nb])
        if self.anchor is not None:
            return gamma_mat, to_complex(x[nb:])
        return gamma_mat, rank_one_factor(gamma_mat)

    def point(self, gamma_mat: np.ndarray, gamma: Optional[np.ndarray] = None) -> np.ndarray:
        x = self.basis.vector(gamma_mat)
        if self.anchor is not None:
            x = np.concatenate([x, to_real(gamma if gamma is not None else self.anchor)])
        return x

    def default_start(self, trace_constraints: Sequence[Tuple[np.ndarray, float]]) -> np.ndarray:
        """Scaled identity inside every positive trace bound."""
        scale = 1.0
        for D, b in trace_constraints:
            tr = float(np.trace(np.asarray(D)).real)
            if tr > 0 and b > 0:
                scale = min(scale, 0.5 * b / tr)
        return self.point(scale * np.eye(self.size))


def rank_one_factor(gamma_mat: np.ndarray, align: Optional[np.ndarray] = None) -> np.ndarray:
    """
    √λ₁·u₁ of a Hermitian PSD matrix.

    Args:
        gamma_mat: Hermitian matrix
        align: Optional vector; the global phase then maximizes Re{alignᴴγ}

    Returns:
        The principal factor
    """
    w, v = np.linalg.eigh(hermitian_part(gamma_mat))
    vec = normalize_phase(v[:, -1]) * math.sqrt(max(float(w[-1]), 0.0))
    if align is not None:
        inner = np.vdot(align, vec)
        if abs(inner) > 0:
            vec = vec * np.exp(-1j * np.angle(inner))
    return vec


def rank_ratio(gamma_mat: np.ndarray) -> float:
    """λ₂/λ₁ of a Hermitian PSD matrix (0 for 1 × 1 or zero matrices)."""
    w = np.linalg.eigvalsh(hermitian_part(gamma_mat))[::-1]
    if w.size < 2 or w[0] <= 0:
        return 0.0
    return float(max(w[1], 0.0) / w[0])


def solve_maxdet(
    terms: Sequence[Tuple[float, np.ndarray]],
    trace_constraints: Sequence[Tuple[np.ndarray, float]],
    lmi_link: Optional[np.ndarray] = None,
    opts: Optional[SolverOptions] = None,
    sigma2: float = 1.0,
    start: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, SolveReport]:
    """
    Maximize log₂|I + Σ (w_m/σ²) R_m Γ̃ R_mᴴ| subject to tr(D_k Γ̃) ≤ b_k.

    Args:
        terms: Pairs (w_m ≥ 0, R_m) with R_m of shape d × M
        trace_constraints: Pairs (D_k, b_k)
        lmi_link: Optional anchor γ₀ switching on the lifted rank-one constraints
        opts: Solver options
        sigma2: Noise power σ²
        start: Optional start Γ̃

    Returns:
        Tuple of (Γ̃, γ, SolveReport)

    Raises:
        InfeasibleError: if phase 1 fails and no anchor is available
    """
    opts = opts or SolverOptions()
    if lmi_link is None and not terms:
        raise DimensionError("solve_maxdet needs at least one term without an anchor")
    size = np.asarray(terms[0][1]).shape[1] if terms else np.asarray(lmi_link).size
    problem = MaxDetProblem(terms, trace_constraints, size, sigma2, lmi_link)
    fs = problem.feasible_set

    if start is not None:
        x0 = problem.point(np.asarray(start, dtype=complex))
    elif problem.anchor is not None:
        x0 = problem.point(np.outer(problem.anchor, problem.anchor.conj()), problem.anchor)
    else:
        x0 = problem.default_start(trace_constraints)

    report = SolveReport()
    try:
        x, gap, steps = fs.maximize(problem.objective, x0, opts)
    except InfeasibleError:
        if problem.anchor is None:
            raise
        # The lifted set {(γ₀γ₀ᴴ, γ₀)} has no interior; the anchor is its only point.
        x = problem.point(np.outer(problem.anchor, problem.anchor.conj()), problem.anchor)
        trace_rows = [r for r in fs.residuals(x)[: len(trace_constraints)]]
        if any(r > opts.feas_tol * max(1.0, abs(b)) for r, (_, b) in zip(trace_rows, trace_constraints)):
            raise
        report.add_note("lifted feasible set has an empty interior; returned the anchor")
        logger.warning("Lifted max-det set collapses to its anchor")
        gap, steps = 0.0, 0

    gamma_mat, gamma = problem.split(x)
    start_value = problem.objective.value(x0)
    report.objective_trace = ([start_value] if math.isfinite(start_value) else []) + [problem.objective.value(x)]
    report.iterations = steps
    report.kkt_residual = gap
    report.constraint_residuals = fs.residuals(x)
    report.diagnostics["rank_ratio"] = rank_ratio(gamma_mat)
    return gamma_mat, gamma, report


# Concave maximization under convex quadratic constraints

class QuadraticForm:
    """Constraint qᴴAq − 2Re{cᴴq} + d ≤ 0 with A ⪰ 0."""

    def __init__(self, A: np.ndarray, c: Optional[np.ndarray] = None, d: float = 0.0):
        self.A = hermitian_part(np.asarray(A, dtype=complex))
        n = self.A.shape[0]
        self.c = np.zeros(n, dtype=complex) if c is None else np.asarray(c, dtype=complex).ravel()
        self.d = float(d)
        w = np.linalg.eigvalsh(self.A)
        scale = max(float(np.max(np.abs(w))), 1e-300)
        if w[0] < -PSD_TOL * scale:
            raise NotPSDError(f"quadratic constraint matrix is not PSD (λ_min = {w[0]:.3e})")

    def value(self, q: np.ndarray) -> float:
        return float(np.vdot(q, self.A @ q).real - 2.0 * np.vdot(self.c, q).real + self.d)

    def real_form(self) -> Tuple[np.ndarray, np.ndarray, float]:
        """(P, c, d) with the constraint as xᵀPx + cᵀx + d ≤ 0 over x = [Re q; Im q]."""
        return real_block(self.A), -2.0 * to_real(self.c), self.d


def convexify_homogeneous(A: np.ndarray, L: np.ndarray, anchor: np.ndarray) -> Optional[QuadraticForm]:
    """
    Convex inner approximation of qᴴ(A − L)q ≤ 0 tangent at ``anchor``.

    A − L = P⁺ − P⁻ is split by eigen-decomposition and only −qᴴP⁻q is
    linearized: qᴴP⁺q − 2Re{(P⁻q₀)ᴴq} + q₀ᴴP⁻q₀ ≤ 0.

    Returns:
        The convexified constraint, or None when A ⪯ L makes it implied
    """
    A = hermitian_part(np.asarray(A, dtype=complex))
    L = hermitian_part(np.asarray(L, dtype=complex))
    ref = max(float(np.linalg.norm(A, 2)), float(np.linalg.norm(L, 2)))
    w, v = np.linalg.eigh(A - L)
    if ref == 0.0 or w[-1] <= 1e-12 * ref:
        return None
    p_plus = (v * np.clip(w, 0.0, None)) @ v.conj().T
    p_minus = (v * np.clip(-w, 0.0, None)) @ v.conj().T
    anchor = np.asarray(anchor, dtype=complex).ravel()
    c = p_minus @ anchor
    return QuadraticForm(p_plus, c, float(np.vdot(anchor, c).real))


def quadratic_feasible_set(
    n: int,
    quad_constraints: Sequence[QuadraticForm],
    ball_radius: Optional[float] = None,
    linear_constraints: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    lmis: Optional[Sequence[AffineHermitianMap]] = None,
) -> FeasibleSet:
    """
    Real-composite FeasibleSet for complex constraints on q ∈ Cⁿ.

    Args:
        n: Complex dimension
        quad_constraints: QuadraticForm constraints
        ball_radius: Optional radius r of ‖q‖ ≤ r
        linear_constraints: Optional (A, b) already in real-composite form
        lmis: Optional LMIs over the real-composite variable

    Returns:
        FeasibleSet over x = [Re q; Im q]
    """
    quads = [qf.real_form() for qf in quad_constraints]
    if ball_radius is not None:
        quads.append((np.eye(2 * n), np.zeros(2 * n), -float(ball_radius) ** 2))
    return FeasibleSet(2 * n, linear_constraints, quads, lmis)


def solve_concave_quadratic(
    objective,
    quad_constraints: Sequence[QuadraticForm],
    ball_radius: Optional[float] = None,
    opts: Optional[SolverOptions] = None,
    start: Optional[np.ndarray] = None,
    linear_constraints: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    lmis: Optional[Sequence[AffineHermitianMap]] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """
    Maximize a concave objective over complex q with ‖q‖ ≤ r and convex quadratics.

    Args:
        objective: Concave term over x = [Re q; Im q]
        quad_constraints: QuadraticForm constraints with PSD matrices
        ball_radius: Radius r, or None for no ball
        opts: Solver options
        start: Optional complex start vector (default 0)
        linear_constraints: Optional real-composite (A, b)
        lmis: Optional LMIs, e.g. the domain of a log-det objective

    Returns:
        Tuple of (q, SolveReport)
    """
    opts = opts or SolverOptions()
    if quad_constraints:
        n = quad_constraints[0].A.shape[0]
    elif start is not None:
        n = np.asarray(start).size
    else:
        raise DimensionError("cannot infer the variable dimension; pass a start vector")
    fs = quadratic_feasible_set(n, quad_constraints, ball_radius, linear_constraints, lmis)
    x0 = to_real(np.zeros(n) if start is None else start)

    report = SolveReport()
    try:
        x, gap, steps = fs.maximize(objective, x0, opts)
    except InfeasibleError:
        report.termination = Termination.INFEASIBLE
        return to_complex(x0), report
    start_value = objective.value(x0)
    report.objective_trace = ([start_value] if math.isfinite(start_value) else []) + [objective.value(x)]
    report.iterations = steps
    report.kkt_residual = gap
    report.constraint_residuals = fs.residuals(x)
    return to_complex(x), report


def complex_linear(c: np.ndarray, c0: float = 0.0) -> Affine:
    """Affine term 2Re{cᴴq} + c₀ over x = [Re q; Im q]."""
    return Affine(2.0 * to_real(np.asarray(c, dtype=complex)), c0)
