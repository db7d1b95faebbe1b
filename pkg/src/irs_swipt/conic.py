"""Standard-form conic problems: linear objective over complex Hermitian PSD
blocks plus scalars, with linear (in)equality constraints. Covers the two
shapes this package generates (epigraph SDPs and power LPs) behind a single
``solve`` contract, so the backend is swappable.

Backends: cvxopt's conelp interior-point method (default; the problem is
encoded on the dual side so the KKT system stays as small as the constraint
count), with a direct SCS fallback for instances conelp rejects.

Complex Hermitian blocks are handled through the real symmetric embedding
``E(X) = [[Re X, -Im X], [Im X, Re X]]``; traces carry the documented factor
2: tr(E(A) E(X)) = 2 tr(A X).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_HERM_TOL = 1e-12


class InvalidProblem(ValueError):
    """Malformed conic problem (dimension mismatch, non-Hermitian data, ...)."""


@dataclass
class Functional:
    """Real-valued linear functional: sum_b tr(A_b X_b) + sum_s c_s u_s.

    ``blocks`` maps block index -> Hermitian coefficient matrix;
    ``scalars`` maps scalar index -> real coefficient.
    """

    blocks: dict[int, np.ndarray] = field(default_factory=dict)
    scalars: dict[int, float] = field(default_factory=dict)


@dataclass
class Constraint:
    f: Functional
    rel: str       # '<=', '>=', '=='
    rhs: float


@dataclass
class ConicProblem:
    """maximize objective s.t. constraints, X_b >= 0 (PSD), flagged scalars >= 0."""

    psd_dims: tuple[int, ...]
    scalar_nonneg: tuple[bool, ...]
    objective: Functional
    constraints: list[Constraint]

    @property
    def n_scalars(self) -> int:
        return len(self.scalar_nonneg)

    def validate(self) -> None:
        if not self.constraints:
            raise InvalidProblem("problem has no constraints")
        for con in [Constraint(self.objective, ">=", 0.0)] + list(self.constraints):
            if con.rel not in ("<=", ">=", "=="):
                raise InvalidProblem(f"bad relation {con.rel!r}")
            for b, A in con.f.blocks.items():
                if not (0 <= b < len(self.psd_dims)):
                    raise InvalidProblem(f"block index {b} out of range")
                n = self.psd_dims[b]
                if A.shape != (n, n):
                    raise InvalidProblem(f"block {b} coefficient has shape {A.shape}, want ({n},{n})")
                scale = max(1.0, float(np.abs(A).max()))
                if np.abs(A - A.conj().T).max() > _HERM_TOL * scale:
                    raise InvalidProblem(f"block {b} coefficient is not Hermitian")
            for s in con.f.scalars:
                if not (0 <= s < self.n_scalars):
                    raise InvalidProblem(f"scalar index {s} out of range")


@dataclass
class ConicSolution:
    blocks: list[np.ndarray]
    scalars: list[float]
    objective: float
    status: str          # 'optimal' | 'infeasible' | 'unbounded' | 'inaccurate'
    gap: float
    backend: str = ""


# --- complex <-> real embedding --------------------------------------------

def embed_hermitian(A: np.ndarray) -> np.ndarray:
    """Hermitian n x n -> real symmetric 2n x 2n; tr(E(A)E(X)) = 2 tr(A X)."""
    R, I = A.real, A.imag
    return np.block([[R, -I], [I, R]])


def unembed_hermitian(Y: np.ndarray) -> np.ndarray:
    """Inverse of embed_hermitian, averaging over the embedding's symmetry so
    any real symmetric PSD Y maps to a Hermitian PSD matrix with the same
    inner products against embedded coefficients."""
    n = Y.shape[0] // 2
    R = (Y[:n, :n] + Y[n:, n:]) / 2.0
    I = (Y[n:, :n] - Y[:n, n:]) / 2.0
    X = R + 1j * I
    return (X + X.conj().T) / 2.0


def rank_of(X: np.ndarray, rank_eig_tol: float = 1e-6) -> int:
    """Numerical rank of a (near-)PSD Hermitian matrix: eigenvalues above
    rank_eig_tol * lambda_max count; an all-nonpositive spectrum has rank 0."""
    if X.size == 0:
        return 0
    w = np.linalg.eigvalsh((X + X.conj().T) / 2.0)
    lam_max = float(w[-1])
    if lam_max <= 0.0:
        return 0
    return int(np.sum(w > rank_eig_tol * lam_max))


# --- equilibration -----------------------------------------------------------

def _coef_magnitudes(p: ConicProblem):
    """(m x (n_scalars + n_blocks)) matrix of max-abs coefficients."""
    m = len(p.constraints)
    nb = len(p.psd_dims)
    mag = np.zeros((m, p.n_scalars + nb))
    for c, con in enumerate(p.constraints):
        for s, v in con.f.scalars.items():
            mag[c, s] = abs(v)
        for b, A in con.f.blocks.items():
            mag[c, p.n_scalars + b] = np.abs(A).max()
    return mag


def _equilibrate(p: ConicProblem, iters: int = 4):
    """Ruiz-style row/column scaling on coefficient magnitudes. Returns
    (row_scale[m], item_scale[n_scalars + n_blocks], obj_scale)."""
    mag = _coef_magnitudes(p)
    m, n = mag.shape
    row = np.ones(m)    # constraint multipliers: scaled coef = v * row / col
    col = np.ones(n)    # variable divisors (u_solver = col * u)
    work = mag.copy()
    for _ in range(iters):
        r = np.sqrt(work.max(axis=1))
        r[r == 0] = 1.0
        work /= r[:, None]
        row /= r
        c = np.sqrt(work.max(axis=0))
        c[c == 0] = 1.0
        work /= c[None, :]
        col *= c
    obj_mag = [abs(v) / col[s] for s, v in p.objective.scalars.items()]
    obj_mag += [np.abs(A).max() / col[p.n_scalars + b] for b, A in p.objective.blocks.items()]
    obj_scale = max(obj_mag) if obj_mag else 1.0
    if obj_scale == 0:
        obj_scale = 1.0
    return row, col, obj_scale


# --- cvxopt conelp backend ---------------------------------------------------

def _solve_conelp(p: ConicProblem, tol: float, row, col, obj_scale) -> ConicSolution:
    """Encode the (maximize) problem as the conelp dual: conelp's x dimension
    equals our constraint count, so the interior-point Schur system stays tiny
    even for large PSD blocks."""
    from cvxopt import matrix, solvers

    m = len(p.constraints)
    S = p.n_scalars
    nonneg_idx = [s for s in range(S) if p.scalar_nonneg[s]]
    free_idx = [s for s in range(S) if not p.scalar_nonneg[s]]
    pos_in_l = {s: k for k, s in enumerate(nonneg_idx)}
    pos_in_y = {s: k for k, s in enumerate(free_idx)}
    ineq_rows = [c for c, con in enumerate(p.constraints) if con.rel != "=="]
    slack_pos = {c: len(nonneg_idx) + k for k, c in enumerate(ineq_rows)}

    nl = len(nonneg_idx) + len(ineq_rows)
    dims_s = [2 * n for n in p.psd_dims]
    mat_off = np.concatenate(([0], np.cumsum([d * d for d in dims_s]))).astype(int) + nl
    nz = nl + sum(d * d for d in dims_s)
    pfree = len(free_idx)

    # G' rows = our constraints; columns = cone variable z = (l-block, mats)
    Gt = np.zeros((m, nz))
    At = np.zeros((m, pfree))
    cx = np.zeros(m)
    for c, con in enumerate(p.constraints):
        rs = row[c]
        for s, v in con.f.scalars.items():
            coef = v * rs / col[s]
            if p.scalar_nonneg[s]:
                Gt[c, pos_in_l[s]] += coef
            else:
                At[c, pos_in_y[s]] += coef
        for b, A in con.f.blocks.items():
            scaled = A * (rs / col[S + b])
            Gt[c, mat_off[b]:mat_off[b + 1]] += 0.5 * embed_hermitian(scaled).flatten(order="F")
        if con.rel == ">=":
            Gt[c, slack_pos[c]] = -1.0
        elif con.rel == "<=":
            Gt[c, slack_pos[c]] = 1.0
        cx[c] = -con.rhs * rs

    h = np.zeros(nz)
    for s, v in p.objective.scalars.items():
        if p.scalar_nonneg[s]:
            h[pos_in_l[s]] = -v / col[s] / obj_scale
    for b, A in p.objective.blocks.items():
        h[mat_off[b]:mat_off[b + 1]] = -0.5 * embed_hermitian(A / col[S + b] / obj_scale).flatten(order="F")
    bvec = np.array([-p.objective.scalars.get(s, 0.0) / col[s] / obj_scale for s in free_idx])

    # Stopping rules chosen so the *unscaled* duality gap meets the contract
    # gap <= tol*(1+|objective|): the absolute part maps through obj_scale,
    # the relative part is scale-invariant.
    opts = {
        "show_progress": False,
        "abstol": max(tol * 1e-6, 1e-13),   # near-floor: the relative gap governs
        "reltol": max(tol * 0.1, 1e-12),
        "feastol": max(tol * 1e-2, 1e-9),
        "maxiters": 200,
    }
    kwargs = {}
    if pfree:
        kwargs["A"] = matrix(At.T.copy())
        kwargs["b"] = matrix(bvec)
    sol = solvers.conelp(
        matrix(cx), matrix(Gt.T.copy()), matrix(h),
        dims={"l": nl, "q": [], "s": dims_s},
        options=opts, **kwargs,
    )

    status_map = {
        "optimal": "optimal",
        "dual infeasible": "infeasible",   # our problem is conelp's dual
        "primal infeasible": "unbounded",
        "unknown": "inaccurate",
    }
    status = status_map.get(sol["status"], "inaccurate")
    if status in ("infeasible", "unbounded"):
        return ConicSolution([], [], float("nan"), status, float("inf"), "conelp")

    z = np.asarray(sol["z"]).ravel()
    y = np.asarray(sol["y"]).ravel() if pfree else np.zeros(0)
    scalars = np.zeros(S)
    for s in range(S):
        raw = z[pos_in_l[s]] if p.scalar_nonneg[s] else y[pos_in_y[s]]
        scalars[s] = raw / col[s]
    blocks = []
    for b, n in enumerate(p.psd_dims):
        d = 2 * n
        Y = z[mat_off[b]:mat_off[b + 1]].reshape((d, d), order="F")
        blocks.append(unembed_hermitian((Y + Y.T) / 2.0) / col[S + b])

    objective = float(sol["dual objective"]) * obj_scale
    gap = abs(float(sol["gap"])) * obj_scale
    meets_contract = gap <= tol * (1.0 + abs(objective))
    if status == "optimal" and not meets_contract:
        status = "inaccurate"
    elif status == "inaccurate" and meets_contract:
        # stopped at maxiters but the final iterate satisfies the contract
        resid = max(float(sol["primal infeasibility"] or 0.0),
                    float(sol["dual infeasibility"] or 0.0))
        if resid <= 1e-6:
            status = "optimal"
    return ConicSolution(blocks, list(scalars), objective, status, gap, "conelp")


# --- LP fast path (no PSD blocks) --------------------------------------------

def _solve_lp(p: ConicProblem, tol: float, row, col, obj_scale) -> ConicSolution:
    """Pure-LP problems go to scipy's HiGHS simplex; the duality gap is
    reconstructed from the returned marginals (positive homogeneity of the LP
    value in rhs and bounds)."""
    from scipy.optimize import linprog

    S = p.n_scalars
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for c, con in enumerate(p.constraints):
        coefs = np.zeros(S)
        for s, v in con.f.scalars.items():
            coefs[s] = v * row[c] / col[s]
        rhs = con.rhs * row[c]
        if con.rel == "==":
            A_eq.append(coefs)
            b_eq.append(rhs)
        elif con.rel == "<=":
            A_ub.append(coefs)
            b_ub.append(rhs)
        else:
            A_ub.append(-coefs)
            b_ub.append(-rhs)
    cvec = np.zeros(S)
    for s, v in p.objective.scalars.items():
        cvec[s] = -v / col[s] / obj_scale
    bounds = [(0.0, None) if nn else (None, None) for nn in p.scalar_nonneg]
    res = linprog(
        cvec,
        A_ub=np.array(A_ub) if A_ub else None, b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None, b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds, method="highs",
    )
    if res.status == 2:
        return ConicSolution([], [], float("nan"), "infeasible", float("inf"), "highs")
    if res.status == 3:
        return ConicSolution([], [], float("nan"), "unbounded", float("inf"), "highs")
    if res.status != 0 or res.x is None:
        return ConicSolution([], [], float("nan"), "inaccurate", float("inf"), "highs")
    scalars = [res.x[s] / col[s] for s in range(S)]
    objective = -float(res.fun) * obj_scale
    dual = 0.0
    if A_ub:
        dual += float(np.dot(b_ub, res.ineqlin.marginals))
    if A_eq:
        dual += float(np.dot(b_eq, res.eqlin.marginals))
    lo = np.array([b[0] if b[0] is not None else 0.0 for b in bounds])
    dual += float(np.dot(lo, res.lower.marginals))
    gap = abs(float(res.fun) - dual) * obj_scale   # both in min convention
    status = "optimal" if gap <= tol * (1.0 + abs(objective)) else "inaccurate"
    return ConicSolution([], scalars, objective, status, gap, "highs")


# --- SCS fallback backend ----------------------------------------------------

def _scs_tri_indices(d: int):
    """Column-major lower-triangle index pairs, the packing SCS expects."""
    iu, ju = np.triu_indices(d)
    return ju, iu   # transpose of row-major upper == column-major lower


def _svec_lower(B: np.ndarray) -> np.ndarray:
    """SCS packing: lower-triangular columns, off-diagonals * sqrt(2); an
    isometry for the Frobenius inner product."""
    idx_i, idx_j = _scs_tri_indices(B.shape[0])
    v = B[idx_i, idx_j].copy()
    v[idx_i != idx_j] *= np.sqrt(2.0)
    return v


def _unsvec_lower(v: np.ndarray, d: int) -> np.ndarray:
    Y = np.zeros((d, d))
    idx_i, idx_j = _scs_tri_indices(d)
    vals = v.copy()
    vals[idx_i != idx_j] /= np.sqrt(2.0)
    Y[idx_i, idx_j] = vals
    Y[idx_j, idx_i] = vals
    return Y


def _solve_scs(p: ConicProblem, tol: float, row, col, obj_scale) -> ConicSolution:
    import scipy.sparse as sp
    import scs

    S = p.n_scalars
    dims_s = [2 * n for n in p.psd_dims]
    tri = [d * (d + 1) // 2 for d in dims_s]
    var_off = np.concatenate(([0], np.cumsum(tri))).astype(int) + S
    nx = S + sum(tri)

    eq_rows, ge_rows, le_rows = [], [], []
    for c, con in enumerate(p.constraints):
        (eq_rows if con.rel == "==" else ge_rows if con.rel == ">=" else le_rows).append(c)

    def row_coeffs(c):
        con = p.constraints[c]
        out = np.zeros(nx)
        for s, v in con.f.scalars.items():
            out[s] = v * row[c] / col[s]
        for b, A in con.f.blocks.items():
            scaled = A * (row[c] / col[S + b])
            out[var_off[b]:var_off[b + 1]] = 0.5 * _svec_lower(embed_hermitian(scaled))
        return out

    A_rows, b_vals = [], []
    for c in eq_rows:
        A_rows.append(row_coeffs(c))
        b_vals.append(p.constraints[c].rhs * row[c])
    for c in ge_rows:
        A_rows.append(-row_coeffs(c))
        b_vals.append(-p.constraints[c].rhs * row[c])
    for c in le_rows:
        A_rows.append(row_coeffs(c))
        b_vals.append(p.constraints[c].rhs * row[c])
    n_pos = len(ge_rows) + len(le_rows)
    for s in range(S):
        if p.scalar_nonneg[s]:
            r = np.zeros(nx)
            r[s] = -1.0
            A_rows.append(r)
            b_vals.append(0.0)
            n_pos += 1
    A_dense = np.vstack(A_rows) if A_rows else np.zeros((0, nx))
    psd_block = -sp.eye(nx - S, format="csc")
    A = sp.vstack(
        [sp.csc_matrix(A_dense), sp.hstack([sp.csc_matrix((nx - S, S)), psd_block])],
        format="csc",
    )
    b = np.concatenate([b_vals, np.zeros(nx - S)])

    cvec = np.zeros(nx)
    for s, v in p.objective.scalars.items():
        cvec[s] = -v / col[s] / obj_scale
    for b_i, A_obj in p.objective.blocks.items():
        cvec[var_off[b_i]:var_off[b_i + 1]] = -0.5 * _svec_lower(
            embed_hermitian(A_obj / col[S + b_i] / obj_scale))

    cone = {"z": len(eq_rows), "l": n_pos, "s": dims_s}
    solver = scs.SCS(
        dict(A=A, b=b, c=cvec), cone,
        eps_abs=tol * 0.1, eps_rel=tol * 0.1, max_iters=200_000, verbose=False,
    )
    out = solver.solve()
    info = out["info"]
    raw_status = info["status"]
    if "infeasible" in raw_status:
        return ConicSolution([], [], float("nan"), "infeasible", float("inf"), "scs")
    if "unbounded" in raw_status:
        return ConicSolution([], [], float("nan"), "unbounded", float("inf"), "scs")
    status = "optimal" if raw_status == "solved" else "inaccurate"

    x = out["x"]
    scalars = [x[s] / col[s] for s in range(S)]
    blocks = []
    for b_i, n in enumerate(p.psd_dims):
        Y = _unsvec_lower(x[var_off[b_i]:var_off[b_i + 1]], 2 * n)
        blocks.append(unembed_hermitian(Y) / col[S + b_i])
    objective = -float(info["pobj"]) * obj_scale
    gap = abs(float(info["pobj"]) - float(info["dobj"])) * obj_scale
    if status == "optimal" and gap > tol * (1.0 + abs(objective)):
        status = "inaccurate"
    return ConicSolution(blocks, scalars, objective, status, gap, "scs")


def solve(p: ConicProblem, tol: float = 1e-7) -> ConicSolution:
    """Solve to duality gap <= tol*(1+|objective|). Infeasible/unbounded and
    inaccurate outcomes are reported in the status, not raised; a malformed
    problem raises InvalidProblem. Deterministic for identical input."""
    p.validate()
    row, col, obj_scale = _equilibrate(p)
    if not p.psd_dims:
        try:
            lp_sol = _solve_lp(p, tol, row, col, obj_scale)
            if lp_sol.status != "inaccurate":
                return lp_sol
        except Exception:
            pass
    try:
        sol = _solve_conelp(p, tol, row, col, obj_scale)
        if sol.status != "inaccurate":
            return sol
    except (ValueError, ZeroDivisionError, ArithmeticError):
        sol = None
    try:
        scs_sol = _solve_scs(p, tol, row, col, obj_scale)
    except Exception:
        scs_sol = None
    if scs_sol is not None and scs_sol.status == "optimal":
        return scs_sol
    if sol is not None:
        # conelp's near-solution beats a first-order infeasibility verdict
        return sol
    return scs_sol or ConicSolution([], [], float("nan"), "inaccurate", float("inf"), "none")


def dump_problem(p: ConicProblem, path: str) -> None:
    """Write a problem in a plain sparse text format for cross-checking:
    header lines (psd_dims / scalars / nonneg flags), then one line per
    objective or constraint entry:
        obj  block <b> <i> <j> <re> <im>   |  obj  scalar <s> <v>
        con <c> <rel> <rhs>  followed by its entries in the same style.
    Only the lower triangle of Hermitian coefficients is stored.
    """
    with open(path, "w") as f:
        f.write(f"psd_dims {' '.join(map(str, p.psd_dims))}\n")
        f.write(f"scalars {p.n_scalars}\n")
        f.write(f"nonneg {' '.join('1' if b else '0' for b in p.scalar_nonneg)}\n")

        def emit(tag, fun: Functional):
            for s, v in sorted(fun.scalars.items()):
                f.write(f"{tag} scalar {s} {v!r}\n")
            for b, A in sorted(fun.blocks.items()):
                for i in range(A.shape[0]):
                    for j in range(i + 1):
                        if A[i, j] != 0:
                            f.write(f"{tag} block {b} {i} {j} {A[i, j].real!r} {A[i, j].imag!r}\n")

        emit("obj", p.objective)
        for c, con in enumerate(p.constraints):
            f.write(f"con {c} {con.rel} {con.rhs!r}\n")
            emit(f"con{c}", con.f)
