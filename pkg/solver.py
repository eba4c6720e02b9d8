"""
Linear micropolar elastostatics on the vertex grid.

Unknowns are (u, phi) at interior vertices, ordered vertex-lexicographically
and then by component. Boundary vertices carry Dirichlet data, which is
folded into the right-hand side. Writing the strain as
E = sum_k G_k d_k q + G0 q, the balance laws read
sum_j G_j^T d_j (C E) - G0^T C E + F = 0; second derivatives use the compact
3-point and cross stencils, first derivatives the central difference.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import MatrixRankWarning, cg, spsolve

import config
from constitutive import StiffnessOperator, apply_law
from errors import SolverError, ValidationError
from forms import BodyGrid
from kinematics import DisplacementField, infinitesimal_strain
import lie_euclid
from mechanics import LoadState, StressState
from presets import DisplacementPreset

# Configure logging
logger = logging.getLogger(__name__)

METHODS = ("direct", "cg")


def strain_operators() -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns:
        (G, G0) with G of shape (3, 18, 6) mapping d_k q to packed strain and
        G0 of shape (18, 6) the pointwise part [v_i, q], which gives
        eps_ij = -e_ijk phi_k
    """
    G = np.zeros((3, 18, 6))
    G0 = np.zeros((18, 6))
    for i in range(3):
        G[i, 3 * i:3 * i + 3, :3] = np.eye(3)
        G[i, 9 + 3 * i:12 + 3 * i, 3:] = np.eye(3)
        bracket = lie_euclid.ad_matrix(lie_euclid.Motor(np.eye(3)[i], np.zeros(3)))
        G0[3 * i:3 * i + 3] = bracket[:3]
        G0[9 + 3 * i:12 + 3 * i] = bracket[3:]
    return G, G0


@dataclass(eq=False)
class ElastostaticsProblem:
    """Pure Dirichlet problem: boundary values of ``dirichlet`` are imposed, interior values ignored"""

    grid: BodyGrid
    C: StiffnessOperator
    loads: LoadState
    dirichlet: DisplacementField

    def __post_init__(self):
        if self.loads.grid != self.grid or self.dirichlet.grid != self.grid:
            raise ValidationError("Loads and boundary data must live on the problem grid")
        margin = self.C.pd_margin
        if margin <= 0.0:
            raise ValidationError(f"Stiffness is not positive definite (margin {margin:.6e})")


@dataclass(eq=False)
class LinearSystem:
    A: sp.csr_matrix
    b: np.ndarray
    problem: ElastostaticsProblem
    symmetric: bool
    symmetry_defect: float

    @property
    def interior_shape(self) -> Tuple[int, int, int]:
        return tuple(n - 1 for n in self.problem.grid.dims)


@dataclass
class SolveReport:
    method: str
    unknowns: int
    relative_residual: float
    iterations: int
    symmetry_defect: float
    residual_history: List[float] = field(default_factory=list)

    def as_dict(self) -> Dict[str, object]:
        return {
            "method": self.method,
            "unknowns": self.unknowns,
            "relative_residual": self.relative_residual,
            "iterations": self.iterations,
            "symmetry_defect": self.symmetry_defect,
        }


def _stencil(C: np.ndarray, spacing: Sequence[float]) -> Dict[Tuple[int, int, int], np.ndarray]:
    """6x6 coefficient block per neighbour offset of the balance operator"""
    G, G0 = strain_operators()
    K = np.einsum("jAa,AB,kBb->jkab", G, C, G)
    M = np.einsum("jAa,AB,Bb->jab", G, C, G0) - np.einsum("Aa,AB,jBb->jab", G0, C, G)
    Z = -G0.T @ C @ G0
    unit = np.eye(3, dtype=int)
    stencil: Dict[Tuple[int, int, int], np.ndarray] = {(0, 0, 0): Z.copy()}

    def add(offset: np.ndarray, block: np.ndarray) -> None:
        key = tuple(int(o) for o in offset)
        stencil[key] = stencil.get(key, np.zeros((6, 6))) + block

    for j in range(3):
        h = spacing[j]
        stencil[(0, 0, 0)] -= 2.0 * K[j, j] / h ** 2
        add(unit[j], K[j, j] / h ** 2 + M[j] / (2.0 * h))
        add(-unit[j], K[j, j] / h ** 2 - M[j] / (2.0 * h))
        for k in range(j + 1, 3):
            cross = (K[j, k] + K[k, j]) / (4.0 * h * spacing[k])
            for s1 in (1, -1):
                for s2 in (1, -1):
                    add(s1 * unit[j] + s2 * unit[k], s1 * s2 * cross)
    return stencil


def assemble(p: ElastostaticsProblem) -> LinearSystem:
    """
    Sparse system A q = b over the interior unknowns

    A is the negated stencil operator; it is symmetric for hyperelastic C and
    is then symmetrized explicitly, the raw defect being kept for reporting.
    """
    grid = p.grid
    interior = tuple(n - 1 for n in grid.dims)
    n_nodes = int(np.prod(interior))
    nodes = np.stack(np.meshgrid(*[np.arange(1, n) for n in grid.dims], indexing="ij"), axis=-1).reshape(-1, 3)
    node_ids = np.arange(n_nodes)
    boundary_values = p.dirichlet.values()
    b = p.loads.values()[1:-1, 1:-1, 1:-1].reshape(-1).copy()

    rows, cols, vals = [], [], []
    for offset, block in _stencil(p.C.C, grid.spacing).items():
        neighbours = nodes + np.asarray(offset)
        inside = np.all((neighbours >= 1) & (neighbours <= np.asarray(grid.dims) - 1), axis=1)
        neighbour_ids = np.zeros(n_nodes, dtype=int)
        neighbour_ids[inside] = np.ravel_multi_index(tuple((neighbours[inside] - 1).T), interior)
        outside_values = boundary_values[tuple(neighbours[~inside].T)]
        for r, c in zip(*np.nonzero(block)):
            rows.append(6 * node_ids[inside] + r)
            cols.append(6 * neighbour_ids[inside] + c)
            vals.append(np.full(int(inside.sum()), -block[r, c]))
            np.add.at(b, 6 * node_ids[~inside] + r, block[r, c] * outside_values[:, c])

    size = 6 * n_nodes
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)).tocsr()
    defect = float(abs(A - A.T).max()) if A.nnz else 0.0
    symmetric = p.C.hyperelastic
    if symmetric:
        A = ((A + A.T) * 0.5).tocsr()
    logger.info(f"Assembled {size} unknowns with {A.nnz} nonzeros (symmetry defect {defect:.3e})")
    return LinearSystem(A, b, p, symmetric, defect)


def solve_linear(A: sp.spmatrix, b: np.ndarray, method: str = "direct") -> Tuple[np.ndarray, List[float]]:
    """
    Solve A x = b directly or by Jacobi-preconditioned conjugate gradients

    Returns:
        (x, residual history); the history lists relative residuals per CG iteration

    Raises:
        SolverError: on singular systems, non-convergence or a final relative
            residual above config.SOLVER_RTOL
    """
    if method not in METHODS:
        raise ValidationError(f"Unknown solver method '{method}', expected one of {', '.join(METHODS)}")
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b), [0.0]
    history: List[float] = []

    if method == "cg":
        diagonal = A.diagonal()
        if np.any(diagonal <= 0.0):
            raise SolverError("Conjugate gradients needs a positive diagonal for Jacobi scaling")
        preconditioner = sp.diags(1.0 / diagonal)

        def record(xk: np.ndarray) -> None:
            history.append(float(np.linalg.norm(b - A @ xk)) / b_norm)

        x, info = cg(A, b, rtol=config.CG_RTOL, atol=0.0, maxiter=config.CG_MAX_ITER_FACTOR * A.shape[0],
                     M=preconditioner, callback=record)
        if info != 0:
            raise SolverError(f"Conjugate gradients did not converge (info={info})", history)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("error", MatrixRankWarning)
            try:
                x = spsolve(A.tocsc(), b)
            except (MatrixRankWarning, RuntimeError) as e:
                raise SolverError(f"Direct solve failed: {e}")

    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise SolverError("Solution contains non-finite values", history)
    residual = float(np.linalg.norm(b - A @ x)) / b_norm
    history.append(residual)
    if residual > config.SOLVER_RTOL:
        raise SolverError(f"Relative residual {residual:.3e} exceeds {config.SOLVER_RTOL:.1e}", history)
    return x, history


def solve(system: LinearSystem, method: str = "direct") -> Tuple[DisplacementField, SolveReport]:
    """Solve the assembled system and rebuild the full vertex field"""
    if method == "cg" and not system.symmetric:
        raise ValidationError("Conjugate gradients requires a hyperelastic (symmetric) stiffness")
    x, history = solve_linear(system.A, system.b, method)
    values = system.problem.dirichlet.values().copy()
    values[1:-1, 1:-1, 1:-1] = x.reshape(system.interior_shape + (6,))
    report = SolveReport(method, system.A.shape[0], history[-1], max(len(history) - 1, 0),
                         system.symmetry_defect, history)
    logger.info(f"Solved {report.unknowns} unknowns by {method}: relative residual {report.relative_residual:.3e}")
    return DisplacementField.from_values(system.problem.grid, values), report


def recover_stress(C: StiffnessOperator, solution: DisplacementField) -> StressState:
    return apply_law(C, infinitesimal_strain(solution))


def manufactured_loads(C: StiffnessOperator, preset: DisplacementPreset, grid: BodyGrid) -> LoadState:
    """Body force and couple for which the preset solves the balance laws exactly"""
    G, G0 = strain_operators()
    points = grid.points()
    q = preset.values(points)
    gradient = preset.gradient(points)
    hessian = preset.hessian(points)
    E = np.einsum("kAc,...kc->...A", G, gradient) + np.einsum("Ac,...c->...A", G0, q)
    dE = np.einsum("kAc,...jkc->...jA", G, hessian) + np.einsum("Ac,...jc->...jA", G0, gradient)
    S = np.einsum("AB,...B->...A", C.C, E)
    dS = np.einsum("AB,...jB->...jA", C.C, dE)
    residual = np.einsum("jAa,...jA->...a", G, dS) - np.einsum("Aa,...A->...a", G0, S)
    return LoadState(grid, -residual[..., :3], -residual[..., 3:])


def l2_error(field: DisplacementField, exact: np.ndarray) -> float:
    """Discrete L2 norm (h1 h2 h3 sum |error|^2)^(1/2) over the vertices"""
    cell = float(np.prod(field.grid.spacing))
    return float(np.sqrt(cell * np.sum((field.values() - exact) ** 2)))


@dataclass
class MMSReport:
    preset: str
    sizes: List[int]
    errors: List[float]
    orders: List[float]

    @property
    def observed_order(self) -> float:
        return self.orders[-1] if self.orders else float("nan")

    def as_dict(self) -> Dict[str, object]:
        return {
            "preset": self.preset,
            "table": [{"n": n, "h": 1.0 / n, "l2_error": e} for n, e in zip(self.sizes, self.errors)],
            "orders": self.orders,
            "observed_order": self.observed_order,
        }


def mms_verify(C: StiffnessOperator, preset: DisplacementPreset, sizes: Sequence[int] = (8, 16, 32),
               method: Optional[str] = None) -> MMSReport:
    """
    Manufactured-solution study on unit cubes with n cells per axis

    Loads come from symbolic differentiation of the preset and the boundary
    values from the preset itself; orders are log ratios of successive
    L2 errors against the spacing.
    """
    method = method or ("cg" if C.hyperelastic else "direct")
    errors = []
    for n in sizes:
        grid = BodyGrid.unit_cube(n)
        exact = preset.field(grid)
        problem = ElastostaticsProblem(grid, C, manufactured_loads(C, preset, grid), exact)
        solution, _ = solve(assemble(problem), method)
        errors.append(l2_error(solution, exact.values()))
        logger.info(f"MMS {preset.name} n={n}: L2 error {errors[-1]:.3e}")
    orders = []
    for i in range(1, len(sizes)):
        if errors[i] > 0.0 and errors[i - 1] > 0.0:
            orders.append(float(np.log(errors[i - 1] / errors[i]) / np.log(sizes[i] / sizes[i - 1])))
        else:
            orders.append(float("nan"))
    return MMSReport(preset.name, list(sizes), errors, orders)


def reciprocity_defect(C: StiffnessOperator, grid: BodyGrid, loads_1: LoadState, loads_2: LoadState,
                       method: str = "direct") -> float:
    """Relative mismatch |x1.b2 - x2.b1| of two solves with homogeneous boundary data"""
    zero = DisplacementField.zeros(grid)
    system_1 = assemble(ElastostaticsProblem(grid, C, loads_1, zero))
    system_2 = assemble(ElastostaticsProblem(grid, C, loads_2, zero))
    x1, _ = solve_linear(system_1.A, system_1.b, method)
    x2, _ = solve_linear(system_2.A, system_2.b, method)
    work_12 = float(x1 @ system_2.b)
    work_21 = float(x2 @ system_1.b)
    return abs(work_12 - work_21) / max(abs(work_12), abs(work_21), np.finfo(float).tiny)
