"""
Lie-algebra valued differential forms on a box-shaped body.

Two representations share one container, ``MotorForm``:

* ``smooth`` - components sampled at the grid vertices, data of shape
  ``(ncomp, n1 + 1, n2 + 1, n3 + 1, *value_shape)``; derivatives by
  second-order finite differences.
* ``cochain`` - one value per k-cell of the cubical complex, data of shape
  ``(ncells, *value_shape)``; derivative is the signed incidence matrix.

Component ``c`` of a degree-k form is labelled by an ordered axis tuple:
dx1, dx2, dx3 for k = 1; A1 = dx2^dx3, A2 = dx3^dx1, A3 = dx1^dx2 for k = 2
and vol = dx1^dx2^dx3 for k = 3. The same tuples orient the cells of the
complex, so edges run along +x_a and faces carry the A orientation.
"""

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from errors import ChainError, DomainError, ValidationError
import lie_euclid

# Configure logging
logger = logging.getLogger(__name__)

BASIS: Tuple[Tuple[Tuple[int, ...], ...], ...] = (
    ((),),
    ((0,), (1,), (2,)),
    ((1, 2), (2, 0), (0, 1)),
    ((0, 1, 2),),
)

SMOOTH_NAMES = (("vertex",), ("dx1", "dx2", "dx3"), ("A1", "A2", "A3"), ("vol",))
CELL_NAMES = (("vertex",), ("edge1", "edge2", "edge3"), ("face1", "face2", "face3"), ("cell",))

VALUE_SHAPES = {"motor": (6,), "comotor": (6,), "matrix": (4, 4), "scalar": ()}

SMOOTH = "smooth"
COCHAIN = "cochain"


def _permutation_sign(sequence: Sequence[int], reference: Sequence[int]) -> int:
    """Sign of the permutation taking ``reference`` to ``sequence``"""
    positions = [reference.index(item) for item in sequence]
    sign = 1
    for i in range(len(positions)):
        for j in range(i + 1, len(positions)):
            if positions[i] > positions[j]:
                sign = -sign
    return sign


def locate(axes: Sequence[int]) -> Optional[Tuple[int, int]]:
    """
    Find the basis component spanned by an ordered tuple of axes

    Returns:
        (component index, orientation sign) or None when axes repeat
    """
    if len(set(axes)) != len(axes):
        return None
    for index, basis_axes in enumerate(BASIS[len(axes)]):
        if set(basis_axes) == set(axes):
            return index, _permutation_sign(tuple(axes), basis_axes)
    raise DomainError(f"No basis element for axes {tuple(axes)}")


@dataclass(frozen=True)
class BodyGrid:
    """Regular box discretization: cell counts, spacing and origin"""

    dims: Tuple[int, int, int]
    spacing: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        spacing = tuple(float(h) for h in self.spacing)
        origin = tuple(float(o) for o in self.origin)
        if len(dims) != 3 or len(spacing) != 3 or len(origin) != 3:
            raise ValidationError("Grid needs three dims, spacings and origin coordinates")
        if min(dims) < 2:
            raise ValidationError(f"Grid needs at least 2 cells per axis, got {dims}")
        if min(spacing) <= 0.0:
            raise ValidationError(f"Grid spacing must be positive, got {spacing}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def unit_cube(cls, n: int) -> "BodyGrid":
        return cls((n, n, n), (1.0 / n,) * 3, (0.0, 0.0, 0.0))

    @property
    def vertex_shape(self) -> Tuple[int, int, int]:
        return tuple(n + 1 for n in self.dims)

    def axis(self, a: int) -> np.ndarray:
        return self.origin[a] + self.spacing[a] * np.arange(self.dims[a] + 1)

    def points(self) -> np.ndarray:
        """Vertex coordinates, shape (n1 + 1, n2 + 1, n3 + 1, 3)"""
        return np.stack(np.meshgrid(self.axis(0), self.axis(1), self.axis(2), indexing="ij"), axis=-1)

    def refine(self) -> "BodyGrid":
        return BodyGrid(tuple(2 * n for n in self.dims), tuple(h / 2.0 for h in self.spacing), self.origin)


class CubicalComplex:
    """
    Cells of a box grid with a flat numbering per degree and the signed
    incidence (coboundary) matrices between consecutive degrees.
    """

    def __init__(self, grid: BodyGrid):
        self.grid = grid
        self._shapes: List[List[Tuple[int, int, int]]] = []
        self._offsets: List[List[int]] = []
        for k in range(4):
            shapes, offsets, total = [], [], 0
            for axes in BASIS[k]:
                shape = tuple(grid.dims[a] if a in axes else grid.dims[a] + 1 for a in range(3))
                shapes.append(shape)
                offsets.append(total)
                total += int(np.prod(shape))
            offsets.append(total)
            self._shapes.append(shapes)
            self._offsets.append(offsets)

    def cell_shape(self, degree: int, component: int) -> Tuple[int, int, int]:
        return self._shapes[degree][component]

    def n_cells(self, degree: int) -> int:
        return self._offsets[degree][-1]

    def block_slice(self, degree: int, component: int) -> slice:
        return slice(self._offsets[degree][component], self._offsets[degree][component + 1])

    def cell_index(self, degree: int, component: int, index: Sequence[int]) -> int:
        """
        Flat number of the cell (degree, component) anchored at vertex index

        Raises:
            ChainError: if the cell does not exist in the complex
        """
        if not 0 <= degree <= 3 or not 0 <= component < len(BASIS[degree]):
            raise ChainError(f"No cell type with degree {degree} and component {component}")
        shape = self.cell_shape(degree, component)
        index = tuple(int(i) for i in index)
        if len(index) != 3 or any(not 0 <= i < n for i, n in zip(index, shape)):
            raise ChainError(f"Cell {CELL_NAMES[degree][component]} at {index} is outside the complex")
        return self._offsets[degree][component] + int(np.ravel_multi_index(index, shape))

    def cell_from_index(self, degree: int, flat: int) -> Tuple[int, Tuple[int, int, int]]:
        if not 0 <= flat < self.n_cells(degree):
            raise ChainError(f"Cell number {flat} out of range for degree {degree}")
        offsets = self._offsets[degree]
        component = int(np.searchsorted(offsets, flat, side="right") - 1)
        index = np.unravel_index(flat - offsets[component], self.cell_shape(degree, component))
        return component, tuple(int(i) for i in index)

    def cell_by_name(self, name: str) -> Tuple[int, int]:
        for degree, names in enumerate(CELL_NAMES):
            if name in names:
                return degree, names.index(name)
        raise ChainError(f"Unknown cell type '{name}'")

    def _block_indices(self, degree: int, component: int) -> np.ndarray:
        sl = self.block_slice(degree, component)
        return np.arange(sl.start, sl.stop).reshape(self.cell_shape(degree, component))

    @cached_property
    def coboundaries(self) -> Tuple[sp.csr_matrix, ...]:
        """Integer incidence matrices d_k of shape (n_{k+1}, n_k), k = 0, 1, 2"""
        matrices = []
        for k in range(3):
            rows, cols, vals = [], [], []
            for target, axes in enumerate(BASIS[k + 1]):
                target_ids = self._block_indices(k + 1, target)
                shape = target_ids.shape
                for m, axis in enumerate(axes):
                    face_axes = axes[:m] + axes[m + 1:]
                    source, orientation = locate(face_axes)
                    sign = (-1) ** m * orientation
                    source_ids = self._block_indices(k, source)
                    lower = source_ids[: shape[0], : shape[1], : shape[2]]
                    shift = [slice(0, n) for n in shape]
                    shift[axis] = slice(1, shape[axis] + 1)
                    upper = source_ids[tuple(shift)]
                    rows.extend([target_ids.ravel(), target_ids.ravel()])
                    cols.extend([upper.ravel(), lower.ravel()])
                    vals.extend([np.full(target_ids.size, sign), np.full(target_ids.size, -sign)])
            matrix = sp.coo_matrix(
                (np.concatenate(vals).astype(float), (np.concatenate(rows), np.concatenate(cols))),
                shape=(self.n_cells(k + 1), self.n_cells(k)),
            ).tocsr()
            matrices.append(matrix)
        logger.debug(f"Built incidence matrices for grid {self.grid.dims}")
        return tuple(matrices)


@lru_cache(maxsize=32)
def complex_for(grid: BodyGrid) -> CubicalComplex:
    return CubicalComplex(grid)


@dataclass(eq=False)
class MotorForm:
    """Degree-k form with motor, comotor, matrix or scalar values"""

    degree: int
    data: np.ndarray
    grid: BodyGrid
    value_space: str = "motor"
    representation: str = SMOOTH

    def __post_init__(self):
        if self.degree not in (0, 1, 2, 3):
            raise DomainError(f"Form degree must be 0..3, got {self.degree}")
        if self.value_space not in VALUE_SHAPES:
            raise ValidationError(f"Unknown value space '{self.value_space}'")
        if self.representation not in (SMOOTH, COCHAIN):
            raise ValidationError(f"Unknown representation '{self.representation}'")
        self.data = np.asarray(self.data, dtype=float)
        expected = self._expected_shape(self.degree, self.grid, self.value_space, self.representation)
        if self.data.shape != expected:
            raise ValidationError(f"Form data has shape {self.data.shape}, expected {expected}")

    @staticmethod
    def _expected_shape(degree: int, grid: BodyGrid, value_space: str, representation: str) -> Tuple[int, ...]:
        value_shape = VALUE_SHAPES[value_space]
        if representation == SMOOTH:
            return (len(BASIS[degree]),) + grid.vertex_shape + value_shape
        return (complex_for(grid).n_cells(degree),) + value_shape

    @classmethod
    def zeros(cls, degree: int, grid: BodyGrid, value_space: str = "motor", representation: str = SMOOTH) -> "MotorForm":
        return cls(degree, np.zeros(cls._expected_shape(degree, grid, value_space, representation)),
                   grid, value_space, representation)

    @classmethod
    def from_blocks(cls, degree: int, blocks: Sequence[np.ndarray], grid: BodyGrid,
                    value_space: str, representation: str) -> "MotorForm":
        if representation == SMOOTH:
            data = np.stack([np.asarray(b, dtype=float) for b in blocks])
        else:
            value_shape = VALUE_SHAPES[value_space]
            data = np.concatenate([np.asarray(b, dtype=float).reshape((-1,) + value_shape) for b in blocks])
        return cls(degree, data, grid, value_space, representation)

    @property
    def value_shape(self) -> Tuple[int, ...]:
        return VALUE_SHAPES[self.value_space]

    @property
    def is_cochain(self) -> bool:
        return self.representation == COCHAIN

    def block(self, component: int) -> np.ndarray:
        """Component values laid out on its vertex or cell grid"""
        if not self.is_cochain:
            return self.data[component]
        cx = complex_for(self.grid)
        return self.data[cx.block_slice(self.degree, component)].reshape(
            cx.cell_shape(self.degree, component) + self.value_shape)

    def blocks(self) -> List[np.ndarray]:
        return [self.block(c) for c in range(len(BASIS[self.degree]))]

    def like(self, data: np.ndarray, value_space: Optional[str] = None) -> "MotorForm":
        return MotorForm(self.degree, data, self.grid, value_space or self.value_space, self.representation)

    def __add__(self, other: "MotorForm") -> "MotorForm":
        _check_compatible(self, other)
        return self.like(self.data + other.data)

    def __sub__(self, other: "MotorForm") -> "MotorForm":
        _check_compatible(self, other)
        return self.like(self.data - other.data)

    def __neg__(self) -> "MotorForm":
        return self.like(-self.data)

    def __mul__(self, scalar: float) -> "MotorForm":
        return self.like(float(scalar) * self.data)

    __rmul__ = __mul__

    def max_abs(self, margin: int = 0) -> float:
        """Sup norm, optionally ignoring ``margin`` vertex layers at the boundary"""
        data = self.data
        if margin and not self.is_cochain:
            data = data[:, margin:-margin, margin:-margin, margin:-margin]
        return float(np.max(np.abs(data), initial=0.0))


def _check_compatible(a: MotorForm, b: MotorForm) -> None:
    if a.grid != b.grid or a.representation != b.representation:
        raise ValidationError("Forms live on different grids or representations")
    if a.degree != b.degree or a.value_space != b.value_space:
        raise ValidationError(
            f"Cannot combine degree {a.degree} {a.value_space} form with degree {b.degree} {b.value_space} form")


def coboundary(a: MotorForm) -> MotorForm:
    """Apply the signed incidence matrix to a cochain"""
    if not a.is_cochain:
        raise ValidationError("coboundary expects a cochain; use exterior_d for smooth fields")
    if a.degree >= 3:
        raise DomainError("Coboundary of a 3-cochain is not defined on a 3D complex")
    d = complex_for(a.grid).coboundaries[a.degree]
    flat = a.data.reshape(a.data.shape[0], -1)
    out = np.asarray(d @ flat).reshape((d.shape[0],) + a.value_shape)
    return MotorForm(a.degree + 1, out, a.grid, a.value_space, COCHAIN)


def exterior_d(a: MotorForm) -> MotorForm:
    """Exterior derivative: incidence matrix for cochains, finite differences for smooth fields"""
    if a.is_cochain:
        return coboundary(a)
    if a.degree >= 3:
        raise DomainError("Exterior derivative of a 3-form vanishes identically on a 3D body")
    out = np.zeros((len(BASIS[a.degree + 1]),) + a.data.shape[1:])
    for c, axes in enumerate(BASIS[a.degree]):
        for axis in range(3):
            target = locate((axis,) + axes)
            if target is None:
                continue
            index, sign = target
            out[index] += sign * np.gradient(a.data[c], a.grid.spacing[axis], axis=axis, edge_order=2)
    return MotorForm(a.degree + 1, out, a.grid, a.value_space, SMOOTH)


def motor_product(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Product of motor embeddings as 4x4 matrices"""
    return lie_euclid.motor_matrix(x) @ lie_euclid.motor_matrix(y)


def _default_product(a: MotorForm, b: MotorForm) -> Tuple[Callable, str]:
    if a.value_space == "scalar":
        return (lambda x, y: x.reshape(x.shape + (1,) * len(b.value_shape)) * y), b.value_space
    if b.value_space == "scalar":
        return (lambda x, y: x * y.reshape(y.shape + (1,) * len(a.value_shape))), a.value_space
    if a.value_space == "motor" and b.value_space == "motor":
        return motor_product, "matrix"
    if a.value_space == "comotor" and b.value_space == "motor":
        return lie_euclid.pair, "scalar"
    if a.value_space == "motor" and b.value_space == "comotor":
        return (lambda x, y: lie_euclid.pair(y, x)), "scalar"
    if a.value_space == "matrix" and b.value_space == "matrix":
        return np.matmul, "matrix"
    raise ValidationError(f"No default product for {a.value_space} and {b.value_space} values")


def wedge(a: MotorForm, b: MotorForm, product: Optional[Callable] = None,
          value_space: Optional[str] = None) -> MotorForm:
    """
    Graded product of two forms

    Smooth fields multiply pointwise. Cochains use the cubical cup product,
    pairing the front face of each target cell with the back face of the
    complementary directions, which keeps the discrete Leibniz rule exact.

    Args:
        a: Left factor (degree p)
        b: Right factor (degree q)
        product: Value multiplication; defaults to the matrix product of
            motor embeddings, the duality pairing or scalar multiplication
        value_space: Value space of the result when ``product`` is given

    Raises:
        DomainError: if p + q exceeds 3
    """
    if a.grid != b.grid or a.representation != b.representation:
        raise ValidationError("Wedge factors live on different grids or representations")
    degree = a.degree + b.degree
    if degree > 3:
        raise DomainError(f"Wedge of degrees {a.degree} and {b.degree} exceeds the body dimension")
    if product is None:
        product, value_space = _default_product(a, b)
    elif value_space is None:
        raise ValidationError("A custom product needs the value space of its result")

    cochain = a.is_cochain
    cx = complex_for(a.grid) if cochain else None
    blocks = []
    for axes in BASIS[degree]:
        shape = cx.cell_shape(degree, BASIS[degree].index(axes)) if cochain else a.grid.vertex_shape
        total = np.zeros(tuple(shape) + VALUE_SHAPES[value_space])
        for left_axes in combinations(sorted(axes), a.degree):
            right_axes = tuple(axis for axis in sorted(axes) if axis not in left_axes)
            left_index, _ = locate(left_axes)
            right_index, _ = locate(right_axes)
            left = a.block(left_index)
            right = b.block(right_index)
            left_canon = BASIS[a.degree][left_index]
            right_canon = BASIS[b.degree][right_index]
            sign = _permutation_sign(left_canon + right_canon, axes)
            if cochain:
                lower = tuple(slice(0, n) for n in shape)
                upper = tuple(slice(1, n + 1) if axis in left_axes else slice(0, n)
                              for axis, n in enumerate(shape))
                left, right = left[lower], right[upper]
            total += sign * product(left, right)
        blocks.append(total)
    return MotorForm.from_blocks(degree, blocks, a.grid, value_space, a.representation)


def to_motor(a: MotorForm) -> MotorForm:
    """Project a matrix-valued form back to motor values, checking it stays in se(3)"""
    if a.value_space == "motor":
        return a
    if a.value_space != "matrix":
        raise ValidationError(f"Cannot read motors from {a.value_space} values")
    return a.like(lie_euclid.motor_from_matrix(a.data), "motor")


def pairing(sigma: MotorForm, e: MotorForm) -> MotorForm:
    """Scalar form <sigma, e>, with the comotor form as the left factor"""
    if sigma.value_space != "comotor" or e.value_space != "motor":
        raise ValidationError("pairing expects a comotor form and a motor form")
    return wedge(sigma, e, lie_euclid.pair, "scalar")


@dataclass(frozen=True)
class FlatConnection:
    """Maurer-Cartan form of the identity section: dx_a carries the translation generator v_a"""

    grid: BodyGrid

    def form(self, representation: str = SMOOTH) -> MotorForm:
        generators = np.zeros((3, 6))
        generators[:, :3] = np.eye(3)
        if representation == SMOOTH:
            data = np.broadcast_to(generators[:, None, None, None, :],
                                   (3,) + self.grid.vertex_shape + (6,)).copy()
            return MotorForm(1, data, self.grid, "motor", SMOOTH)
        cx = complex_for(self.grid)
        blocks = [np.broadcast_to(self.grid.spacing[a] * generators[a], cx.cell_shape(1, a) + (6,))
                  for a in range(3)]
        return MotorForm.from_blocks(1, blocks, self.grid, "motor", COCHAIN)

    def curvature(self, representation: str = SMOOTH) -> MotorForm:
        omega = self.form(representation)
        return exterior_d(omega) + to_motor(wedge(omega, omega))


ConnectionLike = Union[FlatConnection, MotorForm, None]


def connection_form(conn: ConnectionLike, like: MotorForm) -> MotorForm:
    """Resolve a connection argument to a motor 1-form in the representation of ``like``"""
    if conn is None:
        conn = FlatConnection(like.grid)
    if isinstance(conn, MotorForm):
        form = conn
    elif hasattr(conn, "as_form"):
        form = conn.as_form(like.representation)
    else:
        form = conn.form(like.representation)
    if form.degree != 1 or form.value_space != "motor":
        raise ValidationError("A connection must be a motor-valued 1-form")
    if form.grid != like.grid or form.representation != like.representation:
        raise ValidationError("Connection and form live on different grids or representations")
    return form


def covariant_d(a: MotorForm, conn: ConnectionLike = None) -> MotorForm:
    """D a = d a + omega ^ a - (-1)^p a ^ omega for a motor-valued p-form"""
    if a.value_space != "motor":
        raise ValidationError("covariant_d expects a motor-valued form")
    if a.degree >= 3:
        raise DomainError("Covariant derivative of a 3-form is not defined on a 3D body")
    omega = connection_form(conn, a)
    twist = wedge(omega, a)
    if a.degree % 2 == 0:
        twist = twist.like(twist.data - wedge(a, omega).data)
    else:
        twist = twist.like(twist.data + wedge(a, omega).data)
    return exterior_d(a) + to_motor(twist)


def covariant_d_star(Pi: MotorForm, conn: ConnectionLike = None) -> MotorForm:
    """D* Pi = d Pi + sum_k dx_k ^ coad(omega_k, Pi) for a comotor-valued p-form"""
    if Pi.value_space != "comotor":
        raise ValidationError("covariant_d_star expects a comotor-valued form")
    if Pi.degree >= 3:
        raise DomainError("Dual covariant derivative of a 3-form is not defined on a 3D body")
    omega = connection_form(conn, Pi)
    return exterior_d(Pi) + wedge(omega, Pi, lie_euclid.coadjoint, "comotor")


def dual_leibniz_residual(Pi: MotorForm, xi: MotorForm, conn: ConnectionLike = None) -> MotorForm:
    """
    d<Pi, xi> - <D* Pi, xi> - (-1)^q <Pi, D xi> for a comotor q-form Pi and a motor p-form xi

    Vanishes identically for smooth forms; on a grid it carries the
    truncation error of the difference stencils.

    Raises:
        DomainError: if q + p exceeds 2
    """
    if Pi.degree + xi.degree > 2:
        raise DomainError(f"Leibniz rule of degrees {Pi.degree} and {xi.degree} exceeds the body dimension")
    sign = -1.0 if Pi.degree % 2 else 1.0
    return (exterior_d(pairing(Pi, xi)) - pairing(covariant_d_star(Pi, conn), xi)
            - pairing(Pi, covariant_d(xi, conn)) * sign)


@dataclass(eq=False)
class Chain:
    """Formal sum of oriented k-cells with integer coefficients"""

    degree: int
    indices: np.ndarray
    coefficients: np.ndarray
    grid: BodyGrid

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int).reshape(-1)
        self.coefficients = np.asarray(self.coefficients, dtype=int).reshape(-1)
        if self.indices.shape != self.coefficients.shape:
            raise ChainError("Chain indices and coefficients differ in length")
        n = complex_for(self.grid).n_cells(self.degree)
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= n):
            raise ChainError(f"Chain refers to cells outside the complex (degree {self.degree}, {n} cells)")

    @classmethod
    def from_cells(cls, grid: BodyGrid, cells: Sequence[Sequence]) -> "Chain":
        """
        Build a chain from entries (cell_name, i, j, k[, coefficient])

        Raises:
            ChainError: on mixed degrees, unknown names or out-of-range cells
        """
        cx = complex_for(grid)
        degrees, indices, coefficients = set(), [], []
        for entry in cells:
            if len(entry) not in (4, 5):
                raise ChainError(f"Chain entry {entry} needs a cell name, three indices and an optional sign")
            degree, component = cx.cell_by_name(str(entry[0]))
            degrees.add(degree)
            indices.append(cx.cell_index(degree, component, entry[1:4]))
            coefficients.append(int(entry[4]) if len(entry) == 5 else 1)
        if len(degrees) != 1:
            raise ChainError("A chain must contain cells of exactly one degree")
        return cls(degrees.pop(), indices, coefficients, grid).simplified()

    def dense(self) -> np.ndarray:
        out = np.zeros(complex_for(self.grid).n_cells(self.degree), dtype=int)
        np.add.at(out, self.indices, self.coefficients)
        return out

    def simplified(self) -> "Chain":
        dense = self.dense()
        nonzero = np.flatnonzero(dense)
        return Chain(self.degree, nonzero, dense[nonzero], self.grid)

    def cells(self) -> List[Tuple[str, int, int, int, int]]:
        cx = complex_for(self.grid)
        out = []
        for index, coefficient in zip(self.indices, self.coefficients):
            component, (i, j, k) = cx.cell_from_index(self.degree, int(index))
            out.append((CELL_NAMES[self.degree][component], i, j, k, int(coefficient)))
        return out

    def __add__(self, other: "Chain") -> "Chain":
        if other.degree != self.degree or other.grid != self.grid:
            raise ChainError("Cannot add chains of different degree or grid")
        return Chain(self.degree, np.concatenate([self.indices, other.indices]),
                     np.concatenate([self.coefficients, other.coefficients]), self.grid).simplified()

    def __neg__(self) -> "Chain":
        return Chain(self.degree, self.indices, -self.coefficients, self.grid)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def is_zero(self) -> bool:
        return not np.any(self.dense())


def boundary(chain: Chain) -> Chain:
    """Boundary operator, the transpose of the incidence matrix"""
    if chain.degree == 0:
        raise ChainError("A 0-chain has no boundary")
    d = complex_for(chain.grid).coboundaries[chain.degree - 1]
    dense = np.rint(d.T @ chain.dense().astype(float)).astype(int)
    nonzero = np.flatnonzero(dense)
    return Chain(chain.degree - 1, nonzero, dense[nonzero], chain.grid)


def integrate(a: MotorForm, chain: Chain) -> np.ndarray:
    """Signed sum of cochain values over a chain; returns an array of the value shape"""
    if not a.is_cochain:
        raise ValidationError("integrate expects a cochain; sample smooth fields first")
    if chain.degree != a.degree or chain.grid != a.grid:
        raise ChainError(f"Cannot integrate a degree {a.degree} cochain over a degree {chain.degree} chain")
    values = a.data[chain.indices]
    return np.tensordot(chain.coefficients.astype(float), values, axes=(0, 0))


@dataclass(eq=False)
class AnalyticForm:
    """
    Form given by callables, one per basis component, each mapping points
    of shape (..., 3) to values of shape (..., *value_shape).
    """

    degree: int
    components: Sequence[Callable[[np.ndarray], np.ndarray]]
    value_space: str = "motor"

    def __post_init__(self):
        if len(self.components) != len(BASIS[self.degree]):
            raise ValidationError(
                f"Degree {self.degree} form needs {len(BASIS[self.degree])} components, got {len(self.components)}")

    def _values(self, component: int, points: np.ndarray) -> np.ndarray:
        values = np.asarray(self.components[component](points), dtype=float)
        return np.broadcast_to(values, points.shape[:-1] + VALUE_SHAPES[self.value_space])

    def evaluate(self, grid: BodyGrid) -> MotorForm:
        """Sample at the vertices as a smooth field"""
        points = grid.points()
        data = np.stack([self._values(c, points) for c in range(len(BASIS[self.degree]))])
        return MotorForm(self.degree, data, grid, self.value_space, SMOOTH)


_GAUSS = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])


def _sample_analytic(field: AnalyticForm, grid: BodyGrid) -> MotorForm:
    cx = complex_for(grid)
    h = np.asarray(grid.spacing)
    blocks = []
    for c, axes in enumerate(BASIS[field.degree]):
        shape = cx.cell_shape(field.degree, c)
        anchors = np.stack(np.meshgrid(*[grid.origin[a] + h[a] * np.arange(shape[a]) for a in range(3)],
                                       indexing="ij"), axis=-1)
        total = np.zeros(shape + VALUE_SHAPES[field.value_space])
        measure = float(np.prod([h[a] for a in axes])) / (2 ** len(axes))
        for nodes in np.ndindex(*(2,) * len(axes)):
            offset = np.zeros(3)
            for axis, node in zip(axes, nodes):
                offset[axis] = _GAUSS[node] * h[axis]
            total += field._values(c, anchors + offset)
        blocks.append(measure * total)
    return MotorForm.from_blocks(field.degree, blocks, grid, field.value_space, COCHAIN)


def _sample_vertices(field: MotorForm) -> MotorForm:
    """Trapezoid de Rham map for fields known only at vertices"""
    grid = field.grid
    blocks = []
    for c, axes in enumerate(BASIS[field.degree]):
        values = field.data[c]
        for axis in axes:
            values = 0.5 * grid.spacing[axis] * (np.take(values, range(0, grid.dims[axis]), axis=axis)
                                                 + np.take(values, range(1, grid.dims[axis] + 1), axis=axis))
        blocks.append(values)
    return MotorForm.from_blocks(field.degree, blocks, grid, field.value_space, COCHAIN)


def sample(field: Union[AnalyticForm, MotorForm], grid: Optional[BodyGrid] = None) -> MotorForm:
    """
    de Rham map from a smooth form to a cochain

    Analytic forms are integrated over each cell with the tensor 2-point
    Gauss rule; vertex-sampled fields fall back to the trapezoid rule.
    """
    if isinstance(field, AnalyticForm):
        if grid is None:
            raise ValidationError("Sampling an analytic form needs a grid")
        return _sample_analytic(field, grid)
    if field.is_cochain:
        return field
    return _sample_vertices(field)
