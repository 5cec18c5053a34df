"""
Exact rational linear programming.

Two-phase tableau simplex over ``fractions.Fraction`` with Bland's rule, a
feasibility shortcut, integer scaling and a Gauss-Jordan solver for square or
overdetermined equality systems, plus a brute-force vertex oracle for small
LPs. Nothing here ever touches floating point.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction


logger = logging.getLogger(__name__)

LE = "<="
EQ = "="
GE = ">="
RELATIONS = (LE, EQ, GE)

ZERO = Fraction(0)
ONE = Fraction(1)


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class Constraint:
    row: tuple
    relation: str
    rhs: Fraction


@dataclass
class SolverStats:
    lp_solves: int = 0
    pivots: int = 0

    def as_dict(self):
        return {"lp_solves": self.lp_solves, "pivots": self.pivots}


@dataclass
class LinearProgram:
    """
    LP over named variables.

    ``lower_bounds`` holds one entry per variable; ``None`` marks a free
    variable. When omitted every variable is bounded below by 0.
    """

    variables: list
    constraints: list = field(default_factory=list)
    objective: list = None
    maximize: bool = True
    lower_bounds: list = None

    def __post_init__(self):
        width = len(self.variables)
        if self.objective is None:
            self.objective = [ZERO] * width
        self.objective = [Fraction(value) for value in self.objective]
        if len(self.objective) != width:
            raise ValueError("objective length does not match variable count")
        if self.lower_bounds is None:
            self.lower_bounds = [ZERO] * width
        self.lower_bounds = [None if value is None else Fraction(value) for value in self.lower_bounds]
        if len(self.lower_bounds) != width:
            raise ValueError("bounds length does not match variable count")
        existing = list(self.constraints)
        self.constraints = []
        for item in existing:
            if isinstance(item, Constraint):
                self.add_row(item.row, item.relation, item.rhs)
            else:
                self.add_row(*item)

    @property
    def width(self):
        return len(self.variables)

    def add_row(self, row, relation, rhs):
        if relation not in RELATIONS:
            raise ValueError(f"unknown relation {relation!r}")
        row = tuple(Fraction(value) for value in row)
        if len(row) != self.width:
            raise ValueError(f"row has {len(row)} coefficients, expected {self.width}")
        self.constraints.append(Constraint(row, relation, Fraction(rhs)))

    def add(self, terms, relation, rhs):
        """Add a constraint given as a sparse ``{variable index: coefficient}`` map."""
        row = [ZERO] * self.width
        for index, coefficient in terms.items():
            row[index] += Fraction(coefficient)
        self.add_row(row, relation, rhs)

    def copy(self, objective=None, maximize=None):
        return LinearProgram(
            variables=list(self.variables),
            constraints=list(self.constraints),
            objective=list(self.objective if objective is None else objective),
            maximize=self.maximize if maximize is None else maximize,
            lower_bounds=list(self.lower_bounds),
        )

    def satisfied_by(self, point):
        """True iff ``point`` meets every constraint and bound exactly."""
        for value, bound in zip(point, self.lower_bounds):
            if bound is not None and value < bound:
                return False
        for constraint in self.constraints:
            lhs = sum((a * x for a, x in zip(constraint.row, point)), ZERO)
            if constraint.relation == LE and lhs > constraint.rhs:
                return False
            if constraint.relation == GE and lhs < constraint.rhs:
                return False
            if constraint.relation == EQ and lhs != constraint.rhs:
                return False
        return True


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    solution: tuple = None
    value: Fraction = None
    ray: tuple = None

    @property
    def is_optimal(self):
        return self.status == LpStatus.OPTIMAL


class _Tableau:
    """Dense tableau in equality form; the last entry of every row is the rhs."""

    def __init__(self, rows, basis, stats):
        self.rows = rows
        self.basis = basis
        self.obj = None
        self.stats = stats

    def set_costs(self, costs):
        width = len(costs)
        obj = [-c for c in costs] + [ZERO]
        for row, column in zip(self.rows, self.basis):
            weight = costs[column]
            if weight:
                for j in range(width + 1):
                    if row[j]:
                        obj[j] += weight * row[j]
        self.obj = obj

    def pivot(self, r, column):
        pivot_row = self.rows[r]
        factor = pivot_row[column]
        if factor != ONE:
            pivot_row = [value / factor for value in pivot_row]
            self.rows[r] = pivot_row
        for i, row in enumerate(self.rows):
            if i != r and row[column]:
                scale = row[column]
                self.rows[i] = [a - scale * b for a, b in zip(row, pivot_row)]
        if self.obj[column]:
            scale = self.obj[column]
            self.obj = [a - scale * b for a, b in zip(self.obj, pivot_row)]
        self.basis[r] = column
        self.stats.pivots += 1

    def run(self, allowed):
        """Maximize the current cost row; returns (status, entering column)."""
        while True:
            entering = None
            for j in allowed:
                if self.obj[j] < 0:
                    entering = j
                    break
            if entering is None:
                return LpStatus.OPTIMAL, None
            leaving = None
            best = None
            for i, row in enumerate(self.rows):
                coefficient = row[entering]
                if coefficient > 0:
                    ratio = row[-1] / coefficient
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and self.basis[i] < self.basis[leaving])
                    ):
                        best = ratio
                        leaving = i
            if leaving is None:
                return LpStatus.UNBOUNDED, entering
            self.pivot(leaving, entering)


def _standard_form(lp):
    """Shift bounds, split free variables, add slack and artificial columns."""
    columns = []
    var_columns = []
    for index, bound in enumerate(lp.lower_bounds):
        positive = len(columns)
        columns.append(("x", index, 1))
        negative = None
        if bound is None:
            negative = len(columns)
            columns.append(("x", index, -1))
        var_columns.append((positive, negative, bound or ZERO))

    prepared = []
    for constraint in lp.constraints:
        coefficients = [ZERO] * len(columns)
        rhs = constraint.rhs
        for index, value in enumerate(constraint.row):
            if not value:
                continue
            positive, negative, shift = var_columns[index]
            coefficients[positive] += value
            if negative is not None:
                coefficients[negative] -= value
            rhs -= value * shift
        relation = constraint.relation
        if rhs < 0:
            coefficients = [-value for value in coefficients]
            rhs = -rhs
            relation = {LE: GE, GE: LE, EQ: EQ}[relation]
        prepared.append((coefficients, relation, rhs))

    structural = len(columns)
    slack_count = sum(1 for _, relation, _ in prepared if relation != EQ)
    artificial_count = sum(1 for _, relation, _ in prepared if relation != LE)
    width = structural + slack_count + artificial_count

    rows = []
    basis = []
    artificial = []
    slack_at = structural
    artificial_at = structural + slack_count
    for coefficients, relation, rhs in prepared:
        row = coefficients + [ZERO] * (width - structural) + [rhs]
        if relation == LE:
            row[slack_at] = ONE
            basis.append(slack_at)
            slack_at += 1
        else:
            if relation == GE:
                row[slack_at] = -ONE
                slack_at += 1
            row[artificial_at] = ONE
            basis.append(artificial_at)
            artificial.append(artificial_at)
            artificial_at += 1
        rows.append(row)
    return columns, var_columns, rows, basis, artificial, width


def _original_point(var_columns, column_values):
    point = []
    for positive, negative, shift in var_columns:
        value = shift + column_values[positive]
        if negative is not None:
            value -= column_values[negative]
        point.append(value)
    return tuple(point)


def _original_ray(var_columns, direction):
    ray = []
    for positive, negative, _ in var_columns:
        value = direction[positive]
        if negative is not None:
            value -= direction[negative]
        ray.append(value)
    return tuple(ray)


def solve(lp, stats=None):
    """
    Solve ``lp`` exactly.

    Returns an ``LpResult`` whose status is OPTIMAL (vertex solution and
    objective value), UNBOUNDED (an improving feasible ray in variable space)
    or INFEASIBLE.
    """
    stats = stats if stats is not None else SolverStats()
    stats.lp_solves += 1
    columns, var_columns, rows, basis, artificial, width = _standard_form(lp)
    tableau = _Tableau(rows, basis, stats)
    artificial_set = set(artificial)

    if artificial:
        phase_one = [ZERO] * width
        for column in artificial:
            phase_one[column] = -ONE
        tableau.set_costs(phase_one)
        tableau.run(range(width))
        if tableau.obj[-1] < 0:
            return LpResult(LpStatus.INFEASIBLE)
        # Drive zero-valued artificials out of the basis; drop redundant rows.
        r = 0
        while r < len(tableau.rows):
            if tableau.basis[r] in artificial_set:
                row = tableau.rows[r]
                replacement = next(
                    (j for j in range(width) if j not in artificial_set and row[j]),
                    None,
                )
                if replacement is None:
                    del tableau.rows[r]
                    del tableau.basis[r]
                    continue
                tableau.pivot(r, replacement)
            r += 1

    keep = [j for j in range(width) if j not in artificial_set]
    position = {column: i for i, column in enumerate(keep)}
    tableau.rows = [[row[j] for j in keep] + [row[-1]] for row in tableau.rows]
    tableau.basis = [position[column] for column in tableau.basis]
    width = len(keep)

    sign = ONE if lp.maximize else -ONE
    costs = [ZERO] * width
    for column, (kind, index, direction) in enumerate(columns):
        costs[column] = sign * direction * lp.objective[index]
    tableau.set_costs(costs)
    status, entering = tableau.run(range(width))

    if status == LpStatus.UNBOUNDED:
        direction = [ZERO] * width
        direction[entering] = ONE
        for row, column in zip(tableau.rows, tableau.basis):
            direction[column] = -row[entering]
        ray = _original_ray(var_columns, direction)
        logger.debug("LP unbounded after %d pivots", stats.pivots)
        return LpResult(LpStatus.UNBOUNDED, ray=ray)

    values = [ZERO] * width
    for row, column in zip(tableau.rows, tableau.basis):
        values[column] = row[-1]
    point = _original_point(var_columns, values)
    value = sum((c * x for c, x in zip(lp.objective, point)), ZERO)
    return LpResult(LpStatus.OPTIMAL, solution=point, value=value)


def feasible_point(lp, stats=None):
    """Any exact feasible point of ``lp``, or None."""
    feasibility = lp.copy(objective=[ZERO] * lp.width, maximize=True)
    result = solve(feasibility, stats=stats)
    return result.solution if result.is_optimal else None


def scale_to_integers(vector):
    """Multiply by the LCM of the denominators; the result is a list of ints."""
    values = [Fraction(value) for value in vector]
    multiplier = 1
    for value in values:
        multiplier = math.lcm(multiplier, value.denominator)
    return [int(value * multiplier) for value in values]


def solve_linear_system(rows, rhs):
    """
    Unique exact solution of ``rows · x = rhs`` or None.

    Rows may outnumber unknowns. None is returned for inconsistent systems
    and for systems with a nontrivial kernel.
    """
    rows = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(rows, rhs)]
    if not rows:
        return None
    width = len(rows[0]) - 1
    pivot_row = 0
    pivot_columns = []
    for column in range(width):
        found = next((i for i in range(pivot_row, len(rows)) if rows[i][column]), None)
        if found is None:
            continue
        rows[pivot_row], rows[found] = rows[found], rows[pivot_row]
        factor = rows[pivot_row][column]
        rows[pivot_row] = [value / factor for value in rows[pivot_row]]
        for i in range(len(rows)):
            if i != pivot_row and rows[i][column]:
                scale = rows[i][column]
                rows[i] = [a - scale * b for a, b in zip(rows[i], rows[pivot_row])]
        pivot_columns.append(column)
        pivot_row += 1
        if pivot_row == len(rows):
            break
    for row in rows[pivot_row:]:
        if row[-1]:
            return None
    if len(pivot_columns) < width:
        return None
    solution = [ZERO] * width
    for i, column in enumerate(pivot_columns):
        solution[column] = rows[i][-1]
    return solution


def vertex_optimum(lp):
    """
    Brute-force optimum over every basic solution of the constraint and bound
    hyperplanes; None when no basic solution is feasible. Exponential in the
    number of rows, so only for small bounded LPs with finite lower bounds.
    """
    if any(bound is None for bound in lp.lower_bounds):
        raise ValueError("vertex enumeration needs a finite lower bound on every variable")
    rows = [list(c.row) for c in lp.constraints]
    rhs = [c.rhs for c in lp.constraints]
    for i, bound in enumerate(lp.lower_bounds):
        unit = [ZERO] * lp.width
        unit[i] = Fraction(1)
        rows.append(unit)
        rhs.append(bound)
    best = None
    for subset in itertools.combinations(range(len(rows)), lp.width):
        point = solve_linear_system([rows[i] for i in subset], [rhs[i] for i in subset])
        if point is None or not lp.satisfied_by(point):
            continue
        value = sum((Fraction(c) * x for c, x in zip(lp.objective, point)), ZERO)
        if best is None or (value > best if lp.maximize else value < best):
            best = value
    return best
