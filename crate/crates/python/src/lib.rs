//! Python bindings. Elements cross the boundary as nested lists of blocks,
//! each block a list of rows of complex numbers (plain floats are accepted).

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use poscone::algebra::Block;
use poscone::convexity::{self as cx, Closure, ConvexSubmanifold, SubspaceKind};
use poscone::geometry;
use poscone::io as pio;
use poscone::projection::{self, DEFAULT_MAX_ITER, DEFAULT_PROJECTION_TOL};
use poscone::verify::{self as suites, VerifyConfig};
use poscone::{AlgebraElement, BlockSpec, Error, HermitianElement, PositiveElement, TracialAlgebra};

create_exception!(
    poscone,
    PosconeError,
    PyException,
    "A computation failed to converge or a check failed."
);

fn err(e: Error) -> PyErr {
    match e {
        Error::NonConvergence { .. }
        | Error::EigenNonConvergence { .. }
        | Error::NotClosed { .. }
        | Error::Conditioning { .. } => PosconeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Rows = Vec<Vec<Vec<Complex64>>>;

fn to_blocks(rows: Rows) -> PyResult<Vec<Block>> {
    rows.into_iter()
        .enumerate()
        .map(|(b, m)| {
            let n = m.len();
            if m.iter().any(|r| r.len() != n) {
                return Err(PyValueError::new_err(format!("block {b} is not square")));
            }
            Ok(Block::from_fn(n, n, |i, j| m[i][j]))
        })
        .collect()
}

fn from_blocks(blocks: &[Block]) -> Rows {
    blocks
        .iter()
        .map(|m| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect()
        })
        .collect()
}

#[pyclass(name = "Algebra", module = "poscone", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyAlgebra(poscone::Algebra);

#[pymethods]
impl PyAlgebra {
    /// `blocks` is a list of `(dim, weight)` pairs; weights must sum to one.
    #[new]
    fn new(blocks: Vec<(usize, f64)>) -> PyResult<Self> {
        let shapes = blocks
            .into_iter()
            .map(|(dim, weight)| BlockSpec { dim, weight })
            .collect();
        TracialAlgebra::new(shapes).map(Self).map_err(err)
    }

    /// The full matrix algebra `M_n` with the normalized trace.
    #[staticmethod]
    fn matrix(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("dimension must be positive"));
        }
        Ok(Self(TracialAlgebra::matrix(n)))
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.0.blocks().iter().map(|b| b.dim).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.blocks().iter().map(|b| b.weight).collect()
    }

    #[getter]
    fn hermitian_dim(&self) -> usize {
        self.0.hermitian_dim()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        let parts: Vec<String> = self
            .0
            .blocks()
            .iter()
            .map(|b| format!("({}, {})", b.dim, b.weight))
            .collect();
        format!("Algebra([{}])", parts.join(", "))
    }
}

/// A general algebra element.
#[pyclass(name = "Element", module = "poscone", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyElement(AlgebraElement);

#[pymethods]
impl PyElement {
    #[new]
    fn new(algebra: &PyAlgebra, blocks: Rows) -> PyResult<Self> {
        AlgebraElement::from_blocks(&algebra.0, to_blocks(blocks)?)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn algebra(&self) -> PyAlgebra {
        PyAlgebra(self.0.algebra().clone())
    }

    fn blocks(&self) -> Rows {
        from_blocks(self.0.blocks())
    }

    fn unitarity_defect(&self) -> f64 {
        self.0.unitarity_defect()
    }

    fn to_json(&self) -> PyResult<String> {
        pio::element_to_json(&self.0).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        pio::parse_element(text).map(Self).map_err(err)
    }
}

#[pyclass(name = "Hermitian", module = "poscone", frozen, from_py_object)]
#[derive(Clone)]
struct PyHermitian(HermitianElement);

#[pymethods]
impl PyHermitian {
    #[new]
    fn new(algebra: &PyAlgebra, blocks: Rows) -> PyResult<Self> {
        HermitianElement::from_blocks(&algebra.0, to_blocks(blocks)?)
            .map(Self)
            .map_err(err)
    }

    /// Diagonal element with the given entries along the concatenated
    /// diagonal.
    #[staticmethod]
    fn diagonal(algebra: &PyAlgebra, entries: Vec<f64>) -> PyResult<Self> {
        HermitianElement::diagonal(&algebra.0, &entries).map(Self).map_err(err)
    }

    #[getter]
    fn algebra(&self) -> PyAlgebra {
        PyAlgebra(self.0.algebra().clone())
    }

    fn blocks(&self) -> Rows {
        from_blocks(self.0.blocks())
    }

    /// `τ(x)`.
    fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `τ(x y)`.
    fn inner(&self, other: &Self) -> PyResult<f64> {
        poscone::algebra::inner2(&self.0, &other.0).map_err(err)
    }

    /// `τ(x²)^{1/2}`.
    fn norm(&self) -> f64 {
        self.0.norm2()
    }

    fn exp(&self) -> PyResult<PyPositive> {
        PositiveElement::exp(&self.0).map(PyPositive).map_err(err)
    }

    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        Ok(self.0.eig().map_err(err)?.eigenvalues().collect())
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        same_algebra(&self.0, &other.0)?;
        Ok(Self(&self.0 + &other.0))
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        same_algebra(&self.0, &other.0)?;
        Ok(Self(&self.0 - &other.0))
    }

    fn __mul__(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    fn __rmul__(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    fn __neg__(&self) -> Self {
        Self(self.0.scale(-1.0))
    }

    fn to_json(&self) -> PyResult<String> {
        pio::hermitian_to_json(&self.0).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        pio::parse_hermitian(text).map(Self).map_err(err)
    }
}

fn same_algebra(x: &HermitianElement, y: &HermitianElement) -> PyResult<()> {
    if x.algebra() != y.algebra() {
        return Err(err(Error::AlgebraMismatch));
    }
    Ok(())
}

/// A positive definite element.
#[pyclass(name = "Positive", module = "poscone", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPositive(PositiveElement);

#[pymethods]
impl PyPositive {
    #[new]
    fn new(algebra: &PyAlgebra, blocks: Rows) -> PyResult<Self> {
        let h = HermitianElement::from_blocks(&algebra.0, to_blocks(blocks)?).map_err(err)?;
        PositiveElement::new(h).map(Self).map_err(err)
    }

    #[staticmethod]
    fn identity(algebra: &PyAlgebra) -> Self {
        Self(PositiveElement::identity(&algebra.0))
    }

    #[getter]
    fn algebra(&self) -> PyAlgebra {
        PyAlgebra(self.0.algebra().clone())
    }

    fn blocks(&self) -> Rows {
        from_blocks(self.0.value().blocks())
    }

    fn hermitian(&self) -> PyHermitian {
        PyHermitian(self.0.value().clone())
    }

    fn ln(&self) -> PyHermitian {
        PyHermitian(self.0.ln())
    }

    fn power(&self, t: f64) -> PyResult<Self> {
        self.0.pow_positive(t).map(Self).map_err(err)
    }

    /// Smallest eigenvalue.
    #[getter]
    fn spectral_floor(&self) -> f64 {
        self.0.spectral_floor()
    }

    fn to_json(&self) -> PyResult<String> {
        pio::hermitian_to_json(self.0.value()).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        pio::parse_positive(text).map(Self).map_err(err)
    }
}

/// A real subspace of the Hermitian elements, stored with an orthonormal
/// basis.
#[pyclass(name = "Subspace", module = "poscone", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySubspace(cx::Subspace);

impl PySubspace {
    fn standard(algebra: &PyAlgebra, kind: SubspaceKind) -> PyResult<Self> {
        cx::standard_subspace(&algebra.0, &kind).map(Self).map_err(err)
    }

    fn certified(&self) -> PyResult<ConvexSubmanifold> {
        ConvexSubmanifold::certify(self.0.clone()).map_err(|w| err(Error::NotClosed { residual: w.residual }))
    }
}

#[pymethods]
impl PySubspace {
    #[staticmethod]
    fn diagonal(algebra: &PyAlgebra) -> PyResult<Self> {
        Self::standard(algebra, SubspaceKind::Diagonal)
    }

    #[staticmethod]
    fn full(algebra: &PyAlgebra) -> PyResult<Self> {
        Self::standard(algebra, SubspaceKind::Full)
    }

    /// Block-diagonal Hermitians for a partition of the diagonal into
    /// 0-based index groups.
    #[staticmethod]
    fn block_diagonal(algebra: &PyAlgebra, groups: Vec<Vec<usize>>) -> PyResult<Self> {
        Self::standard(algebra, SubspaceKind::BlockDiagonal(groups))
    }

    /// Real span of the generators.
    #[staticmethod]
    fn span(generators: Vec<PyHermitian>) -> PyResult<Self> {
        let g: Vec<HermitianElement> = generators.into_iter().map(|h| h.0).collect();
        let Some(first) = g.first() else {
            return Err(err(Error::EmptySubspace));
        };
        let alg = first.algebra().clone();
        if g.iter().any(|h| h.algebra() != &alg) {
            return Err(err(Error::AlgebraMismatch));
        }
        Self::standard(&PyAlgebra(alg), SubspaceKind::Span(g))
    }

    #[getter]
    fn algebra(&self) -> PyAlgebra {
        PyAlgebra(self.0.algebra().clone())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn basis(&self) -> Vec<PyHermitian> {
        self.0.basis().iter().cloned().map(PyHermitian).collect()
    }

    /// Orthogonal projection of `x` onto the subspace.
    fn project(&self, x: &PyHermitian) -> PyResult<PyHermitian> {
        cx::project_subspace(&self.0, &x.0).map(PyHermitian).map_err(err)
    }

    /// Double-bracket closure test. Returns a dict with `closed` and either
    /// `max_residual` or a `witness` dict.
    #[pyo3(signature = (tol = cx::DEFAULT_CLOSURE_TOL))]
    fn closure<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        if !(tol > 0.0) {
            return Err(PyValueError::new_err("tolerance must be positive"));
        }
        let d = PyDict::new(py);
        match cx::check_double_bracket(&self.0, tol) {
            Closure::Pass { max_residual } => {
                d.set_item("closed", true)?;
                d.set_item("max_residual", max_residual)?;
            }
            Closure::Fail(w) => {
                d.set_item("closed", false)?;
                let wd = PyDict::new(py);
                wd.set_item("x", PyHermitian(w.x.clone()))?;
                wd.set_item("y", PyHermitian(w.y.clone()))?;
                wd.set_item("bracket", PyHermitian(w.offending.clone()))?;
                wd.set_item("residual", w.residual)?;
                wd.set_item("triple", w.triple)?;
                d.set_item("witness", wd)?;
            }
        }
        d.set_item("tolerance", tol)?;
        Ok(d)
    }

    fn to_json(&self) -> PyResult<String> {
        pio::subspace_to_json(&self.0).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        pio::parse_subspace(text).map(Self).map_err(err)
    }
}

/// Trace-metric geodesic distance.
#[pyfunction]
fn dist(a: &PyPositive, b: &PyPositive) -> PyResult<f64> {
    geometry::dist(&a.0, &b.0).map_err(err)
}

/// Point at time `t` on the geodesic from `a` to `b`.
#[pyfunction]
fn geodesic(a: &PyPositive, b: &PyPositive, t: f64) -> PyResult<PyPositive> {
    if !t.is_finite() {
        return Err(PyValueError::new_err("t must be finite"));
    }
    let g = geometry::geodesic(&a.0, &b.0).map_err(err)?;
    g.evaluate(t).map(PyPositive).map_err(err)
}

#[pyfunction]
fn exp_map(p: &PyPositive, v: &PyHermitian) -> PyResult<PyPositive> {
    geometry::exp_map(&p.0, &v.0).map(PyPositive).map_err(err)
}

#[pyfunction]
fn log_map(p: &PyPositive, q: &PyPositive) -> PyResult<PyHermitian> {
    geometry::log_map(&p.0, &q.0).map(PyHermitian).map_err(err)
}

/// `⟨x, y⟩_a = τ(x a⁻¹ y a⁻¹)`.
#[pyfunction]
fn metric_inner(a: &PyPositive, x: &PyHermitian, y: &PyHermitian) -> PyResult<f64> {
    geometry::metric_inner(&a.0, &x.0, &y.0).map_err(err)
}

/// Derivative of the exponential at `x` in direction `y`.
#[pyfunction]
fn dexp(x: &PyHermitian, y: &PyHermitian) -> PyResult<PyHermitian> {
    geometry::dexp(&x.0, &y.0).map(PyHermitian).map_err(err)
}

#[pyfunction]
fn t_operator(x: &PyHermitian, y: &PyHermitian) -> PyResult<PyHermitian> {
    geometry::t_operator(&x.0, &y.0).map(PyHermitian).map_err(err)
}

/// Slack in the exponential metric increasing inequality, nonnegative up to
/// rounding.
#[pyfunction]
fn emi_slack(x: &PyHermitian, y: &PyHermitian) -> PyResult<f64> {
    geometry::emi_slack(&x.0, &y.0).map_err(err)
}

/// Sectional curvature numerator at `a`, nonpositive.
#[pyfunction]
fn sectional_value(a: &PyPositive, x: &PyHermitian, y: &PyHermitian) -> PyResult<f64> {
    geometry::sectional_value(&a.0, &x.0, &y.0).map_err(err)
}

/// Nearest point of `e^H` to `r`. The subspace must pass the closure test.
#[pyfunction]
#[pyo3(signature = (subspace, r, tol = DEFAULT_PROJECTION_TOL, max_iter = DEFAULT_MAX_ITER))]
fn project<'py>(
    py: Python<'py>,
    subspace: &PySubspace,
    r: &PyPositive,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(PyValueError::new_err("tolerance must be positive"));
    }
    let m = subspace.certified()?;
    let res = projection::project(&m, &r.0, tol, max_iter).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("foot", PyPositive(res.foot))?;
    d.set_item("normal", PyHermitian(res.normal))?;
    d.set_item("distance", res.distance)?;
    d.set_item("residual", res.residual)?;
    d.set_item("tolerance", res.tolerance)?;
    d.set_item("iterations", res.iterations)?;
    d.set_item("converged", res.converged)?;
    Ok(d)
}

/// `z = y + w` with `e^y ∈ e^H` the foot of `e^z` and `w` normal.
#[pyfunction]
fn factor_symmetric<'py>(py: Python<'py>, subspace: &PySubspace, z: &PyHermitian) -> PyResult<Bound<'py, PyDict>> {
    let f = projection::factor_symmetric(&subspace.certified()?, &z.0).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("y", PyHermitian(f.y))?;
    d.set_item("w", PyHermitian(f.w))?;
    d.set_item("residual", f.residual)?;
    d.set_item("orthogonality", f.orthogonality)?;
    d.set_item("iterations", f.iterations)?;
    Ok(d)
}

/// `e^x = e^v d e^v` with `d` diagonal and `v` off-diagonal.
#[pyfunction]
fn factor_masa<'py>(py: Python<'py>, x: &PyHermitian) -> PyResult<Bound<'py, PyDict>> {
    let f = projection::factor_masa(x.0.algebra(), &x.0).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("d", PyPositive(f.d))?;
    d.set_item("v", PyHermitian(f.v))?;
    d.set_item("residual", f.residual)?;
    d.set_item("diagonal_defect", f.diagonal_defect)?;
    d.set_item("iterations", f.iterations)?;
    Ok(d)
}

/// `g = e^x e^y u` with `x ∈ H`, `y ⊥ H` and `u` unitary.
#[pyfunction]
fn factor_iwasawa<'py>(py: Python<'py>, subspace: &PySubspace, g: &PyElement) -> PyResult<Bound<'py, PyDict>> {
    let f = projection::factor_iwasawa(&subspace.certified()?, &g.0).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("x", PyHermitian(f.x))?;
    d.set_item("y", PyHermitian(f.y))?;
    d.set_item("u", PyElement(f.u))?;
    d.set_item("residual", f.residual)?;
    d.set_item("unitarity", f.unitarity)?;
    d.set_item("orthogonality", f.orthogonality)?;
    d.set_item("iterations", f.iterations)?;
    Ok(d)
}

/// Runs the randomized property suites and returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (suite = "all", dims = vec![2, 3, 5], trials = 20, seed = 0, tol = 1.0))]
fn verify(py: Python<'_>, suite: &str, dims: Vec<usize>, trials: usize, seed: u64, tol: f64) -> PyResult<String> {
    let config = VerifyConfig {
        suite: suite.parse().map_err(err)?,
        dims,
        trials,
        seed,
        tol_scale: tol,
    };
    let report = py.detach(|| suites::run(&config)).map_err(err)?;
    pio::to_json(&report).map_err(err)
}

#[pymodule]
#[pyo3(name = "poscone")]
fn poscone_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PosconeError", m.py().get_type::<PosconeError>())?;
    m.add_class::<PyAlgebra>()?;
    m.add_class::<PyElement>()?;
    m.add_class::<PyHermitian>()?;
    m.add_class::<PyPositive>()?;
    m.add_class::<PySubspace>()?;
    m.add_function(wrap_pyfunction!(dist, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(exp_map, m)?)?;
    m.add_function(wrap_pyfunction!(log_map, m)?)?;
    m.add_function(wrap_pyfunction!(metric_inner, m)?)?;
    m.add_function(wrap_pyfunction!(dexp, m)?)?;
    m.add_function(wrap_pyfunction!(t_operator, m)?)?;
    m.add_function(wrap_pyfunction!(emi_slack, m)?)?;
    m.add_function(wrap_pyfunction!(sectional_value, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(factor_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(factor_masa, m)?)?;
    m.add_function(wrap_pyfunction!(factor_iwasawa, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
