//! Python bindings: sign tables, Herr cohomology, sign decompositions and
//! Mazur-Rubin checks over the `localsign` core.

use clap::Parser;
use localsign::cli::{self, CliError};
use localsign::epsilon::{self, HodgeTateProfile, SignPartitionTable, SqrtChoice};
use localsign::lagrangian_mr::{self, PairSpec};
use localsign::linalg::Matrix;
use localsign::padic_core::{Coeff, Ring};
use localsign::phigamma::{self, LsdOptions, ModuleSpec};
use localsign::unit_characters::{ExtensionKind, QuadExtension};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(localsign, LocalSignError, PyException);
create_exception!(localsign, InputError, LocalSignError);
create_exception!(localsign, CheckError, LocalSignError);
create_exception!(localsign, BudgetError, LocalSignError);

fn to_py(e: impl Into<CliError>) -> PyErr {
    let e = e.into();
    let msg = e.to_string();
    match e {
        CliError::Input(_) => InputError::new_err(msg),
        CliError::Check(_) => CheckError::new_err(msg),
        CliError::Budget(_) => BudgetError::new_err(msg),
    }
}

fn input(msg: impl std::fmt::Display) -> PyErr {
    InputError::new_err(msg.to_string())
}

fn indices(r: Ring, v: &[Coeff]) -> Vec<u64> {
    v.iter().map(|&c| r.index(c)).collect()
}

fn rows(m: &Matrix) -> Vec<Vec<u64>> {
    (0..m.rows()).map(|i| indices(m.ring(), &m.row(i))).collect()
}

/// Quadratic extension `K = Q_p(delta)`.
#[pyclass(name = "QuadExtension", frozen)]
struct PyQuadExtension {
    inner: QuadExtension,
}

#[pymethods]
impl PyQuadExtension {
    /// `kind` is `"unram"`, `"ram-minus-p"` or `"ram-minus-pu"`.
    #[new]
    fn new(p: u64, kind: &str) -> PyResult<Self> {
        let kind = ExtensionKind::parse(kind).map_err(input)?;
        Ok(PyQuadExtension { inner: QuadExtension::new(p, kind).map_err(input)? })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.label()
    }

    #[getter]
    fn delta_sq(&self) -> i64 {
        self.inner.delta_sq
    }

    #[getter]
    fn is_ramified(&self) -> bool {
        self.inner.is_ramified()
    }

    /// Label every anticyclotomic character of order `p^n`, `n <= max_order_exp`.
    #[pyo3(signature = (max_order_exp = 1, weight = 0, sqrt_choice = "+"))]
    fn partition(&self, max_order_exp: u32, weight: u32, sqrt_choice: &str) -> PyResult<PySignTable> {
        let sqrt = SqrtChoice::parse(sqrt_choice).ok_or_else(|| input("sqrt_choice must be + or -"))?;
        Ok(PySignTable { inner: epsilon::partition(&self.inner, weight, sqrt, max_order_exp).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("QuadExtension(p={}, kind={:?})", self.inner.p, self.inner.kind.label())
    }
}

#[pyclass(name = "SignTable", frozen)]
struct PySignTable {
    inner: SignPartitionTable,
}

#[pymethods]
impl PySignTable {
    /// Rows `(exponents, order, conductor, epsilon, epsilon_hat, label)`.
    #[getter]
    fn records(&self) -> Vec<(Vec<u64>, u64, u32, i32, i32, String)> {
        self.inner
            .records
            .iter()
            .map(|r| {
                let c = &r.character;
                (c.exponents.clone(), c.order, r.conductor, r.epsilon, r.epsilon_hat, r.label.to_string())
            })
            .collect()
    }

    /// `(n, plus, minus)` per order exponent.
    fn counts_by_order(&self) -> Vec<(u32, usize, usize)> {
        self.inner.by_order.iter().map(|c| (c.order_exp, c.plus, c.minus)).collect()
    }

    fn is_balanced(&self) -> bool {
        self.inner.is_balanced()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("table serializes")
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }
}

/// `Gamma` constant of a Hodge-Tate profile given as `(weight, multiplicity)` pairs,
/// returned as `(num, den)`.
#[pyfunction]
fn gamma_constant(weights: Vec<(i64, u32)>) -> PyResult<(i128, i128)> {
    let g = epsilon::gamma_constant(&HodgeTateProfile::new(&weights)).map_err(to_py)?;
    Ok((g.num, g.den))
}

/// A rank-two mod `p^m` `(phi, Gamma)`-module described by a JSON spec.
#[pyclass(name = "Module", frozen)]
struct PyPhiGammaModule {
    spec: ModuleSpec,
}

#[pymethods]
impl PyPhiGammaModule {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = ModuleSpec::from_json(text).map_err(to_py)?;
        spec.build().map_err(to_py)?;
        Ok(PyPhiGammaModule { spec })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.spec).expect("spec serializes")
    }

    /// `(dim H^0, dim H^1, dim H^2)`.
    fn cohomology_dims(&self) -> PyResult<(usize, usize, usize)> {
        let b = self.spec.build().map_err(to_py)?;
        Ok(phigamma::herr_cohomology(&b.module, &b.schedule).map_err(to_py)?.dims())
    }

    /// Sign decomposition of `H^1`; `w_limit` overrides the default limit index.
    #[pyo3(signature = (w_limit = None))]
    fn decompose(&self, py: Python<'_>, w_limit: Option<u32>) -> PyResult<PySignDecomposition> {
        let b = self.spec.build().map_err(to_py)?;
        let opts = LsdOptions { schedule: b.schedule, w_limit_n: w_limit.unwrap_or(b.w_limit_n) };
        let sd = py.detach(|| phigamma::lsd_decompose(&b.module, &opts)).map_err(to_py)?;
        let r = b.module.ring();
        Ok(PySignDecomposition {
            dims: sd.dims,
            plus: indices(r, &sd.plus),
            minus: indices(r, &sd.minus),
            gram: rows(&sd.gram),
            w_matrix: rows(&sd.w_matrix),
            cross_pairing: r.index(sd.cross_pairing),
            sub_label: sd.path_b.as_ref().map(|b| b.sub_label),
            agreement: sd.agreement,
            w_limit_n: sd.w_limit_n,
        })
    }
}

/// Coordinates are ring-element indices in the `psi`-basis of `H^1`.
#[pyclass(name = "SignDecomposition", frozen, get_all)]
struct PySignDecomposition {
    dims: (usize, usize, usize),
    plus: Vec<u64>,
    minus: Vec<u64>,
    gram: Vec<Vec<u64>>,
    w_matrix: Vec<Vec<u64>>,
    cross_pairing: u64,
    /// Label of the sub line for reducible modules.
    sub_label: Option<i8>,
    agreement: bool,
    w_limit_n: u32,
}

#[pyclass(name = "MazurRubinReport", frozen, get_all)]
struct PyMrReport {
    p: u64,
    delta: u8,
    delta_path_a: u8,
    epsilon_ratio: i32,
    similitude_factor: u64,
    completed_epsilons: (i32, i32),
    holds: bool,
    json: String,
}

/// Compare `delta` of two reducible lifts with their completed epsilon ratio.
#[pyfunction]
fn mazur_rubin(py: Python<'_>, pair_json: &str) -> PyResult<PyMrReport> {
    let pair = PairSpec::from_json(pair_json).map_err(to_py)?;
    let rep = py.detach(|| lagrangian_mr::mr_compatibility(&pair)).map_err(to_py)?;
    Ok(PyMrReport {
        p: rep.p,
        delta: rep.delta,
        delta_path_a: rep.delta_path_a,
        epsilon_ratio: rep.epsilon_ratio,
        similitude_factor: rep.similitude_factor,
        completed_epsilons: (rep.lifts[0].completed_epsilon, rep.lifts[1].completed_epsilon),
        holds: rep.holds,
        json: serde_json::to_string(&rep).expect("report serializes"),
    })
}

/// Sign law on `F(1) + F`; returns `(delta, completed_epsilon, holds)`.
#[pyfunction]
fn anomalous_split_check(p: u64) -> PyResult<(u8, i32, bool)> {
    let ring = Ring::field(p, 1).map_err(input)?;
    let rep = lagrangian_mr::anomalous_split_check(ring).map_err(to_py)?;
    Ok((rep.delta, rep.completed_epsilon, rep.holds))
}

/// Runs the command line with `args` (without the program name); returns
/// `(exit_code, output)` where output is the report or the error record.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> (i32, String) {
    let argv = std::iter::once("localsign".to_string()).chain(args);
    let parsed = match cli::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => return (if e.use_stderr() { 2 } else { 0 }, e.to_string()),
    };
    py.detach(|| match cli::run(&parsed).and_then(|o| cli::emit(&o, cli::out_path(&parsed)).map(|t| (o.exit_code(), t))) {
        Ok((code, text)) => (code, text),
        Err(e) => (e.exit_code(), e.record()),
    })
}

#[pymodule]
#[pyo3(name = "localsign")]
pub fn localsign_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", cli::VERSION)?;
    m.add("LocalSignError", m.py().get_type::<LocalSignError>())?;
    m.add("InputError", m.py().get_type::<InputError>())?;
    m.add("CheckError", m.py().get_type::<CheckError>())?;
    m.add("BudgetError", m.py().get_type::<BudgetError>())?;
    m.add_class::<PyQuadExtension>()?;
    m.add_class::<PySignTable>()?;
    m.add_class::<PyPhiGammaModule>()?;
    m.add_class::<PySignDecomposition>()?;
    m.add_class::<PyMrReport>()?;
    m.add_function(wrap_pyfunction!(gamma_constant, m)?)?;
    m.add_function(wrap_pyfunction!(mazur_rubin, m)?)?;
    m.add_function(wrap_pyfunction!(anomalous_split_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
