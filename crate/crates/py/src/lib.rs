//! Python bindings for `hkfractal`.
//!
//! Rationals cross the boundary as `fractions.Fraction`; every library error
//! becomes `HKError`, whose message starts with the error kind.

use hkfractal::colength::{colength_table, direct_en, DenseLimit};
use hkfractal::engine::{discover_rules, hk_multiplicity, hks_sum, parse_rules_file};
use hkfractal::grid::sample_phi;
use hkfractal::rational::{fmt_q, parse_q};
use hkfractal::zdh::{fit_mu, ZDInput};
use hkfractal::{Error, GammaVec, GridFn, Prime, RatFunc, RuleSystem, Q};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(hkfractal_py, HKError, PyValueError);

fn err(e: Error) -> PyErr {
    HKError::new_err(format!("{}: {e}", e.kind()))
}

fn prime(p: u64) -> PyResult<Prime> {
    Prime::new(p).map_err(err)
}

fn fraction<'py>(py: Python<'py>, x: &Q) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((fmt_q(x),))
}

fn fractions<'py>(py: Python<'py>, xs: &[Q]) -> PyResult<Vec<Bound<'py, PyAny>>> {
    xs.iter().map(|x| fraction(py, x)).collect()
}

/// Accepts an int, a `Fraction`, or a string such as `"-3/4"`.
fn to_q(x: &Bound<'_, PyAny>) -> PyResult<Q> {
    parse_q(&x.str()?.to_cow()?).map_err(err)
}

/// A polynomial over F_p. Variables default to the sorted identifiers of the
/// text.
#[pyclass(name = "Poly", frozen, from_py_object)]
#[derive(Clone)]
struct PyPoly(hkfractal::Poly);

#[pymethods]
impl PyPoly {
    #[new]
    #[pyo3(signature = (text, p, vars = None))]
    fn new(text: &str, p: u64, vars: Option<Vec<String>>) -> PyResult<Self> {
        let vars = vars.unwrap_or_else(|| {
            let mut found = hkfractal::poly::identifiers(text);
            found.sort();
            if found.is_empty() { vec!["x".to_string()] } else { found }
        });
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        hkfractal::Poly::parse(text, prime(p)?, &refs).map(PyPoly).map_err(err)
    }

    #[getter]
    fn p(&self) -> u32 {
        self.0.modulus().get()
    }

    #[getter]
    fn vars(&self) -> Vec<String> {
        self.0.vars().to_vec()
    }

    /// The colength dim F_p[x]/(x_1^q, ..., x_s^q, f).
    fn colength(&self, q: usize) -> PyResult<u64> {
        hkfractal::colength::colength(q, &self.0).map_err(err)
    }

    /// `[c(q, f^a) for a in 0..=amax]`.
    fn colength_table(&self, q: usize, amax: usize) -> PyResult<Vec<u64>> {
        colength_table(q, &self.0, amax).map(|t| t.values).map_err(err)
    }

    /// e_n(f), the colength at q = p^n.
    fn e(&self, n: u32) -> PyResult<u64> {
        direct_en(&self.0, n, DenseLimit::default()).map_err(err)
    }

    fn phi(&self, depth: u32) -> PyResult<PyGridFn> {
        sample_phi(&self.0, depth).map(PyGridFn).map_err(err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly('{}', p={})", self.0, self.0.modulus())
    }
}

/// An element of the representation ring Γ_p, in the λ basis.
#[pyclass(name = "GammaVec", frozen, from_py_object)]
#[derive(Clone)]
struct PyGammaVec(GammaVec);

#[pymethods]
impl PyGammaVec {
    /// Parses e.g. `"L0 + 2*L3 - 1/2*L5"`.
    #[new]
    fn new(text: &str, p: u64) -> PyResult<Self> {
        GammaVec::parse(text, prime(p)?).map(PyGammaVec).map_err(err)
    }

    #[staticmethod]
    fn lam(p: u64, i: usize) -> PyResult<Self> {
        Ok(PyGammaVec(GammaVec::lambda(prime(p)?, i)))
    }

    #[staticmethod]
    fn delta(p: u64, n: usize) -> PyResult<Self> {
        Ok(PyGammaVec(GammaVec::delta(prime(p)?, n)))
    }

    fn coeffs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (i, c) in self.0.terms() {
            d.set_item(i, fraction(py, c)?)?;
        }
        Ok(d)
    }

    fn alpha<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.alpha())
    }

    fn theta(&self) -> PyResult<Self> {
        self.0.theta().map(PyGammaVec).map_err(err)
    }

    fn psi(&self) -> Self {
        PyGammaVec(self.0.psi())
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        self.0.mul(&other.0).map(PyGammaVec).map_err(err)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        self.0.add(&other.0).map(PyGammaVec).map_err(err)
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.0.sub(&other.0).map(PyGammaVec).map_err(err)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("GammaVec('{}', p={})", self.0, self.0.modulus())
    }
}

/// Exact samples of a function on the grid i / p^depth.
#[pyclass(name = "GridFn", frozen, from_py_object)]
#[derive(Clone)]
struct PyGridFn(GridFn);

#[pymethods]
impl PyGridFn {
    #[new]
    fn new(p: u64, depth: u32, values: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let values = values.iter().map(to_q).collect::<PyResult<Vec<_>>>()?;
        GridFn::new(prime(p)?, depth, values).map(PyGridFn).map_err(err)
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.0.depth()
    }

    #[getter]
    fn q(&self) -> usize {
        self.0.q()
    }

    fn values<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        fractions(py, self.0.values())
    }

    fn phi_product(&self, other: &Self) -> PyResult<Self> {
        self.0.phi_product(&other.0).map(PyGridFn).map_err(err)
    }

    fn phi_power(&self, m: usize) -> PyResult<Self> {
        self.0.phi_power(m).map(PyGridFn).map_err(err)
    }

    /// Discovers the shift rules of this function's coherent sequence.
    #[pyo3(signature = (s, root = "a"))]
    fn discover(&self, s: u32, root: &str) -> PyResult<PyRuleSystem> {
        discover_rules(&self.0, s, root).map(|d| PyRuleSystem(d.system)).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.values().len()
    }
}

/// A closed system of shift rules, as produced by discovery or read from JSON.
#[pyclass(name = "RuleSystem", frozen, from_py_object)]
#[derive(Clone)]
struct PyRuleSystem(RuleSystem);

#[pymethods]
impl PyRuleSystem {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        RuleSystem::from_json(text).map(PyRuleSystem).map_err(err)
    }

    /// Reads a single system or a JSON array of systems.
    #[staticmethod]
    fn load_all(text: &str) -> PyResult<Vec<Self>> {
        Ok(parse_rules_file(text).map_err(err)?.into_iter().map(PyRuleSystem).collect())
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn p(&self) -> u32 {
        self.0.p.get()
    }

    #[getter]
    fn s(&self) -> u32 {
        self.0.s
    }

    #[getter]
    fn basis(&self) -> Vec<String> {
        self.0.basis.clone()
    }

    fn __repr__(&self) -> String {
        format!("RuleSystem(p={}, s={}, basis={:?})", self.0.p, self.0.s, self.0.basis)
    }
}

/// A rational function in z with rational coefficients.
#[pyclass(name = "RatFunc", frozen, from_py_object)]
#[derive(Clone)]
struct PyRatFunc(RatFunc);

#[pymethods]
impl PyRatFunc {
    fn numerator<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        fractions(py, self.0.numerator().coeffs())
    }

    fn denominator<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        fractions(py, self.0.denominator().coeffs())
    }

    /// The first `n` power-series coefficients.
    fn taylor<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Vec<Bound<'py, PyAny>>> {
        fractions(py, &self.0.taylor(n))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("RatFunc('{}')", self.0)
    }
}

/// The Hilbert-Kunz series of the sum of the given summands.
#[pyfunction]
fn hk_series(systems: Vec<PyRuleSystem>) -> PyResult<PyRatFunc> {
    let systems: Vec<RuleSystem> = systems.into_iter().map(|s| s.0).collect();
    hks_sum(&systems).map(PyRatFunc).map_err(err)
}

#[pyfunction]
fn multiplicity<'py>(py: Python<'py>, series: &PyRatFunc, s_tot: u32, p: u64) -> PyResult<Bound<'py, PyAny>> {
    let mu = hk_multiplicity(&series.0, s_tot, prime(p)?).map_err(err)?;
    fraction(py, &mu)
}

/// Fits e_n(z^D - h) = μ q^2 + μ₁ q + ρ_n over n_lo..=n_hi; returns a dict.
#[pyfunction]
#[pyo3(signature = (p, d, h, n_lo, n_hi, e_avoids_exponents = false))]
fn zd_fit<'py>(
    py: Python<'py>,
    p: u64,
    d: u64,
    h: &str,
    n_lo: u32,
    n_hi: u32,
    e_avoids_exponents: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let h = hkfractal::Poly::parse(h, prime(p)?, &["x", "y"]).map_err(err)?;
    let mut input = ZDInput::new(d, h).map_err(err)?;
    input.e_avoids_exponents = e_avoids_exponents;
    let fit = fit_mu(&input, n_lo, n_hi).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("mu", fraction(py, &fit.mu)?)?;
    out.set_item("mu1", fraction(py, &fit.mu1)?)?;
    out.set_item("values", fit.values.clone())?;
    let tail = fit.tail.iter().map(|(n, r)| Ok((*n, fraction(py, r)?))).collect::<PyResult<Vec<_>>>()?;
    out.set_item("tail", tail)?;
    out.set_item("period", fit.period)?;
    out.set_item("preperiod", fit.preperiod)?;
    Ok(out)
}

#[pymodule]
fn hkfractal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HKError", m.py().get_type::<HKError>())?;
    m.add_class::<PyPoly>()?;
    m.add_class::<PyGammaVec>()?;
    m.add_class::<PyGridFn>()?;
    m.add_class::<PyRuleSystem>()?;
    m.add_class::<PyRatFunc>()?;
    m.add_function(wrap_pyfunction!(hk_series, m)?)?;
    m.add_function(wrap_pyfunction!(multiplicity, m)?)?;
    m.add_function(wrap_pyfunction!(zd_fit, m)?)?;
    Ok(())
}
