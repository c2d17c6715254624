//! Python module `semiesc`.

use num_complex::Complex64;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use semiesc_core::conjugacy::{conjugate_map, conjugate_semigroup};
use semiesc_core::escape::{classify_branches, classify_orbit, compute_grid, BranchStatus, OrbitStatus};
use semiesc_core::harness::{resolve_config, run_scenario as run_core, scenario_ids as core_ids};
use semiesc_core::render::{render, Palette};
use semiesc_core::topology::{self, Connectivity, PixelSet};
use semiesc_core::words::{eval_word, normal_form, Word};
use semiesc_core::{AffineMap, Budget, Cell, ComplexValue, Error, Raster, Subject, Window};

fn err(e: Error) -> PyErr {
    match e {
        Error::UnknownScenario(id) => PyKeyError::new_err(format!("unknown scenario {id:?}")),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn finite(v: ComplexValue) -> Option<Complex64> {
    v.finite()
}

fn budget(max_iter: usize, r_escape: f64, r_bound: f64) -> PyResult<Budget> {
    Budget::new(max_iter, r_escape, r_bound).map_err(err)
}

/// An entire map from one of the closed families. Evaluation returns `None`
/// on overflow.
#[pyclass(name = "EntireMap", frozen, skip_from_py_object, module = "semiesc")]
#[derive(Clone)]
struct PyMap(semiesc_core::EntireMap);

#[pymethods]
impl PyMap {
    /// `exp(a z + b) + c`
    #[staticmethod]
    #[pyo3(signature = (a, b = Complex64::new(0.0, 0.0), c = Complex64::new(0.0, 0.0)))]
    fn exp_affine(a: Complex64, b: Complex64, c: Complex64) -> PyResult<Self> {
        semiesc_core::EntireMap::exp_affine(a, b, c).map(PyMap).map_err(err)
    }

    #[staticmethod]
    fn exp_lambda(lam: Complex64) -> PyResult<Self> {
        semiesc_core::EntireMap::exp_lambda(lam).map(PyMap).map_err(err)
    }

    /// `lam sin z + c`
    #[staticmethod]
    #[pyo3(signature = (lam, c = Complex64::new(0.0, 0.0)))]
    fn sine_affine(lam: Complex64, c: Complex64) -> PyResult<Self> {
        semiesc_core::EntireMap::sine_affine(lam, c).map(PyMap).map_err(err)
    }

    #[staticmethod]
    fn affine(alpha: Complex64, beta: Complex64) -> PyResult<Self> {
        semiesc_core::EntireMap::affine(alpha, beta).map(PyMap).map_err(err)
    }

    /// `base^s + c`; `c` must be a period of `base`.
    #[staticmethod]
    fn iter_translate(base: PyRef<'_, PyMap>, s: u32, c: Complex64) -> PyResult<Self> {
        semiesc_core::EntireMap::iter_translate(base.0.clone(), s, c).map(PyMap).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PyMap).map_err(json_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }

    fn __call__(&self, z: Complex64) -> Option<Complex64> {
        finite(self.0.at(z))
    }

    fn derivative(&self, z: Complex64) -> Option<Complex64> {
        finite(self.0.derivative(ComplexValue::Finite(z)))
    }

    fn period(&self) -> Option<Complex64> {
        self.0.period()
    }

    fn singular_values(&self) -> PyResult<Vec<Complex64>> {
        self.0.singular_values().map_err(err)
    }

    /// `[z, f(z), ..., f^n(z)]`
    fn orbit(&self, z: Complex64, n: usize) -> Vec<Option<Complex64>> {
        self.0.orbit(z, n).into_iter().map(finite).collect()
    }

    /// `φ ∘ f ∘ φ⁻¹` for `φ(z) = alpha z + beta`.
    fn conjugate(&self, alpha: Complex64, beta: Complex64) -> PyResult<Self> {
        let phi = AffineMap::new(alpha, beta).map_err(err)?;
        Ok(PyMap(conjugate_map(&self.0, &phi)))
    }

    fn __repr__(&self) -> String {
        format!("EntireMap({})", self.to_json().unwrap_or_default())
    }
}

#[pyclass(name = "Semigroup", frozen, skip_from_py_object, module = "semiesc")]
#[derive(Clone)]
struct PySemigroup(semiesc_core::Semigroup);

#[pymethods]
impl PySemigroup {
    #[new]
    fn new(generators: Vec<PyRef<'_, PyMap>>) -> PyResult<Self> {
        semiesc_core::Semigroup::new(generators.iter().map(|g| g.0.clone()).collect()).map(PySemigroup).map_err(err)
    }

    /// `[f, f^s + c]` with the structure tag used by `normal_form`.
    #[staticmethod]
    fn periodic_translate(f: PyRef<'_, PyMap>, s: u32, c: Complex64) -> PyResult<Self> {
        semiesc_core::Semigroup::periodic_translate(f.0.clone(), s, c).map(PySemigroup).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PySemigroup).map_err(json_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn generators(&self) -> Vec<PyMap> {
        self.0.generators().iter().cloned().map(PyMap).collect()
    }

    /// Applies the word's letters left to right.
    fn eval_word(&self, word: Vec<usize>, z: Complex64) -> PyResult<Option<Complex64>> {
        eval_word(&self.0, &Word::new(word), ComplexValue::Finite(z)).map(finite).map_err(err)
    }

    /// `(K, translated)`
    fn normal_form(&self, word: Vec<usize>) -> PyResult<(u64, bool)> {
        normal_form(&self.0, &Word::new(word)).map(|nf| (nf.k, nf.translated)).map_err(err)
    }

    fn conjugate(&self, alpha: Complex64, beta: Complex64) -> PyResult<Self> {
        let phi = AffineMap::new(alpha, beta).map_err(err)?;
        conjugate_semigroup(&self.0, &phi).map(PySemigroup).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Semigroup({})", self.to_json().unwrap_or_default())
    }
}

/// Per-pixel classification over a window. Cells are `"E"`, `"B"` or `"U"`.
#[pyclass(name = "Raster", frozen, module = "semiesc")]
struct PyRaster(Raster);

#[pymethods]
impl PyRaster {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PyRaster).map_err(json_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height
    }

    #[getter]
    fn window(&self) -> [f64; 4] {
        self.0.window.into()
    }

    fn cell(&self, i: usize, j: usize) -> PyResult<char> {
        if i >= self.0.width || j >= self.0.height {
            return Err(PyValueError::new_err(format!("pixel ({i}, {j}) outside the raster")));
        }
        Ok(self.0.get(i, j).code())
    }

    /// Row-major cell codes.
    fn cells(&self) -> String {
        self.0.cells.iter().map(|c| c.code()).collect()
    }

    fn counts(&self) -> (usize, usize, usize) {
        (self.0.count(Cell::Esc), self.0.count(Cell::Bnd), self.0.count(Cell::Und))
    }

    #[pyo3(signature = (path, palette = "heat"))]
    fn render(&self, path: std::path::PathBuf, palette: &str) -> PyResult<()> {
        let palette: Palette = palette.parse().map_err(err)?;
        render(&self.0, palette, &path).map_err(err)
    }

    /// Components of the ESC cells as JSON.
    #[pyo3(signature = (connectivity = 8))]
    fn components(&self, connectivity: u8) -> PyResult<String> {
        let conn = Connectivity::try_from(connectivity).map_err(err)?;
        serde_json::to_string(&topology::connected_components(&self.0, conn)).map_err(json_err)
    }

    fn boundary(&self) -> Vec<(usize, usize)> {
        topology::boundary(&self.0).pixels().to_vec()
    }
}

#[pyfunction]
#[pyo3(name = "classify_orbit", signature = (f, z, max_iter = 200, r_escape = 1e50, r_bound = 1e3))]
fn classify_orbit_py<'py>(py: Python<'py>, f: PyRef<'_, PyMap>, z: Complex64, max_iter: usize, r_escape: f64, r_bound: f64) -> PyResult<Bound<'py, PyDict>> {
    let record = classify_orbit(&f.0, ComplexValue::Finite(z), &budget(max_iter, r_escape, r_bound)?);
    let out = PyDict::new(py);
    match record.status {
        OrbitStatus::Escaped { step } => {
            out.set_item("status", "escaped")?;
            out.set_item("step", step)?;
        }
        OrbitStatus::Bounded { max_modulus } => {
            out.set_item("status", "bounded")?;
            out.set_item("max_modulus", max_modulus)?;
        }
        OrbitStatus::Undetermined => out.set_item("status", "undetermined")?,
    }
    Ok(out)
}

type BranchTuple = (&'static str, Option<Vec<usize>>, Option<usize>);

/// `(status, witness, escape_step)`; the witness word is set only for a
/// bounded branch.
#[pyfunction]
#[pyo3(name = "classify_branches", signature = (g, z, depth = 6, max_iter = 200, r_escape = 1e50, r_bound = 1e3))]
fn classify_branches_py(
    g: PyRef<'_, PySemigroup>,
    z: Complex64,
    depth: usize,
    max_iter: usize,
    r_escape: f64,
    r_bound: f64,
) -> PyResult<BranchTuple> {
    let class = classify_branches(&g.0, ComplexValue::Finite(z), depth, &budget(max_iter, r_escape, r_bound)?).map_err(err)?;
    Ok(match class.status {
        BranchStatus::AllBranchesEscape => ("all_branches_escape", None, class.escape_step),
        BranchStatus::SomeBranchBounded(w) => ("some_branch_bounded", Some(w.0), None),
        BranchStatus::Undetermined => ("undetermined", None, None),
    })
}

/// Classifies a `width × height` grid over `window = (re_min, re_max, im_min, im_max)`
/// for an `EntireMap` or a `Semigroup`.
#[pyfunction]
#[pyo3(signature = (subject, window, width, height, depth = 6, max_iter = 200, r_escape = 1e50, r_bound = 1e3))]
#[allow(clippy::too_many_arguments)]
fn grid(
    py: Python<'_>,
    subject: &Bound<'_, PyAny>,
    window: (f64, f64, f64, f64),
    width: usize,
    height: usize,
    depth: usize,
    max_iter: usize,
    r_escape: f64,
    r_bound: f64,
) -> PyResult<PyRaster> {
    let subject = if let Ok(f) = subject.extract::<PyRef<'_, PyMap>>() {
        Subject::Map(f.0.clone())
    } else if let Ok(g) = subject.extract::<PyRef<'_, PySemigroup>>() {
        Subject::Semigroup(g.0.clone())
    } else {
        return Err(PyValueError::new_err("subject must be an EntireMap or a Semigroup"));
    };
    let window = Window::new(window.0, window.1, window.2, window.3).map_err(err)?;
    let b = budget(max_iter, r_escape, r_bound)?;
    py.detach(|| compute_grid(&subject, window, width, height, depth, &b)).map(PyRaster).map_err(err)
}

#[pyfunction]
fn hausdorff_px(a: Vec<(usize, usize)>, b: Vec<(usize, usize)>) -> PyResult<f64> {
    topology::hausdorff_px(&PixelSet::new(a), &PixelSet::new(b)).map_err(err)
}

#[pyfunction]
fn scenario_ids() -> Vec<&'static str> {
    core_ids()
}

/// Runs a catalog scenario; `overrides` is a JSON object string. Returns the
/// report as a dict.
#[pyfunction]
#[pyo3(signature = (id, overrides = None, out_dir = None))]
fn run_scenario<'py>(py: Python<'py>, id: &str, overrides: Option<&str>, out_dir: Option<std::path::PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let overrides = overrides.map(serde_json::from_str::<serde_json::Value>).transpose().map_err(json_err)?;
    let cfg = resolve_config(id, overrides.as_ref()).map_err(err)?;
    let report = py.detach(|| run_core(id, &cfg, out_dir.as_deref())).map_err(err)?;
    let text = serde_json::to_string(&report).map_err(json_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
fn semiesc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMap>()?;
    m.add_class::<PySemigroup>()?;
    m.add_class::<PyRaster>()?;
    m.add_function(wrap_pyfunction!(classify_orbit_py, m)?)?;
    m.add_function(wrap_pyfunction!(classify_branches_py, m)?)?;
    m.add_function(wrap_pyfunction!(grid, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff_px, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_ids, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
