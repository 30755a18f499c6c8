//! Python extension module exposing the main types and operations:
//! intersection closure with Bethe numbers, model documents, the GBP and
//! Bethe diffusion solvers, the exact oracle and the convergence sweep.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};

use bpdiff_core as core;
use bpdiff_core::{Algorithm, DiffusionConfig, Field0, Oracle};

fn to_py_err(err: core::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn parse_algorithm(name: &str) -> PyResult<Algorithm> {
    Algorithm::parse(name).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown algorithm {name:?}, expected \"gbp\" or \"bethe\""
        ))
    })
}

fn field_to_dict<'py>(py: Python<'py>, field: &Field0) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    for t in field.tensors() {
        let key = PyTuple::new(py, t.face().vertices().iter().copied())?;
        dict.set_item(key, t.values().to_vec())?;
    }
    Ok(dict)
}

/// An intersection-closed hypergraph with Bethe numbers.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Nerve {
    inner: core::Nerve,
}

#[pymethods]
impl Nerve {
    /// Intersection closure of a list of faces (lists of vertex ids).
    #[staticmethod]
    fn closure(faces: Vec<Vec<u32>>) -> PyResult<Self> {
        let faces = faces
            .into_iter()
            .map(core::Face::new)
            .collect::<core::Result<Vec<_>>>()
            .map_err(to_py_err)?;
        let inner = core::Nerve::intersection_closure(&faces).map_err(to_py_err)?;
        Ok(Nerve { inner })
    }

    #[getter]
    fn faces(&self) -> Vec<Vec<u32>> {
        self.inner
            .faces()
            .iter()
            .map(|f| f.vertices().to_vec())
            .collect()
    }

    fn bethe_numbers<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let dict = PyDict::new(py);
        for (face, c) in self.inner.faces().iter().zip(self.inner.bethe_numbers()) {
            let key = PyTuple::new(py, face.vertices().iter().copied())?;
            dict.set_item(key, *c)?;
        }
        Ok(dict)
    }

    fn strict_pairs(&self) -> Vec<(Vec<u32>, Vec<u32>)> {
        self.inner
            .strict_pairs()
            .iter()
            .map(|&(a, b)| {
                (
                    self.inner.face(a).vertices().to_vec(),
                    self.inner.face(b).vertices().to_vec(),
                )
            })
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.face_count()
    }

    fn __repr__(&self) -> String {
        format!("Nerve({} faces)", self.inner.face_count())
    }
}

/// Outcome of one diffusion run.
#[pyclass(frozen)]
struct DiffusionReport {
    inner: core::DiffusionReport,
}

#[pymethods]
impl DiffusionReport {
    #[getter]
    fn algorithm(&self) -> &'static str {
        self.inner.algorithm.name()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn diverged(&self) -> bool {
        self.inner.diverged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations_run
    }

    #[getter]
    fn residual_initial(&self) -> f64 {
        self.inner.residual_initial
    }

    #[getter]
    fn residual_final(&self) -> f64 {
        self.inner.residual_final
    }

    #[getter]
    fn decay_ratio(&self) -> f64 {
        self.inner.decay_ratio
    }

    #[getter]
    fn residual_trace(&self) -> Vec<f64> {
        self.inner.residual_trace.clone()
    }

    /// Final beliefs as a dict mapping face tuples to flat row-major lists.
    fn beliefs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        field_to_dict(py, self.inner.final_beliefs.field())
    }

    fn __repr__(&self) -> String {
        format!(
            "DiffusionReport(algorithm={}, converged={}, diverged={}, residual={:.3e})",
            self.inner.algorithm,
            self.inner.converged,
            self.inner.diverged,
            self.inner.residual_final
        )
    }
}

/// Variable cardinalities, a closed nerve and an initial potential.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Model {
    inner: core::Model,
}

#[pymethods]
impl Model {
    /// The 2-horn preset: three triangles joined at a common vertex,
    /// binary variables, zero potential.
    #[staticmethod]
    fn horn2() -> Self {
        Model {
            inner: core::Model::horn2(),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (text, apply_closure=true))]
    fn from_json(text: &str, apply_closure: bool) -> PyResult<Self> {
        let doc = core::ModelDocument::from_json(text).map_err(to_py_err)?;
        Ok(Model {
            inner: core::load_model(&doc, apply_closure).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, apply_closure=true))]
    fn load(path: &str, apply_closure: bool) -> PyResult<Self> {
        let doc = core::ModelDocument::load(path.as_ref()).map_err(to_py_err)?;
        Ok(Model {
            inner: core::load_model(&doc, apply_closure).map_err(to_py_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner
            .to_document()
            .and_then(|d| d.to_json())
            .map_err(to_py_err)
    }

    #[getter]
    fn nerve(&self) -> Nerve {
        Nerve {
            inner: self.inner.nerve().clone(),
        }
    }

    #[getter]
    fn variables(&self) -> BTreeMap<u32, usize> {
        self.inner.shape().cardinalities().clone()
    }

    fn potential<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        field_to_dict(py, self.inner.potential())
    }

    /// Copy of the model with every potential entry redrawn as
    /// (1/temperature) * N(0, 1) from the seeded generator.
    fn sample_potential(&self, temperature: f64, seed: u64) -> PyResult<Self> {
        let field = core::sample_initial(self.inner.nerve(), self.inner.shape(), temperature, seed)
            .map_err(to_py_err)?;
        let mut inner = self.inner.clone();
        inner.set_potential(field).map_err(to_py_err)?;
        Ok(Model { inner })
    }

    /// Run a diffusion from the model's potential.
    #[pyo3(signature = (algorithm="bethe", eps=0.5, iters=100, tol=1e-8))]
    fn solve(
        &self,
        algorithm: &str,
        eps: f64,
        iters: usize,
        tol: f64,
    ) -> PyResult<DiffusionReport> {
        let mut config = DiffusionConfig::new(parse_algorithm(algorithm)?, eps, iters);
        config.residual_tolerance = tol;
        let inner = core::run(&self.inner, &config).map_err(to_py_err)?;
        Ok(DiffusionReport { inner })
    }

    /// Exact marginals by brute-force enumeration of the global states.
    fn true_marginals<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let marginals = Oracle::new(self.inner.context())
            .true_marginals(self.inner.potential())
            .map_err(to_py_err)?;
        field_to_dict(py, marginals.field())
    }

    fn log_partition(&self) -> PyResult<f64> {
        Oracle::new(self.inner.context())
            .log_partition(self.inner.potential())
            .map_err(to_py_err)
    }

    fn free_energy(&self) -> PyResult<f64> {
        Ok(-self.log_partition()?)
    }

    /// Sup norm of the marginal-consistency defect d(q) of the model's
    /// current beliefs.
    fn belief_residual(&self) -> PyResult<f64> {
        let ctx = self.inner.context();
        let q = ctx.beliefs(self.inner.potential()).map_err(to_py_err)?;
        Ok(ctx.differential(q.field()).map_err(to_py_err)?.sup_norm())
    }

    fn __repr__(&self) -> String {
        format!(
            "Model({} variables, {} faces)",
            self.inner.shape().cardinalities().len(),
            self.inner.nerve().face_count()
        )
    }
}

/// Convergence sweep over diffusivities and temperatures; returns CSV text.
#[pyfunction]
#[pyo3(signature = (model, eps=None, temp=None, seeds=100, seed_base=0, iters=10, tol=core::bench::DEFAULT_DECAY_TOLERANCE))]
#[allow(clippy::too_many_arguments)]
fn bench_csv(
    model: &Model,
    eps: Option<Vec<f64>>,
    temp: Option<Vec<f64>>,
    seeds: u64,
    seed_base: u64,
    iters: usize,
    tol: f64,
) -> PyResult<String> {
    let spec = core::BenchSpec {
        temperatures: temp.unwrap_or_else(core::bench::default_temperatures),
        diffusivities: eps.unwrap_or_else(core::bench::default_diffusivities),
        seeds,
        seed_base,
        iterations: iters,
        tolerance: tol,
    };
    Ok(core::bench(&model.inner, &spec)
        .map_err(to_py_err)?
        .to_csv())
}

#[pymodule]
fn bpdiff(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Nerve>()?;
    m.add_class::<Model>()?;
    m.add_class::<DiffusionReport>()?;
    m.add_function(wrap_pyfunction!(bench_csv, m)?)?;
    Ok(())
}
