//! Python bindings: the multivector type plus the kernel evaluators and a
//! jet-based annihilation residual, exposed as the `higherspin_py` module.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;

use higherspin::clifford::{self, InversionConvention};
use higherspin::cylinder::{self, CylinderSpec};
use higherspin::hopf::{self, HopfSpec, SpinStructure};
use higherspin::kernels::{self, EuclideanKernelField, KernelParams, ULinearField};
use higherspin::operators::{higher_spin_apply, OperatorSpec};
use higherspin::Error;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Singularity { .. } => PyZeroDivisionError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Dense element of the real Clifford algebra Cl_m.
#[pyclass(name = "Multivector", from_py_object)]
#[derive(Clone)]
struct PyMultivector {
    inner: clifford::Multivector,
}

#[pymethods]
impl PyMultivector {
    /// Multivector(dim, coeffs): coeffs is a {blade_bitmask: value} dict.
    #[new]
    #[pyo3(signature = (dim, coeffs=None))]
    fn new(dim: usize, coeffs: Option<BTreeMap<usize, f64>>) -> PyResult<Self> {
        if !(2..=clifford::MAX_DIM).contains(&dim) {
            return Err(PyValueError::new_err("dim out of range 2..=10"));
        }
        let mut mv = clifford::Multivector::zero(dim);
        if let Some(map) = coeffs {
            for (mask, value) in map {
                if mask >= (1 << dim) {
                    return Err(PyValueError::new_err(format!(
                        "blade bitmask {mask} out of range"
                    )));
                }
                mv.set_coeff(mask, value);
            }
        }
        Ok(PyMultivector { inner: mv })
    }

    #[staticmethod]
    fn from_vector(x: Vec<f64>) -> PyResult<Self> {
        if !(2..=clifford::MAX_DIM).contains(&x.len()) {
            return Err(PyValueError::new_err("vector length out of range 2..=10"));
        }
        Ok(PyMultivector {
            inner: clifford::Multivector::from_vector(&x),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Nonzero blade coefficients as {bitmask: value}.
    fn coeffs(&self) -> BTreeMap<usize, f64> {
        self.inner
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(mask, &c)| (mask, c))
            .collect()
    }

    fn scalar_part(&self) -> f64 {
        self.inner.scalar_part()
    }

    fn vector_part(&self) -> Vec<f64> {
        self.inner.vector_part()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn conjugate(&self) -> Self {
        PyMultivector {
            inner: self.inner.conjugate(),
        }
    }

    fn geometric_product(&self, other: &PyMultivector) -> PyResult<Self> {
        Ok(PyMultivector {
            inner: self
                .inner
                .geometric_product(&other.inner)
                .map_err(to_py_err)?,
        })
    }

    fn inverse(&self) -> PyResult<Self> {
        Ok(PyMultivector {
            inner: clifford::vector_inverse(&self.inner).map_err(to_py_err)?,
        })
    }

    fn __mul__(&self, other: &PyMultivector) -> PyResult<Self> {
        self.geometric_product(other)
    }

    fn __add__(&self, other: &PyMultivector) -> PyResult<Self> {
        if self.inner.dim() != other.inner.dim() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(PyMultivector {
            inner: &self.inner + &other.inner,
        })
    }

    fn __sub__(&self, other: &PyMultivector) -> PyResult<Self> {
        if self.inner.dim() != other.inner.dim() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(PyMultivector {
            inner: &self.inner - &other.inner,
        })
    }

    fn __repr__(&self) -> String {
        format!("Multivector(dim={}, {})", self.inner.dim(), self.inner)
    }
}

/// reflect(x, u): the sandwich x u x / ||x||^2 on coordinate vectors.
#[pyfunction]
fn reflect(x: Vec<f64>, u: Vec<f64>) -> PyResult<Vec<f64>> {
    clifford::reflect_coords(&x, &u).map_err(to_py_err)
}

/// Degree-1 harmonic reproducing kernel value m <u, v>.
#[pyfunction]
fn z1_harmonic(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    let m = u.len();
    let z = kernels::z1_harmonic(
        &clifford::Multivector::from_vector(&u),
        &clifford::Multivector::from_vector(&v),
        m,
    )
    .map_err(to_py_err)?;
    Ok(z.scalar_part())
}

/// Degree-1 monogenic reproducing kernel (Clifford-valued).
#[pyfunction]
fn z1_monogenic(u: Vec<f64>, v: Vec<f64>) -> PyResult<PyMultivector> {
    let m = u.len();
    let z = kernels::z1_monogenic(
        &clifford::Multivector::from_vector(&u),
        &clifford::Multivector::from_vector(&v),
        m,
    )
    .map_err(to_py_err)?;
    Ok(PyMultivector { inner: z })
}

/// Fundamental solution E_{1,k}(x, u, v) on flat space.
#[pyfunction]
#[pyo3(signature = (m, k, x, u, v, c1=1.0))]
fn e1k(m: usize, k: usize, x: Vec<f64>, u: Vec<f64>, v: Vec<f64>, c1: f64) -> PyResult<PyMultivector> {
    let params = KernelParams::with_c1(m, k, c1).map_err(to_py_err)?;
    let val = kernels::e_1k(
        &clifford::Multivector::from_vector(&x),
        &clifford::Multivector::from_vector(&u),
        &clifford::Multivector::from_vector(&v),
        &params,
    )
    .map_err(to_py_err)?;
    Ok(PyMultivector { inner: val })
}

/// Truncated cotangent kernel on the l-cylinder (twist p, sup-norm radius R).
#[pyfunction]
#[pyo3(signature = (m, k, l, x, u, v, p=0, radius=4, c1=1.0))]
#[allow(clippy::too_many_arguments)]
fn cot_kernel(
    m: usize,
    k: usize,
    l: usize,
    x: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    p: usize,
    radius: i64,
    c1: f64,
) -> PyResult<PyMultivector> {
    let params = KernelParams::with_c1(m, k, c1).map_err(to_py_err)?;
    let spec = CylinderSpec::new(params, l, p, radius).map_err(to_py_err)?;
    let val = cylinder::cot_kernel_twisted(&x, &u, &v, &spec).map_err(to_py_err)?;
    Ok(PyMultivector { inner: val })
}

/// Truncated Hopf-manifold kernel for spin structure "f1" or "f2".
#[pyfunction]
#[pyo3(signature = (m, k, x, y, u, v, t=2.0, n=4, structure="f1", inversion="algebraic"))]
#[allow(clippy::too_many_arguments)]
fn hopf_kernel(
    m: usize,
    k: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    t: f64,
    n: usize,
    structure: &str,
    inversion: &str,
) -> PyResult<PyMultivector> {
    let params = KernelParams::new(m, k).map_err(to_py_err)?;
    let s = match structure {
        "f1" => SpinStructure::F1,
        "f2" => SpinStructure::F2,
        other => return Err(PyValueError::new_err(format!("unknown structure {other:?}"))),
    };
    let conv = match inversion {
        "algebraic" => InversionConvention::Algebraic,
        "kelvin" => InversionConvention::Kelvin,
        other => return Err(PyValueError::new_err(format!("unknown inversion {other:?}"))),
    };
    let spec = HopfSpec::new(params, t, n, s)
        .map_err(to_py_err)?
        .with_inversion(conv);
    let val = hopf::hopf_kernel(&x, &y, &u, &v, &spec).map_err(to_py_err)?;
    Ok(PyMultivector { inner: val })
}

/// First l coordinates reduced mod 1 into [0, 1).
#[pyfunction]
fn fold_to_fundamental_domain(x: Vec<f64>, l: usize) -> Vec<f64> {
    cylinder::fold_to_fundamental_domain(&x, l)
}

/// Rescales x by the group power putting its norm into [1, max(t, 1/t)).
#[pyfunction]
fn fold_to_annulus(x: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
    hopf::fold_to_annulus(&x, t).map_err(to_py_err)
}

/// The operator coefficients (a, b, c) of the order-k operator in dimension m.
#[pyfunction]
fn operator_coefficients(m: usize, k: usize) -> PyResult<(f64, f64, f64)> {
    let spec = OperatorSpec::new(m, k).map_err(to_py_err)?;
    Ok((spec.a, spec.b, spec.c))
}

/// Relative residual of the order-k operator applied (through jets) to
/// E_{1,k}(., u, v) at x; the defining annihilation property makes this
/// vanish to machine precision.
#[pyfunction]
fn annihilation_residual(m: usize, k: usize, x: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    let params = KernelParams::new(m, k).map_err(to_py_err)?;
    let op = OperatorSpec::new(m, k).map_err(to_py_err)?;
    let field = EuclideanKernelField::new(params, &v).map_err(to_py_err)?;
    let out = higher_spin_apply(&op, &field, &x).map_err(to_py_err)?;
    let scale = field
        .value_at(&x)
        .map_err(to_py_err)?
        .eval(&u)
        .norm()
        .max(1e-30);
    Ok(out.eval(&u).norm() / scale)
}

#[pymodule]
fn higherspin_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMultivector>()?;
    m.add_function(wrap_pyfunction!(reflect, m)?)?;
    m.add_function(wrap_pyfunction!(z1_harmonic, m)?)?;
    m.add_function(wrap_pyfunction!(z1_monogenic, m)?)?;
    m.add_function(wrap_pyfunction!(e1k, m)?)?;
    m.add_function(wrap_pyfunction!(cot_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(hopf_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(fold_to_fundamental_domain, m)?)?;
    m.add_function(wrap_pyfunction!(fold_to_annulus, m)?)?;
    m.add_function(wrap_pyfunction!(operator_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(annihilation_residual, m)?)?;
    Ok(())
}
