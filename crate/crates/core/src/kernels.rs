//! Closed-form kernel building blocks: the radial factor `G_k`, the degree-1
//! reproducing kernels `Z_1` (harmonic for even order, monogenic for odd), and
//! the flat-space fundamental solution `E_{1,k}(x,u,v) = c_1 G_k(x) Z_1(xux/||x||^2, v)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::jets::Jet;

/// Largest dimension for which the monogenic reproducing kernel is
/// constructed; the flattened Gram system grows as `m * 2^m`.
pub const MAX_MONOGENIC_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    /// Even order `k = 2n`, spin 1.
    Bosonic,
    /// Odd order `k = 2n - 1`, spin 3/2.
    Fermionic,
}

/// Dimension, operator order and normalization for one kernel family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub m: usize,
    pub k: usize,
    pub c1: f64,
}

impl KernelParams {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        Self::with_c1(m, k, 1.0)
    }

    pub fn with_c1(m: usize, k: usize, c1: f64) -> Result<Self> {
        if !(2..=crate::clifford::MAX_DIM).contains(&m) {
            return Err(Error::UnsupportedDimension(m));
        }
        if k == 0 {
            return Err(Error::constraint("operator order k must be >= 1"));
        }
        if m.is_multiple_of(2) && k >= m {
            return Err(Error::constraint(format!(
                "even dimension requires k < m (got k={k}, m={m})"
            )));
        }
        if c1 == 0.0 {
            return Err(Error::constraint("c1 must be nonzero"));
        }
        Ok(KernelParams { m, k, c1 })
    }

    pub fn parity(&self) -> Parity {
        if self.k.is_multiple_of(2) {
            Parity::Bosonic
        } else {
            Parity::Fermionic
        }
    }

    /// `n` with `k = 2n` (even) or `k = 2n - 1` (odd).
    pub fn n(&self) -> usize {
        if self.k.is_multiple_of(2) {
            self.k / 2
        } else {
            self.k.div_ceil(2)
        }
    }

    /// Homogeneity degree of `G_k` (and of `E_{1,k}`) in `x`.
    pub fn degree(&self) -> i64 {
        self.k as i64 - self.m as i64
    }
}

/// `G_k(x)`: `1/||x||^{m-2n}` for `k = 2n`, `x/||x||^{m-2n+2}` for `k = 2n-1`.
pub fn g_k(x: &Multivector, params: &KernelParams) -> Result<Multivector> {
    if !x.is_grade1() {
        return Err(Error::NotGrade1);
    }
    let coords = x.vector_part();
    g_k_coords(&coords, params)
}

pub(crate) fn g_k_coords(x: &[f64], params: &KernelParams) -> Result<Multivector> {
    let (m, n) = (params.m, params.n() as i64);
    let r2: f64 = x.iter().map(|c| c * c).sum();
    if r2 == 0.0 {
        return Err(Error::singular("G_k at the origin"));
    }
    if params.k.is_multiple_of(2) {
        let p = (2 * n - m as i64) as f64 / 2.0;
        Ok(Multivector::scalar(m, r2.powf(p)))
    } else {
        let p = (2 * n - m as i64 - 2) as f64 / 2.0;
        Ok(Multivector::from_vector_in(x, m).scale(r2.powf(p)))
    }
}

/// Jet of `G_k` around `point`, carried to the given order.
pub fn g_k_jet(point: &[f64], params: &KernelParams, order: usize) -> Result<Jet> {
    let m = params.m;
    let n = params.n() as i64;
    let q = norm_sq_jet(point, m, order)?;
    if params.k.is_multiple_of(2) {
        q.norm_power((2 * n - m as i64) as f64)
    } else {
        let s = q.norm_power((2 * n - m as i64 - 2) as f64)?;
        Jet::position_vector(point, m, order).mul(&s)
    }
}

/// Jet of `||x||^2` around `point` with scalar coefficients in `Cl_alg`.
pub fn norm_sq_jet(point: &[f64], alg: usize, order: usize) -> Result<Jet> {
    let jets = Jet::coordinates(point, alg, order);
    let mut q = Jet::constant(Multivector::zero(alg), point.len(), order);
    for j in &jets {
        q = q.add(&j.mul(j)?)?;
    }
    Ok(q)
}

/// Reproducing kernel of degree-1 spherical harmonics under the normalized
/// `L^2(S^{m-1})` pairing: `Z_1(u,v) = m <u,v>` (scalar-valued).
pub fn z1_harmonic(u: &Multivector, v: &Multivector, m: usize) -> Result<Multivector> {
    if !u.is_grade1() || !v.is_grade1() {
        return Err(Error::NotGrade1);
    }
    let uu = u.vector_part();
    let vv = v.vector_part();
    let dot: f64 = uu.iter().zip(&vv).map(|(a, b)| a * b).sum();
    Ok(Multivector::scalar(m, m as f64 * dot))
}

/// Reproducing kernel of degree-1 monogenic polynomials under the
/// Clifford-valued spherical pairing, built numerically from the spanning set
/// `P_j(u) = u_j + (1/m) u e_j` by pseudo-inverting the pairing Gram matrix.
pub fn z1_monogenic(u: &Multivector, v: &Multivector, m: usize) -> Result<Multivector> {
    if !u.is_grade1() || !v.is_grade1() {
        return Err(Error::NotGrade1);
    }
    let table = monogenic_table(m)?;
    let uu = u.vector_part();
    let vv = v.vector_part();
    let mut out = Multivector::zero(m);
    for l in 0..m {
        if uu[l] == 0.0 {
            continue;
        }
        for a in 0..m {
            if vv[a] == 0.0 {
                continue;
            }
            out += &table.coeff(l, a).scale(uu[l] * vv[a]);
        }
    }
    Ok(out)
}

/// Coefficient table of the monogenic kernel: `Z_1(u,v) = Σ_{l,a} u_l v_a C[l][a]`.
#[derive(Debug)]
pub struct Z1MonogenicTable {
    m: usize,
    coeffs: Vec<Multivector>, // row-major (l, a)
}

impl Z1MonogenicTable {
    pub fn coeff(&self, l: usize, a: usize) -> &Multivector {
        &self.coeffs[l * self.m + a]
    }

    /// The spanning set `P_j(u) = u_j + (1/m) u e_j` expressed as coefficient
    /// multivectors `Q[l][j]` with `P_j(u) = Σ_l u_l Q[l][j]`.
    pub fn spanning_coefficients(m: usize) -> Vec<Vec<Multivector>> {
        (0..m)
            .map(|l| {
                (0..m)
                    .map(|j| {
                        let mut q = Multivector::basis_vector(m, l)
                            .gp(&Multivector::basis_vector(m, j))
                            .scale(1.0 / m as f64);
                        if l == j {
                            q += &Multivector::scalar(m, 1.0);
                        }
                        q
                    })
                    .collect()
            })
            .collect()
    }

    /// Pairing Gram of the spanning set via the exact second sphere moments
    /// `∫ u_a u_b dσ = δ_ab / m`:  `G[j][l] = (1/m) Σ_a conj(Q[a][j]) Q[a][l]`.
    pub fn gram(m: usize) -> Vec<Vec<Multivector>> {
        let q = Self::spanning_coefficients(m);
        (0..m)
            .map(|j| {
                (0..m)
                    .map(|l| {
                        let mut acc = Multivector::zero(m);
                        for qa in q.iter().take(m) {
                            acc += &qa[j].conjugate().gp(&qa[l]);
                        }
                        acc.scale(1.0 / m as f64)
                    })
                    .collect()
            })
            .collect()
    }

    fn build(m: usize) -> Result<Z1MonogenicTable> {
        if m < 3 {
            return Err(Error::Unsupported(
                "monogenic kernel needs m >= 3".into(),
            ));
        }
        if m > MAX_MONOGENIC_DIM {
            return Err(Error::Unsupported(format!(
                "monogenic kernel construction capped at m <= {MAX_MONOGENIC_DIM}"
            )));
        }
        let d = 1usize << m;
        let q = Self::spanning_coefficients(m);
        let gram = Self::gram(m);

        // Flatten `Σ_j conj(A_j) G[j][l] = rhs_l` into a real system: the
        // unknown is the stack of conj(A_j) coordinates, and each Gram entry
        // acts by right multiplication.
        let mut sys = DMatrix::<f64>::zeros(m * d, m * d);
        for l in 0..m {
            for j in 0..m {
                for beta in 0..d {
                    let col = Multivector::basis_blade(m, beta).gp(&gram[j][l]);
                    for gamma in 0..d {
                        sys[(l * d + gamma, j * d + beta)] = col.coeff(gamma);
                    }
                }
            }
        }
        let svd = sys.svd(true, true);
        // The system is consistent and rank-deficient (the spanning set carries
        // the relation Σ_j P_j e_j = 0); any least-squares solution yields the
        // same kernel.
        let eps = 1e-10;
        let mut coeffs = vec![Multivector::zero(m); m * m];
        for a in 0..m {
            let mut rhs = DVector::<f64>::zeros(m * d);
            for l in 0..m {
                for gamma in 0..d {
                    rhs[l * d + gamma] = q[a][l].coeff(gamma);
                }
            }
            let sol = svd
                .solve(&rhs, eps)
                .map_err(|e| Error::Unsupported(format!("gram solve failed: {e}")))?;
            // sol holds conj(A_j); assemble C_l(e_a) = Σ_j Q[l][j] A_j.
            for l in 0..m {
                let mut c = Multivector::zero(m);
                for j in 0..m {
                    let mut aj = Multivector::zero(m);
                    for beta in 0..d {
                        aj.set_coeff(beta, sol[j * d + beta]);
                    }
                    let aj = aj.conjugate();
                    c += &q[l][j].gp(&aj);
                }
                coeffs[l * m + a] = c;
            }
        }
        Ok(Z1MonogenicTable { m, coeffs })
    }
}

static MONOGENIC_TABLES: Lazy<Mutex<HashMap<usize, Arc<Z1MonogenicTable>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

pub fn monogenic_table(m: usize) -> Result<Arc<Z1MonogenicTable>> {
    let mut cache = MONOGENIC_TABLES.lock().unwrap();
    if let Some(t) = cache.get(&m) {
        return Ok(t.clone());
    }
    let t = Arc::new(Z1MonogenicTable::build(m)?);
    cache.insert(m, t.clone());
    Ok(t)
}

/// `Z_1(·, v)` for fixed parameters, reduced to the coefficient form
/// `Z_1(w, v) = Σ_l w_l D_l`; linear in the first slot, so it applies to
/// grade-1-valued jets coefficient-wise.
#[derive(Debug, Clone)]
pub struct Z1Evaluator {
    m: usize,
    dvec: Vec<Multivector>,
}

impl Z1Evaluator {
    pub fn new(params: &KernelParams, v: &[f64]) -> Result<Z1Evaluator> {
        let m = params.m;
        if v.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: v.len(),
            });
        }
        let dvec = match params.parity() {
            Parity::Bosonic => (0..m)
                .map(|l| Multivector::scalar(m, m as f64 * v[l]))
                .collect(),
            Parity::Fermionic => {
                let table = monogenic_table(m)?;
                (0..m)
                    .map(|l| {
                        let mut acc = Multivector::zero(m);
                        for a in 0..m {
                            if v[a] != 0.0 {
                                acc += &table.coeff(l, a).scale(v[a]);
                            }
                        }
                        acc
                    })
                    .collect()
            }
        };
        Ok(Z1Evaluator { m, dvec })
    }

    pub fn eval(&self, w: &Multivector) -> Multivector {
        let mut out = Multivector::zero(self.m);
        for l in 0..self.m {
            let wl = w.coeff(1 << l);
            if wl != 0.0 {
                out += &self.dvec[l].scale(wl);
            }
        }
        out
    }

    pub fn eval_jet(&self, w: &Jet) -> Jet {
        // pick out the u_l coefficient of every jet coefficient, attach D_l
        w.map_coeffs(|mv| {
            let mut acc = Multivector::zero(self.m);
            for l in 0..self.m {
                let wl = mv.coeff(1 << l);
                if wl != 0.0 {
                    acc += &self.dvec[l].scale(wl);
                }
            }
            acc
        })
    }
}

/// Both the value of a u-linear function at a point (components `f_j(x)`) and
/// the output of the higher-spin operators applied to one.
#[derive(Debug, Clone)]
pub struct ULinearValue {
    pub components: Vec<Multivector>,
}

impl ULinearValue {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `f(x, u) = Σ_j u_j f_j(x)`.
    pub fn eval(&self, u: &[f64]) -> Multivector {
        let m = self.components[0].dim();
        let mut acc = Multivector::zero(m);
        for (j, &uj) in u.iter().enumerate() {
            if uj != 0.0 {
                acc += &self.components[j].scale(uj);
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// A function `f(x, u)` homogeneous of degree 1 in `u`, given through its m
/// component functions `f_j(x)` with `f(x,u) = Σ_j u_j f_j(x)`.
pub trait ULinearField: Sync {
    fn dim(&self) -> usize;

    /// Jet of `f_j` around `point`, carried to `order`.
    fn component_jet(&self, j: usize, point: &[f64], order: usize) -> Result<Jet>;

    fn value_at(&self, point: &[f64]) -> Result<ULinearValue> {
        let comps = (0..self.dim())
            .map(|j| Ok(self.component_jet(j, point, 0)?.value()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ULinearValue { components: comps })
    }
}

/// `E_{1,k}(x, u, v) = c_1 G_k(x) Z_1(xux/||x||^2, v)` at a point.
pub fn e_1k(
    x: &Multivector,
    u: &Multivector,
    v: &Multivector,
    params: &KernelParams,
) -> Result<Multivector> {
    let z1 = Z1Evaluator::new(params, &v.vector_part())?;
    e_1k_with(x, u, params, &z1)
}

pub(crate) fn e_1k_with(
    x: &Multivector,
    u: &Multivector,
    params: &KernelParams,
    z1: &Z1Evaluator,
) -> Result<Multivector> {
    if !x.is_grade1() || !u.is_grade1() {
        return Err(Error::NotGrade1);
    }
    // one shared coordinate path so that single-term series truncations are
    // bit-identical to the direct kernel
    e_1k_coords(&x.vector_part(), &u.vector_part(), params, z1)
}

pub(crate) fn e_1k_coords(
    x: &[f64],
    u: &[f64],
    params: &KernelParams,
    z1: &Z1Evaluator,
) -> Result<Multivector> {
    let g = g_k_coords(x, params)?;
    let w = crate::clifford::reflect_coords(x, u)?;
    Ok(g
        .gp(&z1.eval(&Multivector::from_vector_in(&w, params.m)))
        .scale(params.c1))
}

/// Jet of `x ↦ E_{1,k}(x, u, v)` around `point`.
pub fn e_1k_jet(
    point: &[f64],
    u: &[f64],
    v: &[f64],
    params: &KernelParams,
    order: usize,
) -> Result<Jet> {
    let z1 = Z1Evaluator::new(params, v)?;
    e_1k_jet_with(point, u, params, &z1, order)
}

pub(crate) fn e_1k_jet_with(
    point: &[f64],
    u: &[f64],
    params: &KernelParams,
    z1: &Z1Evaluator,
    order: usize,
) -> Result<Jet> {
    let m = params.m;
    let g = g_k_jet(point, params, order)?;
    // reflect(x, u) as a jet: (x u x) * ||x||^{-2}
    let xj = Jet::position_vector(point, m, order);
    let uc = Jet::constant(Multivector::from_vector_in(u, m), point.len(), order);
    let xux = xj.mul(&uc)?.mul(&xj)?;
    let inv_r2 = norm_sq_jet(point, m, order)?.norm_power(-2.0)?;
    let w = xux.mul(&inv_r2)?;
    let z = z1.eval_jet(&w);
    Ok(g.mul(&z)?.scale(params.c1))
}

/// The Euclidean kernel as a u-linear field in `x` (with `v` fixed):
/// components `f_j(x) = E_{1,k}(x, e_j, v)`.
pub struct EuclideanKernelField {
    params: KernelParams,
    z1: Z1Evaluator,
}

impl EuclideanKernelField {
    pub fn new(params: KernelParams, v: &[f64]) -> Result<Self> {
        let z1 = Z1Evaluator::new(&params, v)?;
        Ok(EuclideanKernelField { params, z1 })
    }
}

impl ULinearField for EuclideanKernelField {
    fn dim(&self) -> usize {
        self.params.m
    }

    fn component_jet(&self, j: usize, point: &[f64], order: usize) -> Result<Jet> {
        let mut u = vec![0.0; self.params.m];
        u[j] = 1.0;
        e_1k_jet_with(point, &u, &self.params, &self.z1, order)
    }
}
