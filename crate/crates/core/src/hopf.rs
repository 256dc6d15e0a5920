//! Kernels on the Hopf manifold `S^1 x S^{m-1} = (R^m \ {0}) / {t^i}`: a
//! two-sided dilation series with direct terms on one half-orbit and
//! Kelvin-inverted terms on the other, for both spin structures.
//!
//! Terms are expressed in the scale-invariant trivialization: each term
//! carries the factor `(||x|| ||y||)^{(m-k)/2}`, which exactly cancels the
//! homogeneity of `E_{1,k}` so that every truncation of the series is
//! invariant under the simultaneous dilation `(x, y) -> (tx, ty)`.

use serde::{Deserialize, Serialize};

use crate::accum::MvAccumulator;
use crate::clifford::{reflect, vector_inverse_with, InversionConvention, Multivector};
use crate::error::{Error, Result};
use crate::kernels::{g_k, KernelParams, Z1Evaluator};

/// Relative tolerance of the near-orbit singularity guard.
pub const ORBIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinStructure {
    /// Plain identification.
    F1,
    /// Sign-twisted identification: orbit index `i` carries `(-1)^i`.
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfSpec {
    pub params: KernelParams,
    /// Dilation factor of the Kleinian group `{t^i}`; `t > 0`, `t != 1`.
    /// The group generated by `t` and `1/t` is the same, so the series uses
    /// `max(t, 1/t)` internally.
    pub t: f64,
    /// Truncation: orbit indices `-N..=N`.
    pub n_trunc: usize,
    pub structure: SpinStructure,
    pub inversion: InversionConvention,
}

impl HopfSpec {
    pub fn new(params: KernelParams, t: f64, n_trunc: usize, structure: SpinStructure) -> Result<Self> {
        if !(t > 0.0) || t == 1.0 {
            return Err(Error::constraint("t must be positive and distinct from 1"));
        }
        Ok(HopfSpec {
            params,
            t,
            n_trunc,
            structure,
            inversion: InversionConvention::default(),
        })
    }

    pub fn with_inversion(mut self, convention: InversionConvention) -> Self {
        self.inversion = convention;
        self
    }

    /// The internal generator `τ = max(t, 1/t) > 1`.
    pub fn tau(&self) -> f64 {
        if self.t > 1.0 {
            self.t
        } else {
            1.0 / self.t
        }
    }
}

/// Rescales `x` by the unique group power putting `||τ^j x||` into `[1, τ)`.
pub fn fold_to_annulus(x: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) || t == 1.0 {
        return Err(Error::constraint("t must be positive and distinct from 1"));
    }
    let tau = if t > 1.0 { t } else { 1.0 / t };
    let r: f64 = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::singular("annulus folding of the origin"));
    }
    let mut j = -(r.ln() / tau.ln()).floor() as i64;
    let mut s = tau.powi(j as i32) * r;
    while s >= tau {
        j -= 1;
        s /= tau;
    }
    while s < 1.0 {
        j += 1;
        s *= tau;
    }
    let f = tau.powi(j as i32);
    Ok(x.iter().map(|c| c * f).collect())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Individual series terms, keyed by orbit index: `i <= 0` are the direct
/// terms with argument `τ^{|i|}(x - y)`, `i >= 1` the inverted terms with
/// argument `τ^i (x^{-1} - y^{-1})` sandwiched between the inversion weights
/// `G_k(x) Z_1(reflect(x,u),v)` and `G_k(y) Z_1(reflect(y,u),v)`.
pub fn hopf_kernel_terms(
    x: &[f64],
    y: &[f64],
    u: &[f64],
    v: &[f64],
    spec: &HopfSpec,
) -> Result<Vec<(i64, Multivector)>> {
    let m = spec.params.m;
    for (name, w) in [("x", x), ("y", y), ("u", u), ("v", v)] {
        if w.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: w.len(),
            });
        }
        let _ = name;
    }
    let tau = spec.tau();
    let n = spec.n_trunc as i64;
    let nx = norm(x);
    let ny = norm(y);
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::singular("Hopf kernel at the origin"));
    }
    // near-orbit guard: y close to τ^i x for some |i| <= N
    for i in -n..=n {
        let f = tau.powi(i as i32);
        let d: f64 = x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| (f * xi - yi).powi(2))
            .sum::<f64>()
            .sqrt();
        if d < ORBIT_TOL * (f * nx + ny) {
            return Err(Error::singular_at("y on the dilation orbit of x", i));
        }
    }

    let xv = Multivector::from_vector(x);
    let yv = Multivector::from_vector(y);
    let z1 = Z1Evaluator::new(&spec.params, v)?;
    let uv = Multivector::from_vector(u);
    let nu = (nx * ny).powf((m as f64 - spec.params.k as f64) / 2.0);
    let c1 = spec.params.c1;

    let base = |z: &Multivector| -> Result<Multivector> {
        let g = g_k(z, &spec.params)?;
        let w = reflect(z, &uv)?;
        Ok(g.gp(&z1.eval(&w)))
    };

    let mut terms = Vec::with_capacity(2 * spec.n_trunc + 1);
    let diff = &xv - &yv;
    for i in 0..=n {
        let z = diff.scale(tau.powi(i as i32));
        let mut term = base(&z)?.scale(nu * c1);
        if spec.structure == SpinStructure::F2 && i % 2 == 1 {
            term = term.scale(-1.0);
        }
        terms.push((-i, term));
    }

    let fx = base(&xv)?;
    let fy = base(&yv)?;
    let w = &vector_inverse_with(&xv, spec.inversion)? - &vector_inverse_with(&yv, spec.inversion)?;
    let pref = tau.powf(2.0 * (m as f64 - spec.params.k as f64));
    for i in 1..=n {
        let z = w.scale(tau.powi(i as i32));
        let mid = base(&z)?;
        let mut term = fx.gp(&mid).gp(&fy).scale(pref * nu * c1);
        if spec.structure == SpinStructure::F2 && i % 2 == 1 {
            term = term.scale(-1.0);
        }
        terms.push((i, term));
    }
    Ok(terms)
}

/// Truncated Hopf kernel: compensated sum of the series terms in fixed order
/// (direct `i = 0..-N`, then inverted `i = 1..N`).
pub fn hopf_kernel(
    x: &[f64],
    y: &[f64],
    u: &[f64],
    v: &[f64],
    spec: &HopfSpec,
) -> Result<Multivector> {
    let terms = hopf_kernel_terms(x, y, u, v, spec)?;
    let mut acc = MvAccumulator::new(spec.params.m);
    for (_, t) in &terms {
        acc.add(t);
    }
    Ok(acc.value())
}
