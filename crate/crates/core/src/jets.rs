//! Truncated multivariate Taylor expansions ("jets") in the x-variables with
//! `Multivector` coefficients.  Coefficients are stored as Taylor coefficients
//! `∂^α f / α!`, which keeps products convolution-shaped.

use std::collections::HashMap;
use std::sync::Arc;

use once_cell::sync::Lazy;
use std::sync::Mutex;

use crate::clifford::Multivector;
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 6;

/// Enumeration of the multi-indices `|α| <= order` in `m` variables, graded
/// lexicographic, together with the truncated product table.
#[derive(Debug)]
pub struct JetShape {
    pub m: usize,
    pub order: usize,
    pub indices: Vec<Vec<u8>>,
    position: HashMap<Vec<u8>, usize>,
    /// (i, j, target) triples with deg(i) + deg(j) <= order.
    prod_table: Vec<(u32, u32, u32)>,
}

impl JetShape {
    fn build(m: usize, order: usize) -> JetShape {
        let mut indices: Vec<Vec<u8>> = Vec::new();
        let mut cur = vec![0u8; m];
        // generate all multi-indices of total degree d, lexicographic, for d = 0..=order
        fn gen(m: usize, pos: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if pos == m {
                if left == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            for v in (0..=left).rev() {
                cur[pos] = v as u8;
                gen(m, pos + 1, left - v, cur, out);
            }
            cur[pos] = 0;
        }
        for d in 0..=order {
            gen(m, 0, d, &mut cur, &mut indices);
        }
        let position: HashMap<Vec<u8>, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut prod_table = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            let da: usize = a.iter().map(|&x| x as usize).sum();
            for (j, b) in indices.iter().enumerate() {
                let db: usize = b.iter().map(|&x| x as usize).sum();
                if da + db > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let t = position[&sum];
                prod_table.push((i as u32, j as u32, t as u32));
            }
        }
        JetShape {
            m,
            order,
            indices,
            position,
            prod_table,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position_of(&self, alpha: &[u8]) -> Option<usize> {
        self.position.get(alpha).copied()
    }
}

static SHAPES: Lazy<Mutex<HashMap<(usize, usize), Arc<JetShape>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

pub fn shape(m: usize, order: usize) -> Arc<JetShape> {
    assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
    let mut cache = SHAPES.lock().unwrap();
    cache
        .entry((m, order))
        .or_insert_with(|| Arc::new(JetShape::build(m, order)))
        .clone()
}

#[derive(Debug, Clone)]
pub struct Jet {
    dim: usize,
    order: usize,
    coeffs: Vec<Multivector>,
    shape: Arc<JetShape>,
}

impl Jet {
    pub fn constant(value: Multivector, m: usize, order: usize) -> Jet {
        let sh = shape(m, order);
        let alg = value.dim();
        let mut coeffs = vec![Multivector::zero(alg); sh.len()];
        coeffs[0] = value;
        Jet {
            dim: m,
            order,
            coeffs,
            shape: sh,
        }
    }

    /// The coordinate jets `x_i ↦ point_i + δ-term` for i = 0..m.  Coefficients
    /// are scalars in `Cl_alg`.
    pub fn coordinates(point: &[f64], alg: usize, order: usize) -> Vec<Jet> {
        let m = point.len();
        (0..m)
            .map(|i| {
                let mut jet = Jet::constant(Multivector::scalar(alg, point[i]), m, order);
                if order >= 1 {
                    let mut e = vec![0u8; m];
                    e[i] = 1;
                    let pos = jet.shape.position_of(&e).unwrap();
                    jet.coeffs[pos] = Multivector::scalar(alg, 1.0);
                }
                jet
            })
            .collect()
    }

    /// Jet of the grade-1 position vector `x = Σ x_i e_i` in `Cl_alg`.
    pub fn position_vector(point: &[f64], alg: usize, order: usize) -> Jet {
        let m = point.len();
        let mut jet = Jet::constant(Multivector::from_vector_in(point, alg), m, order);
        if order >= 1 {
            for i in 0..m {
                let mut e = vec![0u8; m];
                e[i] = 1;
                let pos = jet.shape.position_of(&e).unwrap();
                jet.coeffs[pos] = Multivector::basis_vector(alg, i);
            }
        }
        jet
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alg_dim(&self) -> usize {
        self.coeffs[0].dim()
    }

    pub fn value(&self) -> Multivector {
        self.coeffs[0].clone()
    }

    pub fn coeff(&self, idx: usize) -> &Multivector {
        &self.coeffs[idx]
    }

    fn check_compat(&self, rhs: &Jet) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rhs.dim,
            });
        }
        if self.order != rhs.order {
            return Err(Error::OrderMismatch {
                expected: self.order,
                got: rhs.order,
            });
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Jet) -> Result<Jet> {
        self.check_compat(rhs)?;
        let mut out = self.clone();
        for (c, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *c += r;
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Jet) -> Result<Jet> {
        self.check_compat(rhs)?;
        let mut out = self.clone();
        for (c, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *c -= r;
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = c.scale(s);
        }
        out
    }

    /// Left multiplication of every coefficient by a constant multivector.
    pub fn left_mul(&self, a: &Multivector) -> Jet {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = a.gp(c);
        }
        out
    }

    /// Truncated Cauchy product; coefficient multivectors multiply in the
    /// written order (noncommutative).
    pub fn mul(&self, rhs: &Jet) -> Result<Jet> {
        self.check_compat(rhs)?;
        let alg = self.alg_dim();
        let mut coeffs = vec![Multivector::zero(alg); self.shape.len()];
        for &(i, j, t) in &self.shape.prod_table {
            let a = &self.coeffs[i as usize];
            if a.is_zero() {
                continue;
            }
            let b = &rhs.coeffs[j as usize];
            if b.is_zero() {
                continue;
            }
            coeffs[t as usize] += &a.gp(b);
        }
        Ok(Jet {
            dim: self.dim,
            order: self.order,
            coeffs,
            shape: self.shape.clone(),
        })
    }

    /// Composes the jet of a positive scalar `q` with `s ↦ s^{p/2}`, i.e.
    /// returns the jet of `q^{p/2}`.  Used with `q = ||x||^2` to form `||x||^p`.
    pub fn norm_power(&self, p: f64) -> Result<Jet> {
        let q0 = self.coeffs[0].scalar_part();
        if q0 <= 0.0 {
            return Err(Error::singular("norm power expanded at ||x|| = 0"));
        }
        let alg = self.alg_dim();
        let e = p / 2.0;
        // Taylor coefficients of s^e around q0: binom(e, n) * q0^{e-n}
        let kmax = self.order;
        let mut c = vec![0.0f64; kmax + 1];
        let mut binom = 1.0;
        for (n, cn) in c.iter_mut().enumerate() {
            *cn = binom * q0.powf(e - n as f64);
            binom *= (e - n as f64) / (n as f64 + 1.0);
        }
        // h = q - q0, then Horner
        let mut h = self.clone();
        h.coeffs[0] = Multivector::zero(alg);
        let mut acc = Jet::constant(Multivector::scalar(alg, c[kmax]), self.dim, self.order);
        for n in (0..kmax).rev() {
            acc = acc.mul(&h)?;
            acc.coeffs[0] += &Multivector::scalar(alg, c[n]);
        }
        Ok(acc)
    }

    /// `∂^α f` at the expansion point, i.e. `α! * coeffs[α]`.
    pub fn extract_partial(&self, alpha: &[u8]) -> Result<Multivector> {
        let degree: usize = alpha.iter().map(|&a| a as usize).sum();
        if degree > self.order {
            return Err(Error::IndexOutOfOrder {
                degree,
                order: self.order,
            });
        }
        let pos = self
            .shape
            .position_of(alpha)
            .ok_or(Error::DimensionMismatch {
                expected: self.dim,
                got: alpha.len(),
            })?;
        let mut fact = 1.0;
        for &a in alpha {
            for i in 2..=(a as usize) {
                fact *= i as f64;
            }
        }
        Ok(self.coeffs[pos].scale(fact))
    }

    /// Partial derivative in direction `i`; the result carries order - 1.
    pub fn partial(&self, i: usize) -> Result<Jet> {
        if self.order == 0 {
            return Err(Error::InsufficientOrder {
                needed: 1,
                got: 0,
            });
        }
        let sh = shape(self.dim, self.order - 1);
        let alg = self.alg_dim();
        let mut coeffs = vec![Multivector::zero(alg); sh.len()];
        for (pos, alpha) in sh.indices.iter().enumerate() {
            let mut up = alpha.clone();
            up[i] += 1;
            let src = self.shape.position_of(&up).unwrap();
            coeffs[pos] = self.coeffs[src].scale((alpha[i] + 1) as f64);
        }
        Ok(Jet {
            dim: self.dim,
            order: self.order - 1,
            coeffs,
            shape: sh,
        })
    }

    /// Dirac derivative `Σ_i e_i ∂_i` (left multiplication); order drops by 1.
    pub fn dirac(&self) -> Result<Jet> {
        let mut acc: Option<Jet> = None;
        for i in 0..self.dim {
            let term = self
                .partial(i)?
                .left_mul(&Multivector::basis_vector(self.alg_dim(), i));
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc.unwrap())
    }

    /// Laplacian `Σ_i ∂_i^2`; order drops by 2.
    pub fn laplacian(&self) -> Result<Jet> {
        if self.order < 2 {
            return Err(Error::InsufficientOrder {
                needed: 2,
                got: self.order,
            });
        }
        let sh = shape(self.dim, self.order - 2);
        let alg = self.alg_dim();
        let mut coeffs = vec![Multivector::zero(alg); sh.len()];
        for (pos, alpha) in sh.indices.iter().enumerate() {
            let mut acc = Multivector::zero(alg);
            for i in 0..self.dim {
                let mut up = alpha.clone();
                up[i] += 2;
                let src = self.shape.position_of(&up).unwrap();
                let f = ((alpha[i] + 1) as f64) * ((alpha[i] + 2) as f64);
                acc += &self.coeffs[src].scale(f);
            }
            coeffs[pos] = acc;
        }
        Ok(Jet {
            dim: self.dim,
            order: self.order - 2,
            coeffs,
            shape: sh,
        })
    }

    pub fn laplace_power(&self, n: usize) -> Result<Jet> {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.laplacian()?;
        }
        Ok(out)
    }

    /// Applies a map to every Taylor coefficient (a linear map keeps this a
    /// valid jet of the mapped function).
    pub fn map_coeffs(&self, f: impl Fn(&Multivector) -> Multivector) -> Jet {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = f(c);
        }
        out
    }

    /// Truncate down to a lower order by dropping higher coefficients.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order);
        let sh = shape(self.dim, order);
        let coeffs = sh
            .indices
            .iter()
            .map(|a| self.coeffs[self.shape.position_of(a).unwrap()].clone())
            .collect();
        Jet {
            dim: self.dim,
            order,
            coeffs,
            shape: sh,
        }
    }
}

impl Multivector {
    /// Embeds a coordinate vector of length <= alg as a grade-1 element of `Cl_alg`.
    pub fn from_vector_in(x: &[f64], alg: usize) -> Multivector {
        assert!(x.len() <= alg);
        let mut mv = Multivector::zero(alg);
        for (i, &xi) in x.iter().enumerate() {
            mv.set_coeff(1 << i, xi);
        }
        mv
    }
}
