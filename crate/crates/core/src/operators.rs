//! The differential operators: Dirac `D_x`, Laplacian powers, the mixed pair
//! `<u,D_x><D_u,D_x>`, and the composed higher order bosonic/fermionic
//! operators acting on u-linear fields through jets.
//!
//! On an l-cylinder the projected operators have the same local coordinate
//! expression, so a single local implementation serves every manifold; the
//! manifold structure lives entirely in the kernel series.

use serde::{Deserialize, Serialize};

use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::kernels::{KernelParams, Parity, ULinearField, ULinearValue};

/// A plain Clifford-valued function of x, given as a jet recipe.
pub trait JetField: Sync {
    fn jet_at(&self, point: &[f64], order: usize) -> Result<Jet>;
}

impl<F> JetField for F
where
    F: Fn(&[f64], usize) -> Result<Jet> + Sync,
{
    fn jet_at(&self, point: &[f64], order: usize) -> Result<Jet> {
        self(point, order)
    }
}

/// Order, parity and the three rational coefficients of the composed operator:
///
/// even `k = 2n`:  `Δ^n - a <u,D_x><D_u,D_x> Δ^{n-1}`,
/// odd `k = 2n-1`: `D_x Δ^{n-1} - b u <D_u,D_x> Δ^{n-1} - c <u,D_x><D_u,D_x> Δ^{n-2} D_x`,
///
/// with `a = 4n/(m+2n-2)`, `b = 2/(m+2n-2)`, `c = (4n-4)/(m+2n-2)`.  For
/// `n = 1` the `c` term carries coefficient exactly 0 and is skipped rather
/// than interpreting `Δ^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub m: usize,
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl OperatorSpec {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        let params = KernelParams::new(m, k)?;
        let n = params.n() as f64;
        let denom = m as f64 + 2.0 * n - 2.0;
        Ok(OperatorSpec {
            m,
            k,
            a: 4.0 * n / denom,
            b: 2.0 / denom,
            c: (4.0 * n - 4.0) / denom,
        })
    }

    pub fn for_params(params: &KernelParams) -> Result<Self> {
        Self::new(params.m, params.k)
    }

    pub fn n(&self) -> usize {
        if self.k.is_multiple_of(2) {
            self.k / 2
        } else {
            self.k.div_ceil(2)
        }
    }

    pub fn parity(&self) -> Parity {
        if self.k.is_multiple_of(2) {
            Parity::Bosonic
        } else {
            Parity::Fermionic
        }
    }

    /// Scales the mixing coefficients; used as a negative control to confirm
    /// the verification harness has power.
    pub fn with_coefficient_scale(mut self, factor: f64) -> Self {
        self.a *= factor;
        self.b *= factor;
        self.c *= factor;
        self
    }
}

/// `D_x f(x) = Σ_i e_i ∂_i f` at `x`, via a jet of the given order.
pub fn dirac_apply(f: &dyn JetField, x: &[f64], order: usize) -> Result<Multivector> {
    if order < 1 {
        return Err(Error::InsufficientOrder {
            needed: 1,
            got: order,
        });
    }
    Ok(f.jet_at(x, order)?.dirac()?.value())
}

/// `Δ^n f(x)`; the jet must carry order >= 2n.
pub fn laplace_power_apply(f: &dyn JetField, x: &[f64], n: usize) -> Result<Multivector> {
    Ok(f.jet_at(x, 2 * n)?.laplace_power(n)?.value())
}

/// `<u,D_x><D_u,D_x> f` for a u-linear `f`: since `<D_u,D_x>f = Σ_j ∂_j f_j`
/// is u-independent, the result is again u-linear with components
/// `∂_i [Σ_j ∂_j f_j](x)`.
pub fn pair_udx_dudx_apply(f: &dyn ULinearField, x: &[f64]) -> Result<ULinearValue> {
    let m = f.dim();
    let mut div: Option<Jet> = None;
    for j in 0..m {
        let pj = f.component_jet(j, x, 2)?.partial(j)?;
        div = Some(match div {
            None => pj,
            Some(d) => d.add(&pj)?,
        });
    }
    let div = div.unwrap();
    let components = (0..m)
        .map(|i| Ok(div.partial(i)?.value()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ULinearValue { components })
}

/// Applies the composed higher order operator to a u-linear field at `x`.
pub fn higher_spin_apply(
    spec: &OperatorSpec,
    f: &dyn ULinearField,
    x: &[f64],
) -> Result<ULinearValue> {
    if f.dim() != spec.m {
        return Err(Error::DimensionMismatch {
            expected: spec.m,
            got: f.dim(),
        });
    }
    let m = spec.m;
    let k = spec.k;
    let n = spec.n();
    let jets: Vec<Jet> = (0..m)
        .map(|j| f.component_jet(j, x, k))
        .collect::<Result<Vec<_>>>()?;

    if k.is_multiple_of(2) {
        // Δ^n f_j - a ∂_j Σ_i ∂_i Δ^{n-1} f_i
        let mut div: Option<Jet> = None;
        for (i, ji) in jets.iter().enumerate() {
            let t = ji.laplace_power(n - 1)?.partial(i)?;
            div = Some(match div {
                None => t,
                Some(d) => d.add(&t)?,
            });
        }
        let div = div.unwrap();
        let components = (0..m)
            .map(|j| {
                let t1 = jets[j].laplace_power(n)?.value();
                let t2 = div.partial(j)?.value();
                Ok(&t1 - &t2.scale(spec.a))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ULinearValue { components })
    } else {
        // D Δ^{n-1} f_j - b e_j Σ_i ∂_i Δ^{n-1} f_i
        //   - c ∂_j Σ_i ∂_i Δ^{n-2} D f_i      (last term only for n >= 2)
        let mut div = Multivector::zero(m);
        for (i, ji) in jets.iter().enumerate() {
            div += &ji.laplace_power(n - 1)?.partial(i)?.value();
        }
        let third: Option<Jet> = if n >= 2 {
            let mut acc: Option<Jet> = None;
            for (i, ji) in jets.iter().enumerate() {
                let t = ji.dirac()?.laplace_power(n - 2)?.partial(i)?;
                acc = Some(match acc {
                    None => t,
                    Some(d) => d.add(&t)?,
                });
            }
            acc
        } else {
            None
        };
        let components = (0..m)
            .map(|j| {
                let t1 = jets[j].laplace_power(n - 1)?.dirac()?.value();
                let t2 = Multivector::basis_vector(m, j).gp(&div);
                let mut out = &t1 - &t2.scale(spec.b);
                if let Some(t3) = &third {
                    out -= &t3.partial(j)?.value().scale(spec.c);
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ULinearValue { components })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{e_1k, norm_sq_jet, EuclideanKernelField};

    struct ClosureField<F: Fn(usize, &[f64], usize) -> Result<Jet> + Sync> {
        m: usize,
        f: F,
    }

    impl<F: Fn(usize, &[f64], usize) -> Result<Jet> + Sync> ULinearField for ClosureField<F> {
        fn dim(&self) -> usize {
            self.m
        }
        fn component_jet(&self, j: usize, point: &[f64], order: usize) -> Result<Jet> {
            (self.f)(j, point, order)
        }
    }

    fn coord_jet(point: &[f64], i: usize, alg: usize, order: usize) -> Jet {
        Jet::coordinates(point, alg, order).remove(i)
    }

    #[test]
    fn coefficient_table() {
        // spot values of a = 4n/(m+2n-2), b = 2/(m+2n-2), c = (4n-4)/(m+2n-2)
        let s = OperatorSpec::new(4, 2).unwrap();
        assert_eq!(s.a, 1.0);
        let s = OperatorSpec::new(5, 2).unwrap();
        assert!((s.a - 4.0 / 5.0).abs() < 1e-15);
        let s = OperatorSpec::new(3, 1).unwrap();
        assert!((s.b - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.c, 0.0);
        let s = OperatorSpec::new(5, 3).unwrap();
        assert!((s.b - 2.0 / 7.0).abs() < 1e-15);
        assert!((s.c - 4.0 / 7.0).abs() < 1e-15);
        let s = OperatorSpec::new(6, 4).unwrap();
        assert!((s.a - 1.0).abs() < 1e-15);
        let s = OperatorSpec::new(6, 3).unwrap();
        assert!((s.b - 0.25).abs() < 1e-15);
        assert!((s.c - 0.5).abs() < 1e-15);
        // frozen table over (m,k) in {3..6} x {1..4}, where legal
        #[rustfmt::skip]
        let table: &[(usize, usize, f64, f64, f64)] = &[
            // (m, k, a, b, c)
            (3, 1, 4.0 / 3.0, 2.0 / 3.0, 0.0),
            (4, 1, 1.0,       1.0 / 2.0, 0.0),
            (5, 1, 4.0 / 5.0, 2.0 / 5.0, 0.0),
            (6, 1, 2.0 / 3.0, 1.0 / 3.0, 0.0),
            (3, 2, 4.0 / 3.0, 2.0 / 3.0, 0.0),
            (4, 2, 1.0,       1.0 / 2.0, 0.0),
            (5, 2, 4.0 / 5.0, 2.0 / 5.0, 0.0),
            (6, 2, 2.0 / 3.0, 1.0 / 3.0, 0.0),
            (3, 3, 8.0 / 5.0, 2.0 / 5.0, 4.0 / 5.0),
            (4, 3, 4.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0),
            (5, 3, 8.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0),
            (6, 3, 1.0,       1.0 / 4.0, 1.0 / 2.0),
            (3, 4, 8.0 / 5.0, 2.0 / 5.0, 4.0 / 5.0),
            (5, 4, 8.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0),
        ];
        for &(m, k, a, b, c) in table {
            let s = OperatorSpec::new(m, k).unwrap();
            assert_eq!(s.a, a, "a at m={m} k={k}");
            assert_eq!(s.b, b, "b at m={m} k={k}");
            assert_eq!(s.c, c, "c at m={m} k={k}");
        }
        // full legality sweep (m,k) in {3..6} x {1..4}
        for m in 3..=6 {
            for k in 1..=4usize {
                let legal = m % 2 == 1 || k < m;
                assert_eq!(OperatorSpec::new(m, k).is_ok(), legal, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn dirac_of_position_vector() {
        // D_x x = sum e_i e_i = -m
        let m = 5;
        let f = |p: &[f64], order: usize| Ok(Jet::position_vector(p, m, order));
        let d = dirac_apply(&f, &[0.3, -0.2, 0.9, 0.0, 0.4], 1).unwrap();
        assert!(d.max_abs_diff(&Multivector::scalar(m, -(m as f64))) < 1e-14);
    }

    #[test]
    fn dirac_of_constant_is_zero() {
        let m = 4;
        let f = |p: &[f64], order: usize| {
            Ok(Jet::constant(
                Multivector::basis_blade(m, 0b101),
                p.len(),
                order,
            ))
        };
        let d = dirac_apply(&f, &[0.1, 0.2, 0.3, 0.4], 1).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn g1_is_monogenic() {
        // D_x (x/||x||^m) = 0
        let m = 5;
        let p = KernelParams::new(m, 1).unwrap();
        let f = move |pt: &[f64], order: usize| crate::kernels::g_k_jet(pt, &p, order);
        let x = [1.0, 1.0, 0.0, 0.0, 0.0];
        let d = dirac_apply(&f, &x, 1).unwrap();
        assert!(d.norm() < 1e-10, "{}", d.norm());
    }

    #[test]
    fn laplacian_values() {
        let m = 4;
        // f = x1^2 + x2^2 -> Δf = 4
        let f = |pt: &[f64], order: usize| {
            let x1 = coord_jet(pt, 0, m, order);
            let x2 = coord_jet(pt, 1, m, order);
            x1.mul(&x1)?.add(&x2.mul(&x2)?)
        };
        let v = laplace_power_apply(&f, &[0.5, -0.7, 0.2, 0.1], 1).unwrap();
        assert!((v.scalar_part() - 4.0).abs() < 1e-13);

        // harmonic: 1/||x||^{m-2}, m = 5
        let m5 = 5;
        let g = move |pt: &[f64], order: usize| norm_sq_jet(pt, m5, order)?.norm_power(-3.0);
        let v = laplace_power_apply(&g, &[2.0, 0.0, 0.0, 0.0, 0.0], 1).unwrap();
        assert!(v.norm() < 1e-10);
    }

    #[test]
    fn dirac_squared_is_minus_laplacian() {
        let m = 4;
        // random polynomial: f = x1^2 x2 + 3 x3 x4
        let f = |pt: &[f64], order: usize| {
            let x1 = coord_jet(pt, 0, m, order);
            let x2 = coord_jet(pt, 1, m, order);
            let x3 = coord_jet(pt, 2, m, order);
            let x4 = coord_jet(pt, 3, m, order);
            x1.mul(&x1)?.mul(&x2)?.add(&x3.mul(&x4)?.scale(3.0))
        };
        let x = [0.3, 1.2, -0.5, 0.8];
        let dd = f(&x, 2).unwrap().dirac().unwrap().dirac().unwrap().value();
        let lap = laplace_power_apply(&f, &x, 1).unwrap();
        assert!(dd.max_abs_diff(&lap.scale(-1.0)) < 1e-12);
    }

    #[test]
    fn pair_operator_hand_oracle() {
        let m = 4;
        // f(x,u) = u1 x1: <D_u,D_x>f = 1, <u,D_x> 1 = 0
        let f1 = ClosureField {
            m,
            f: |j: usize, pt: &[f64], order: usize| {
                if j == 0 {
                    Ok(coord_jet(pt, 0, m, order))
                } else {
                    Ok(Jet::constant(Multivector::zero(m), pt.len(), order))
                }
            },
        };
        let out = pair_udx_dudx_apply(&f1, &[0.4, 0.2, 0.9, -0.3]).unwrap();
        assert!(out.norm() < 1e-14);

        // f(x,u) = u1 x1 x2 -> u2
        let f2 = ClosureField {
            m,
            f: |j: usize, pt: &[f64], order: usize| {
                if j == 0 {
                    coord_jet(pt, 0, m, order).mul(&coord_jet(pt, 1, m, order))
                } else {
                    Ok(Jet::constant(Multivector::zero(m), pt.len(), order))
                }
            },
        };
        let out = pair_udx_dudx_apply(&f2, &[0.4, 0.2, 0.9, -0.3]).unwrap();
        for j in 0..m {
            let expect = if j == 1 { 1.0 } else { 0.0 };
            assert!((out.components[j].scalar_part() - expect).abs() < 1e-13);
        }

        // f independent of x -> 0
        let f3 = ClosureField {
            m,
            f: |_j: usize, pt: &[f64], order: usize| {
                Ok(Jet::constant(Multivector::scalar(m, 2.5), pt.len(), order))
            },
        };
        let out = pair_udx_dudx_apply(&f3, &[0.1, 0.1, 0.1, 0.1]).unwrap();
        assert!(out.norm() < 1e-14);
    }

    #[test]
    fn higher_spin_constant_field() {
        // k=1, f(x,u) = u1 (constant in x) -> 0
        let m = 4;
        let spec = OperatorSpec::new(m, 1).unwrap();
        let f = ClosureField {
            m,
            f: |j: usize, pt: &[f64], order: usize| {
                let v = if j == 0 {
                    Multivector::scalar(m, 1.0)
                } else {
                    Multivector::zero(m)
                };
                Ok(Jet::constant(v, pt.len(), order))
            },
        };
        let out = higher_spin_apply(&spec, &f, &[0.2, -0.4, 0.6, 0.8]).unwrap();
        assert!(out.norm() < 1e-14);
    }

    #[test]
    fn higher_spin_hand_oracle_k2() {
        // k=2, m=4, f(x,u) = u1 x1 x2: Δf = 0, pair term gives u2, a = 1
        // so D_{1,2} f = -u2.
        let m = 4;
        let spec = OperatorSpec::new(m, 2).unwrap();
        let f = ClosureField {
            m,
            f: |j: usize, pt: &[f64], order: usize| {
                if j == 0 {
                    coord_jet(pt, 0, m, order).mul(&coord_jet(pt, 1, m, order))
                } else {
                    Ok(Jet::constant(Multivector::zero(m), pt.len(), order))
                }
            },
        };
        let out = higher_spin_apply(&spec, &f, &[1.3, 0.2, -0.6, 0.9]).unwrap();
        for j in 0..m {
            let expect = if j == 1 { -1.0 } else { 0.0 };
            assert!(
                (out.components[j].scalar_part() - expect).abs() < 1e-12,
                "j={j}"
            );
        }
    }

    #[test]
    fn k2_reduces_to_laplacian_on_divergence_free_harmonic() {
        // f(x,u) = u1 x2 + u2 x3: each p harmonic and sum_j d_j f_j = 0, so
        // both operator terms vanish and D_{1,2} f = Δf = 0
        let m = 4;
        let spec = OperatorSpec::new(m, 2).unwrap();
        let f = ClosureField {
            m,
            f: |j: usize, pt: &[f64], order: usize| match j {
                0 => Ok(coord_jet(pt, 1, m, order)),
                1 => Ok(coord_jet(pt, 2, m, order)),
                _ => Ok(Jet::constant(Multivector::zero(m), pt.len(), order)),
            },
        };
        let out = higher_spin_apply(&spec, &f, &[0.7, -0.1, 0.4, 0.9]).unwrap();
        assert!(out.norm() < 1e-13);
    }

    #[test]
    fn higher_spin_linear_in_field() {
        let m = 5;
        let spec = OperatorSpec::new(m, 2).unwrap();
        let v = [0.3, -1.0, 0.4, 0.2, 0.8];
        let field = EuclideanKernelField::new(KernelParams::new(m, 2).unwrap(), &v).unwrap();
        let x = [0.9, 0.3, -0.5, 0.2, 0.4];
        let out1 = higher_spin_apply(&spec, &field, &x).unwrap();
        // scaled field via closure
        let f2 = ClosureField {
            m,
            f: |j: usize, pt: &[f64], order: usize| {
                let field = EuclideanKernelField::new(KernelParams::new(m, 2).unwrap(), &v)?;
                Ok(field.component_jet(j, pt, order)?.scale(2.0))
            },
        };
        let out2 = higher_spin_apply(&spec, &f2, &x).unwrap();
        for j in 0..m {
            assert!(out2.components[j]
                .max_abs_diff(&out1.components[j].scale(2.0))
                < 1e-12);
        }
    }

    #[test]
    fn annihilates_fundamental_solution() {
        // the defining property, checked through the jet engine
        for (m, k) in [(5usize, 1usize), (5, 2), (5, 3), (4, 2)] {
            let params = KernelParams::new(m, k).unwrap();
            let spec = OperatorSpec::new(m, k).unwrap();
            let v: Vec<f64> = (0..m).map(|i| 0.2 + 0.3 * i as f64).collect();
            let u: Vec<f64> = (0..m).map(|i| 1.0 - 0.25 * i as f64).collect();
            let field = EuclideanKernelField::new(params, &v).unwrap();
            let x: Vec<f64> = (0..m)
                .map(|i| if i == 0 { 1.0 } else { 0.15 * (i as f64) })
                .collect();
            let out = higher_spin_apply(&spec, &field, &x).unwrap();
            let residual = out.eval(&u).norm();
            let scale = e_1k(
                &Multivector::from_vector(&x),
                &Multivector::from_vector(&u),
                &Multivector::from_vector(&v),
                &params,
            )
            .unwrap()
            .norm();
            assert!(
                residual < 1e-9 * scale.max(1.0),
                "(m,k)=({m},{k}): {residual:e} vs scale {scale:e}"
            );
            // negative control: halved coefficients must not annihilate
            let bad = spec.with_coefficient_scale(0.5);
            let out_bad = higher_spin_apply(&bad, &field, &x).unwrap();
            assert!(out_bad.eval(&u).norm() > 1e-3 * scale);
        }
    }

    #[test]
    fn rejects_insufficient_order() {
        let m = 4;
        let f = |_pt: &[f64], order: usize| {
            Ok(Jet::constant(Multivector::zero(m), m, order))
        };
        assert!(dirac_apply(&f, &[0.0; 4], 0).is_err());
    }
}
