//! Cotangent kernels on l-cylinders `R^m / Z^l`: shellwise lattice sums of
//! translates of `E_{1,k}`, the symmetric-paired series at the critical rank
//! `l = m - k`, twisted spin-structure variants weighted by
//! `(-1)^{n_1 + ... + n_p}`, fundamental-domain folding and tail-decay fits.

use serde::{Deserialize, Serialize};

use crate::accum::MvAccumulator;
use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::kernels::{
    e_1k_coords, e_1k_jet_with, KernelParams, ULinearField, Z1Evaluator,
};

/// Minimum distance from the evaluation point to the singular lattice.
pub const SINGULAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub params: KernelParams,
    /// Lattice rank, `1 <= l <= m - k`.
    pub l: usize,
    /// Twist count, `0 <= p <= l`; the first `p` lattice directions carry the
    /// antiperiodic sign.
    pub p: usize,
    /// Sup-norm truncation radius.
    pub radius: i64,
}

impl CylinderSpec {
    pub fn new(params: KernelParams, l: usize, p: usize, radius: i64) -> Result<Self> {
        let max_l = params.m as i64 - params.k as i64;
        if max_l < 1 {
            return Err(Error::constraint(format!(
                "no lattice rank available for m={} k={}",
                params.m, params.k
            )));
        }
        if l < 1 || (l as i64) > max_l {
            return Err(Error::constraint("l<=m-k"));
        }
        if p > l {
            return Err(Error::constraint("p<=l"));
        }
        if radius < 0 {
            return Err(Error::constraint("truncation radius must be >= 0"));
        }
        Ok(CylinderSpec {
            params,
            l,
            p,
            radius,
        })
    }

    /// True at the critical rank, where the paired (regularized) series applies.
    pub fn is_critical(&self) -> bool {
        self.l as i64 == self.params.m as i64 - self.params.k as i64
    }
}

/// Reduces the first `l` coordinates mod 1 into `[0, 1)`.
pub fn fold_to_fundamental_domain(x: &[f64], l: usize) -> Vec<f64> {
    let mut out = x.to_vec();
    for xi in out.iter_mut().take(l) {
        *xi = xi.rem_euclid(1.0);
        // rem_euclid can return exactly 1.0 for tiny negatives
        if *xi >= 1.0 {
            *xi -= 1.0;
        }
    }
    out
}

/// All lattice points of `Z^l` with sup-norm exactly `r`, lexicographic.
pub fn lattice_shell(l: usize, r: i64) -> Vec<Vec<i64>> {
    assert!(r >= 0);
    let mut out = Vec::new();
    let mut cur = vec![0i64; l];
    fn gen(pos: usize, l: usize, r: i64, hit: bool, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if pos == l {
            if hit || r == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in -r..=r {
            cur[pos] = v;
            gen(pos + 1, l, r, hit || v.abs() == r, cur, out);
        }
        cur[pos] = 0;
    }
    gen(0, l, r, false, &mut cur, &mut out);
    out
}

/// Membership in the positive half `Λ_l`: the last nonzero coordinate is
/// positive, so `{0} ∪ Λ_l ∪ (-Λ_l) = Z^l` disjointly.
pub fn in_lambda(point: &[i64]) -> bool {
    for &c in point.iter().rev() {
        if c != 0 {
            return c > 0;
        }
    }
    false
}

fn twist_sign(point: &[i64], p: usize) -> f64 {
    let s: i64 = point.iter().take(p).map(|c| c.abs()).sum();
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Distance from `x` to the singular set `Z^l x {0}^{m-l}`.
fn lattice_distance(x: &[f64], l: usize) -> f64 {
    let mut d2 = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        if i < l {
            let f = xi - xi.round();
            d2 += f * f;
        } else {
            d2 += xi * xi;
        }
    }
    d2.sqrt()
}

struct SeriesEvaluator<'a> {
    spec: &'a CylinderSpec,
    z1: Z1Evaluator,
    u: Vec<f64>,
}

impl<'a> SeriesEvaluator<'a> {
    fn new(spec: &'a CylinderSpec, u: &[f64], v: &[f64]) -> Result<Self> {
        let z1 = Z1Evaluator::new(&spec.params, v)?;
        Ok(SeriesEvaluator {
            spec,
            z1,
            u: u.to_vec(),
        })
    }

    fn term(&self, x: &[f64], n: &[i64]) -> Result<Multivector> {
        let mut z = x.to_vec();
        for (i, &ni) in n.iter().enumerate() {
            z[i] += ni as f64;
        }
        e_1k_coords(&z, &self.u, &self.spec.params, &self.z1)
    }

    /// Term at the lattice point itself (x = 0 shifted by n); used by the
    /// even-order regularizer at the critical rank.
    fn base_term(&self, n: &[i64]) -> Result<Multivector> {
        let z: Vec<f64> = (0..self.spec.params.m)
            .map(|i| if i < n.len() { n[i] as f64 } else { 0.0 })
            .collect();
        e_1k_coords(&z, &self.u, &self.spec.params, &self.z1)
    }
}

/// Whether the even-order critical-rank series needs the constant-term
/// regularizer `σ(n)[E(n) + E(-n)]` removed per pair.  For odd orders the pair
/// cancels identically; with a twist the alternating signs already make the
/// series summable and removing constants would break antiperiodicity.
fn needs_subtraction(spec: &CylinderSpec) -> bool {
    spec.is_critical() && spec.params.k.is_multiple_of(2) && spec.p == 0
}

fn check_point(spec: &CylinderSpec, x: &[f64]) -> Result<()> {
    if x.len() != spec.params.m {
        return Err(Error::DimensionMismatch {
            expected: spec.params.m,
            got: x.len(),
        });
    }
    if lattice_distance(x, spec.l) < SINGULAR_TOL {
        return Err(Error::singular("evaluation point on the lattice"));
    }
    Ok(())
}

fn cot_partial_sums_impl(
    spec: &CylinderSpec,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    radii: &[i64],
) -> Result<Vec<Multivector>> {
    check_point(spec, x)?;
    let ev = SeriesEvaluator::new(spec, u, v)?;
    let rmax = radii.iter().copied().max().unwrap_or(spec.radius);
    let mut acc = MvAccumulator::new(spec.params.m);
    let mut snapshots = Vec::with_capacity(radii.len());
    let critical = spec.is_critical();
    let subtract = needs_subtraction(spec);
    for r in 0..=rmax {
        if r == 0 {
            acc.add(&ev.term(x, &vec![0i64; spec.l])?);
        } else if !critical {
            for n in lattice_shell(spec.l, r) {
                let sgn = twist_sign(&n, spec.p);
                acc.add(&ev.term(x, &n)?.scale(sgn));
            }
        } else {
            for n in lattice_shell(spec.l, r) {
                if !in_lambda(&n) {
                    continue;
                }
                let neg: Vec<i64> = n.iter().map(|c| -c).collect();
                let sgn = twist_sign(&n, spec.p);
                let mut pair = &ev.term(x, &n)? + &ev.term(x, &neg)?;
                if subtract {
                    pair -= &ev.base_term(&n)?;
                    pair -= &ev.base_term(&neg)?;
                }
                acc.add(&pair.scale(sgn));
            }
        }
        if radii.contains(&r) {
            snapshots.push((r, acc.value()));
        }
    }
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let found = snapshots
            .iter()
            .find(|(rr, _)| *rr == r)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::constraint("radius exceeds computed range"))?;
        out.push(found);
    }
    Ok(out)
}

/// Direct cotangent series `Σ_{||n||_inf <= R} E_{1,k}(x + n, u, v)`, shell by
/// shell with compensated accumulation.  Requires `l <= m-k-1`; the critical
/// rank delegates to [`cot_kernel_regularized`].
pub fn cot_kernel(
    x: &[f64],
    u: &[f64],
    v: &[f64],
    spec: &CylinderSpec,
) -> Result<Multivector> {
    if spec.p != 0 {
        return Err(Error::constraint(
            "cot_kernel is the untwisted series; use cot_kernel_twisted for p >= 1",
        ));
    }
    cot_kernel_twisted(x, u, v, spec)
}

/// Critical-rank `l = m-k` paired series: `E(x) + Σ_{n in Λ}[E(x+n) + E(x-n)]`
/// with each pair added as a unit; for even `k` the pair's constant part
/// `E(n) + E(-n)` is removed so the partial sums converge.
pub fn cot_kernel_regularized(
    x: &[f64],
    u: &[f64],
    v: &[f64],
    spec: &CylinderSpec,
) -> Result<Multivector> {
    if !spec.is_critical() {
        return Err(Error::constraint("regularized series requires l = m-k"));
    }
    Ok(cot_partial_sums_impl(spec, x, u, v, &[spec.radius])?.remove(0))
}

/// Twisted series: every term weighted by `(-1)^{n_1 + ... + n_p}`.  Covers
/// both the direct range and the critical rank; `p = 0` reproduces the
/// untwisted kernels bit-exactly.
pub fn cot_kernel_twisted(
    x: &[f64],
    u: &[f64],
    v: &[f64],
    spec: &CylinderSpec,
) -> Result<Multivector> {
    Ok(cot_partial_sums_impl(spec, x, u, v, &[spec.radius])?.remove(0))
}

/// Partial sums of the (possibly twisted/regularized) series at several
/// truncation radii, computed in one pass.
pub fn cot_partial_sums(
    x: &[f64],
    u: &[f64],
    v: &[f64],
    spec: &CylinderSpec,
    radii: &[i64],
) -> Result<Vec<Multivector>> {
    cot_partial_sums_impl(spec, x, u, v, radii)
}

/// Two-point kernel `cot(x - y, u, v)`; singular on the cylinder diagonal.
/// Simultaneous lattice translation of `x` and `y` leaves the argument (hence
/// the value) unchanged.
pub fn two_point_kernel(
    x: &[f64],
    y: &[f64],
    u: &[f64],
    v: &[f64],
    spec: &CylinderSpec,
) -> Result<Multivector> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    if lattice_distance(&diff, spec.l) < SINGULAR_TOL {
        return Err(Error::singular("two-point kernel on the diagonal"));
    }
    cot_kernel_twisted(&diff, u, v, spec)
}

/// Ring sums `Σ_{R < ||n|| <= 2R} ||G_k(x+n)||`: the normal-convergence
/// majorant of the series (the reflected `Z_1` factor is bounded uniformly in
/// `n`), whose decay rate is `m - k - l`.
pub fn majorant_rings(x: &[f64], spec: &CylinderSpec, radii: &[i64]) -> Result<Vec<f64>> {
    check_point(spec, x)?;
    let rmax: i64 = radii.iter().copied().max().unwrap_or(0) * 2;
    let mut ring = vec![0.0f64; (rmax + 1) as usize];
    for r in 1..=rmax {
        let mut s = 0.0;
        for n in lattice_shell(spec.l, r) {
            let mut z = x.to_vec();
            for (i, &ni) in n.iter().enumerate() {
                z[i] += ni as f64;
            }
            s += crate::kernels::g_k_coords(&z, &spec.params)?.norm();
        }
        ring[r as usize] = s;
    }
    Ok(radii
        .iter()
        .map(|&r| ((r + 1)..=(2 * r)).map(|s| ring[s as usize]).sum())
        .collect())
}

/// Least-squares fit of `log(vals)` against `log(radii)`; returns
/// `(decay_exponent, fit_residual)` where `vals ~ C * R^{-decay_exponent}`.
pub fn fit_log_decay(radii: &[f64], vals: &[f64]) -> (f64, f64) {
    let n = radii.len() as f64;
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = vals.iter().map(|v| v.max(1e-300).ln()).collect();
    let sx: f64 = lx.iter().sum();
    let sy: f64 = ly.iter().sum();
    let sxx: f64 = lx.iter().map(|a| a * a).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residual = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let p = slope * a + intercept;
            (b - p) * (b - p)
        })
        .sum::<f64>()
        .sqrt();
    (-slope, residual)
}

/// Decay estimate over a radius sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailFit {
    pub radii: Vec<i64>,
    /// `||S_{2R} - S_R||` per radius (signed tail; benefits from term
    /// cancellation, so it can decay faster than the majorant).
    pub signed_defects: Vec<f64>,
    /// Ring sums of term norms per radius; the normal-convergence statistic
    /// whose fitted exponent tracks `m - k - l`.
    pub majorant: Vec<f64>,
    pub exponent_signed: Option<f64>,
    pub exponent_majorant: Option<f64>,
    pub fit_residual: f64,
    /// Set when every signed difference is below 1e-14 and no exponent is fit.
    pub saturated: bool,
}

/// Sweeps `R -> 2R` differences and ring majorants over the given radii and
/// fits the decay exponents.  At least 3 increasing radii are required.
pub fn tail_decay_estimate(
    spec: &CylinderSpec,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    radii: &[i64],
) -> Result<TailFit> {
    if radii.len() < 3 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::constraint("need >= 3 strictly increasing radii"));
    }
    let mut all: Vec<i64> = radii.to_vec();
    all.extend(radii.iter().map(|r| 2 * r));
    all.sort_unstable();
    all.dedup();
    let sums = cot_partial_sums(x, u, v, spec, &all)?;
    let at = |r: i64| -> &Multivector {
        &sums[all.iter().position(|&a| a == r).unwrap()]
    };
    let signed: Vec<f64> = radii.iter().map(|&r| (at(2 * r) - at(r)).norm()).collect();
    let maj = majorant_rings(x, spec, radii)?;
    let rf: Vec<f64> = radii.iter().map(|&r| r as f64).collect();
    if signed.iter().all(|&d| d < 1e-14) {
        return Ok(TailFit {
            radii: radii.to_vec(),
            signed_defects: signed,
            majorant: maj,
            exponent_signed: None,
            exponent_majorant: None,
            fit_residual: 0.0,
            saturated: true,
        });
    }
    let (es, res) = fit_log_decay(&rf, &signed);
    let (em, _) = fit_log_decay(&rf, &maj);
    Ok(TailFit {
        radii: radii.to_vec(),
        signed_defects: signed,
        majorant: maj,
        exponent_signed: Some(es),
        exponent_majorant: Some(em),
        fit_residual: res,
        saturated: false,
    })
}

/// The truncated cotangent kernel as a u-linear field of x (v fixed), for
/// applying the operators through jets.
pub struct CotangentField {
    spec: CylinderSpec,
    z1: Z1Evaluator,
    v: Vec<f64>,
}

impl CotangentField {
    pub fn new(spec: CylinderSpec, v: &[f64]) -> Result<Self> {
        let z1 = Z1Evaluator::new(&spec.params, v)?;
        Ok(CotangentField {
            spec,
            z1,
            v: v.to_vec(),
        })
    }

    pub fn spec(&self) -> &CylinderSpec {
        &self.spec
    }
}

impl ULinearField for CotangentField {
    fn dim(&self) -> usize {
        self.spec.params.m
    }

    fn component_jet(&self, j: usize, point: &[f64], order: usize) -> Result<Jet> {
        check_point(&self.spec, point)?;
        let m = self.spec.params.m;
        let mut u = vec![0.0; m];
        u[j] = 1.0;
        let mut acc: Option<Jet> = None;
        let critical = self.spec.is_critical();
        let subtract = needs_subtraction(&self.spec);
        let add_term = |n: &[i64], sgn: f64, acc: &mut Option<Jet>| -> Result<()> {
            let mut z = point.to_vec();
            for (i, &ni) in n.iter().enumerate() {
                z[i] += ni as f64;
            }
            let jet = e_1k_jet_with(&z, &u, &self.spec.params, &self.z1, order)?.scale(sgn);
            *acc = Some(match acc.take() {
                None => jet,
                Some(a) => a.add(&jet)?,
            });
            Ok(())
        };
        for r in 0..=self.spec.radius {
            if r == 0 {
                add_term(&vec![0i64; self.spec.l], 1.0, &mut acc)?;
            } else if !critical {
                for n in lattice_shell(self.spec.l, r) {
                    add_term(&n, twist_sign(&n, self.spec.p), &mut acc)?;
                }
            } else {
                for n in lattice_shell(self.spec.l, r) {
                    if !in_lambda(&n) {
                        continue;
                    }
                    let sgn = twist_sign(&n, self.spec.p);
                    let neg: Vec<i64> = n.iter().map(|c| -c).collect();
                    add_term(&n, sgn, &mut acc)?;
                    add_term(&neg, sgn, &mut acc)?;
                }
            }
        }
        let mut jet = acc.expect("at least the r=0 term");
        if subtract {
            // x-independent regularizer only shifts the value coefficient
            let ev = SeriesEvaluator::new(&self.spec, &u, &self.v)?;
            let mut shift = Multivector::zero(m);
            for r in 1..=self.spec.radius {
                for n in lattice_shell(self.spec.l, r) {
                    if !in_lambda(&n) {
                        continue;
                    }
                    let neg: Vec<i64> = n.iter().map(|c| -c).collect();
                    shift += &ev.base_term(&n)?;
                    shift += &ev.base_term(&neg)?;
                }
            }
            jet = jet.add(&Jet::constant(shift.scale(-1.0), point.len(), order))?;
        }
        Ok(jet)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::e_1k;

    fn spec(m: usize, k: usize, l: usize, p: usize, r: i64) -> CylinderSpec {
        CylinderSpec::new(KernelParams::new(m, k).unwrap(), l, p, r).unwrap()
    }

    #[test]
    fn folding() {
        let x = fold_to_fundamental_domain(&[2.25, -0.5, 3.0], 2);
        assert_eq!(x, vec![0.25, 0.5, 3.0]);
        let y = fold_to_fundamental_domain(&[0.999, 0.5, 0.1], 1);
        assert_eq!(y, vec![0.999, 0.5, 0.1]);
        // idempotent
        let z = fold_to_fundamental_domain(&x, 2);
        assert_eq!(z, x);
    }

    #[test]
    fn shells() {
        assert_eq!(lattice_shell(1, 2), vec![vec![-2], vec![2]]);
        assert_eq!(lattice_shell(2, 1).len(), 8);
        assert_eq!(lattice_shell(2, 0), vec![vec![0, 0]]);
        // lexicographic order
        let s = lattice_shell(2, 1);
        assert_eq!(s[0], vec![-1, -1]);
        assert_eq!(s[7], vec![1, 1]);
    }

    #[test]
    fn lambda_decomposition() {
        // {0} ∪ Λ ∪ (-Λ) = Z^l disjointly, enumerated to sup-norm 3
        for l in 1..=4usize {
            for r in 1..=3i64 {
                for n in lattice_shell(l, r) {
                    let neg: Vec<i64> = n.iter().map(|c| -c).collect();
                    assert_ne!(in_lambda(&n), in_lambda(&neg), "{n:?}");
                }
            }
            assert!(!in_lambda(&vec![0i64; l]));
        }
    }

    #[test]
    fn spec_constraints() {
        assert!(CylinderSpec::new(KernelParams::new(6, 1).unwrap(), 5, 0, 4).is_ok());
        assert!(CylinderSpec::new(KernelParams::new(6, 1).unwrap(), 6, 0, 4).is_err());
        assert!(CylinderSpec::new(KernelParams::new(6, 1).unwrap(), 0, 0, 4).is_err());
        assert!(CylinderSpec::new(KernelParams::new(6, 1).unwrap(), 2, 3, 4).is_err());
    }

    #[test]
    fn r0_is_single_euclidean_term() {
        let sp = spec(5, 2, 1, 0, 0);
        let x = [0.3, 0.4, -0.2, 0.5, 0.1];
        let u = [1.0, 0.0, 0.3, 0.0, 0.0];
        let v = [0.0, 1.0, 0.0, -0.5, 0.2];
        let a = cot_kernel(&x, &u, &v, &sp).unwrap();
        let b = e_1k(
            &Multivector::from_vector(&x),
            &Multivector::from_vector(&u),
            &Multivector::from_vector(&v),
            &sp.params,
        )
        .unwrap();
        assert_eq!(a, b, "single-term truncation must be bit-exact");
    }

    #[test]
    fn twisted_p0_matches_untwisted_bit_exactly() {
        let sp0 = spec(6, 1, 2, 0, 3);
        let x = [0.37, 0.21, -0.4, 0.5, 0.11, -0.6];
        let u = [0.2, -1.0, 0.4, 0.0, 0.3, 0.1];
        let v = [1.0, 0.2, 0.0, 0.5, -0.2, 0.0];
        let a = cot_kernel(&x, &u, &v, &sp0).unwrap();
        let b = cot_kernel_twisted(&x, &u, &v, &sp0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singular_points_rejected() {
        let sp = spec(5, 2, 1, 0, 2);
        let err = cot_kernel(&[1.0, 0.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0, 0.0],
                             &[0.0, 1.0, 0.0, 0.0, 0.0], &sp);
        assert!(matches!(err, Err(Error::Singularity { .. })));
    }

    #[test]
    fn critical_rank_routing() {
        let sp = spec(5, 2, 3, 0, 1); // l = m-k = 3
        assert!(sp.is_critical());
        let x = [0.3, 0.4, 0.25, 0.5, 0.1];
        let u = [1.0, 0.0, 0.0, 0.0, 0.0];
        let v = [0.0, 1.0, 0.0, 0.0, 0.0];
        let a = cot_kernel(&x, &u, &v, &sp).unwrap();
        let b = cot_kernel_regularized(&x, &u, &v, &sp).unwrap();
        assert_eq!(a, b);
        // non-critical spec rejected by the regularized entry point
        let sp2 = spec(5, 2, 1, 0, 1);
        assert!(cot_kernel_regularized(&x, &u, &v, &sp2).is_err());
    }

    #[test]
    fn regularized_r0_is_single_term() {
        let sp = spec(5, 2, 3, 0, 0);
        let x = [0.3, 0.4, 0.25, 0.5, 0.1];
        let u = [0.0, 1.0, 0.0, 0.0, 0.0];
        let v = [0.5, 0.0, 0.0, 1.0, 0.0];
        let a = cot_kernel_regularized(&x, &u, &v, &sp).unwrap();
        let b = e_1k(
            &Multivector::from_vector(&x),
            &Multivector::from_vector(&u),
            &Multivector::from_vector(&v),
            &sp.params,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_point_relations() {
        let sp = spec(6, 1, 1, 0, 2);
        // dyadic coordinates so the ±1 translations below are fp-exact
        let x = [0.375, 0.25, -0.125, 0.625, 0.0625, 0.1875];
        let y = [0.0; 6];
        let u = [0.0, 1.0, 0.0, 0.2, 0.0, 0.0];
        let v = [1.0, 0.0, 0.0, 0.0, -0.4, 0.0];
        let a = two_point_kernel(&x, &y, &u, &v, &sp).unwrap();
        let b = cot_kernel(&x, &u, &v, &sp).unwrap();
        assert_eq!(a, b);
        // simultaneous translation invariance (identical folded argument)
        let xs: Vec<f64> = x.iter().enumerate().map(|(i, &c)| if i == 0 { c + 1.0 } else { c }).collect();
        let ys: Vec<f64> = y.iter().enumerate().map(|(i, &c)| if i == 0 { c + 1.0 } else { c }).collect();
        let c = two_point_kernel(&xs, &ys, &u, &v, &sp).unwrap();
        assert_eq!(a, c);
        // diagonal rejected
        assert!(two_point_kernel(&x, &x, &u, &v, &sp).is_err());
    }

    #[test]
    fn shell_determinism() {
        let sp = spec(6, 1, 2, 1, 3);
        let x = [0.37, 0.21, -0.4, 0.5, 0.11, -0.6];
        let u = [0.2, -1.0, 0.4, 0.0, 0.3, 0.1];
        let v = [1.0, 0.2, 0.0, 0.5, -0.2, 0.0];
        let a = cot_kernel_twisted(&x, &u, &v, &sp).unwrap();
        let b = cot_kernel_twisted(&x, &u, &v, &sp).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn field_value_matches_kernel() {
        let sp = spec(5, 2, 3, 0, 1);
        let x = [0.3, 0.4, 0.25, 0.5, 0.1];
        let v = [0.5, 0.0, 0.0, 1.0, 0.0];
        let field = CotangentField::new(sp, &v).unwrap();
        let val = field.value_at(&x).unwrap();
        let u = [0.3, -0.2, 0.7, 0.0, 1.0];
        let direct = cot_kernel_regularized(&x, &u, &v, &sp).unwrap();
        assert!(val.eval(&u).max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn tail_fit_requires_radii() {
        let sp = spec(6, 1, 1, 0, 4);
        let x = [0.4, 0.3, -0.2, 0.6, 0.1, 0.2];
        let u = [0.0, 1.0, 0.0, 0.2, 0.0, 0.0];
        let v = [1.0, 0.0, 0.0, 0.0, -0.4, 0.0];
        assert!(tail_decay_estimate(&sp, &x, &u, &v, &[4, 8]).is_err());
        assert!(tail_decay_estimate(&sp, &x, &u, &v, &[8, 4, 16]).is_err());
    }
}
