//! Compensated (Kahan) accumulation for multivector series.

use crate::clifford::Multivector;

/// Kahan-compensated coefficient-wise sum of multivectors.  Accumulation order
/// is whatever the caller feeds it, so a fixed term order gives bit-identical
/// results across runs.
#[derive(Debug, Clone)]
pub struct MvAccumulator {
    sum: Vec<f64>,
    comp: Vec<f64>,
    dim: usize,
}

impl MvAccumulator {
    pub fn new(dim: usize) -> Self {
        MvAccumulator {
            sum: vec![0.0; 1 << dim],
            comp: vec![0.0; 1 << dim],
            dim,
        }
    }

    pub fn add(&mut self, term: &Multivector) {
        debug_assert_eq!(term.dim(), self.dim);
        for (i, &t) in term.coeffs().iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let y = t - self.comp[i];
            let s = self.sum[i] + y;
            self.comp[i] = (s - self.sum[i]) - y;
            self.sum[i] = s;
        }
    }

    pub fn value(&self) -> Multivector {
        Multivector::from_coeffs(self.dim, self.sum.clone()).expect("accumulator shape is valid")
    }
}
