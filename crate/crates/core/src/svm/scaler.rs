use alloc::vec::Vec;

use crate::matrix::Matrix;

/// Per-feature standardization fitted on training data. Zero-variance
/// features map to 0 so they carry no weight.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.n_rows().max(1) as f64;
        let d = x.n_cols();
        let mut mean = alloc::vec![0.0; d];
        for r in x.rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; d];
        for r in x.rows() {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = libm::sqrt(s / n);
                // relative to the feature's magnitude, not absolute
                if sd <= 1e-12 * (1.0 + libm::fabs(*m)) { 0.0 } else { sd }
            })
            .collect();
        Self { mean, std }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(row).zip(&self.mean).zip(&self.std) {
            *o = if *s == 0.0 { 0.0 } else { (v - m) / s };
        }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.n_rows(), x.n_cols());
        for i in 0..x.n_rows() {
            self.transform_row(x.row(i), out.row_mut(i));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizes_columns_and_zeroes_constants() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]]).unwrap();
        let s = Scaler::fit(&x);
        assert_eq!(s.std[1], 0.0);
        let t = s.transform(&x);
        assert!((t.get(0, 0) + t.get(2, 0)).abs() < 1e-12);
        let var: f64 = (0..3).map(|i| t.get(i, 0).powi(2)).sum::<f64>() / 3.0;
        assert!((var - 1.0).abs() < 1e-12);
        assert!((0..3).all(|i| t.get(i, 1) == 0.0));
    }
}
