//! Single-pass mean/covariance of winner vectors with a pooled merge.

use super::WinnerRecord;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceAccumulator {
    count: u64,
    mean: Vec<f64>,
    // Upper and lower triangles are written from the same product, so the
    // matrix is exactly symmetric after every update.
    comoment: Matrix,
    distance_sum: f64,
}

/// Output of [`CovarianceAccumulator::finalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Finalized {
    pub mean: Vec<f64>,
    pub covariance: Matrix,
    pub mean_distance: f64,
}

impl CovarianceAccumulator {
    pub fn new(n: usize) -> Self {
        CovarianceAccumulator {
            count: 0,
            mean: vec![0.0; n],
            comoment: Matrix::zeros(n, n),
            distance_sum: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn comoment(&self) -> &Matrix {
        &self.comoment
    }

    pub fn distance_sum(&self) -> f64 {
        self.distance_sum
    }

    pub fn accumulate(&mut self, rec: &WinnerRecord) -> Result<()> {
        if rec.vector.len() != self.dim() {
            return Err(Error::dim(format!(
                "record has dimension {}, accumulator {}",
                rec.vector.len(),
                self.dim()
            )));
        }
        self.push(&rec.vector, rec.distance);
        Ok(())
    }

    /// Welford update: with d = x − mean_old, mean += d/k and
    /// M += (k−1)/k · d dᵀ.
    pub(crate) fn push(&mut self, x: &[f64], distance: f64) {
        self.count += 1;
        let k = self.count as f64;
        let n = self.dim();
        let mut d = vec![0.0; n];
        for ((di, &xi), mi) in d.iter_mut().zip(x).zip(self.mean.iter_mut()) {
            *di = xi - *mi;
            *mi += *di / k;
        }
        let w = (k - 1.0) / k;
        if w != 0.0 {
            for i in 0..n {
                let wdi = w * d[i];
                for (j, &dj) in d.iter().enumerate().skip(i) {
                    let v = wdi * dj;
                    self.comoment[(i, j)] += v;
                    if i != j {
                        self.comoment[(j, i)] += v;
                    }
                }
            }
        }
        self.distance_sum += distance;
    }

    /// Pools two accumulators (Chan et al.).
    pub fn merge(&self, other: &CovarianceAccumulator) -> Result<CovarianceAccumulator> {
        if self.dim() != other.dim() {
            return Err(Error::dim(format!(
                "cannot merge accumulators of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        if other.count == 0 {
            return Ok(self.clone());
        }
        if self.count == 0 {
            return Ok(other.clone());
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let total = na + nb;
        let n = self.dim();
        let delta: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        let mean = self
            .mean
            .iter()
            .zip(&other.mean)
            .map(|(a, b)| (na * a + nb * b) / total)
            .collect();
        let w = na * nb / total;
        let mut comoment = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.comoment[(i, j)] + other.comoment[(i, j)] + w * delta[i] * delta[j];
                comoment[(i, j)] = v;
                comoment[(j, i)] = v;
            }
        }
        Ok(CovarianceAccumulator {
            count: self.count + other.count,
            mean,
            comoment,
            distance_sum: self.distance_sum + other.distance_sum,
        })
    }

    /// Mean, 1/N covariance and mean distance to the optimum.
    pub fn finalize(&self) -> Result<Finalized> {
        if self.count < 2 {
            return Err(Error::param(format!(
                "covariance needs at least 2 records, have {}",
                self.count
            )));
        }
        let k = self.count as f64;
        Ok(Finalized {
            mean: self.mean.clone(),
            covariance: self.comoment.scale(1.0 / k),
            mean_distance: self.distance_sum / k,
        })
    }
}

/// Free-function form of [`CovarianceAccumulator::merge`].
pub fn merge(a: &CovarianceAccumulator, b: &CovarianceAccumulator) -> Result<CovarianceAccumulator> {
    a.merge(b)
}
