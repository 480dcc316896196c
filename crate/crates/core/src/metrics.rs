//! Deviation of the Hessian–covariance product from a multiple of the
//! identity.

use crate::error::{Error, Result};
use crate::landscape::HessianKind;
use crate::matrix::Matrix;
use crate::sampling::SelectionMode;

fn check_pair(h: &Matrix, c: &Matrix) -> Result<()> {
    if !h.is_square() || !c.is_square() || h.rows() != c.rows() {
        return Err(Error::dim(format!(
            "Hessian is {}x{}, covariance is {}x{}",
            h.rows(),
            h.cols(),
            c.rows(),
            c.cols()
        )));
    }
    Ok(())
}

/// H·C divided by its largest absolute entry.
pub fn normalize_hc(h: &Matrix, c: &Matrix) -> Result<Matrix> {
    check_pair(h, c)?;
    let hc = h.matmul(c)?;
    let scale = hc.max_abs();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::param("H·C has no nonzero finite entry to normalize by"));
    }
    Ok(hc.scale(1.0 / scale))
}

/// Largest deviation of the diagonal from one.
pub fn e1(tilde: &Matrix) -> f64 {
    tilde
        .diagonal()
        .iter()
        .fold(0.0f64, |m, &d| m.max((d - 1.0).abs()))
}

/// Largest off-diagonal magnitude.
pub fn e2(tilde: &Matrix) -> Result<f64> {
    if !tilde.is_square() || tilde.rows() < 2 {
        return Err(Error::dim("off-diagonal error needs a square matrix with n >= 2"));
    }
    let n = tilde.rows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(tilde[(i, j)].abs());
            }
        }
    }
    Ok(worst)
}

/// ‖HC − CH‖_F.
pub fn commutator_frobenius(h: &Matrix, c: &Matrix) -> Result<f64> {
    check_pair(h, c)?;
    Ok(h.matmul(c)?.sub(&c.matmul(h)?)?.frobenius_norm())
}

/// α = 1/β with β the largest signed entry of C·H.
pub fn alpha_posteriori(h: &Matrix, c: &Matrix) -> Result<f64> {
    check_pair(h, c)?;
    let beta = c.matmul(h)?.max_entry();
    if !(beta > 0.0) {
        return Err(Error::param(format!(
            "largest entry of C·H must be positive, got {beta}"
        )));
    }
    Ok(1.0 / beta)
}

/// Where a report came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportContext {
    pub kind: HessianKind,
    pub n: usize,
    pub c: f64,
    pub lambda: usize,
    pub mode: SelectionMode,
    pub translation_scale: f64,
    pub iters: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub context: ReportContext,
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub commutator_frob: f64,
    pub alpha: f64,
    /// `"ok"` or a one-line failure description.
    pub status: String,
}

impl ErrorReport {
    /// Evaluates all measures for one (Hessian, covariance) pair.
    pub fn evaluate(context: ReportContext, h: &Matrix, c: &Matrix, e0: f64) -> Result<Self> {
        let tilde = normalize_hc(h, c)?;
        let e2 = if h.rows() >= 2 { e2(&tilde)? } else { 0.0 };
        Ok(ErrorReport {
            context,
            e0,
            e1: e1(&tilde),
            e2,
            commutator_frob: commutator_frobenius(h, c)?,
            alpha: alpha_posteriori(h, c).unwrap_or(f64::NAN),
            status: "ok".to_string(),
        })
    }

    /// A row carrying only its context and a failure message.
    pub fn failed(context: ReportContext, message: impl Into<String>) -> Self {
        ErrorReport {
            context,
            e0: f64::NAN,
            e1: f64::NAN,
            e2: f64::NAN,
            commutator_frob: f64::NAN,
            alpha: f64::NAN,
            status: message.into(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::make_hessian;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let t = normalize_hc(&Matrix::identity(2), &Matrix::from_diag(&[2.0, 4.0])).unwrap();
        assert_eq!(t, Matrix::from_diag(&[0.5, 1.0]));
        assert_eq!(normalize_hc(&Matrix::identity(3), &Matrix::identity(3)).unwrap(), Matrix::identity(3));
        let t = normalize_hc(&Matrix::from_diag(&[2.0, 1.0]), &Matrix::from_diag(&[1.0, 2.0])).unwrap();
        assert_eq!(t, Matrix::identity(2));
        assert!(normalize_hc(&Matrix::identity(2), &Matrix::zeros(2, 2)).is_err());
        assert!(normalize_hc(&Matrix::identity(2), &Matrix::identity(3)).is_err());
    }

    #[test]
    fn e1_examples() {
        assert_eq!(e1(&Matrix::identity(4)), 0.0);
        assert_eq!(e1(&Matrix::from_diag(&[0.5, 1.0])), 0.5);
        let h = make_hessian(HessianKind::Discus, 5, 16.0).unwrap();
        let t = normalize_hc(h.entries(), &Matrix::identity(5)).unwrap();
        assert_eq!(e1(&t), 0.9375);
    }

    #[test]
    fn e2_examples() {
        assert_eq!(e2(&Matrix::from_diag(&[3.0, -1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(e2(&m(&[&[1.0, -0.3], &[0.1, 1.0]])).unwrap(), 0.3);
        let t = normalize_hc(&Matrix::from_diag(&[2.0, 5.0]), &Matrix::from_diag(&[7.0, 0.5])).unwrap();
        assert_eq!(e2(&t).unwrap(), 0.0);
        assert!(e2(&Matrix::identity(1)).is_err());
    }

    #[test]
    fn commutator_examples() {
        let d1 = Matrix::from_diag(&[1.0, 3.0]);
        let d2 = Matrix::from_diag(&[5.0, -2.0]);
        assert_eq!(commutator_frobenius(&d1, &d2).unwrap(), 0.0);
        let s = m(&[&[2.0, 1.0], &[1.0, 4.0]]);
        assert_eq!(commutator_frobenius(&s, &s).unwrap(), 0.0);
        let h = Matrix::from_diag(&[1.0, 2.0]);
        let c = commutator_frobenius(&h, &m(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!((c - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_posteriori(&Matrix::identity(3), &Matrix::identity(3).scale(2.0)).unwrap(), 0.5);
        let h = make_hessian(HessianKind::Discus, 3, 8.0).unwrap();
        let hinv = Matrix::from_diag(&[0.125, 1.0, 1.0]);
        assert_eq!(alpha_posteriori(h.entries(), &hinv).unwrap(), 1.0);
        let a = alpha_posteriori(h.entries(), &hinv.scale(4.0)).unwrap();
        assert!((a - 0.25).abs() < 1e-15);
        assert!(alpha_posteriori(&Matrix::identity(2), &Matrix::identity(2).scale(-1.0)).is_err());
    }

    #[test]
    fn hadamard_reference_has_small_e1() {
        // M = I: tilde is H/max|H|, whose diagonal is constant for H-5.
        for c in [4.0, 64.0, 1024.0] {
            let h5 = make_hessian(HessianKind::HadamardEllipse, 8, c).unwrap();
            let t = normalize_hc(h5.entries(), &Matrix::identity(8)).unwrap();
            assert!(e1(&t) < 1e-12);
            let h1 = make_hessian(HessianKind::Discus, 8, c).unwrap();
            let t = normalize_hc(h1.entries(), &Matrix::identity(8)).unwrap();
            assert!((e1(&t) - (1.0 - 1.0 / c)).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn tilde_is_scale_invariant(entries in proptest::collection::vec(-3.0f64..3.0, 9), gamma in 1e-3f64..1e3) {
            let a = Matrix::from_row_major(3, 3, entries).unwrap();
            let c = a.matmul(&a.transpose()).unwrap().add(&Matrix::identity(3)).unwrap();
            let h = make_hessian(HessianKind::RotatedEllipse, 3, 10.0).unwrap();
            let t1 = normalize_hc(h.entries(), &c).unwrap();
            let t2 = normalize_hc(h.entries(), &c.scale(gamma)).unwrap();
            prop_assert!(t1.sub(&t2).unwrap().max_abs() < 1e-12);
            prop_assert!((e1(&t1) - e1(&t2)).abs() < 1e-12);
            prop_assert!((e2(&t1).unwrap() - e2(&t2).unwrap()).abs() < 1e-12);
            prop_assert!((t1.max_abs() - 1.0).abs() < 1e-15);
        }
    }
}
