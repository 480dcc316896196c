//! Quadratic landscapes: the five parameterized Hessian families and the
//! translated objective `J(z) = zᵀHz + aᵀz` that sampling evaluates.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{symmetric_eigen, Matrix};

/// Off-diagonal Frobenius norm at which the Jacobi solver stops for custom
/// Hessians.
pub const JACOBI_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HessianKind {
    Discus,
    Cigar,
    Ellipse,
    RotatedEllipse,
    HadamardEllipse,
    Custom,
}

impl HessianKind {
    /// The five built-in families, in H-1 … H-5 order.
    pub const FAMILIES: [HessianKind; 5] = [
        HessianKind::Discus,
        HessianKind::Cigar,
        HessianKind::Ellipse,
        HessianKind::RotatedEllipse,
        HessianKind::HadamardEllipse,
    ];

    /// Short label used in CSV output and on the command line.
    pub fn label(self) -> &'static str {
        match self {
            HessianKind::Discus => "H1",
            HessianKind::Cigar => "H2",
            HessianKind::Ellipse => "H3",
            HessianKind::RotatedEllipse => "H4",
            HessianKind::HadamardEllipse => "H5",
            HessianKind::Custom => "custom",
        }
    }

    /// Whether the family is diagonal in the standard basis.
    pub fn is_separable(self) -> bool {
        matches!(
            self,
            HessianKind::Discus | HessianKind::Cigar | HessianKind::Ellipse
        )
    }
}

impl fmt::Display for HessianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for HessianKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "h1" | "discus" => HessianKind::Discus,
            "h2" | "cigar" => HessianKind::Cigar,
            "h3" | "ellipse" => HessianKind::Ellipse,
            "h4" | "rotatedellipse" | "rotated" => HessianKind::RotatedEllipse,
            "h5" | "hadamardellipse" | "hadamard" => HessianKind::HadamardEllipse,
            other => return Err(Error::param(format!("unknown Hessian kind `{other}`"))),
        };
        Ok(k)
    }
}

/// Symmetric positive-definite landscape Hessian together with its
/// eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Hessian {
    kind: HessianKind,
    entries: Matrix,
    spectrum: Vec<f64>,
}

impl Hessian {
    /// Wraps an arbitrary symmetric positive-definite matrix. The spectrum is
    /// extracted with cyclic Jacobi sweeps.
    pub fn custom(entries: Matrix) -> Result<Self> {
        if !entries.is_square() || entries.rows() == 0 {
            return Err(Error::dim("Hessian must be a non-empty square matrix"));
        }
        if !entries.is_symmetric(1e-12) {
            return Err(Error::param(format!(
                "Hessian is not symmetric (max asymmetry {:e})",
                entries.max_asymmetry()
            )));
        }
        let (spectrum, _) = symmetric_eigen(&entries, JACOBI_TOL)?;
        if let Some(&min) = spectrum.first() {
            if min <= 0.0 {
                return Err(Error::param(format!(
                    "Hessian is not positive definite (smallest eigenvalue {min:e})"
                )));
            }
        }
        Ok(Hessian {
            kind: HessianKind::Custom,
            entries,
            spectrum,
        })
    }

    pub fn kind(&self) -> HessianKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// Eigenvalues Δ₁…Δₙ. For the built-in families these are the Ellipse,
    /// Discus or Cigar diagonal, carried over analytically.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn condition_number(&self) -> f64 {
        let (lo, hi) = self
            .spectrum
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        hi / lo
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.entries[(i, j)] == 0.0))
    }
}

fn ellipse_diagonal(n: usize, c: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| c.powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Builds one of the five Hessian families with condition parameter `c`.
pub fn make_hessian(kind: HessianKind, n: usize, c: f64) -> Result<Hessian> {
    if n == 0 {
        return Err(Error::dim("dimension must be at least 1"));
    }
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::param(format!("condition parameter must be >= 1, got {c}")));
    }
    let (entries, spectrum) = match kind {
        HessianKind::Discus => {
            let mut d = vec![1.0; n];
            d[0] = c;
            (Matrix::from_diag(&d), d)
        }
        HessianKind::Cigar => {
            let mut d = vec![c; n];
            d[0] = 1.0;
            (Matrix::from_diag(&d), d)
        }
        HessianKind::Ellipse => {
            let d = ellipse_diagonal(n, c);
            (Matrix::from_diag(&d), d)
        }
        HessianKind::RotatedEllipse => {
            let d = ellipse_diagonal(n, c);
            let r = plane_rotation(n, FRAC_PI_4)?;
            (symmetrize(Matrix::congruence(&r, &Matrix::from_diag(&d))?), d)
        }
        HessianKind::HadamardEllipse => {
            let d = ellipse_diagonal(n, c);
            let s = hadamard_matrix(n)?.scale(1.0 / (n as f64).sqrt());
            (symmetrize(Matrix::congruence(&s, &Matrix::from_diag(&d))?), d)
        }
        HessianKind::Custom => {
            return Err(Error::param(
                "custom Hessians are built with Hessian::custom, not make_hessian",
            ))
        }
    };
    Ok(Hessian {
        kind,
        entries,
        spectrum,
    })
}

// Congruences are symmetric in exact arithmetic; average away rounding.
fn symmetrize(mut m: Matrix) -> Matrix {
    let n = m.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    m
}

/// Unnormalized Sylvester Hadamard matrix of order `n = 2^k`.
pub fn hadamard_matrix(n: usize) -> Result<Matrix> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::dim(format!(
            "Hadamard construction needs a power-of-two dimension, got {n}"
        )));
    }
    let mut h = Matrix::identity(1);
    let mut size = 1;
    while size < n {
        let mut next = Matrix::zeros(2 * size, 2 * size);
        for i in 0..size {
            for j in 0..size {
                let v = h[(i, j)];
                next[(i, j)] = v;
                next[(i, j + size)] = v;
                next[(i + size, j)] = v;
                next[(i + size, j + size)] = -v;
            }
        }
        h = next;
        size *= 2;
    }
    Ok(h)
}

/// Rotation by `theta` in the plane spanned by the normalized alternating
/// vectors u ∝ (1,0,1,0,…) and v ∝ (0,1,0,1,…), identity on the orthogonal
/// complement.
pub fn plane_rotation(n: usize, theta: f64) -> Result<Matrix> {
    if n < 2 {
        return Err(Error::dim(format!("plane rotation needs n >= 2, got {n}")));
    }
    let mut u: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
    let mut v: Vec<f64> = (0..n).map(|i| if i % 2 == 1 { 1.0 } else { 0.0 }).collect();
    for w in [&mut u, &mut v] {
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        w.iter_mut().for_each(|x| *x /= norm);
    }
    let (s, c) = theta.sin_cos();
    let mut r = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] += (c - 1.0) * (u[i] * u[j] + v[i] * v[j]) + s * (v[i] * u[j] - u[i] * v[j]);
        }
    }
    Ok(r)
}

/// `J(z) = zᵀHz + aᵀz` with its analytic minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    hessian: Hessian,
    translation: Vec<f64>,
    minimizer: Vec<f64>,
    diagonal: Option<Vec<f64>>,
}

impl Objective {
    pub fn new(hessian: Hessian, translation: Vec<f64>) -> Result<Self> {
        let minimizer = minimizer(&hessian, &translation)?;
        let diagonal = hessian.is_diagonal().then(|| hessian.entries().diagonal());
        Ok(Objective {
            hessian,
            translation,
            minimizer,
            diagonal,
        })
    }

    /// Objective sampled at the optimum (`a = 0`).
    pub fn centered(hessian: Hessian) -> Self {
        let n = hessian.dim();
        let diagonal = hessian.is_diagonal().then(|| hessian.entries().diagonal());
        Objective {
            hessian,
            translation: vec![0.0; n],
            minimizer: vec![0.0; n],
            diagonal,
        }
    }

    /// Translation `a = scale·(1,…,1)`.
    pub fn with_uniform_translation(hessian: Hessian, scale: f64) -> Result<Self> {
        let n = hessian.dim();
        Objective::new(hessian, vec![scale; n])
    }

    pub fn hessian(&self) -> &Hessian {
        &self.hessian
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    pub fn dim(&self) -> usize {
        self.hessian.dim()
    }

    /// Checked evaluation.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::dim(format!(
                "objective has dimension {}, point has {}",
                self.dim(),
                z.len()
            )));
        }
        Ok(self.eval_unchecked(z))
    }

    /// Quadratic form accumulated row by row, then the linear term.
    ///
    /// Diagonal Hessians skip the zero products; the result is bit-identical
    /// to the dense path since every skipped term is an exact zero.
    #[inline]
    pub fn eval_unchecked(&self, z: &[f64]) -> f64 {
        let mut quad = 0.0;
        if let Some(diag) = &self.diagonal {
            for (&zi, &d) in z.iter().zip(diag) {
                quad += zi * (d * zi);
            }
        } else {
            let h = self.hessian.entries();
            for (i, &zi) in z.iter().enumerate() {
                let row: f64 = h.row(i).iter().zip(z).map(|(hij, zj)| hij * zj).sum();
                quad += zi * row;
            }
        }
        let lin: f64 = self.translation.iter().zip(z).map(|(a, zi)| a * zi).sum();
        quad + lin
    }

    /// Value at the minimizer.
    pub fn minimum_value(&self) -> f64 {
        self.eval_unchecked(&self.minimizer)
    }

    pub fn distance_to_minimizer(&self, z: &[f64]) -> f64 {
        z.iter()
            .zip(&self.minimizer)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Free-function form of [`Objective::eval`].
pub fn eval_objective(obj: &Objective, z: &[f64]) -> Result<f64> {
    obj.eval(z)
}

/// Solves ∇J = 2Hz + a = 0, i.e. z* = −½H⁻¹a.
pub fn minimizer(hessian: &Hessian, a: &[f64]) -> Result<Vec<f64>> {
    if a.len() != hessian.dim() {
        return Err(Error::dim(format!(
            "translation has length {}, Hessian has dimension {}",
            a.len(),
            hessian.dim()
        )));
    }
    if a.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; a.len()]);
    }
    let rhs: Vec<f64> = a.iter().map(|v| -0.5 * v).collect();
    let z = hessian.entries().solve(&rhs)?;
    let residual = hessian
        .entries()
        .mul_vec(&z)?
        .iter()
        .zip(a)
        .map(|(hz, ai)| (2.0 * hz + ai).abs())
        .fold(0.0f64, f64::max);
    let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if residual > 1e-10 * scale {
        return Err(Error::Singular(format!(
            "minimizer residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(z)
}

/// Power sums (ΣΔᵢ, ΣΔᵢ²) of the spectrum.
pub fn spectrum_sums(hessian: &Hessian) -> (f64, f64) {
    hessian
        .spectrum()
        .iter()
        .fold((0.0, 0.0), |(s1, s2), &d| (s1 + d, s2 + d * d))
}
