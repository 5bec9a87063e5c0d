//! Bivariate polynomial surrogate of a role's utility over
//! `(a_L, a_F)`, fitted by ridge-regularized normal equations.

use serde::{Deserialize, Serialize};

use super::buffer::Sample;
use crate::error::{Error, Result};

/// Which utility column of a sample the fit targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Leader,
    Follower,
}

/// Exponents `(j, m)` of the monomials `a_L^j a_F^m` with `j + m <= degree`.
///
/// Ordered by total degree; within a degree the pure leader power comes
/// first, then the pure follower power, then mixed terms by decreasing
/// leader power. For degree 2 this is `1, a_L, a_F, a_L^2, a_F^2, a_L a_F`.
pub fn basis(degree: usize) -> Vec<(u32, u32)> {
    let mut out = vec![(0, 0)];
    for d in 1..=degree as u32 {
        out.push((d, 0));
        out.push((0, d));
        for m in 1..d {
            out.push((d - m, m));
        }
    }
    out
}

pub fn basis_len(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyModel {
    degree: usize,
    coeffs: Vec<f64>,
}

#[inline]
fn pow(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

impl PolyModel {
    pub fn new(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis_len(degree) {
            return Err(Error::Config(format!(
                "degree {degree} needs {} coefficients, got {}",
                basis_len(degree),
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn terms(&self) -> impl Iterator<Item = (f64, (u32, u32))> + '_ {
        self.coeffs.iter().copied().zip(basis(self.degree))
    }

    pub fn eval(&self, a_l: f64, a_f: f64) -> f64 {
        self.terms().map(|(c, (j, m))| c * pow(a_l, j) * pow(a_f, m)).sum()
    }

    /// Mixed partial derivative of order `(dl, df)`.
    pub fn partial(&self, dl: u32, df: u32, a_l: f64, a_f: f64) -> f64 {
        self.terms()
            .filter(|&(_, (j, m))| j >= dl && m >= df)
            .map(|(c, (j, m))| {
                let fl: f64 = ((j - dl + 1)..=j).map(f64::from).product();
                let ff: f64 = ((m - df + 1)..=m).map(f64::from).product();
                c * fl * ff * pow(a_l, j - dl) * pow(a_f, m - df)
            })
            .sum()
    }

    pub fn d_leader(&self, a_l: f64, a_f: f64) -> f64 {
        self.partial(1, 0, a_l, a_f)
    }

    pub fn d_follower(&self, a_l: f64, a_f: f64) -> f64 {
        self.partial(0, 1, a_l, a_f)
    }

    pub fn d_follower2(&self, a_l: f64, a_f: f64) -> f64 {
        self.partial(0, 2, a_l, a_f)
    }

    pub fn d_cross(&self, a_l: f64, a_f: f64) -> f64 {
        self.partial(1, 1, a_l, a_f)
    }

    /// Largest absolute residual on the given samples.
    pub fn max_residual(&self, samples: &[Sample], role: Role) -> f64 {
        samples
            .iter()
            .map(|s| (self.eval(s.a_l, s.a_f) - s.target(role)).abs())
            .fold(0.0, f64::max)
    }
}

/// Pivot floor of the equilibrated Cholesky factorization.
const PIVOT_FLOOR: f64 = 1e-14;

/// Least-squares fit over the full bivariate basis of `degree`, solving
/// `(X^T X + ridge I) beta = X^T y`.
pub fn fit_poly(samples: &[Sample], role: Role, degree: usize, ridge: f64) -> Result<PolyModel> {
    if degree < 1 {
        return Err(Error::Config("polynomial degree must be >= 1".into()));
    }
    let exps = basis(degree);
    let n = exps.len();
    if samples.len() < n {
        return Err(Error::TooFewSamples { have: samples.len(), need: n });
    }

    let mut gram = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut phi = vec![0.0; n];
    for s in samples {
        for (p, &(j, m)) in phi.iter_mut().zip(&exps) {
            *p = pow(s.a_l, j) * pow(s.a_f, m);
        }
        let y = s.target(role);
        for r in 0..n {
            rhs[r] += phi[r] * y;
            for c in 0..=r {
                gram[r * n + c] += phi[r] * phi[c];
            }
        }
    }
    for r in 0..n {
        gram[r * n + r] += ridge;
        for c in 0..r {
            gram[c * n + r] = gram[r * n + c];
        }
    }

    // Jacobi equilibration: D^-1/2 G D^-1/2 has a unit diagonal.
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = gram[i * n + i];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    if scale.iter().any(|&s| s == 0.0) {
        return Err(Error::SingularFit);
    }
    for r in 0..n {
        for c in 0..n {
            gram[r * n + c] *= scale[r] * scale[c];
        }
        rhs[r] *= scale[r];
    }

    let lower = cholesky(&gram, n)?;
    let y = solve_cholesky(&lower, n, &rhs);
    let coeffs: Vec<f64> = y.iter().zip(&scale).map(|(v, s)| v * s).collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::SingularFit);
    }
    Ok(PolyModel { degree, coeffs })
}

fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > PIVOT_FLOOR) {
            return Err(Error::SingularFit);
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / d;
        }
    }
    Ok(l)
}

fn solve_cholesky(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * n + k] * z[k];
        }
        z[i] = v / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = z[i];
        for k in (i + 1)..n {
            v -= l[k * n + i] * x[k];
        }
        x[i] = v / l[i * n + i];
    }
    x
}
