//! Binomial systems `z^{b_i} = β_i` on the complex torus.
//!
//! The exponent matrix is brought to diagonal form `U·B·V = D` by unimodular
//! row and column operations. Taking logarithms, `D·y = U·log β + 2πi·m` with
//! `x = V·y` and `z = exp(x)`, so every solution component is indexed by the
//! branch choices `m_i mod d_i` plus free coordinates for the kernel.

use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TorusError {
    #[error("integer overflow during diagonalization")]
    Overflow,
    #[error("binomial system has no solution on the torus")]
    NoTorusPoint,
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
}

/// `U·B·V = diag(d)` with `U`, `V` unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalForm {
    pub u: Vec<Vec<i128>>,
    pub v: Vec<Vec<i128>>,
    /// Nonzero diagonal entries, all positive.
    pub diag: Vec<i128>,
    pub rows: usize,
    pub cols: usize,
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

fn axpy(target: &mut [i128], src: &[i128], q: i128) -> Result<(), TorusError> {
    for (t, s) in target.iter_mut().zip(src) {
        *t = t.checked_sub(q.checked_mul(*s).ok_or(TorusError::Overflow)?).ok_or(TorusError::Overflow)?;
    }
    Ok(())
}

/// Row/column reduction of an integer matrix to diagonal form.
pub fn diagonalize(b: &[Vec<i64>]) -> Result<DiagonalForm, TorusError> {
    let rows = b.len();
    let cols = b.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<i128>> = b.iter().map(|r| r.iter().map(|&x| i128::from(x)).collect()).collect();
    let mut u = identity(rows);
    // Column operations act on the rows of `vt` = Vᵀ.
    let mut vt = identity(cols);
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            let pivot = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| a[i][j] != 0)
                .min_by_key(|&(i, j)| a[i][j].unsigned_abs());
            let Some((pi, pj)) = pivot else {
                return Ok(finish(u, vt, diag, rows, cols));
            };
            a.swap(t, pi);
            u.swap(t, pi);
            for r in a.iter_mut() {
                r.swap(t, pj);
            }
            vt.swap(t, pj);
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t].div_euclid(p);
                if q != 0 {
                    let (head, tail) = a.split_at_mut(i);
                    axpy(&mut tail[0], &head[t], q)?;
                    let (uh, ut) = u.split_at_mut(i);
                    axpy(&mut ut[0], &uh[t], q)?;
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = a[t][j].div_euclid(p);
                if q != 0 {
                    for r in a.iter_mut() {
                        r[j] = r[j].checked_sub(q.checked_mul(r[t]).ok_or(TorusError::Overflow)?).ok_or(TorusError::Overflow)?;
                    }
                    let (vh, vtail) = vt.split_at_mut(j);
                    axpy(&mut vtail[0], &vh[t], q)?;
                }
                clean &= a[t][j] == 0;
            }
            if clean {
                break;
            }
        }
        if a[t][t] < 0 {
            a[t][t] = -a[t][t];
            for x in u[t].iter_mut() {
                *x = -*x;
            }
        }
        diag.push(a[t][t]);
    }
    Ok(finish(u, vt, diag, rows, cols))
}

fn finish(u: Vec<Vec<i128>>, vt: Vec<Vec<i128>>, diag: Vec<i128>, rows: usize, cols: usize) -> DiagonalForm {
    let v = (0..cols).map(|i| (0..cols).map(|j| vt[j][i]).collect()).collect();
    DiagonalForm { u, v, diag, rows, cols }
}

impl DiagonalForm {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    /// Number of torus components when the system has full row rank.
    pub fn n_components(&self) -> Option<i128> {
        (self.rank() == self.rows).then(|| self.diag.iter().product())
    }

    /// Integer basis of the kernel: the last `cols - rank` columns of `V`.
    pub fn kernel(&self) -> Vec<Vec<i128>> {
        (self.rank()..self.cols).map(|j| self.v.iter().map(|r| r[j]).collect()).collect()
    }

    /// Logarithmic coordinates `x` of the solution with branch indices
    /// `branches` (one per diagonal entry) and kernel coordinates `free`.
    ///
    /// `log_beta` may use any branch of the logarithm.
    pub fn solve_log(
        &self,
        log_beta: &[Complex64],
        branches: &[i128],
        free: &[Complex64],
    ) -> Result<Vec<Complex64>, TorusError> {
        if log_beta.len() != self.rows {
            return Err(TorusError::Length { expected: self.rows, got: log_beta.len() });
        }
        if branches.len() != self.rank() || free.len() != self.cols - self.rank() {
            return Err(TorusError::Length { expected: self.cols, got: branches.len() + free.len() });
        }
        let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
        let gamma: Vec<Complex64> = self
            .u
            .iter()
            .map(|row| row.iter().zip(log_beta).map(|(&c, &l)| l * c as f64).sum())
            .collect();
        let scale = 1.0 + log_beta.iter().map(|l| l.norm()).fold(0.0, f64::max);
        for g in &gamma[self.rank()..] {
            let wound = g.im / std::f64::consts::TAU;
            if g.re.abs() > 1e-8 * scale || (wound - wound.round()).abs() > 1e-8 * scale {
                return Err(TorusError::NoTorusPoint);
            }
        }
        let y: Vec<Complex64> = (0..self.rank())
            .map(|i| (gamma[i] + two_pi_i * branches[i] as f64) / self.diag[i] as f64)
            .chain(std::iter::repeat_n(Complex64::zero(), self.cols - self.rank()))
            .collect();
        let mut x: Vec<Complex64> =
            self.v.iter().map(|row| row.iter().zip(&y).map(|(&c, &yi)| yi * c as f64).sum()).collect();
        // Shift along the kernel to the solution of least norm, then move by
        // `free` in an orthonormal kernel basis.
        for (k, &f) in self.orthonormal_kernel().iter().zip(free) {
            let along: Complex64 = x.iter().zip(k).map(|(xi, ki)| xi * ki).sum();
            for (xi, ki) in x.iter_mut().zip(k) {
                *xi += (f - along) * ki;
            }
        }
        if x.iter().any(|xi| !xi.re.is_finite() || !xi.im.is_finite()) {
            return Err(TorusError::NoTorusPoint);
        }
        Ok(x)
    }

    /// Gram-Schmidt on [`DiagonalForm::kernel`].
    pub fn orthonormal_kernel(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for k in self.kernel() {
            let mut v: Vec<f64> = k.iter().map(|&x| x as f64).collect();
            for q in &out {
                let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                for (a, b) in v.iter_mut().zip(q) {
                    *a -= dot * b;
                }
            }
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            out.push(v.into_iter().map(|a| a / norm).collect());
        }
        out
    }

    /// A torus point solving `z^{b_i} = β_i`.
    pub fn solve(&self, beta: &[Complex64], branches: &[i128], free: &[Complex64]) -> Result<Vec<Complex64>, TorusError> {
        if beta.iter().any(|b| b.norm() == 0.0) {
            return Err(TorusError::NoTorusPoint);
        }
        let logs: Vec<Complex64> = beta.iter().map(|b| b.ln()).collect();
        Ok(self.solve_log(&logs, branches, free)?.into_iter().map(Complex64::exp).collect())
    }
}
