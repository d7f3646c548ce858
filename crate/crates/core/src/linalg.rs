//! Dense complex matrices and the Hermitian Cholesky factorization backing
//! every capacity evaluation.
//!
//! The matrices here are small (candidate grids of a few dozen locations), so
//! a plain row-major `Vec<Complex64>` beats pulling in a linear-algebra stack
//! and keeps every operation bit-deterministic.

use num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Build from an entry function `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Extract the rows/columns given by `rows` and `cols`, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CMat {
        CMat::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    /// Gram matrix `A A^H` (Hermitian, only the lower triangle is computed
    /// and mirrored).
    pub fn gram(&self) -> CMat {
        self.weighted_gram_scaled(None, None)
    }

    /// `B diag(w) B^H` where `B` is `self` with row `i` scaled by
    /// `row_scale[i]` (if given). Entries of `w` default to 1.
    ///
    /// Zero weights contribute exact zeros, so the result over a binary
    /// weight vector matches the plain Gram of the selected submatrix
    /// bit-for-bit.
    pub fn weighted_gram_scaled(&self, w: Option<&[f64]>, row_scale: Option<&[f64]>) -> CMat {
        let m = self.rows;
        let n = self.cols;
        let mut g = CMat::zeros(m, m);
        for i in 0..m {
            let ri = self.row(i);
            let si = row_scale.map_or(1.0, |s| s[i]);
            for j in 0..=i {
                let rj = self.row(j);
                let sj = row_scale.map_or(1.0, |s| s[j]);
                let mut acc = Complex64::new(0.0, 0.0);
                match w {
                    Some(w) => {
                        for k in 0..n {
                            acc += w[k] * ri[k] * rj[k].conj();
                        }
                    }
                    None => {
                        for k in 0..n {
                            acc += ri[k] * rj[k].conj();
                        }
                    }
                }
                let v = si * sj * acc;
                g.set(i, j, v);
                if i != j {
                    g.set(j, i, v.conj());
                }
            }
        }
        g
    }
}

/// Cholesky factor `L` (lower triangular) of a Hermitian positive-definite
/// matrix `K = L L^H`.
pub struct Cholesky {
    l: CMat,
}

impl Cholesky {
    /// Factor `k`. Returns `None` if a pivot is not strictly positive, which
    /// cannot happen for `I + c * PSD` inputs with finite entries.
    pub fn new(k: &CMat) -> Option<Self> {
        let n = k.rows();
        debug_assert_eq!(n, k.cols());
        let mut l = CMat::zeros(n, n);
        for j in 0..n {
            let mut d = k.get(j, j).re;
            for p in 0..j {
                d -= l.get(j, p).norm_sqr();
            }
            if !(d > 0.0) {
                return None;
            }
            let djj = d.sqrt();
            l.set(j, j, Complex64::new(djj, 0.0));
            for i in (j + 1)..n {
                let mut s = k.get(i, j);
                for p in 0..j {
                    s -= l.get(i, p) * l.get(j, p).conj();
                }
                l.set(i, j, s / djj);
            }
        }
        Some(Cholesky { l })
    }

    /// Natural log of `det K` = 2 * sum(ln L_jj).
    pub fn ln_det(&self) -> f64 {
        let n = self.l.rows();
        let mut acc = 0.0;
        for j in 0..n {
            acc += self.l.get(j, j).re.ln();
        }
        2.0 * acc
    }

    /// Solve `K x = b` in place via the two triangular solves.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.l.rows();
        debug_assert_eq!(b.len(), n);
        // forward: L y = b
        for i in 0..n {
            let mut s = b[i];
            for p in 0..i {
                s -= self.l.get(i, p) * b[p];
            }
            b[i] = s / self.l.get(i, i).re;
        }
        // backward: L^H x = y
        for i in (0..n).rev() {
            let mut s = b[i];
            for p in (i + 1)..n {
                s -= self.l.get(p, i).conj() * b[p];
            }
            b[i] = s / self.l.get(i, i).re;
        }
    }
}

/// log2 det(I + c * G) for Hermitian PSD `G`, via Cholesky of the shifted
/// matrix. Always real and >= 0 for c >= 0.
pub fn log2_det_shifted(g: &CMat, c: f64) -> f64 {
    let n = g.rows();
    let mut k = CMat::from_fn(n, n, |i, j| c * g.get(i, j));
    for i in 0..n {
        let d = k.get(i, i);
        k.set(i, i, Complex64::new(d.re + 1.0, 0.0));
    }
    let chol = Cholesky::new(&k).expect("I + c*PSD must be positive definite");
    chol.ln_det() / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cholesky_recovers_known_logdet() {
        // K = [[4, 2i], [-2i, 5]], det = 20 - |2i|^2 = 16
        let mut k = CMat::zeros(2, 2);
        k.set(0, 0, c(4.0, 0.0));
        k.set(0, 1, c(0.0, 2.0));
        k.set(1, 0, c(0.0, -2.0));
        k.set(1, 1, c(5.0, 0.0));
        let chol = Cholesky::new(&k).unwrap();
        assert!((chol.ln_det() - 16f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut k = CMat::identity(2);
        k.set(1, 1, c(-1.0, 0.0));
        assert!(Cholesky::new(&k).is_none());
    }

    #[test]
    fn solve_matches_direct_inverse_2x2() {
        let mut k = CMat::zeros(2, 2);
        k.set(0, 0, c(3.0, 0.0));
        k.set(0, 1, c(1.0, -1.0));
        k.set(1, 0, c(1.0, 1.0));
        k.set(1, 1, c(4.0, 0.0));
        let chol = Cholesky::new(&k).unwrap();
        let b = [c(1.0, 2.0), c(-3.0, 0.5)];
        let mut x = b;
        chol.solve_in_place(&mut x);
        // check K x = b
        for i in 0..2 {
            let mut s = c(0.0, 0.0);
            for j in 0..2 {
                s += k.get(i, j) * x[j];
            }
            assert!((s - b[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn gram_is_hermitian_psd() {
        let a = CMat::from_fn(3, 4, |i, j| c((i + j) as f64, (i as f64) - (j as f64) * 0.5));
        let g = a.gram();
        for i in 0..3 {
            assert!(g.get(i, i).im.abs() < 1e-15);
            assert!(g.get(i, i).re >= 0.0);
            for j in 0..3 {
                assert!((g.get(i, j) - g.get(j, i).conj()).norm() < 1e-12);
            }
        }
        assert!(Cholesky::new(&{
            let mut k = g.clone();
            for i in 0..3 {
                let d = k.get(i, i);
                k.set(i, i, c(d.re + 1.0, 0.0));
            }
            k
        })
        .is_some());
    }

    #[test]
    fn weighted_gram_zero_weights_match_submatrix_gram() {
        let a = CMat::from_fn(4, 5, |i, j| {
            Complex64::from_polar(1.0, (i * 7 + j * 3) as f64 * 0.37)
        });
        let w = [1.0, 0.0, 1.0, 0.0, 1.0];
        let g = a.weighted_gram_scaled(Some(&w), None);
        let sub = a.submatrix(&[0, 1, 2, 3], &[0, 2, 4]);
        let gs = sub.gram();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g.get(i, j), gs.get(i, j), "exact match expected at ({i},{j})");
            }
        }
    }
}
