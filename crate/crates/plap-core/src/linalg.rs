//! Banded LU with partial pivoting.
//!
//! One factorization backs every linear solve in the crate: tridiagonal
//! Newton systems in 1d (kl = ku = 1) and the ring-ordered 2d Jacobians
//! (kl = ku = angular resolution). Storage is column major over the band
//! with `kl` extra superdiagonals for pivot fill-in.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// rows per column = 2*kl + ku + 1; entry (i, j) lives at
    /// data[j * rows + (i - j + kl + ku)]
    rows: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> BandMatrix {
        let rows = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, rows, data: vec![0.0; rows * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku + self.kl >= j && i <= j + self.kl, "({i},{j}) outside band");
        j * self.rows + (i + self.kl + self.ku - j)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// In-place LU with partial pivoting. Returns the pivot permutation.
    pub fn lu_factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let width = self.ku + self.kl; // superdiagonal reach after fill
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let i_end = (j + kl).min(n - 1);
            // pivot search down the column
            let mut p = j;
            let mut best = self.get(j, j).abs();
            for i in (j + 1)..=i_end {
                let v = self.get(i, j).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            ipiv[j] = p;
            if best == 0.0 {
                return Err(Error::InvalidOptions(format!(
                    "singular linear system (zero pivot in column {j})"
                )));
            }
            let col_end = (j + width).min(n - 1);
            if p != j {
                for c in j..=col_end {
                    let a = self.get(j, c);
                    let b = self.get(p, c);
                    self.set(j, c, b);
                    self.set(p, c, a);
                }
            }
            let piv = self.get(j, j);
            for i in (j + 1)..=i_end {
                let l = self.get(i, j) / piv;
                self.set(i, j, l);
            }
            // rank-1 update, column by column so the inner loop is unit stride
            for c in (j + 1)..=col_end {
                let gjc = self.get(j, c);
                if gjc == 0.0 {
                    continue;
                }
                let base_c = self.idx(j + 1, c);
                let base_j = self.idx(j + 1, j);
                let len = i_end - j;
                for t in 0..len {
                    self.data[base_c + t] -= self.data[base_j + t] * gjc;
                }
            }
        }
        Ok(BandLu { mat: self, ipiv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    mat: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.mat.n;
        let kl = self.mat.kl;
        let width = self.mat.ku + self.mat.kl;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != 0.0 {
                let i_end = (j + kl).min(n - 1);
                for i in (j + 1)..=i_end {
                    b[i] -= self.mat.get(i, j) * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.mat.get(j, j);
            let bj = b[j];
            if bj != 0.0 {
                let i_start = j.saturating_sub(width);
                for i in i_start..j {
                    b[i] -= self.mat.get(i, j) * bj;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_solve(a: &mut Vec<Vec<f64>>, b: &mut [f64]) {
        let n = b.len();
        for j in 0..n {
            let mut p = j;
            for i in j + 1..n {
                if a[i][j].abs() > a[p][j].abs() {
                    p = i;
                }
            }
            a.swap(j, p);
            b.swap(j, p);
            for i in j + 1..n {
                let l = a[i][j] / a[j][j];
                for k in j..n {
                    a[i][k] -= l * a[j][k];
                }
                b[i] -= l * b[j];
            }
        }
        for j in (0..n).rev() {
            b[j] /= a[j][j];
            for i in 0..j {
                b[i] -= a[i][j] * b[j];
            }
        }
    }

    #[test]
    fn banded_matches_dense_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, kl, ku) in &[(12usize, 1usize, 1usize), (30, 3, 2), (25, 5, 5), (40, 1, 4)] {
            let mut band = BandMatrix::zeros(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if j + kl >= i && i + ku >= j {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        let v = if i == j { v + 3.0 } else { v };
                        band.set(i, j, v);
                        dense[i][j] = v;
                    }
                }
            }
            let mut b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut b_dense = b.clone();
            let lu = band.lu_factor().unwrap();
            lu.solve(&mut b);
            dense_solve(&mut dense.clone(), &mut b_dense);
            for i in 0..n {
                assert!((b[i] - b_dense[i]).abs() < 1e-10, "n={n} kl={kl} ku={ku} i={i}");
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] x = [2, 3] -> x = [3, 2]
        let mut m = BandMatrix::zeros(2, 1, 1);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        let lu = m.lu_factor().unwrap();
        let mut b = vec![2.0, 3.0];
        lu.solve(&mut b);
        assert!((b[0] - 3.0).abs() < 1e-14);
        assert!((b[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_reported() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.set(0, 0, 1.0);
        m.set(1, 1, 0.0);
        m.set(2, 2, 1.0);
        assert!(m.lu_factor().is_err());
    }
}
