//! Sparse and banded linear algebra for the assembled scheme.

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Builds from rows of `(column, value)` entries; duplicates are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (c, v) in r {
                if col.len() > *row_ptr.last().unwrap() && *col.last().unwrap() == c {
                    *val.last_mut().unwrap() += v;
                } else {
                    col.push(c);
                    val.push(v);
                }
            }
            row_ptr.push(col.len());
        }
        Self {
            n,
            row_ptr,
            col,
            val,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()]
            .iter()
            .copied()
            .zip(self.val[r].iter().copied())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut ax = vec![0.0; self.n];
        self.matvec(x, &mut ax);
        b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
    }

    /// `(lower, upper)` bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.n {
            for (c, _) in self.row(i) {
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LU factorization with partial pivoting in LAPACK general-band layout:
/// entry `(i, j)` lives at `j * ldab + kl + ku + i - j`, with `kl` extra rows
/// for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &Csr) -> Result<Self> {
        let n = a.n;
        let (kl, ku) = a.bandwidths();
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        let at = |i: usize, j: usize| j * ldab + kl + ku + i - j;
        for i in 0..n {
            for (j, v) in a.row(i) {
                ab[at(i, j)] = v;
            }
        }
        let mut ipiv = vec![0; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = j;
            let mut best = ab[at(j, j)].abs();
            for i in j + 1..=j + km {
                let v = ab[at(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            ipiv[j] = p;
            if best == 0.0 {
                return Err(Error::NoConvergence {
                    iterations: 0,
                    residual: f64::INFINITY,
                });
            }
            ju = ju.max((j + ku + p - j).min(n - 1));
            if p != j {
                for c in j..=ju {
                    ab.swap(at(p, c), at(j, c));
                }
            }
            let inv = 1.0 / ab[at(j, j)];
            for i in j + 1..=j + km {
                ab[at(i, j)] *= inv;
            }
            for c in j + 1..=ju {
                let t = ab[at(j, c)];
                if t != 0.0 {
                    for i in j + 1..=j + km {
                        ab[at(i, c)] -= ab[at(i, j)] * t;
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            ldab,
            ab,
            ipiv,
        })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let at = |i: usize, j: usize| j * ldab + kl + ku + i - j;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(p, j);
            }
            let bj = b[j];
            if bj != 0.0 {
                for i in j + 1..=j + kl.min(n - 1 - j) {
                    b[i] -= self.ab[at(i, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[at(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                for i in j.saturating_sub(kl + ku)..j {
                    b[i] -= self.ab[at(i, j)] * bj;
                }
            }
        }
    }

    /// Work estimate `n * kl * (kl + ku)` used to choose direct vs iterative.
    pub fn cost(a: &Csr) -> f64 {
        let (kl, ku) = a.bandwidths();
        a.n as f64 * kl as f64 * (kl + ku) as f64
    }
}

/// Incomplete LU with zero fill on the sparsity pattern of `a`.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: Csr,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &Csr) -> Result<Self> {
        let mut lu = a.clone();
        let n = a.n;
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for k in lu.row_ptr[i]..lu.row_ptr[i + 1] {
                if lu.col[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::InvalidArgument(format!(
                    "ILU(0): missing diagonal in row {i}"
                )));
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (s, e) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in s..e {
                pos[lu.col[k]] = k;
            }
            for k in s..e {
                let c = lu.col[k];
                if c >= i {
                    break;
                }
                let piv = lu.val[diag[c]];
                lu.val[k] /= piv;
                let l = lu.val[k];
                for kk in diag[c] + 1..lu.row_ptr[c + 1] {
                    let p = pos[lu.col[kk]];
                    if p != usize::MAX {
                        lu.val[p] -= l * lu.val[kk];
                    }
                }
            }
            for k in s..e {
                pos[lu.col[k]] = usize::MAX;
            }
        }
        Ok(Self { lu, diag })
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut s = r[i];
            for k in lu.row_ptr[i]..self.diag[i] {
                s -= lu.val[k] * z[lu.col[k]];
            }
            z[i] = s;
        }
        for i in (0..lu.n).rev() {
            let mut s = z[i];
            for k in self.diag[i] + 1..lu.row_ptr[i + 1] {
                s -= lu.val[k] * z[lu.col[k]];
            }
            z[i] = s / lu.val[self.diag[i]];
        }
    }
}

/// Right-preconditioned BiCGSTAB. Returns the solution and the iteration count.
pub fn bicgstab(
    a: &Csr,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = a.n;
    let m = Ilu0::new(a)?;
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut x = x0.to_vec();
    let mut r = a.residual(&x, b);
    if norm2(&r) <= tol * bnorm {
        return Ok((x, 0));
    }
    let mut rhat = r.clone();
    let (mut rho, mut alpha, mut omega): (f64, f64, f64) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let (mut phat, mut shat, mut t) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for it in 1..=max_iter {
        let mut rho_new = dot(&rhat, &r);
        // Dirichlet rows are resolved exactly after one step, which can leave
        // the shadow residual orthogonal to r: restart from the current residual.
        if rho_new.abs() <= 1e-14 * norm2(&rhat) * norm2(&r) || omega == 0.0 || !omega.is_finite() {
            rhat.copy_from_slice(&r);
            rho_new = dot(&rhat, &r);
            (rho, alpha, omega) = (1.0, 1.0, 1.0);
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        m.apply(&p, &mut phat);
        a.matvec(&phat, &mut v);
        alpha = rho / dot(&rhat, &v);
        let mut s = r.clone();
        for i in 0..n {
            s[i] -= alpha * v[i];
        }
        if norm2(&s) <= tol * bnorm {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return Ok((x, it));
        }
        m.apply(&s, &mut shat);
        a.matvec(&shat, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm2(&r) <= tol * bnorm {
            return Ok((x, it));
        }
    }
    let res = norm2(&a.residual(&x, b)) / bnorm;
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> Csr {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 4.0)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -2.0));
                }
                r
            })
            .collect();
        Csr::from_rows(rows)
    }

    #[test]
    fn band_lu_solves_nonsymmetric_system() {
        let a = tridiag(50);
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; 50];
        a.matvec(&x, &mut b);
        let lu = BandLu::factor(&a).unwrap();
        lu.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn band_lu_pivots_on_zero_diagonal() {
        // [[0, 1], [1, 1]]
        let a = Csr::from_rows(vec![vec![(1, 1.0)], vec![(0, 1.0), (1, 1.0)]]);
        let mut b = vec![2.0, 5.0];
        BandLu::factor(&a).unwrap().solve_in_place(&mut b);
        assert_eq!(b, vec![3.0, 2.0]);
    }

    #[test]
    fn bicgstab_matches_direct() {
        let a = tridiag(200);
        let b: Vec<f64> = (0..200).map(|i| 1.0 + (i % 7) as f64).collect();
        let (x, _) = bicgstab(&a, &b, &vec![0.0; 200], 1e-12, 500).unwrap();
        let mut y = b.clone();
        BandLu::factor(&a).unwrap().solve_in_place(&mut y);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn duplicates_are_summed() {
        let a = Csr::from_rows(vec![vec![(0, 1.0), (0, 2.0)]]);
        assert_eq!(a.val, vec![3.0]);
    }
}
