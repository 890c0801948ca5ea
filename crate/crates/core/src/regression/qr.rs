//! Householder QR with column pivoting on a column-equilibrated matrix.

/// Relative pivot tolerance: a column is rank-deficient when the part of it
/// left after projecting out the already-chosen columns is at most this
/// fraction of its original norm.
pub const PIVOT_TOLERANCE: f64 = 1e-10;

/// Factorization `X D^-1 P = Q R`, `D` = diag(column norms), `P` a permutation.
#[derive(Debug, Clone)]
pub(crate) struct PivotedQr {
    /// Reflectors `I - beta v v^T`; `reflectors[k]` acts on rows `k..n`.
    reflectors: Vec<(f64, Vec<f64>)>,
    /// Upper-triangular `R`, row-major `k x k`.
    r: Vec<f64>,
    /// `perm[j]` is the original column at pivot position `j`.
    perm: Vec<usize>,
    scale: Vec<f64>,
}

/// Original index of a column that is numerically a combination of the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Deficient(pub usize);

impl PivotedQr {
    /// Factors `columns`; all must have the same length, at least `columns.len()`.
    pub fn factor(columns: &[Vec<f64>]) -> Result<Self, Deficient> {
        let cols = columns.len();
        let mut work: Vec<Vec<f64>> = Vec::with_capacity(cols);
        let mut scale = Vec::with_capacity(cols);
        for (j, col) in columns.iter().enumerate() {
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Deficient(j));
            }
            scale.push(norm);
            work.push(col.iter().map(|v| v / norm).collect());
        }
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut reflectors = Vec::with_capacity(cols);
        let mut r = vec![0.0; cols * cols];

        for k in 0..cols {
            let tail_norm2 = |c: &Vec<f64>| c[k..].iter().map(|v| v * v).sum::<f64>();
            let (mut best, mut best_norm2) = (k, tail_norm2(&work[k]));
            for (j, col) in work.iter().enumerate().skip(k + 1) {
                let n2 = tail_norm2(col);
                if n2 > best_norm2 {
                    best = j;
                    best_norm2 = n2;
                }
            }
            if best_norm2.sqrt() <= PIVOT_TOLERANCE {
                // every remaining column lies in the span of the chosen ones;
                // blame the one latest in the original order
                let culprit = perm[k..].iter().copied().max().unwrap_or(k);
                return Err(Deficient(culprit));
            }
            work.swap(k, best);
            perm.swap(k, best);

            let norm = best_norm2.sqrt();
            let head = work[k][k];
            let alpha = if head > 0.0 { -norm } else { norm };
            let mut v: Vec<f64> = work[k][k..].to_vec();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            let beta = 2.0 / vnorm2;
            for col in work.iter_mut().skip(k) {
                let dot: f64 = v.iter().zip(&col[k..]).map(|(a, b)| a * b).sum();
                let f = beta * dot;
                for (c, vi) in col[k..].iter_mut().zip(&v) {
                    *c -= f * vi;
                }
            }
            work[k][k] = alpha;
            reflectors.push((beta, v));
        }
        // later swaps move whole columns, so R is read off only at the end
        for (j, col) in work.iter().enumerate() {
            for (i, &v) in col.iter().enumerate().take(j + 1) {
                r[i * cols + j] = v;
            }
        }
        Ok(PivotedQr { reflectors, r, perm, scale })
    }

    fn cols(&self) -> usize {
        self.perm.len()
    }

    /// Least-squares solution of `X b = y` in the original column order.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let k = self.cols();
        let mut qty = y.to_vec();
        for (i, (beta, v)) in self.reflectors.iter().enumerate() {
            let dot: f64 = v.iter().zip(&qty[i..]).map(|(a, b)| a * b).sum();
            let f = beta * dot;
            for (q, vi) in qty[i..].iter_mut().zip(v) {
                *q -= f * vi;
            }
        }
        // back substitution R z = (Q^T y)[..k]
        let mut z = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qty[i];
            for (rij, zj) in self.r[i * k + i + 1..(i + 1) * k].iter().zip(&z[i + 1..]) {
                s -= rij * zj;
            }
            z[i] = s / self.r[i * k + i];
        }
        let mut b = vec![0.0; k];
        for (pos, &orig) in self.perm.iter().enumerate() {
            b[orig] = z[pos] / self.scale[orig];
        }
        b
    }

    /// Diagonal of `(X^T X)^-1` in the original column order.
    pub fn inverse_gram_diagonal(&self) -> Vec<f64> {
        let k = self.cols();
        // R^-1 by back substitution, column by column (upper triangular)
        let mut rinv = vec![0.0; k * k];
        for c in 0..k {
            for i in (0..=c).rev() {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for j in i + 1..=c {
                    s -= self.r[i * k + j] * rinv[j * k + c];
                }
                rinv[i * k + c] = s / self.r[i * k + i];
            }
        }
        // (R^T R)^-1 = R^-1 R^-T; diagonal entry i is the squared norm of row i of R^-1
        let mut diag = vec![0.0; k];
        for (pos, &orig) in self.perm.iter().enumerate() {
            let row = &rinv[pos * k..(pos + 1) * k];
            let d: f64 = row.iter().map(|v| v * v).sum();
            diag[orig] = d / (self.scale[orig] * self.scale[orig]);
        }
        diag
    }
}
