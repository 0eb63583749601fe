//! Small dense linear algebra: integer incidence matrices with exact rank and
//! kernel computations, floating-point numerical rank, and an LU solver with
//! partial pivoting.

use nalgebra::{DMatrix, DVector};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Dense row-major integer matrix. Incidence matrices and their products live here.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Builds a matrix from columns of a given height.
    pub fn from_columns(rows: usize, columns: &[Vec<i64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<i64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Horizontal concatenation; all blocks must share the row count.
    pub fn hcat(blocks: &[&IntMatrix]) -> Self {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hcat row mismatch");
            for i in 0..rows {
                for j in 0..b.cols {
                    m.set(i, off + j, b.get(i, j));
                }
            }
            off += b.cols;
        }
        m
    }

    /// Vertical concatenation; all blocks must share the column count.
    pub fn vcat(blocks: &[&IntMatrix]) -> Self {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut m = Self::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vcat column mismatch");
            for i in 0..b.rows {
                for j in 0..cols {
                    m.set(off + i, j, b.get(i, j));
                }
            }
            off += b.rows;
        }
        m
    }

    /// Block-diagonal aggregation.
    pub fn block_diag(blocks: &[&IntMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let (mut ro, mut co) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(ro + i, co + j, b.get(i, j));
                }
            }
            ro += b.rows;
            co += b.cols;
        }
        m
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let cols: Vec<Vec<i64>> = idx.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.rows, &cols)
    }

    pub fn mul(&self, other: &IntMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = m.get(i, j) + a * other.get(k, j);
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn neg(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| -v).collect() }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) as f64)
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Exact rank by fraction-free (Bareiss) elimination.
pub fn exact_rank(m: &IntMatrix) -> usize {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut a: Vec<Vec<i128>> =
        (0..rows).map(|i| (0..cols).map(|j| m.get(i, j) as i128).collect()).collect();
    let mut rank = 0;
    let mut prev: i128 = 1;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][col];
        for i in rank + 1..rows {
            let factor = a[i][col];
            for j in col + 1..cols {
                a[i][j] = (a[i][j] * pivot - factor * a[rank][j]) / prev;
            }
            a[i][col] = 0;
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

pub fn has_full_column_rank(m: &IntMatrix) -> bool {
    exact_rank(m) == m.ncols()
}

pub fn has_full_row_rank(m: &IntMatrix) -> bool {
    exact_rank(m) == m.nrows()
}

type Q = Ratio<i128>;

/// Reduced row echelon form over the rationals; returns the matrix and its pivot columns.
fn rref(m: &IntMatrix) -> (Vec<Vec<Q>>, Vec<usize>) {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut a: Vec<Vec<Q>> =
        (0..rows).map(|i| (0..cols).map(|j| Q::from_integer(m.get(i, j) as i128)).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for j in c..cols {
            a[r][j] *= inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c];
                for j in c..cols {
                    let t = a[r][j] * f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Integer basis of the right kernel {x | m x = 0}, one basis vector per column.
///
/// Each vector is the elimination basis vector of one free variable, scaled
/// to coprime integers.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let cols = m.ncols();
    let (a, pivots) = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![Q::zero(); cols];
        v[f] = Q::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -a[r][f];
        }
        basis.push(integerize(&v));
    }
    IntMatrix::from_columns(cols, &basis)
}

fn integerize(v: &[Q]) -> Vec<i64> {
    let lcm = v.iter().fold(1i128, |acc, q| acc.lcm(q.denom()));
    let ints: Vec<i128> = v.iter().map(|q| (q * Q::from_integer(lcm)).to_integer()).collect();
    let g = ints.iter().fold(0i128, |acc, x| acc.gcd(x));
    let g = if g == 0 { 1 } else { g };
    ints.iter().map(|x| i64::try_from(x / g).expect("kernel entry overflow")).collect()
}

/// Indices of a maximal linearly independent subset of columns (first-come order).
pub fn column_basis_indices(m: &IntMatrix) -> Vec<usize> {
    rref(m).1
}

/// The kernel vector with the smallest support among the elimination basis, if any.
pub fn min_support_kernel_vector(m: &IntMatrix) -> Option<Vec<i64>> {
    let k = kernel_basis(m);
    (0..k.ncols())
        .map(|j| k.column(j))
        .min_by_key(|v| v.iter().filter(|&&x| x != 0).count())
}

/// Numerical rank from a column-pivoted QR factorization with threshold
/// `max(m, n) * eps * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return 0;
    }
    let sigma_max = m.clone().singular_values().max();
    if sigma_max == 0.0 {
        return 0;
    }
    let tau = r.max(c) as f64 * f64::EPSILON * sigma_max;
    let qr = m.clone().col_piv_qr();
    let rr = qr.r();
    (0..r.min(c)).filter(|&i| rr[(i, i)].abs() > tau).count()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("matrix is numerically singular (pivot {pivot:.3e} at column {column}, threshold {threshold:.3e})")]
pub struct SingularMatrix {
    pub column: usize,
    pub pivot: f64,
    pub threshold: f64,
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors a square matrix. Pivots below `1e-14 * ||a||_inf` are reported as singular.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self, SingularMatrix> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let norm_inf = (0..n).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let threshold = 1e-14 * norm_inf;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= threshold || pmax == 0.0 {
                return Err(SingularMatrix { column: k, pivot: pmax, threshold });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / pivot;
                lu[(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= l * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.lu.nrows();
        let mut x = DVector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest absolute entry of `m + m^T`.
pub fn skew_defect(m: &DMatrix<f64>) -> f64 {
    assert_eq!(m.nrows(), m.ncols());
    let mut d: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            d = d.max((m[(i, j)] + m[(j, i)]).abs());
        }
    }
    d
}
