//! Small dense complex matrices.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{NchoError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn scalar(n: usize, s: C64) -> Self {
        Self::identity(n).scale(s)
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::diag(&entries.iter().map(|&x| re(x)).collect::<Vec<_>>())
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NchoError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NchoError::Contract("non-finite matrix entry".into()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    /// Panics on ragged input; intended for literals.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == cols), "ragged rows");
        CMatrix {
            rows: r,
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| re(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        Self::from_fn(rows, cols, |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm, from the largest eigenvalue of M†M.
    pub fn norm2(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let gram = &self.adjoint() * self;
        super::eigen::hermitian_eigenvalues_unchecked(&gram)
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(0.0)
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// ‖M − M†‖_max ≤ tol·max(1, ‖M‖_max).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= tol * self.max_abs().max(1.0)
    }

    pub fn hermitian_defect(&self) -> f64 {
        (self - &self.adjoint()).max_abs()
    }

    /// Least eigenvalue exceeds tol. Requires Hermitian input.
    pub fn is_positive_definite(&self, tol: f64) -> bool {
        self.is_hermitian(1e-10)
            && super::eigen::hermitian_eigenvalues_unchecked(self)
                .first()
                .is_some_and(|&l| l > tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square()
            && (&(&self.adjoint() * self) - &Self::identity(self.rows)).max_abs() <= tol
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn submatrix(&self, skip_row: usize, skip_col: usize) -> Self {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != skip_row) {
            for j in (0..self.cols).filter(|&j| j != skip_col) {
                data.push(self[(i, j)]);
            }
        }
        CMatrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, blk: &CMatrix) {
        for i in 0..blk.rows {
            for j in 0..blk.cols {
                self[(r0 + i, c0 + j)] = blk[(i, j)];
            }
        }
    }

    /// Determinant by partial-pivot LU.
    pub fn det(&self) -> Result<C64> {
        self.require_square("det")?;
        Ok(Lu::new(self).det())
    }

    pub fn inverse(&self) -> Result<Self> {
        self.require_square("inverse")?;
        let lu = Lu::new(self);
        if lu.singular {
            return Err(NchoError::DegenerateInput("singular matrix".into()));
        }
        Ok(lu.inverse())
    }

    /// Solves self · X = rhs.
    pub fn solve(&self, rhs: &CMatrix) -> Result<Self> {
        self.require_square("solve")?;
        if rhs.rows != self.rows {
            return Err(NchoError::Dimension("solve: row mismatch".into()));
        }
        let lu = Lu::new(self);
        if lu.singular {
            return Err(NchoError::DegenerateInput("singular matrix".into()));
        }
        Ok(lu.solve(rhs))
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(NchoError::Dimension(format!(
                "{what}: {}x{} is not square",
                self.rows, self.cols
            )))
        }
    }

    pub fn approx_eq(&self, other: &CMatrix, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && (self - other).max_abs() <= tol
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// Partial-pivot LU factorization.
struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    fn new(m: &CMatrix) -> Self {
        let n = m.rows;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                singular = true;
                continue;
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    let t = lu[k * n + j];
                    lu[i * n + j] -= f * t;
                }
            }
        }
        Lu {
            n,
            lu,
            perm,
            sign,
            singular,
        }
    }

    fn det(&self) -> C64 {
        if self.singular {
            return ZERO;
        }
        (0..self.n).fold(re(self.sign), |acc, i| acc * self.lu[i * self.n + i])
    }

    fn solve(&self, rhs: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n, rhs.cols);
        for col in 0..rhs.cols {
            let mut x: Vec<C64> = (0..n).map(|i| rhs[(self.perm[i], col)]).collect();
            for i in 0..n {
                for k in 0..i {
                    let t = self.lu[i * n + k] * x[k];
                    x[i] -= t;
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let t = self.lu[i * n + k] * x[k];
                    x[i] -= t;
                }
                x[i] /= self.lu[i * n + i];
            }
            for i in 0..n {
                out[(i, col)] = x[i];
            }
        }
        out
    }

    fn inverse(&self) -> CMatrix {
        self.solve(&CMatrix::identity(self.n))
    }
}

fn det_cofactor(m: &CMatrix) -> C64 {
    match m.rows {
        0 => ONE,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        n => (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                m[(0, j)] * det_cofactor(&m.submatrix(0, j)) * s
            })
            .sum(),
    }
}

/// Adjugate and determinant. Cofactor expansion up to 4×4, LU minors above.
pub fn adjugate_and_det(m: &CMatrix) -> Result<(CMatrix, C64)> {
    m.require_square("adjugate")?;
    let n = m.rows;
    if n > 8 {
        return Err(NchoError::Dimension(format!("adjugate: dimension {n} > 8")));
    }
    if n == 1 {
        return Ok((CMatrix::identity(1), m[(0, 0)]));
    }
    let minor_det = |i: usize, j: usize| {
        let sub = m.submatrix(i, j);
        if n <= 4 {
            det_cofactor(&sub)
        } else {
            Lu::new(&sub).det()
        }
    };
    let mut adj = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[(j, i)] = minor_det(i, j) * s;
        }
    }
    let det = if n <= 4 {
        det_cofactor(m)
    } else {
        Lu::new(m).det()
    };
    Ok((adj, det))
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: CMatrix) -> CMatrix {
        &self + &rhs
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: CMatrix) -> CMatrix {
        &self - &rhs
    }
}

impl Mul for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        &self * &rhs
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Neg for CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        -&self
    }
}

/// Complex number as `[re, im]`.
pub mod complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Optional complex number as `[re, im]` or null.
pub mod opt_complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        z.map(|z| [z.re, z.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<C64>, D::Error> {
        Ok(Option::<[f64; 2]>::deserialize(d)?.map(|[re, im]| C64::new(re, im)))
    }
}

/// List of complex numbers as `[[re, im], ...]`.
pub mod complex_vec {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|z| [z.re, z.im])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?
            .into_iter()
            .map(|[re, im]| C64::new(re, im))
            .collect())
    }
}

/// Serialized as nested rows of `[re, im]` pairs.
impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<[f64; 2]> = self.row(i).iter().map(|z| [z.re, z.im]).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || cols == 0 {
            return Err(de::Error::custom("matrix must be non-empty"));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(de::Error::custom(format!(
                "row {i} has {} entries, expected {cols}",
                rows[i].len()
            )));
        }
        let data: Vec<C64> = rows
            .iter()
            .flatten()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        CMatrix::from_row_major(rows.len(), cols, data).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_one_by_one() {
        let (adj, det) = adjugate_and_det(&CMatrix::from_rows(&[vec![c(3.0, -1.0)]])).unwrap();
        assert_eq!(adj, CMatrix::identity(1));
        assert_eq!(det, c(3.0, -1.0));
    }

    #[test]
    fn adjugate_identity() {
        let (adj, det) = adjugate_and_det(&CMatrix::identity(2)).unwrap();
        assert_eq!(adj, CMatrix::identity(2));
        assert_eq!(det, ONE);
    }

    #[test]
    fn adjugate_two_by_two_literal() {
        let m = CMatrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let (adj, det) = adjugate_and_det(&m).unwrap();
        assert_eq!(
            adj,
            CMatrix::from_real_rows(&[vec![4.0, -2.0], vec![-3.0, 1.0]])
        );
        assert_eq!(det, re(-2.0));
    }

    #[test]
    fn adjugate_rejects_rectangular() {
        assert!(matches!(
            adjugate_and_det(&CMatrix::zeros(2, 3)),
            Err(NchoError::Dimension(_))
        ));
    }

    #[test]
    fn adjugate_lu_branch_matches_identity_relation() {
        let m = CMatrix::from_fn(6, 6, |i, j| {
            c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64)
        });
        let (adj, det) = adjugate_and_det(&m).unwrap();
        let lhs = &m * &adj;
        assert!(lhs.approx_eq(&CMatrix::scalar(6, det), 1e-9 * det.norm().max(1.0)));
    }

    #[test]
    fn adjugate_of_singular_matrix_is_finite() {
        let m = CMatrix::from_real_rows(&[
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![2.0, 4.0, 6.0, 8.0, 10.0],
            vec![0.0, 1.0, 0.0, 1.0, 0.0],
            vec![1.0, 0.0, 1.0, 0.0, 1.0],
            vec![3.0, 1.0, 4.0, 1.0, 5.0],
        ]);
        let (adj, det) = adjugate_and_det(&m).unwrap();
        assert_eq!(det, ZERO);
        assert!((&m * &adj).max_abs() < 1e-10);
    }

    #[test]
    fn matrix_serde_round_trip() {
        let m = CMatrix::from_rows(&[vec![c(1.0, 2.0), c(0.5, 0.0)], vec![ZERO, I]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[1.0,2.0],[0.5,0.0]],[[0.0,0.0],[0.0,1.0]]]");
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_matrix_is_rejected() {
        let err = serde_json::from_str::<CMatrix>("[[[1,0],[0,0]],[[1,0]]]").unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = CMatrix::from_rows(&[vec![c(2.0, 1.0), c(0.0, -1.0)], vec![c(1.0, 0.0), c(3.0, 0.5)]]);
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).approx_eq(&CMatrix::identity(2), 1e-14));
    }
}
