use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{rat_i, Rat};

/// Dense exact-rational matrix; small sizes only (desk scale).
#[derive(Debug, Clone, PartialEq)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch {
                expected: format!("{r}x{c}"),
                got: "ragged rows".into(),
            });
        }
        Ok(QMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn mul(&self, other: &QMat) -> Result<QMat> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                expected: format!("{} inner", self.cols),
                got: format!("{} inner", other.rows),
            });
        }
        let mut out = QMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{}", self.cols),
                got: format!("{}", v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Exact determinant via rational Gaussian elimination.
    pub fn det(&self) -> Result<Rat> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch {
                expected: "square".into(),
                got: format!("{}x{}", self.rows, self.cols),
            });
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rat::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero());
            let Some(p) = pivot else {
                return Ok(Rat::zero());
            };
            if p != col {
                for j in 0..n {
                    let a = m[(p, j)].clone();
                    let b = m[(col, j)].clone();
                    m[(p, j)] = b;
                    m[(col, j)] = a;
                }
                det = -det;
            }
            let piv = m[(col, col)].clone();
            det *= piv.clone();
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] / &piv;
                for j in col..n {
                    let sub = &factor * &m[(col, j)];
                    m[(r, j)] -= sub;
                }
            }
        }
        Ok(det)
    }

    /// Exact rank via rational Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..m.cols {
            let pivot = (row..m.rows).find(|&r| !m[(r, col)].is_zero());
            let Some(p) = pivot else { continue };
            if p != row {
                for j in 0..m.cols {
                    let a = m[(p, j)].clone();
                    let b = m[(row, j)].clone();
                    m[(p, j)] = b;
                    m[(row, j)] = a;
                }
            }
            let piv = m[(row, col)].clone();
            for r in row + 1..m.rows {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] / &piv;
                for j in col..m.cols {
                    let sub = &factor * &m[(row, j)];
                    m[(r, j)] -= sub;
                }
            }
            rank += 1;
            row += 1;
            if row == m.rows {
                break;
            }
        }
        rank
    }

    pub fn transpose(&self) -> QMat {
        let mut out = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Solves the square system self * x = rhs exactly; errors on singular
    /// matrices.
    pub fn solve(&self, rhs: &[Rat]) -> Result<Vec<Rat>> {
        if self.rows != self.cols || rhs.len() != self.rows {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} with rhs {0}", self.rows),
                got: format!("{}x{} with rhs {}", self.rows, self.cols, rhs.len()),
            });
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero());
            let Some(p) = pivot else {
                return Err(Error::Invalid("singular system".into()));
            };
            if p != col {
                for j in 0..n {
                    let a = m[(p, j)].clone();
                    let c = m[(col, j)].clone();
                    m[(p, j)] = c;
                    m[(col, j)] = a;
                }
                b.swap(p, col);
            }
            let piv = m[(col, col)].clone();
            for r in 0..n {
                if r == col || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] / &piv;
                for j in col..n {
                    let sub = &factor * &m[(col, j)];
                    m[(r, j)] -= sub;
                }
                let sub = &factor * &b[col];
                b[r] -= sub;
            }
        }
        Ok((0..n).map(|i| &b[i] / &m[(i, i)]).collect())
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.det().map(|d| d == rat_i(1)).unwrap_or(false)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn det_and_rank() {
        let m = QMat::from_rows(vec![
            vec![rat_i(2), rat_i(1)],
            vec![rat_i(1), rat_i(1)],
        ])
        .unwrap();
        assert_eq!(m.det().unwrap(), rat_i(1));
        assert!(m.is_unimodular());
        assert_eq!(m.rank(), 2);

        let s = QMat::from_rows(vec![
            vec![rat_i(1), rat_i(2)],
            vec![rat_i(2), rat_i(4)],
        ])
        .unwrap();
        assert_eq!(s.det().unwrap(), rat_i(0));
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn mul_identity() {
        let m = QMat::from_rows(vec![
            vec![rat(1, 2), rat_i(3)],
            vec![rat_i(0), rat(5, 7)],
        ])
        .unwrap();
        assert_eq!(m.mul(&QMat::identity(2)).unwrap(), m);
    }
}
