//! Dense complex linear algebra: Cholesky factorization of Hermitian
//! positive-definite matrices and triangular solves.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parameter("matrix rows must all have length n".into()));
        }
        Ok(CMatrix { n, data: rows.concat() })
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `A · B*`.
    pub fn mul_adjoint(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += self[(i, k)] * other[(j, k)].conj();
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    /// Largest `|A_ij − conj(A_ji)|` relative to the largest entry.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst / scale
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular factor `L` with `L L* = G`, stored packed by rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerFactor {
    n: usize,
    /// Row `i` occupies `packed[i(i+1)/2 .. i(i+1)/2 + i + 1]`, as `[re, im]`.
    #[serde(with = "packed_serde")]
    packed: Vec<Complex64>,
    min_pivot: f64,
    max_pivot: f64,
}

mod packed_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|[a, b]| Complex64::new(a, b)).collect())
    }
}

impl LowerFactor {
    #[inline]
    fn row_start(i: usize) -> usize {
        i * (i + 1) / 2
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j > i {
            Complex64::new(0.0, 0.0)
        } else {
            self.packed[Self::row_start(i) + j]
        }
    }

    /// Ratio of the smallest to the largest pivot `L_ii`.
    pub fn pivot_ratio(&self) -> f64 {
        self.min_pivot / self.max_pivot
    }

    pub fn to_matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..=i {
                m[(i, j)] = self.get(i, j);
            }
        }
        m
    }

    /// Solves `L y = b` in place.
    pub fn forward_solve(&self, b: &mut [Complex64]) {
        for i in 0..self.n {
            let row = &self.packed[Self::row_start(i)..Self::row_start(i) + i + 1];
            let mut s = b[i];
            for j in 0..i {
                s -= row[j] * b[j];
            }
            b[i] = s / row[i].re;
        }
    }

    pub fn is_valid(&self) -> bool {
        self.packed.len() == self.n * (self.n + 1) / 2
    }
}

/// Cholesky factorization `G = L L*` of a Hermitian positive-definite matrix.
///
/// Fails with a conditioning error naming the first pivot that is not safely
/// positive (relative to the largest diagonal entry).
pub fn hermitian_factor(g: &CMatrix) -> Result<LowerFactor> {
    let n = g.dim();
    let defect = g.hermitian_defect();
    if defect > 1e-12 {
        return Err(Error::Parameter(format!("matrix is not Hermitian (relative defect {defect:e})")));
    }
    let max_diag = (0..n).map(|i| g[(i, i)].re).fold(0.0, f64::max);
    let floor = max_diag * 1e-14 * n.max(1) as f64;
    let mut packed = vec![Complex64::new(0.0, 0.0); n * (n + 1) / 2];
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot: f64 = 0.0;
    for i in 0..n {
        let si = LowerFactor::row_start(i);
        for j in 0..=i {
            let sj = LowerFactor::row_start(j);
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= packed[si + k] * packed[sj + k].conj();
            }
            if i == j {
                let d = s.re;
                if !(d > floor) || !d.is_finite() {
                    return Err(Error::Conditioning {
                        pivot: i,
                        value: d,
                        hint: "increase quadrature resolution or reduce n".into(),
                    });
                }
                let l = d.sqrt();
                min_pivot = min_pivot.min(l);
                max_pivot = max_pivot.max(l);
                packed[si + i] = Complex64::new(l, 0.0);
            } else {
                packed[si + j] = s / packed[sj + j].re;
            }
        }
    }
    if n == 0 {
        min_pivot = 1.0;
        max_pivot = 1.0;
    }
    Ok(LowerFactor { n, packed, min_pivot, max_pivot })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factor() {
        let f = hermitian_factor(&CMatrix::identity(5)).unwrap();
        assert_eq!(f.to_matrix(), CMatrix::identity(5));
    }

    #[test]
    fn two_by_two_reproduces() {
        let g = CMatrix::from_real(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let l = hermitian_factor(&g).unwrap().to_matrix();
        let back = l.mul_adjoint(&l);
        assert!(back.sub(&g).frobenius() / g.frobenius() < 1e-12);
    }

    #[test]
    fn singular_is_rejected() {
        let g = CMatrix::from_real(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        match hermitian_factor(&g) {
            Err(Error::Conditioning { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn complex_hermitian_and_solve() {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let g = CMatrix::from_rows(&[
            vec![one * 4.0, one + i, -i * 0.5],
            vec![one - i, one * 3.0, one * 0.25],
            vec![i * 0.5, one * 0.25, one * 2.0],
        ])
        .unwrap();
        let f = hermitian_factor(&g).unwrap();
        let l = f.to_matrix();
        assert!(l.mul_adjoint(&l).sub(&g).frobenius() / g.frobenius() < 1e-14);
        let x = vec![one, i, one * 2.0 - i];
        let mut b = vec![Complex64::new(0.0, 0.0); 3];
        for r in 0..3 {
            for c in 0..3 {
                b[r] += l[(r, c)] * x[c];
            }
        }
        f.forward_solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let g = CMatrix::from_real(&[&[2.0, 1.0], &[0.0, 2.0]]).unwrap();
        assert!(matches!(hermitian_factor(&g), Err(Error::Parameter(_))));
    }
}
