//! Dense symmetric matrices: just enough for the sampler's covariance work.

use crate::scalar::Scalar;

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    n: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![F::zero(); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        (0..self.n).map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Lower Cholesky factor `L` with `A = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky<F> {
    l: Matrix<F>,
}

impl<F: Scalar> Cholesky<F> {
    /// Factors `a`; `None` if it is not numerically positive definite.
    pub fn new(a: &Matrix<F>) -> Option<Self> {
        let n = a.n();
        let mut l = Matrix::zeros(n);
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > F::zero()) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l.set(j, j, d);
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / d);
            }
        }
        Some(Cholesky { l })
    }

    /// Factors `a`, retrying once with `jitter` added to the diagonal.
    pub fn with_jitter(a: &Matrix<F>, jitter: F) -> Option<Self> {
        Self::new(a).or_else(|| {
            let mut b = a.clone();
            for i in 0..a.n() {
                b.set(i, i, b.get(i, i) + jitter);
            }
            Self::new(&b)
        })
    }

    pub fn factor(&self) -> &Matrix<F> {
        &self.l
    }

    pub fn log_det(&self) -> F {
        (0..self.l.n()).map(|i| self.l.get(i, i).ln()).sum::<F>() * F::lit(2.0)
    }

    /// Solves `L z = b`.
    pub fn solve_lower(&self, b: &[F]) -> Vec<F> {
        let n = self.l.n();
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= self.l.get(i, k) * z[k];
            }
            z[i] = s / self.l.get(i, i);
        }
        z
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.l.n();
        let mut x = self.solve_lower(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l.get(k, i) * x[k];
            }
            x[i] = s / self.l.get(i, i);
        }
        x
    }

    /// `A^{-1}`, symmetrized.
    pub fn inverse(&self) -> Matrix<F> {
        let n = self.l.n();
        let mut inv = Matrix::zeros(n);
        let mut e = vec![F::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = F::zero());
            e[j] = F::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        for i in 0..n {
            for j in 0..i {
                let v = (inv.get(i, j) + inv.get(j, i)) / F::lit(2.0);
                inv.set(i, j, v);
                inv.set(j, i, v);
            }
        }
        inv
    }

    /// `L z`, used to colour standard normal draws.
    pub fn mul_lower(&self, z: &[F]) -> Vec<F> {
        let n = self.l.n();
        (0..n).map(|i| (0..=i).map(|k| self.l.get(i, k) * z[k]).sum()).collect()
    }
}
