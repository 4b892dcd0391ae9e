//! Dense matrices over a [`Coeff`] ring.

use std::fmt;

use super::ring::Coeff;

#[derive(Clone, PartialEq)]
pub struct Matrix<T: Coeff> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    ctx: T::Ctx,
}

impl<T: Coeff> Matrix<T> {
    pub fn zeros(ctx: &T::Ctx, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero_in(ctx); rows * cols], ctx: ctx.clone() }
    }

    pub fn identity(ctx: &T::Ctx, n: usize) -> Self {
        Self::scalar(ctx, n, T::one_in(ctx))
    }

    pub fn scalar(ctx: &T::Ctx, n: usize, c: T) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn diagonal(ctx: &T::Ctx, diag: Vec<T>) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(ctx, n, n);
        for (i, c) in diag.into_iter().enumerate() {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn from_rows(ctx: &T::Ctx, rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect(), ctx: ctx.clone() }
    }

    pub fn from_fn(ctx: &T::Ctx, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Matrix { rows, cols, data, ctx: ctx.clone() }
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

    pub fn ctx(&self) -> &T::Ctx {
        &self.ctx
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Coeff>(&self, ctx: &U::Ctx, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect(), ctx: ctx.clone() }
    }

    pub fn try_map<U: Coeff, E>(&self, ctx: &U::Ctx, f: impl Fn(&T) -> Result<U, E>) -> Result<Matrix<U>, E> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(Matrix { rows: self.rows, cols: self.cols, data, ctx: ctx.clone() })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let c = self.get(i, j);
                    if i == j {
                        c.is_one()
                    } else {
                        c.is_zero()
                    }
                })
            })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.ctx, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.add(b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data, ctx: self.ctx.clone() }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a.sub(b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data, ctx: self.ctx.clone() }
    }

    pub fn neg(&self) -> Self {
        self.map(&self.ctx, |c| c.neg())
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(&self.ctx, |a| a.mul(c))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        let mut out = Self::zeros(&self.ctx, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * rhs.cols + j;
                    out.data[idx] = out.data[idx].add(&a.mul(b));
                }
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::identity(&self.ctx, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Determinant; cofactor expansion for small sizes, fraction-free elimination otherwise.
    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        match n {
            0 => T::one_in(&self.ctx),
            1 => self.data[0].clone(),
            2 => self.get(0, 0).mul(self.get(1, 1)).sub(&self.get(0, 1).mul(self.get(1, 0))),
            3 | 4 => {
                let mut acc = T::zero_in(&self.ctx);
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let t = a.mul(&self.minor(0, j).det());
                    acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
                }
                acc
            }
            _ => self.bareiss_det(),
        }
    }

    fn bareiss_det(&self) -> T {
        let n = self.rows;
        let mut m = self.clone();
        let mut sign = false;
        let mut prev = T::one_in(&self.ctx);
        for k in 0..n - 1 {
            if m.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !m.get(i, k).is_zero()) else {
                    return T::zero_in(&self.ctx);
                };
                m.swap_rows(k, p);
                sign = !sign;
            }
            let pivot = m.get(k, k).clone();
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = pivot.mul(m.get(i, j)).sub(&m.get(i, k).mul(m.get(k, j)));
                    let v = v.exact_div(&prev).expect("Bareiss division is exact");
                    m.set(i, j, v);
                }
            }
            prev = pivot;
        }
        let d = m.get(n - 1, n - 1).clone();
        if sign {
            d.neg()
        } else {
            d
        }
    }

    /// Classical adjoint, `adj(M)·M = det(M)·I`, without divisions.
    pub fn adjugate(&self) -> Self {
        let n = self.rows;
        if n == 1 {
            return Self::identity(&self.ctx, 1);
        }
        Self::from_fn(&self.ctx, n, n, |i, j| {
            let m = self.minor(j, i).det();
            if (i + j) % 2 == 0 {
                m
            } else {
                m.neg()
            }
        })
    }

    /// Delete row `r` and column `c`.
    pub fn minor(&self, r: usize, c: usize) -> Self {
        let data = (0..self.rows)
            .filter(|&i| i != r)
            .flat_map(|i| (0..self.cols).filter(move |&j| j != c).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Matrix { rows: self.rows - 1, cols: self.cols - 1, data, ctx: self.ctx.clone() }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(&self.ctx, rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Inverse by Gauss–Jordan elimination; `None` if singular or a pivot is not a unit.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        if n == 1 {
            return Some(Self::from_rows(&self.ctx, vec![vec![self.data[0].inv()?]]));
        }
        let mut a = self.clone();
        let mut inv = Self::identity(&self.ctx, n);
        for k in 0..n {
            let p = (k..n).find(|&i| a.get(i, k).inv().is_some())?;
            a.swap_rows(k, p);
            inv.swap_rows(k, p);
            let pinv = a.get(k, k).inv()?;
            for j in 0..n {
                a.set(k, j, a.get(k, j).mul(&pinv));
                inv.set(k, j, inv.get(k, j).mul(&pinv));
            }
            for i in 0..n {
                if i == k || a.get(i, k).is_zero() {
                    continue;
                }
                let f = a.get(i, k).clone();
                for j in 0..n {
                    a.set(i, j, a.get(i, j).sub(&f.mul(a.get(k, j))));
                    inv.set(i, j, inv.get(i, j).sub(&f.mul(inv.get(k, j))));
                }
            }
        }
        Some(inv)
    }

    /// Reduced row echelon form over a field, with pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !a.get(i, c).is_zero()) else {
                continue;
            };
            a.swap_rows(r, p);
            let pinv = a.get(r, c).inv().expect("rref needs a field");
            for j in 0..self.cols {
                a.set(r, j, a.get(r, j).mul(&pinv));
            }
            for i in 0..self.rows {
                if i == r || a.get(i, c).is_zero() {
                    continue;
                }
                let f = a.get(i, c).clone();
                for j in 0..self.cols {
                    a.set(i, j, a.get(i, j).sub(&f.mul(a.get(r, j))));
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, as column vectors.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![T::zero_in(&self.ctx); self.cols];
                v[f] = T::one_in(&self.ctx);
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = r.get(row, f).neg();
                }
                v
            })
            .collect()
    }

    /// Solve `self · X = rhs` for square invertible `self`.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        Some(self.inverse()?.mul(rhs))
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let (r, c) = (self.rows * rhs.rows, self.cols * rhs.cols);
        Self::from_fn(&self.ctx, r, c, |i, j| {
            self.get(i / rhs.rows, j / rhs.cols).mul(rhs.get(i % rhs.rows, j % rhs.cols))
        })
    }

    pub fn block_diag(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(&self.ctx, self.rows + rhs.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..rhs.rows {
            for j in 0..rhs.cols {
                out.set(self.rows + i, self.cols + j, rhs.get(i, j).clone());
            }
        }
        out
    }

    /// `k`-th compound matrix (all `k×k` minors, lexicographic index sets).
    pub fn compound(&self, k: usize) -> Self {
        let rs = subsets(self.rows, k);
        let cs = subsets(self.cols, k);
        Self::from_fn(&self.ctx, rs.len(), cs.len(), |i, j| self.submatrix(&rs[i], &cs[j]).det())
    }

    /// Induced action on degree-`k` monomials `e_{i1}⋯e_{ik}`, `i1 ≤ ⋯ ≤ ik`.
    ///
    /// Column `J` holds the coordinates of `∏ (M e_{j})` for `j ∈ J` in the
    /// monomial basis.
    pub fn sym_power(&self, k: usize) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        let basis = multisets(n, k);
        let index = |m: &[usize]| basis.iter().position(|b| b == m).expect("monomial in basis");
        let mut out = Self::zeros(&self.ctx, basis.len(), basis.len());
        for (col, mono) in basis.iter().enumerate() {
            // expand the product of columns of self indexed by mono
            let mut terms: Vec<(Vec<usize>, T)> = vec![(Vec::new(), T::one_in(&self.ctx))];
            for &j in mono {
                let mut next = Vec::new();
                for (m, c) in &terms {
                    for i in 0..n {
                        let a = self.get(i, j);
                        if a.is_zero() {
                            continue;
                        }
                        let mut m2 = m.clone();
                        m2.push(i);
                        next.push((m2, c.mul(a)));
                    }
                }
                terms = next;
            }
            for (mut m, c) in terms {
                m.sort_unstable();
                let row = index(&m);
                out.set(row, col, out.get(row, col).add(&c));
            }
        }
        out
    }

    /// Trace.
    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero_in(&self.ctx), |acc, i| acc.add(self.get(i, i)))
    }
}

/// Increasing `k`-subsets of `0..n`, lexicographic.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Non-decreasing `k`-tuples from `0..n`, lexicographic.
pub fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl<T: Coeff> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl<T: Coeff> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::scalar::Scalar;

    fn m(rows: &[&[i64]]) -> Matrix<Scalar> {
        Matrix::from_rows(&(), rows.iter().map(|r| r.iter().map(|&v| Scalar::int(v)).collect()).collect())
    }

    #[test]
    fn det_paths_agree() {
        let a = m(&[&[2, 1, 0, 3, 1], &[1, 1, 4, 0, 2], &[0, 5, 1, 1, 1], &[3, 0, 2, 1, 0], &[1, 2, 1, 0, 1]]);
        // cofactor expansion along the first row using 4x4 minors
        let mut expect = Scalar::int(0);
        for j in 0..5 {
            let t = a.get(0, j).mul(&a.minor(0, j).det());
            expect = if j % 2 == 0 { expect.add(&t) } else { expect.sub(&t) };
        }
        assert_eq!(a.det(), expect);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
    }

    #[test]
    fn compound_and_symmetric_power() {
        let a = m(&[&[1, 2], &[3, 4]]);
        assert_eq!(a.compound(2), m(&[&[-2]]));
        // Sym^2 of [[a,b],[c,d]] in basis e0^2, e0e1, e1^2
        let s = a.sym_power(2);
        assert_eq!(s, m(&[&[1, 2, 4], &[6, 10, 16], &[9, 12, 16]]));
        let b = m(&[&[0, 1], &[1, 1]]);
        assert_eq!(a.mul(&b).sym_power(2), a.sym_power(2).mul(&b.sym_power(2)));
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(a.rank(), 1);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            let col = Matrix::from_fn(&(), 3, 1, |i, _| v[i].clone());
            assert!(a.mul(&col).is_zero());
        }
    }
}
