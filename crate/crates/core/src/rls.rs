//! Exponentially weighted sufficient statistics of one node.
//!
//! `R(T) = Σ_t λ^{T−t} u(t)u(t)ᵀ`, `p(T) = Σ_t λ^{T−t} d(t)u(t)`, together with
//! the ADMM system inverse `F(T) = [2R(T) + cI]⁻¹` where
//! `c = ρ + 2βρ|Ω_n| / (2β + ρ)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Diagonal shift `c` of the F matrix for a node of the given degree.
pub fn f_shift(beta: f64, rho: f64, degree: usize) -> f64 {
    rho + 2.0 * beta * rho * degree as f64 / (2.0 * beta + rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRlsState {
    pub lambda: f64,
    pub r: DMatrix<f64>,
    pub p: DVector<f64>,
    /// Cached `F(T)`, valid for `last_time` once set.
    pub f: Option<DMatrix<f64>>,
    pub last_time: usize,
}

impl NodeRlsState {
    pub fn new(dim: usize, lambda: f64) -> Self {
        Self {
            lambda,
            r: DMatrix::zeros(dim, dim),
            p: DVector::zeros(dim),
            f: None,
            last_time: 0,
        }
    }

    /// Frozen statistics, as used for static (single time instant) problems.
    pub fn from_statistics(r: DMatrix<f64>, p: DVector<f64>, lambda: f64) -> Result<Self> {
        check_dim(r.nrows(), r.ncols())?;
        check_dim(r.nrows(), p.len())?;
        Ok(Self {
            lambda,
            r,
            p,
            f: None,
            last_time: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// `R ← λR + uuᵀ`, `p ← λp + d·u`.
    pub fn update_statistics(&mut self, u: &DVector<f64>, d: f64) -> Result<()> {
        check_dim(self.dim(), u.len())?;
        self.r *= self.lambda;
        self.r.ger(1.0, u, u, 1.0);
        self.p *= self.lambda;
        self.p.axpy(d, u, 1.0);
        self.last_time += 1;
        Ok(())
    }

    /// `[2R + cI]⁻¹` through a Cholesky factorization.
    pub fn compute_f(&self, beta: f64, rho: f64, degree: usize) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut system = &self.r * 2.0;
        let shift = f_shift(beta, rho, degree);
        for i in 0..n {
            system[(i, i)] += shift;
        }
        let chol = system.cholesky().ok_or(Error::SingularMatrix)?;
        let mut f = chol.inverse();
        symmetrize(&mut f);
        Ok(f)
    }

    /// Sherman–Morrison step `F − Fuuᵀ F / (½ + uᵀFu)`, valid only without forgetting.
    pub fn rank_one_f_update(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        if self.lambda != 1.0 {
            return Err(Error::PreconditionLambda(self.lambda));
        }
        check_dim(self.dim(), u.len())?;
        let f = self
            .f
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("rank-one update needs a cached F".into()))?;
        let fu = f * u;
        let denom = 0.5 + u.dot(&fu);
        let mut next = f.clone();
        next.ger(-1.0 / denom, &fu, &fu, 1.0);
        Ok(next)
    }

    /// Absorbs one observation and refreshes `F`.
    ///
    /// With `λ = 1` and a warm cache the inverse is carried forward by a
    /// rank-one correction; otherwise it is recomputed.
    pub fn ingest(&mut self, u: &DVector<f64>, d: f64, beta: f64, rho: f64, degree: usize) -> Result<()> {
        if self.lambda == 1.0 {
            if self.f.is_none() {
                self.f = Some(self.compute_f(beta, rho, degree)?);
            }
            let next = self.rank_one_f_update(u)?;
            self.update_statistics(u, d)?;
            self.f = Some(next);
        } else {
            self.update_statistics(u, d)?;
            self.f = Some(self.compute_f(beta, rho, degree)?);
        }
        Ok(())
    }

    /// Recomputes `F` from the current statistics.
    pub fn refresh_f(&mut self, beta: f64, rho: f64, degree: usize) -> Result<()> {
        self.f = Some(self.compute_f(beta, rho, degree)?);
        Ok(())
    }

    pub fn f(&self) -> Option<&DMatrix<f64>> {
        self.f.as_ref()
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Blocks of `[[A, B], [C, D]]⁻¹` via the Schur complement `S = A − BD⁻¹C`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInverse {
    pub top_left: DMatrix<f64>,
    pub top_right: DMatrix<f64>,
    pub bottom_left: DMatrix<f64>,
    pub bottom_right: DMatrix<f64>,
}

impl BlockInverse {
    pub fn assemble(&self) -> DMatrix<f64> {
        let (m, n) = (self.top_left.nrows(), self.bottom_right.nrows());
        let mut out = DMatrix::zeros(m + n, m + n);
        out.view_mut((0, 0), (m, m)).copy_from(&self.top_left);
        out.view_mut((0, m), (m, n)).copy_from(&self.top_right);
        out.view_mut((m, 0), (n, m)).copy_from(&self.bottom_left);
        out.view_mut((m, m), (n, n)).copy_from(&self.bottom_right);
        out
    }
}

pub fn block_inverse(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<BlockInverse> {
    let (m, n) = (a.nrows(), d.nrows());
    check_dim(m, a.ncols())?;
    check_dim(n, d.ncols())?;
    check_dim(m, b.nrows())?;
    check_dim(n, b.ncols())?;
    check_dim(n, c.nrows())?;
    check_dim(m, c.ncols())?;

    let d_inv = d.clone().try_inverse().ok_or(Error::SingularBlock("D"))?;
    let schur = a - b * &d_inv * c;
    let s_inv = schur.try_inverse().ok_or(Error::SingularBlock("Schur complement"))?;
    let b_dinv = b * &d_inv;
    let dinv_c = &d_inv * c;
    let top_right = -(&s_inv * &b_dinv);
    let bottom_left = -(&dinv_c * &s_inv);
    let bottom_right = &d_inv + &dinv_c * &s_inv * &b_dinv;
    Ok(BlockInverse {
        top_left: s_inv,
        top_right,
        bottom_left,
        bottom_right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn first_two_samples_by_hand() {
        let mut s = NodeRlsState::new(2, 0.5);
        s.update_statistics(&DVector::from_vec(vec![1.0, 0.0]), 2.0).unwrap();
        assert_eq!(s.r, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(s.p, DVector::from_vec(vec![2.0, 0.0]));
        s.update_statistics(&DVector::from_vec(vec![0.0, 1.0]), 4.0).unwrap();
        assert_eq!(s.r, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]));
        assert_eq!(s.p, DVector::from_vec(vec![1.0, 4.0]));
        assert_eq!(s.last_time, 2);
    }

    #[test]
    fn streaming_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lambda = 0.97;
        let dim = 5;
        let mut s = NodeRlsState::new(dim, lambda);
        let mut history = Vec::new();
        for _ in 0..200 {
            let u = random_vec(&mut rng, dim);
            let d: f64 = rng.random_range(-2.0..2.0);
            s.update_statistics(&u, d).unwrap();
            history.push((u, d));
        }
        let big_t = history.len();
        let mut r = DMatrix::zeros(dim, dim);
        let mut p = DVector::zeros(dim);
        for (k, (u, d)) in history.iter().enumerate() {
            let weight = lambda.powi((big_t - 1 - k) as i32);
            r += weight * u * u.transpose();
            p += weight * *d * u;
        }
        assert!((&s.r - &r).norm() <= 1e-12 * r.norm());
        assert!((&s.p - &p).norm() <= 1e-12 * p.norm());
    }

    #[test]
    fn statistics_dimension_mismatch() {
        let mut s = NodeRlsState::new(3, 0.9);
        assert!(matches!(
            s.update_statistics(&DVector::zeros(2), 1.0),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn f_of_zero_statistics_is_scaled_identity() {
        let s = NodeRlsState::new(3, 0.99);
        for degree in [0, 1, 4] {
            let (beta, rho) = (0.7, 1.3);
            let f = s.compute_f(beta, rho, degree).unwrap();
            let c = rho + 2.0 * beta * rho * degree as f64 / (2.0 * beta + rho);
            assert_abs_diff_eq!(f, DMatrix::identity(3, 3) / c, epsilon = 1e-15);
        }
    }

    #[test]
    fn scalar_f_isolated_node() {
        let s = NodeRlsState::from_statistics(DMatrix::from_element(1, 1, 3.0), DVector::zeros(1), 0.9).unwrap();
        let f = s.compute_f(1.0, 0.5, 0).unwrap();
        assert_abs_diff_eq!(f[(0, 0)], 1.0 / (2.0 * 3.0 + 0.5), epsilon = 1e-15);
    }

    #[test]
    fn f_inverts_shifted_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut s = NodeRlsState::new(6, 0.95);
        for _ in 0..4 {
            let u = random_vec(&mut rng, 6);
            s.update_statistics(&u, 1.0).unwrap();
        }
        let (beta, rho, degree) = (2.0, 0.3, 3);
        let f = s.compute_f(beta, rho, degree).unwrap();
        let system = &s.r * 2.0 + DMatrix::identity(6, 6) * f_shift(beta, rho, degree);
        assert_abs_diff_eq!(&f * system, DMatrix::identity(6, 6), epsilon = 1e-8);
        let eig = f.clone().symmetric_eigen();
        assert!(eig.eigenvalues.min() > 0.0);
    }

    #[test]
    fn rank_one_zero_input_is_identity_map() {
        let mut s = NodeRlsState::new(3, 1.0);
        s.refresh_f(1.0, 1.0, 2).unwrap();
        let before = s.f.clone().unwrap();
        assert_eq!(s.rank_one_f_update(&DVector::zeros(3)).unwrap(), before);
    }

    #[test]
    fn rank_one_matches_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (beta, rho, degree) = (0.8, 1.7, 2);
        let mut s = NodeRlsState::new(4, 1.0);
        s.refresh_f(beta, rho, degree).unwrap();
        let u = random_vec(&mut rng, 4);
        let via_rank_one = s.rank_one_f_update(&u).unwrap();
        s.update_statistics(&u, 0.0).unwrap();
        let direct = s.compute_f(beta, rho, degree).unwrap();
        assert_abs_diff_eq!(via_rank_one, direct, epsilon = 1e-8);
    }

    #[test]
    fn rank_one_requires_unit_lambda() {
        let mut s = NodeRlsState::new(2, 0.99);
        s.refresh_f(1.0, 1.0, 1).unwrap();
        assert!(matches!(
            s.rank_one_f_update(&DVector::zeros(2)),
            Err(Error::PreconditionLambda(l)) if l == 0.99
        ));
    }

    #[test]
    fn block_inverse_identity() {
        let i2 = DMatrix::identity(2, 2);
        let z = DMatrix::zeros(2, 2);
        let inv = block_inverse(&i2, &z, &z, &i2).unwrap();
        assert_eq!(inv.assemble(), DMatrix::identity(4, 4));
    }

    #[test]
    fn block_inverse_scalar_blocks() {
        let one = |v: f64| DMatrix::from_element(1, 1, v);
        let inv = block_inverse(&one(2.0), &one(1.0), &one(1.0), &one(2.0)).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0]);
        assert_abs_diff_eq!(inv.assemble(), expected, epsilon = 1e-15);
    }

    #[test]
    fn block_inverse_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let full = DMatrix::from_fn(6, 6, |i, j| rng.random_range(-1.0..1.0) + if i == j { 4.0 } else { 0.0 });
        let inv = block_inverse(
            &full.view((0, 0), (2, 2)).into(),
            &full.view((0, 2), (2, 4)).into(),
            &full.view((2, 0), (4, 2)).into(),
            &full.view((2, 2), (4, 4)).into(),
        )
        .unwrap();
        assert_abs_diff_eq!(full * inv.assemble(), DMatrix::identity(6, 6), epsilon = 1e-10);
    }

    #[test]
    fn block_inverse_singular_d() {
        let one = |v: f64| DMatrix::from_element(1, 1, v);
        assert!(matches!(
            block_inverse(&one(1.0), &one(1.0), &one(1.0), &one(0.0)),
            Err(Error::SingularBlock("D"))
        ));
        assert!(matches!(
            block_inverse(&one(1.0), &one(1.0), &one(1.0), &one(1.0)),
            Err(Error::SingularBlock(_))
        ));
    }
}
