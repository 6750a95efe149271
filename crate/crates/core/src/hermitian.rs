//! The ambient `2m`-dimensional space with metric `g` and almost complex
//! structure `J`, together with vectors, planes and seeded sampling.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{TOL_RANK, TOL_STRUCTURE};

/// Seeded generator used everywhere randomness is needed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficients of a tangent vector in the canonical basis `e_0, …, e_{2m-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(DVector<f64>);

impl Vector {
    pub fn from_vec(coeffs: Vec<f64>) -> Self {
        Vector(DVector::from_vec(coeffs))
    }

    pub fn from_slice(coeffs: &[f64]) -> Self {
        Vector(DVector::from_column_slice(coeffs))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(DVector::zeros(dim))
    }

    /// The `i`-th canonical basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Vector(&self.0 * s)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Vector) -> Self {
        Vector(&self.0 + &other.0 * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }
}

impl From<DVector<f64>> for Vector {
    fn from(v: DVector<f64>) -> Self {
        Vector(v)
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(&self.0 + &rhs.0)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, rhs: f64) -> Vector {
        Vector(&self.0 * rhs)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(-&self.0)
    }
}

#[derive(Debug)]
struct ContextInner {
    m: usize,
    g: DMatrix<f64>,
    j: DMatrix<f64>,
    // omega[a][b] = g(e_a, J e_b)
    omega: DMatrix<f64>,
}

/// Metric and almost complex structure at a single point.
///
/// Cloning is cheap; the matrices are shared.
#[derive(Clone)]
pub struct HermitianContext(Arc<ContextInner>);

impl fmt::Debug for HermitianContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianContext")
            .field("m", &self.0.m)
            .field("g", &self.0.g)
            .field("j", &self.0.j)
            .finish()
    }
}

impl PartialEq for HermitianContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.g == other.0.g && self.0.j == other.0.j)
    }
}

/// `J e_i = e_{i+m}`, `J e_{i+m} = -e_i`.
pub fn canonical_j(m: usize) -> DMatrix<f64> {
    let dim = 2 * m;
    let mut j = DMatrix::zeros(dim, dim);
    for i in 0..m {
        // column i is J e_i
        j[(i + m, i)] = 1.0;
        j[(i, i + m)] = -1.0;
    }
    j
}

impl HermitianContext {
    /// Canonical context: standard inner product and block complex structure.
    pub fn canonical(m: usize) -> Result<Self> {
        Self::new(m, None, None)
    }

    /// Validates `(g, J)` and builds a context. Omitted matrices take their
    /// canonical values.
    pub fn new(m: usize, j: Option<DMatrix<f64>>, g: Option<DMatrix<f64>>) -> Result<Self> {
        if m < 2 {
            return Err(Error::DimensionTooSmall(m));
        }
        let dim = 2 * m;
        let j = j.unwrap_or_else(|| canonical_j(m));
        let g = g.unwrap_or_else(|| DMatrix::identity(dim, dim));
        check_shape("J", &j, dim)?;
        check_shape("g", &g, dim)?;

        let j2 = &j * &j + DMatrix::identity(dim, dim);
        let j_res = j2.amax();
        if j_res >= TOL_STRUCTURE {
            return Err(Error::NotComplexStructure(j_res));
        }

        let scale = g.amax().max(1.0);
        let sym_res = (&g - g.transpose()).amax();
        if sym_res >= TOL_STRUCTURE * scale {
            return Err(Error::MetricNotSymmetric(sym_res));
        }
        let min_eig = g.clone().symmetric_eigenvalues().min();
        if min_eig <= 0.0 {
            return Err(Error::MetricNotPositive(min_eig));
        }
        let compat_res = (j.transpose() * &g * &j - &g).amax();
        if compat_res >= TOL_STRUCTURE * scale {
            return Err(Error::MetricNotCompatible(compat_res));
        }

        let omega = &g * &j;
        Ok(HermitianContext(Arc::new(ContextInner { m, g, j, omega })))
    }

    pub fn m(&self) -> usize {
        self.0.m
    }

    pub fn dim(&self) -> usize {
        2 * self.0.m
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.0.g
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.0.j
    }

    /// Coefficients `g(e_a, J e_b)`.
    pub fn omega(&self) -> &DMatrix<f64> {
        &self.0.omega
    }

    pub fn is_canonical(&self) -> bool {
        let dim = self.dim();
        self.0.g == DMatrix::identity(dim, dim) && self.0.j == canonical_j(self.0.m)
    }

    /// Max-abs residual of `J² + I`.
    pub fn j_square_residual(&self) -> f64 {
        let dim = self.dim();
        (&self.0.j * &self.0.j + DMatrix::identity(dim, dim)).amax()
    }

    /// Max-abs residual of `Jᵀ g J − g` over basis pairs.
    pub fn compatibility_residual(&self) -> f64 {
        (self.0.j.transpose() * &self.0.g * &self.0.j - &self.0.g).amax()
    }

    pub fn check_vector(&self, v: &Vector) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            });
        }
        Ok(())
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        x.0.dot(&(&self.0.g * &y.0))
    }

    pub fn norm(&self, x: &Vector) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    pub fn apply_j(&self, x: &Vector) -> Vector {
        Vector(&self.0.j * &x.0)
    }

    /// `g(X, JY)`
    pub fn omega_form(&self, x: &Vector, y: &Vector) -> f64 {
        x.0.dot(&(&self.0.omega * &y.0))
    }

    pub fn normalize(&self, x: &Vector) -> Result<Vector> {
        let n = self.norm(x);
        if n <= f64::MIN_POSITIVE || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(x.scaled(1.0 / n))
    }

    /// Removes the components along an orthonormal family (two passes).
    pub fn orthogonalize(&self, x: &Vector, against: &[&Vector]) -> Vector {
        let mut v = x.clone();
        for _ in 0..2 {
            for e in against {
                let p = self.inner(e, &v);
                v = v.axpy(-p, e);
            }
        }
        v
    }

    /// Vector with independent standard Gaussian coefficients.
    pub fn gaussian<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        Vector::from_vec((0..self.dim()).map(|_| rng.sample(StandardNormal)).collect())
    }

    /// Random `g`-unit vector.
    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        loop {
            if let Ok(v) = self.normalize(&self.gaussian(rng)) {
                return v;
            }
        }
    }

    /// Random unit vector orthogonal to an orthonormal family.
    pub fn random_unit_orthogonal<R: Rng + ?Sized>(&self, rng: &mut R, against: &[&Vector]) -> Vector {
        loop {
            let v = self.orthogonalize(&self.gaussian(rng), against);
            if self.norm(&v) > 1e-3 {
                return self.normalize(&v).expect("nonzero");
            }
        }
    }
}

fn check_shape(name: &'static str, m: &DMatrix<f64>, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::MatrixShape {
            name,
            rows: m.nrows(),
            cols: m.ncols(),
            dim,
        });
    }
    Ok(())
}

/// Orthonormalizes `vectors` with respect to `g` (modified Gram-Schmidt with
/// one reorthogonalization pass). Fails on the first vector that is dependent
/// on its predecessors.
pub fn gram_schmidt(vectors: &[Vector], ctx: &HermitianContext) -> Result<Vec<Vector>> {
    let mut out: Vec<Vector> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        ctx.check_vector(v)?;
        let original = ctx.norm(v);
        if original <= f64::MIN_POSITIVE {
            return Err(Error::RankDeficient { index });
        }
        let refs: Vec<&Vector> = out.iter().collect();
        let w = ctx.orthogonalize(v, &refs);
        let n = ctx.norm(&w);
        if n <= TOL_RANK * original {
            return Err(Error::RankDeficient { index });
        }
        out.push(w.scaled(1.0 / n));
    }
    Ok(out)
}

/// A 2-plane given by a `g`-orthonormal basis.
#[derive(Clone, Debug)]
pub struct Plane {
    x: Vector,
    y: Vector,
    ctx: HermitianContext,
}

impl Plane {
    /// Checks orthonormality of the basis.
    pub fn new(ctx: &HermitianContext, x: Vector, y: Vector) -> Result<Self> {
        ctx.check_vector(&x)?;
        ctx.check_vector(&y)?;
        let res = (ctx.inner(&x, &x) - 1.0)
            .abs()
            .max((ctx.inner(&y, &y) - 1.0).abs())
            .max(ctx.inner(&x, &y).abs());
        if !(res < TOL_STRUCTURE) {
            return Err(Error::NotOrthonormal(res));
        }
        Ok(Plane {
            x,
            y,
            ctx: ctx.clone(),
        })
    }

    /// Orthonormalizes two independent vectors and wraps them as a plane.
    pub fn spanned_by(ctx: &HermitianContext, a: &Vector, b: &Vector) -> Result<Self> {
        let mut basis = gram_schmidt(&[a.clone(), b.clone()], ctx)?;
        let y = basis.pop().expect("two vectors");
        let x = basis.pop().expect("two vectors");
        Plane::new(ctx, x, y)
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    pub fn context(&self) -> &HermitianContext {
        &self.ctx
    }

    /// Same plane in the basis `(cos t·X + sin t·Y, −sin t·X + cos t·Y)`,
    /// optionally with the second vector reflected.
    pub fn rotated(&self, t: f64, reflect: bool) -> Plane {
        let (s, c) = t.sin_cos();
        let x = self.x.scaled(c).axpy(s, &self.y);
        let mut y = self.x.scaled(-s).axpy(c, &self.y);
        if reflect {
            y = -&y;
        }
        Plane {
            x,
            y,
            ctx: self.ctx.clone(),
        }
    }
}

/// Angle between `α` and `Jα`: `cos θ = |g(X, JY)|`, clamped into `[0, π/2]`.
pub fn kahler_angle(p: &Plane) -> f64 {
    let c = p.ctx.omega_form(&p.x, &p.y).abs().min(1.0);
    c.acos().clamp(0.0, FRAC_PI_2)
}

/// Plane `span{X, cos θ·JX + sin θ·U}` for random unit `X` and unit `U` with
/// `g(X,U) = g(X,JU) = 0`. Its Kähler angle is `θ`.
pub fn plane_with_angle<R: Rng + ?Sized>(theta: f64, ctx: &HermitianContext, rng: &mut R) -> Result<Plane> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::AngleOutOfRange(theta));
    }
    let (x, u) = sample_adapted_pair(ctx, rng);
    let jx = ctx.apply_j(&x);
    let (s, c) = theta.sin_cos();
    let y = jx.scaled(c).axpy(s, &u);
    Plane::new(ctx, x, y)
}

/// Unit `X`, `Y` with `g(X,Y) = g(X,JY) = 0`.
pub fn sample_adapted_pair<R: Rng + ?Sized>(ctx: &HermitianContext, rng: &mut R) -> (Vector, Vector) {
    let x = ctx.random_unit(rng);
    let jx = ctx.apply_j(&x);
    let y = ctx.random_unit_orthogonal(rng, &[&x, &jx]);
    (x, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubspaceKind {
    Holomorphic,
    Antiholomorphic,
    Neither,
}

/// Residuals used by [`classify_subspace`]: distance of `J(span)` from the
/// span, and the largest `|g(b_i, J b_k)|` over an orthonormal basis.
pub fn subspace_residuals(basis: &[Vector], ctx: &HermitianContext) -> Result<(f64, f64)> {
    let on = gram_schmidt(basis, ctx)?;
    let refs: Vec<&Vector> = on.iter().collect();
    let mut hol: f64 = 0.0;
    let mut anti: f64 = 0.0;
    for b in &on {
        let jb = ctx.apply_j(b);
        let outside = ctx.orthogonalize(&jb, &refs);
        hol = hol.max(ctx.norm(&outside));
        for c in &on {
            anti = anti.max(ctx.inner(c, &jb).abs());
        }
    }
    Ok((hol, anti))
}

/// Holomorphic iff `Jα = α`, antiholomorphic iff `Jα ⊥ α`.
pub fn classify_subspace(basis: &[Vector], ctx: &HermitianContext) -> Result<SubspaceKind> {
    let (hol, anti) = subspace_residuals(basis, ctx)?;
    Ok(if hol < TOL_STRUCTURE {
        SubspaceKind::Holomorphic
    } else if anti < TOL_STRUCTURE {
        SubspaceKind::Antiholomorphic
    } else {
        SubspaceKind::Neither
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn e(dim: usize, i: usize) -> Vector {
        Vector::basis(dim, i)
    }

    #[test]
    fn canonical_context_squares_to_minus_identity() {
        let ctx = HermitianContext::canonical(2).unwrap();
        assert_eq!(ctx.dim(), 4);
        assert_eq!(ctx.j_square_residual(), 0.0);
        assert_eq!(ctx.compatibility_residual(), 0.0);
        assert_eq!(ctx.apply_j(&e(4, 0)), e(4, 2));
        assert_eq!(ctx.apply_j(&e(4, 2)), -&e(4, 0));
    }

    #[test]
    fn rejects_bad_structures() {
        assert!(matches!(
            HermitianContext::new(2, Some(DMatrix::identity(4, 4)), None),
            Err(Error::NotComplexStructure(_))
        ));
        assert!(matches!(HermitianContext::canonical(1), Err(Error::DimensionTooSmall(1))));
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 1.0, 1.0]));
        assert!(matches!(
            HermitianContext::new(2, None, Some(g)),
            Err(Error::MetricNotCompatible(_))
        ));
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0; 4]));
        assert!(matches!(
            HermitianContext::new(2, None, Some(g)),
            Err(Error::MetricNotPositive(_))
        ));
        let mut g = DMatrix::identity(4, 4);
        g[(0, 1)] = 0.5;
        assert!(matches!(
            HermitianContext::new(2, None, Some(g)),
            Err(Error::MetricNotSymmetric(_))
        ));
        assert!(matches!(
            HermitianContext::new(2, Some(DMatrix::identity(3, 3)), None),
            Err(Error::MatrixShape { .. })
        ));
    }

    #[test]
    fn scalar_metric_is_compatible() {
        let g = DMatrix::identity(6, 6) * 2.0;
        let ctx = HermitianContext::new(3, None, Some(g)).unwrap();
        assert_eq!(ctx.compatibility_residual(), 0.0);
    }

    #[test]
    fn gram_schmidt_fixtures() {
        let ctx = HermitianContext::canonical(2).unwrap();
        let out = gram_schmidt(&[e(4, 0), &e(4, 0) + &e(4, 1)], &ctx).unwrap();
        assert_eq!(out, vec![e(4, 0), e(4, 1)]);
        assert_eq!(gram_schmidt(&[e(4, 0)], &ctx).unwrap(), vec![e(4, 0)]);

        let out = gram_schmidt(&[e(4, 0).scaled(2.0), &e(4, 1).scaled(3.0) + &e(4, 0)], &ctx).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ctx.inner(&out[a], &out[b]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gram_schmidt_names_dependent_index() {
        let ctx = HermitianContext::canonical(2).unwrap();
        let vs = [e(4, 0), e(4, 1), &e(4, 0) + &e(4, 1)];
        assert!(matches!(gram_schmidt(&vs, &ctx), Err(Error::RankDeficient { index: 2 })));
    }

    #[test]
    fn kahler_angle_fixtures() {
        let ctx = HermitianContext::canonical(2).unwrap();
        let hol = Plane::new(&ctx, e(4, 0), ctx.apply_j(&e(4, 0))).unwrap();
        assert_eq!(kahler_angle(&hol), 0.0);
        let anti = Plane::new(&ctx, e(4, 0), e(4, 1)).unwrap();
        assert!((kahler_angle(&anti) - FRAC_PI_2).abs() < 1e-15);
        let y = (&ctx.apply_j(&e(4, 0)) + &e(4, 1)).scaled(FRAC_1_SQRT_2);
        let quarter = Plane::new(&ctx, e(4, 0), y).unwrap();
        assert!((kahler_angle(&quarter) - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn plane_with_angle_round_trips() {
        let ctx = HermitianContext::canonical(2).unwrap();
        for &theta in &[0.0, FRAC_PI_4, 1.0, FRAC_PI_2] {
            let p = plane_with_angle(theta, &ctx, &mut seeded(7)).unwrap();
            assert!((kahler_angle(&p) - theta).abs() < 1e-12, "theta {theta}");
        }
        assert!(matches!(
            plane_with_angle(2.0, &ctx, &mut seeded(7)),
            Err(Error::AngleOutOfRange(_))
        ));
        assert!(plane_with_angle(-0.1, &ctx, &mut seeded(7)).is_err());
    }

    #[test]
    fn classify_fixtures() {
        let ctx = HermitianContext::canonical(2).unwrap();
        let je1 = ctx.apply_j(&e(4, 0));
        assert_eq!(classify_subspace(&[e(4, 0), je1.clone()], &ctx).unwrap(), SubspaceKind::Holomorphic);
        assert_eq!(classify_subspace(&[e(4, 0), e(4, 1)], &ctx).unwrap(), SubspaceKind::Antiholomorphic);
        let y = (&je1 + &e(4, 1)).scaled(FRAC_1_SQRT_2);
        let (hol, anti) = subspace_residuals(&[e(4, 0), y.clone()], &ctx).unwrap();
        assert!(hol > 0.1 && anti > 0.1);
        assert_eq!(classify_subspace(&[e(4, 0), y], &ctx).unwrap(), SubspaceKind::Neither);
        // the whole space is holomorphic
        let all: Vec<Vector> = (0..4).map(|i| e(4, i)).collect();
        assert_eq!(classify_subspace(&all, &ctx).unwrap(), SubspaceKind::Holomorphic);
        assert!(classify_subspace(&[e(4, 0), e(4, 0)], &ctx).is_err());
    }

    #[test]
    fn adapted_pair_is_adapted_and_deterministic() {
        let ctx = HermitianContext::canonical(2).unwrap();
        let (x, y) = sample_adapted_pair(&ctx, &mut seeded(1));
        assert!(ctx.inner(&x, &y).abs() < 1e-12);
        assert!(ctx.omega_form(&x, &y).abs() < 1e-12);
        let (jx, jy) = (ctx.apply_j(&x), ctx.apply_j(&y));
        assert!(ctx.inner(&jx, &jy).abs() < 1e-12);
        assert!((ctx.norm(&x) - 1.0).abs() < 1e-12 && (ctx.norm(&y) - 1.0).abs() < 1e-12);
        let again = sample_adapted_pair(&ctx, &mut seeded(1));
        assert_eq!((x, y), again);
    }

    #[test]
    fn plane_rejects_non_orthonormal_basis() {
        let ctx = HermitianContext::canonical(2).unwrap();
        assert!(matches!(
            Plane::new(&ctx, e(4, 0), &e(4, 0) + &e(4, 1)),
            Err(Error::NotOrthonormal(_))
        ));
        assert!(Plane::new(&ctx, e(4, 0), Vector::basis(6, 1)).is_err());
    }
}
