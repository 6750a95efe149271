//! Algebraic curvature tensors at a point.
//!
//! Coefficients are stored densely: entry `[i][j][k][l]` is
//! `R(e_i, e_j, e_k, e_l)`, flattened row-major into `dim⁴` values.
//! Sign conventions: `K(X,Y) = R(X,Y,Y,X)` and `H(X) = R(X,JX,JX,X)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{HermitianContext, Plane, Vector};
use crate::TOL_STRUCTURE;

#[inline]
pub(crate) fn idx(d: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * d + j) * d + k) * d + l
}

/// Max-abs residuals of the four curvature symmetries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StructureResiduals {
    /// `R(X,Y,Z,U) + R(Y,X,Z,U)`
    pub antisymmetry_12: f64,
    /// `R(X,Y,Z,U) + R(Y,Z,X,U) + R(Z,X,Y,U)`
    pub bianchi: f64,
    /// `R(X,Y,Z,U) + R(X,Y,U,Z)`
    pub antisymmetry_34: f64,
    /// `R(X,Y,Z,U) − R(Z,U,X,Y)`
    pub pair_symmetry: f64,
}

impl StructureResiduals {
    pub fn of(coeffs: &[f64], dim: usize) -> Self {
        let mut r = StructureResiduals::default();
        let c = |i, j, k, l| coeffs[idx(dim, i, j, k, l)];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let v = c(i, j, k, l);
                        r.antisymmetry_12 = r.antisymmetry_12.max((v + c(j, i, k, l)).abs());
                        r.bianchi = r.bianchi.max((v + c(j, k, i, l) + c(k, i, j, l)).abs());
                        r.antisymmetry_34 = r.antisymmetry_34.max((v + c(i, j, l, k)).abs());
                        r.pair_symmetry = r.pair_symmetry.max((v - c(k, l, i, j)).abs());
                    }
                }
            }
        }
        r
    }

    /// Named residuals, in the order of the classical properties 1–3 then pair symmetry.
    pub fn named(&self) -> [(&'static str, f64); 4] {
        [
            ("property 1 (R(X,Y) = -R(Y,X))", self.antisymmetry_12),
            ("property 2 (first Bianchi identity)", self.bianchi),
            ("property 3 (R(X,Y,Z,U) = -R(X,Y,U,Z))", self.antisymmetry_34),
            ("pair symmetry (R(X,Y,Z,U) = R(Z,U,X,Y))", self.pair_symmetry),
        ]
    }

    pub fn max(&self) -> f64 {
        self.named().iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }

    /// First violated property at tolerance `tol`.
    pub fn first_violation(&self, tol: f64) -> Option<(&'static str, f64)> {
        self.named().into_iter().find(|(_, v)| !(*v < tol))
    }
}

/// A 4-linear form with the symmetries of a Riemann curvature tensor.
#[derive(Clone, Debug)]
pub struct CurvatureTensor {
    ctx: HermitianContext,
    coeffs: Vec<f64>,
}

impl CurvatureTensor {
    /// Wraps coefficients after checking all curvature symmetries.
    pub fn new(ctx: &HermitianContext, coeffs: Vec<f64>) -> Result<Self> {
        let t = Self::new_unchecked(ctx, coeffs)?;
        t.validate()?;
        Ok(t)
    }

    /// Wraps coefficients checking only the shape. Used for intermediate
    /// states whose symmetries hold by construction.
    pub fn new_unchecked(ctx: &HermitianContext, coeffs: Vec<f64>) -> Result<Self> {
        let want = ctx.dim().pow(4);
        if coeffs.len() != want {
            return Err(Error::DimensionMismatch {
                expected: want,
                got: coeffs.len(),
            });
        }
        Ok(CurvatureTensor {
            ctx: ctx.clone(),
            coeffs,
        })
    }

    pub fn zero(ctx: &HermitianContext) -> Self {
        CurvatureTensor {
            ctx: ctx.clone(),
            coeffs: vec![0.0; ctx.dim().pow(4)],
        }
    }

    pub fn from_fn(ctx: &HermitianContext, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let d = ctx.dim();
        let mut coeffs = Vec::with_capacity(d.pow(4));
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        coeffs.push(f(i, j, k, l));
                    }
                }
            }
        }
        CurvatureTensor {
            ctx: ctx.clone(),
            coeffs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tol = TOL_STRUCTURE * self.max_abs().max(1.0);
        match self.residuals().first_violation(tol) {
            Some((property, residual)) => Err(Error::NotCurvature { property, residual }),
            None => Ok(()),
        }
    }

    pub fn residuals(&self) -> StructureResiduals {
        StructureResiduals::of(&self.coeffs, self.dim())
    }

    pub fn context(&self) -> &HermitianContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.coeffs[idx(self.dim(), i, j, k, l)]
    }

    /// Sum of entrywise products.
    pub fn inner(&self, other: &CurvatureTensor) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        CurvatureTensor {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: f64, other: &CurvatureTensor) -> Self {
        CurvatureTensor {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / n)
        }
    }

    /// Pullback `(i,j,k,l) ↦ R(M e_i, M e_j, M e_k, M e_l)` where column `i` of
    /// `M` is the image of `e_i`.
    pub fn pullback(&self, m: &nalgebra::DMatrix<f64>) -> Self {
        let d = self.dim();
        let mut cur = self.coeffs.clone();
        let mut next = vec![0.0; cur.len()];
        // contract one slot at a time; after each pass the slot order rotates
        // so the freshly transformed index moves to the back
        for _ in 0..4 {
            for a in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        for l in 0..d {
                            let v = cur[idx(d, a, j, k, l)];
                            if v == 0.0 {
                                continue;
                            }
                            for i in 0..d {
                                let w = m[(a, i)];
                                if w != 0.0 {
                                    next[idx(d, j, k, l, i)] += w * v;
                                }
                            }
                        }
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
            next.iter_mut().for_each(|v| *v = 0.0);
        }
        CurvatureTensor {
            ctx: self.ctx.clone(),
            coeffs: cur,
        }
    }

    /// `R(J·, J·, J·, J·)`
    pub fn j_conjugate(&self) -> Self {
        self.pullback(self.ctx.j())
    }
}

fn check_same_dim(r: &CurvatureTensor, v: &Vector) -> Result<()> {
    if v.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            got: v.dim(),
        });
    }
    Ok(())
}

/// `R(X, Y, Z, U)`, the full contraction of the coefficients.
pub fn evaluate(r: &CurvatureTensor, x: &Vector, y: &Vector, z: &Vector, u: &Vector) -> Result<f64> {
    for v in [x, y, z, u] {
        check_same_dim(r, v)?;
    }
    Ok(evaluate_raw(r.coeffs(), r.dim(), x.coeffs(), y.coeffs(), z.coeffs(), u.coeffs()))
}

pub(crate) fn evaluate_raw(c: &[f64], d: usize, x: &[f64], y: &[f64], z: &[f64], u: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..d {
        if x[i] == 0.0 {
            continue;
        }
        let mut si = 0.0;
        for j in 0..d {
            if y[j] == 0.0 {
                continue;
            }
            let mut sj = 0.0;
            for k in 0..d {
                if z[k] == 0.0 {
                    continue;
                }
                let base = idx(d, i, j, k, 0);
                let sk: f64 = c[base..base + d].iter().zip(u).map(|(a, b)| a * b).sum();
                sj += z[k] * sk;
            }
            si += y[j] * sj;
        }
        total += x[i] * si;
    }
    total
}

/// `R1(X,Y,Z,U) = g(X,U)g(Y,Z) − g(X,Z)g(Y,U)`
pub fn r1_tensor(ctx: &HermitianContext) -> CurvatureTensor {
    let g = ctx.g();
    CurvatureTensor::from_fn(ctx, |i, j, k, l| g[(i, l)] * g[(j, k)] - g[(i, k)] * g[(j, l)])
}

/// `R2(X,Y,Z,U) = g(X,JU)g(Y,JZ) − g(X,JZ)g(Y,JU) − 2g(X,JY)g(Z,JU)`
pub fn r2_tensor(ctx: &HermitianContext) -> CurvatureTensor {
    let w = ctx.omega();
    CurvatureTensor::from_fn(ctx, |i, j, k, l| {
        w[(i, l)] * w[(j, k)] - w[(i, k)] * w[(j, l)] - 2.0 * w[(i, j)] * w[(k, l)]
    })
}

/// `K·R1 + ((c − K)/3)·R2`
pub fn model_tensor(ctx: &HermitianContext, k: f64, c: f64) -> CurvatureTensor {
    r1_tensor(ctx).scaled(k).add_scaled((c - k) / 3.0, &r2_tensor(ctx))
}

/// `K(X,Y) = R(X,Y,Y,X)` on an orthonormal basis of the plane.
pub fn sectional_curvature(r: &CurvatureTensor, p: &Plane) -> Result<f64> {
    evaluate(r, p.x(), p.y(), p.y(), p.x())
}

/// `H(X) = R(X,JX,JX,X)` for the normalized `X`.
pub fn holomorphic_sectional_curvature(r: &CurvatureTensor, x: &Vector) -> Result<f64> {
    check_same_dim(r, x)?;
    let ctx = r.context();
    let x = ctx.normalize(x)?;
    let jx = ctx.apply_j(&x);
    evaluate(r, &x, &jx, &jx, &x)
}

/// Largest `|R(e_i,e_j,e_k,e_l) − R(Je_i,Je_j,Je_k,Je_l)|`.
pub fn rk_defect(r: &CurvatureTensor) -> f64 {
    let conj = r.j_conjugate();
    r.coeffs()
        .iter()
        .zip(conj.coeffs())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
}

/// Orthogonal projection of a raw `dim⁴` array onto algebraic curvature tensors.
///
/// First averages over the order-8 group generated by the two slot
/// antisymmetries and the pair exchange, then subtracts the cyclic average
/// `b(S)(X,Y,Z,U) = (S(X,Y,Z,U) + S(Y,Z,X,U) + S(Z,X,Y,U))/3`, and
/// symmetrizes once more.
pub fn project_to_curvature(raw: &[f64], ctx: &HermitianContext) -> Result<CurvatureTensor> {
    let d = ctx.dim();
    if raw.len() != d.pow(4) {
        return Err(Error::DimensionMismatch {
            expected: d.pow(4),
            got: raw.len(),
        });
    }
    let sym = symmetrize_pairs(raw, d);
    let mut out = vec![0.0; sym.len()];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let s = |a, b, c, e| sym[idx(d, a, b, c, e)];
                    let cyc = (s(i, j, k, l) + s(j, k, i, l) + s(k, i, j, l)) / 3.0;
                    out[idx(d, i, j, k, l)] = s(i, j, k, l) - cyc;
                }
            }
        }
    }
    let coeffs = symmetrize_pairs(&out, d);
    CurvatureTensor::new_unchecked(ctx, coeffs)
}

fn symmetrize_pairs(s: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; s.len()];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let v = |a, b, c, e| s[idx(d, a, b, c, e)];
                    out[idx(d, i, j, k, l)] = (v(i, j, k, l) - v(j, i, k, l) - v(i, j, l, k)
                        + v(j, i, l, k)
                        + v(k, l, i, j)
                        - v(l, k, i, j)
                        - v(k, l, j, i)
                        + v(l, k, j, i))
                        / 8.0;
                }
            }
        }
    }
    out
}

/// Least-squares fit of `R ≈ a·R1 + b·R2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    /// Antiholomorphic sectional curvature, `a`.
    #[serde(rename = "K")]
    pub k: f64,
    /// Holomorphic sectional curvature, `3b + a`.
    pub c: f64,
    /// Frobenius norm of `R − (a·R1 + b·R2)`.
    pub residual: f64,
}

pub fn fit_model(r: &CurvatureTensor) -> ModelParameters {
    let ctx = r.context();
    let r1 = r1_tensor(ctx);
    let r2 = r2_tensor(ctx);
    let (g11, g12, g22) = (r1.inner(&r1), r1.inner(&r2), r2.inner(&r2));
    let (h1, h2) = (r1.inner(r), r2.inner(r));
    let det = g11 * g22 - g12 * g12;
    let a = (h1 * g22 - h2 * g12) / det;
    let b = (g11 * h2 - g12 * h1) / det;
    let residual = r.add_scaled(-a, &r1).add_scaled(-b, &r2).norm();
    ModelParameters {
        k: a,
        c: 3.0 * b + a,
        residual,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureKind {
    Holomorphic,
    Antiholomorphic,
}

/// Sample statistics of sectional curvatures over one plane family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constancy {
    pub mean: f64,
    pub max_deviation: f64,
    pub planes: usize,
}

/// Planes of the given family: a deterministic sweep over basis-aligned
/// planes followed by `n_samples` random ones.
pub fn sample_planes<R: Rng + ?Sized>(
    ctx: &HermitianContext,
    kind: CurvatureKind,
    n_samples: usize,
    rng: &mut R,
) -> Vec<Plane> {
    let d = ctx.dim();
    let mut planes = Vec::new();
    let unit = |v: &Vector| ctx.normalize(v).ok();
    let mut seeds: Vec<Vector> = (0..d).map(|i| Vector::basis(d, i)).collect();
    for i in 0..d {
        for j in i + 1..d {
            seeds.push(&Vector::basis(d, i) + &Vector::basis(d, j));
        }
    }
    match kind {
        CurvatureKind::Holomorphic => {
            for s in &seeds {
                if let Some(x) = unit(s) {
                    let jx = ctx.apply_j(&x);
                    if let Ok(p) = Plane::new(ctx, x, jx) {
                        planes.push(p);
                    }
                }
            }
            for _ in 0..n_samples {
                let x = ctx.random_unit(rng);
                let jx = ctx.apply_j(&x);
                planes.push(Plane::new(ctx, x, jx).expect("J preserves g-unit length"));
            }
        }
        CurvatureKind::Antiholomorphic => {
            for i in 0..d {
                let Some(x) = unit(&Vector::basis(d, i)) else { continue };
                let jx = ctx.apply_j(&x);
                for j in 0..d {
                    let y = ctx.orthogonalize(&Vector::basis(d, j), &[&x, &jx]);
                    if ctx.norm(&y) < 1e-6 {
                        continue;
                    }
                    let y = ctx.normalize(&y).expect("nonzero");
                    if let Ok(p) = Plane::new(ctx, x.clone(), y) {
                        planes.push(p);
                    }
                }
            }
            for _ in 0..n_samples {
                let (x, y) = crate::hermitian::sample_adapted_pair(ctx, rng);
                planes.push(Plane::new(ctx, x, y).expect("adapted pair is orthonormal"));
            }
        }
    }
    planes
}

/// Mean and largest deviation of holomorphic or antiholomorphic sectional curvatures.
pub fn constancy_report<R: Rng + ?Sized>(
    r: &CurvatureTensor,
    kind: CurvatureKind,
    n_samples: usize,
    rng: &mut R,
) -> Constancy {
    let planes = sample_planes(r.context(), kind, n_samples, rng);
    let values: Vec<f64> = planes
        .iter()
        .map(|p| sectional_curvature(r, p).expect("plane from tensor context"))
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let max_deviation = values.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs()));
    Constancy {
        mean,
        max_deviation,
        planes: values.len(),
    }
}
