//! Linear constraint systems on the space of algebraic curvature tensors.
//!
//! Each pointwise hypothesis (the holomorphic-plane condition
//! `R(X,JX,JX,Y) = 0`, the antiholomorphic-plane condition `R(X,Y,Y,Z) = 0`,
//! and vanishing of `T(X,Y,Y,X)` on planes of Kähler angle `0, π/4, π/2`) is
//! linear in the tensor. Sampling the quantified vectors gives one row per
//! sample; the numerical null space of the stacked rows is the set of tensors
//! satisfying the hypothesis. Verifiers draw random kernel elements and test
//! the conclusions the hypotheses are known to imply.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::curvature::{
    evaluate, fit_model, project_to_curvature, rk_defect, sample_planes, sectional_curvature, CurvatureKind,
    CurvatureTensor,
};
use crate::error::{Error, Result};
use crate::hermitian::{plane_with_angle, sample_adapted_pair, seeded, HermitianContext, Vector};
use crate::linalg::{mutual_projection_residual, null_space, orthonormal_span, Spectrum};
use crate::{TOL_RANK, TOL_VERIFY};

/// Planes sampled per kernel element by the constancy checks.
pub const PLANES_PER_TRIAL: usize = 100;
/// Adapted pairs sampled per kernel element by identity checks.
pub const PAIRS_PER_TRIAL: usize = 100;

/// `dim²(dim² − 1)/12`
pub fn curvature_space_dimension(dim: usize) -> usize {
    dim * dim * (dim * dim - 1) / 12
}

/// Orthonormal basis (entrywise inner product) of the algebraic curvature
/// tensors, stored as the rows of a `D × dim⁴` matrix.
#[derive(Clone, Debug)]
pub struct CurvatureBasis {
    dim: usize,
    rows: DMatrix<f64>,
}

/// Projects the elementary tensors `e_i⊗e_j⊗e_k⊗e_l` with `i<j`, `k<l`,
/// `(i,j) ≤ (k,l)` and orthonormalizes the images. Every basis element is a
/// fixed point of [`project_to_curvature`].
pub fn curvature_subspace_basis(ctx: &HermitianContext) -> CurvatureBasis {
    let d = ctx.dim();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    let mut candidates = Vec::new();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for &(k, l) in &pairs[a..] {
            let mut raw = vec![0.0; d.pow(4)];
            raw[crate::curvature::idx(d, i, j, k, l)] = 1.0;
            let p = project_to_curvature(&raw, ctx).expect("shape");
            candidates.push(DVector::from_vec(p.into_coeffs()));
        }
    }
    let basis = orthonormal_span(candidates, TOL_RANK);
    let n = basis.len();
    let mut rows = DMatrix::zeros(n, d.pow(4));
    for (r, v) in basis.iter().enumerate() {
        rows.row_mut(r).copy_from(&v.transpose());
    }
    CurvatureBasis { dim: d, rows }
}

impl CurvatureBasis {
    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn tensor(&self, ctx: &HermitianContext, b: usize) -> CurvatureTensor {
        CurvatureTensor::new_unchecked(ctx, self.rows.row(b).iter().copied().collect()).expect("shape")
    }

    pub fn coords(&self, r: &CurvatureTensor) -> DVector<f64> {
        &self.rows * DVector::from_column_slice(r.coeffs())
    }

    pub fn combine(&self, ctx: &HermitianContext, coords: &DVector<f64>) -> CurvatureTensor {
        let flat = self.rows.tr_mul(coords);
        CurvatureTensor::new_unchecked(ctx, flat.iter().copied().collect()).expect("shape")
    }

    /// Coordinates of the functional `R ↦ R(x, y, z, u)`.
    pub fn functional(&self, x: &Vector, y: &Vector, z: &Vector, u: &Vector) -> DVector<f64> {
        let d = self.dim;
        let mut w = DVector::zeros(d.pow(4));
        let mut n = 0;
        for &a in x.coeffs() {
            for &b in y.coeffs() {
                let ab = a * b;
                for &c in z.coeffs() {
                    let abc = ab * c;
                    for &e in u.coeffs() {
                        w[n] = abc * e;
                        n += 1;
                    }
                }
            }
        }
        &self.rows * w
    }
}

/// Which hypothesis a constraint system encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `R(X,JX,JX,Y) = 0` for `g(X,Y) = g(X,JY) = 0`.
    #[serde(rename = "holomorphic-planes")]
    HolomorphicPlanes,
    /// `R(X,Y,Y,Z) = 0` for `g(X,Y) = g(X,JY) = g(X,Z) = g(Y,Z) = 0`.
    #[serde(rename = "antiholomorphic-planes")]
    AntiholomorphicPlanes,
    /// `T(X,Y,Y,X) = 0` on planes of Kähler angle `0`, `π/4`, `π/2`.
    #[serde(rename = "special-angles")]
    SpecialAngles,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::HolomorphicPlanes => "R(X,JX,JX,Y)=0",
            Condition::AntiholomorphicPlanes => "R(X,Y,Y,Z)=0",
            Condition::SpecialAngles => "T(X,Y,Y,X)=0 at angles 0, pi/4, pi/2",
        }
    }
}

/// Where a row came from: the family tag and the four vectors of the functional.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub family: String,
    pub vectors: [Vector; 4],
}

/// Stacked linear functionals in curvature-space coordinates.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub condition: Condition,
    pub rows: DMatrix<f64>,
    pub provenance: Vec<Provenance>,
    /// Leading rows coming from the deterministic basis-aligned batch.
    pub structured: usize,
}

impl ConstraintSystem {
    pub fn row_count(&self) -> usize {
        self.rows.nrows()
    }

    /// Row values on a tensor.
    pub fn apply(&self, basis: &CurvatureBasis, r: &CurvatureTensor) -> DVector<f64> {
        &self.rows * basis.coords(r)
    }
}

/// Kernel of a constraint system.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub spectrum: Spectrum,
    pub coords: Vec<DVector<f64>>,
    pub tensors: Vec<CurvatureTensor>,
}

impl Kernel {
    pub fn dim(&self) -> usize {
        self.tensors.len()
    }
}

/// Outcome of a verifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifierVerdict {
    pub name: String,
    pub holds: bool,
    pub witnesses: Vec<Witness>,
    pub numeric: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub description: String,
    pub vectors: Vec<Vec<f64>>,
    pub residual: f64,
}

impl Witness {
    fn new(description: impl Into<String>, vectors: &[&Vector], residual: f64) -> Self {
        Witness {
            description: description.into(),
            vectors: vectors.iter().map(|v| v.coeffs().to_vec()).collect(),
            residual,
        }
    }
}

impl VerifierVerdict {
    fn new(name: impl Into<String>) -> Self {
        VerifierVerdict {
            name: name.into(),
            holds: true,
            witnesses: Vec::new(),
            numeric: BTreeMap::new(),
        }
    }

    fn fail(&mut self, w: Witness) {
        self.holds = false;
        // a handful is enough to diagnose
        if self.witnesses.len() < 8 {
            self.witnesses.push(w);
        }
    }

    fn record_max(&mut self, key: &str, v: f64) {
        let e = self.numeric.entry(key.to_string()).or_insert(0.0);
        *e = e.max(v);
    }

    fn absorb(&mut self, other: VerifierVerdict) {
        for w in other.witnesses {
            self.fail(w);
        }
        if !other.holds {
            self.holds = false;
        }
        for (k, v) in other.numeric {
            self.record_max(&k, v);
        }
    }
}

/// Outcome of one curvature identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityStatus {
    Holds,
    Fails,
    HypothesisNotSatisfied,
    /// The quantified vectors do not exist in this dimension.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub hypothesis: Condition,
    pub status: IdentityStatus,
    pub max_residual: f64,
    pub hypothesis_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentitySuite {
    pub checks: Vec<IdentityCheck>,
}

impl IdentitySuite {
    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Holds iff no identity fails and at least one was evaluated.
    pub fn verdict(&self) -> VerifierVerdict {
        let mut v = VerifierVerdict::new("identity-suite");
        let mut evaluated = 0;
        for c in &self.checks {
            v.numeric.insert(format!("{} residual", c.name), c.max_residual);
            match c.status {
                IdentityStatus::Holds => evaluated += 1,
                IdentityStatus::Fails => {
                    evaluated += 1;
                    v.fail(Witness {
                        description: format!("identity {} fails", c.name),
                        vectors: vec![],
                        residual: c.max_residual,
                    });
                }
                _ => {}
            }
        }
        v.numeric.insert("identities evaluated".into(), evaluated as f64);
        if evaluated == 0 {
            v.fail(Witness {
                description: "no identity had its hypothesis satisfied".into(),
                vectors: vec![],
                residual: 0.0,
            });
        }
        v
    }
}

/// Curvature-space coordinates for one context plus the verifiers.
#[derive(Clone, Debug)]
pub struct Lab {
    ctx: HermitianContext,
    basis: CurvatureBasis,
    pub tol_rank: f64,
    pub tol_verify: f64,
}

/// Unit vector orthogonal to the given orthonormal family, or `None` when the
/// projection of `v` is negligible.
fn unit_outside(ctx: &HermitianContext, v: &Vector, against: &[&Vector]) -> Option<Vector> {
    let w = ctx.orthogonalize(v, against);
    if ctx.norm(&w) < 1e-6 {
        None
    } else {
        ctx.normalize(&w).ok()
    }
}

impl Lab {
    pub fn new(ctx: &HermitianContext) -> Self {
        Lab {
            ctx: ctx.clone(),
            basis: curvature_subspace_basis(ctx),
            tol_rank: TOL_RANK,
            tol_verify: TOL_VERIFY,
        }
    }

    pub fn context(&self) -> &HermitianContext {
        &self.ctx
    }

    pub fn basis(&self) -> &CurvatureBasis {
        &self.basis
    }

    /// Rows required before a kernel is trusted: three times the curvature-space dimension.
    pub fn min_rows(&self) -> usize {
        3 * self.basis.len()
    }

    fn build(
        &self,
        condition: Condition,
        samples: Vec<Provenance>,
        structured: usize,
        enforce_min: bool,
    ) -> Result<ConstraintSystem> {
        if enforce_min && samples.len() < self.min_rows() {
            return Err(Error::TooFewRows {
                got: samples.len(),
                min: self.min_rows(),
            });
        }
        let mut rows = DMatrix::zeros(samples.len(), self.basis.len());
        for (r, p) in samples.iter().enumerate() {
            let [x, y, z, u] = &p.vectors;
            rows.row_mut(r).copy_from(&self.basis.functional(x, y, z, u).transpose());
        }
        Ok(ConstraintSystem {
            condition,
            rows,
            provenance: samples,
            structured,
        })
    }

    /// System with no rows; its kernel is the whole curvature space.
    pub fn empty_system(&self, condition: Condition) -> ConstraintSystem {
        ConstraintSystem {
            condition,
            rows: DMatrix::zeros(0, self.basis.len()),
            provenance: vec![],
            structured: 0,
        }
    }

    fn row_holomorphic(&self, family: &str, x: Vector, y: Vector) -> Provenance {
        let jx = self.ctx.apply_j(&x);
        Provenance {
            family: family.into(),
            vectors: [x, jx.clone(), jx, y],
        }
    }

    fn structured_holomorphic(&self) -> Vec<Provenance> {
        let ctx = &self.ctx;
        let d = ctx.dim();
        let mut ys: Vec<Vector> = (0..d).map(|k| Vector::basis(d, k)).collect();
        for k in 0..d {
            for l in k + 1..d {
                ys.push(&Vector::basis(d, k) + &Vector::basis(d, l));
            }
        }
        let mut out = Vec::new();
        for i in 0..d {
            let Ok(x) = ctx.normalize(&Vector::basis(d, i)) else { continue };
            let jx = ctx.apply_j(&x);
            for y in &ys {
                if let Some(y) = unit_outside(ctx, y, &[&x, &jx]) {
                    out.push(self.row_holomorphic("structured", x.clone(), y));
                }
            }
        }
        out
    }

    /// Samples adapted pairs for `R(X,JX,JX,Y)`.
    pub fn samples_holomorphic<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Provenance> {
        (0..n)
            .map(|_| {
                let (x, y) = sample_adapted_pair(&self.ctx, rng);
                self.row_holomorphic("random", x, y)
            })
            .collect()
    }

    /// Rows `R ↦ R(X, JX, JX, Y)`: a structured basis-aligned batch followed by
    /// `n_samples` random adapted pairs.
    pub fn assemble_holomorphic_planes(&self, n_samples: usize, seed: u64) -> Result<ConstraintSystem> {
        let mut rows = self.structured_holomorphic();
        let structured = rows.len();
        rows.extend(self.samples_holomorphic(n_samples, &mut seeded(seed)));
        self.build(Condition::HolomorphicPlanes, rows, structured, true)
    }

    fn structured_antiholomorphic(&self) -> Vec<Provenance> {
        let ctx = &self.ctx;
        let d = ctx.dim();
        let mut out = Vec::new();
        for i in 0..d {
            let Ok(x) = ctx.normalize(&Vector::basis(d, i)) else { continue };
            let jx = ctx.apply_j(&x);
            for j in 0..d {
                let Some(y) = unit_outside(ctx, &Vector::basis(d, j), &[&x, &jx]) else { continue };
                for k in 0..d {
                    if let Some(z) = unit_outside(ctx, &Vector::basis(d, k), &[&x, &y]) {
                        out.push(Provenance {
                            family: "structured".into(),
                            vectors: [x.clone(), y.clone(), y.clone(), z],
                        });
                    }
                }
            }
        }
        out
    }

    /// Samples triples `X, Y, Z` with `g(X,Y) = g(X,JY) = g(X,Z) = g(Y,Z) = 0`.
    pub fn samples_antiholomorphic<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Provenance> {
        (0..n)
            .map(|_| {
                let (x, y) = sample_adapted_pair(&self.ctx, rng);
                let z = self.ctx.random_unit_orthogonal(rng, &[&x, &y]);
                Provenance {
                    family: "random".into(),
                    vectors: [x, y.clone(), y, z],
                }
            })
            .collect()
    }

    /// Rows `R ↦ R(X, Y, Y, Z)`.
    pub fn assemble_antiholomorphic_planes(&self, n_samples: usize, seed: u64) -> Result<ConstraintSystem> {
        let mut rows = self.structured_antiholomorphic();
        let structured = rows.len();
        rows.extend(self.samples_antiholomorphic(n_samples, &mut seeded(seed)));
        self.build(Condition::AntiholomorphicPlanes, rows, structured, true)
    }

    /// Rows `T ↦ T(X,Y,Y,X)` for planes of Kähler angle `0`, `π/4` and `π/2`.
    pub fn assemble_special_angles(&self, n_samples_per_angle: usize, seed: u64) -> Result<ConstraintSystem> {
        self.assemble_angle_families(&[0.0, FRAC_PI_4, FRAC_PI_2], n_samples_per_angle, seed)
    }

    /// Same as [`Lab::assemble_special_angles`] with an arbitrary list of angles.
    pub fn assemble_angle_families(&self, angles: &[f64], n_per_angle: usize, seed: u64) -> Result<ConstraintSystem> {
        let mut rng = seeded(seed);
        let mut rows = Vec::with_capacity(angles.len() * n_per_angle);
        for &theta in angles {
            for _ in 0..n_per_angle {
                let p = plane_with_angle(theta, &self.ctx, &mut rng)?;
                rows.push(Provenance {
                    family: format!("angle {theta:.6}"),
                    vectors: [p.x().clone(), p.y().clone(), p.y().clone(), p.x().clone()],
                });
            }
        }
        self.build(Condition::SpecialAngles, rows, 0, true)
    }

    /// Default random sample count: the row minimum, so the structured batch is extra.
    pub fn default_samples(&self) -> usize {
        self.min_rows()
    }

    /// Per-angle count for the special-angle system with `families` angle families.
    pub fn default_samples_per_angle(&self, families: usize) -> usize {
        self.min_rows().div_ceil(families.max(1))
    }

    /// Orthonormal spanning set of the numerical null space.
    pub fn kernel(&self, system: &ConstraintSystem) -> Kernel {
        self.kernel_with_tol(system, self.tol_rank)
    }

    pub fn kernel_with_tol(&self, system: &ConstraintSystem, tol_rank: f64) -> Kernel {
        let (spectrum, coords) = null_space(&system.rows, tol_rank);
        let tensors = coords.iter().map(|c| self.basis.combine(&self.ctx, c)).collect();
        Kernel {
            spectrum,
            coords,
            tensors,
        }
    }

    /// Random unit-norm combination of the kernel basis.
    pub fn random_kernel_element<R: Rng + ?Sized>(&self, kernel: &Kernel, rng: &mut R) -> Option<CurvatureTensor> {
        if kernel.coords.is_empty() {
            return None;
        }
        let mut c = DVector::zeros(self.basis.len());
        for k in &kernel.coords {
            let w: f64 = rng.sample(StandardNormal);
            c.axpy(w, k, 1.0);
        }
        let n = c.norm();
        Some(self.basis.combine(&self.ctx, &(c / n)))
    }

    /// Coordinates span of `{R1, R2}` as an orthonormal pair.
    pub fn model_span(&self) -> Vec<DVector<f64>> {
        let r1 = self.basis.coords(&crate::curvature::r1_tensor(&self.ctx));
        let r2 = self.basis.coords(&crate::curvature::r2_tensor(&self.ctx));
        orthonormal_span([r1, r2], self.tol_rank)
    }

    /// Mutual projection residual between a kernel and `span{R1, R2}`.
    pub fn distance_to_model_span(&self, kernel: &Kernel) -> f64 {
        mutual_projection_residual(&kernel.coords, &self.model_span())
    }

    fn tol_for(&self, r: &CurvatureTensor) -> f64 {
        self.tol_verify * r.norm().max(f64::MIN_POSITIVE)
    }

    /// Largest `|row(R)|` over freshly sampled quantifier tuples of the
    /// condition, relative to `‖R‖`, plus the worst tuple.
    pub fn condition_residual<R: Rng + ?Sized>(
        &self,
        r: &CurvatureTensor,
        condition: Condition,
        n: usize,
        rng: &mut R,
    ) -> (f64, Option<Provenance>) {
        let samples = match condition {
            Condition::HolomorphicPlanes => {
                let mut s = self.structured_holomorphic();
                s.extend(self.samples_holomorphic(n, rng));
                s
            }
            Condition::AntiholomorphicPlanes => {
                let mut s = self.structured_antiholomorphic();
                s.extend(self.samples_antiholomorphic(n, rng));
                s
            }
            Condition::SpecialAngles => {
                let mut s = Vec::new();
                for theta in [0.0, FRAC_PI_4, FRAC_PI_2] {
                    for _ in 0..n {
                        let p = plane_with_angle(theta, &self.ctx, rng).expect("angle in range");
                        s.push(Provenance {
                            family: format!("angle {theta:.6}"),
                            vectors: [p.x().clone(), p.y().clone(), p.y().clone(), p.x().clone()],
                        });
                    }
                }
                s
            }
        };
        let scale = r.norm().max(f64::MIN_POSITIVE);
        let mut worst = (0.0, None);
        for p in samples {
            let [x, y, z, u] = &p.vectors;
            let v = (evaluate(r, x, y, z, u).expect("context vectors") / scale).abs();
            if v > worst.0 || worst.1.is_none() {
                worst = (v, Some(p));
            }
        }
        worst
    }

    /// Verdict on whether `r` satisfies the condition (negative control for kernels).
    pub fn check_condition(&self, r: &CurvatureTensor, condition: Condition, n: usize, seed: u64) -> VerifierVerdict {
        let mut v = VerifierVerdict::new(condition.label());
        let (res, worst) = self.condition_residual(r, condition, n, &mut seeded(seed));
        v.numeric.insert("max relative residual".into(), res);
        if !(res < self.tol_verify) {
            let w = worst.expect("at least one sample");
            let refs: Vec<&Vector> = w.vectors.iter().collect();
            v.fail(Witness::new(format!("{} row violated", w.family), &refs, res));
        }
        v
    }

    /// Constancy of holomorphic or antiholomorphic sectional curvature, with
    /// the most deviant plane as witness.
    pub fn check_constancy<R: Rng + ?Sized>(&self, r: &CurvatureTensor, kind: CurvatureKind, rng: &mut R) -> VerifierVerdict {
        let name = match kind {
            CurvatureKind::Holomorphic => "holomorphic constancy",
            CurvatureKind::Antiholomorphic => "antiholomorphic constancy",
        };
        let mut v = VerifierVerdict::new(name);
        let planes = sample_planes(&self.ctx, kind, PLANES_PER_TRIAL, rng);
        let values: Vec<f64> = planes.iter().map(|p| sectional_curvature(r, p).expect("ctx")).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let (worst, dev) = values
            .iter()
            .enumerate()
            .map(|(i, x)| (i, (x - mean).abs()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        v.numeric.insert("mean".into(), mean);
        v.numeric.insert("max deviation".into(), dev);
        if !(dev < self.tol_for(r)) {
            let p = &planes[worst];
            v.fail(Witness::new(format!("{name}: plane deviates from mean {mean}"), &[p.x(), p.y()], dev));
        }
        v
    }

    /// `R(X,Y,Y,X) = R(JX,JY,JY,JX)` on sampled adapted pairs.
    pub fn check_j_invariant_sectional<R: Rng + ?Sized>(&self, r: &CurvatureTensor, n: usize, rng: &mut R) -> VerifierVerdict {
        let mut v = VerifierVerdict::new("R(X,Y,Y,X)=R(JX,JY,JY,JX)");
        let tol = self.tol_for(r);
        let mut max: f64 = 0.0;
        for _ in 0..n {
            let (x, y) = sample_adapted_pair(&self.ctx, rng);
            let (jx, jy) = (self.ctx.apply_j(&x), self.ctx.apply_j(&y));
            let res = (evaluate(r, &x, &y, &y, &x).unwrap() - evaluate(r, &jx, &jy, &jy, &jx).unwrap()).abs();
            max = max.max(res);
            if !(res < tol) {
                v.fail(Witness::new("adapted pair violates J-invariance of K", &[&x, &y], res));
            }
        }
        v.numeric.insert("max residual".into(), max);
        v
    }

    pub fn check_rk(&self, r: &CurvatureTensor) -> VerifierVerdict {
        let mut v = VerifierVerdict::new("RK");
        let d = rk_defect(r);
        v.numeric.insert("rk defect".into(), d);
        if !(d < self.tol_for(r)) {
            v.fail(Witness::new("R differs from R(J.,J.,J.,J.)", &[], d));
        }
        v
    }

    /// Frobenius residual of the fit to `K·R1 + ((c−K)/3)·R2`.
    pub fn check_model_form(&self, r: &CurvatureTensor) -> VerifierVerdict {
        let mut v = VerifierVerdict::new("model form");
        let f = fit_model(r);
        v.numeric.insert("K".into(), f.k);
        v.numeric.insert("c".into(), f.c);
        v.numeric.insert("fit residual".into(), f.residual);
        if !(f.residual < self.tol_for(r)) {
            v.fail(Witness::new("tensor is not of the form K R1 + (c-K) R2 / 3", &[], f.residual));
        }
        v
    }

    /// Conclusions of the holomorphic-plane criterion for one tensor:
    /// constant holomorphic sectional curvature and the `J`-invariance of `K` on adapted pairs.
    pub fn check_lemma1_conclusion<R: Rng + ?Sized>(&self, r: &CurvatureTensor, rng: &mut R) -> VerifierVerdict {
        let mut v = VerifierVerdict::new("lemma 1 conclusion");
        let c = self.check_constancy(r, CurvatureKind::Holomorphic, rng);
        v.record_max("holomorphic deviation", c.numeric["max deviation"]);
        v.absorb_witnesses(c);
        let i = self.check_j_invariant_sectional(r, PAIRS_PER_TRIAL, rng);
        v.record_max("K(X,Y)-K(JX,JY) residual", i.numeric["max residual"]);
        v.absorb_witnesses(i);
        v
    }

    /// Conclusions of the antiholomorphic-plane criterion for one tensor.
    pub fn check_lemma4_conclusion<R: Rng + ?Sized>(&self, r: &CurvatureTensor, rng: &mut R) -> VerifierVerdict {
        let mut v = VerifierVerdict::new("lemma 4 conclusion");
        let anti = self.check_constancy(r, CurvatureKind::Antiholomorphic, rng);
        let hol = self.check_constancy(r, CurvatureKind::Holomorphic, rng);
        let fit = self.check_model_form(r);
        let (anti_mean, hol_mean) = (anti.numeric["mean"], hol.numeric["mean"]);
        v.record_max("antiholomorphic deviation", anti.numeric["max deviation"]);
        v.record_max("holomorphic deviation", hol.numeric["max deviation"]);
        v.record_max("fit residual", fit.numeric["fit residual"]);
        let mismatch = (fit.numeric["K"] - anti_mean).abs().max((fit.numeric["c"] - hol_mean).abs());
        v.record_max("fit vs constancy mismatch", mismatch);
        let tol = self.tol_for(r);
        if !(mismatch < tol) {
            v.fail(Witness::new("fitted (K, c) disagree with sampled curvature means", &[], mismatch));
        }
        // K(JX,Y) = K(X,Y) on adapted pairs
        let mut swap: f64 = 0.0;
        for _ in 0..PAIRS_PER_TRIAL {
            let (x, y) = sample_adapted_pair(&self.ctx, rng);
            let jx = self.ctx.apply_j(&x);
            let res = (evaluate(r, &jx, &y, &y, &jx).unwrap() - evaluate(r, &x, &y, &y, &x).unwrap()).abs();
            swap = swap.max(res);
            if !(res < tol) {
                v.fail(Witness::new("K(JX,Y) != K(X,Y)", &[&x, &y], res));
            }
        }
        v.record_max("K(JX,Y)-K(X,Y) residual", swap);
        v.absorb_witnesses(anti);
        v.absorb_witnesses(hol);
        v.absorb_witnesses(fit);
        v
    }

    fn sample_kernel_elements(&self, system: &ConstraintSystem, trials: usize, seed: u64) -> (Kernel, Vec<CurvatureTensor>) {
        let kernel = self.kernel(system);
        let mut rng = seeded(seed.wrapping_add(1));
        let elems = (0..trials)
            .filter_map(|_| self.random_kernel_element(&kernel, &mut rng))
            .collect();
        (kernel, elems)
    }

    fn kernel_numeric(v: &mut VerifierVerdict, system: &ConstraintSystem, kernel: &Kernel) {
        v.numeric.insert("rows".into(), system.row_count() as f64);
        v.numeric.insert("kernel dimension".into(), kernel.dim() as f64);
        v.numeric.insert("rank".into(), kernel.spectrum.rank as f64);
        v.numeric.insert("singular value gap".into(), kernel.spectrum.gap);
    }

    /// Random elements of the holomorphic-plane kernel have constant
    /// holomorphic sectional curvature and satisfy the `J`-invariance of `K`.
    pub fn verify_lemma1(&self, trials: usize, seed: u64) -> Result<VerifierVerdict> {
        let system = self.assemble_holomorphic_planes(self.default_samples(), seed)?;
        let (kernel, elems) = self.sample_kernel_elements(&system, trials, seed);
        let mut v = VerifierVerdict::new("lemma 1");
        Self::kernel_numeric(&mut v, &system, &kernel);
        let mut rng = seeded(seed.wrapping_add(2));
        for r in &elems {
            v.absorb(self.check_lemma1_conclusion(r, &mut rng));
        }
        v.numeric.insert("trials".into(), elems.len() as f64);
        Ok(v)
    }

    /// Random elements of the holomorphic-plane kernel are `J`-invariant.
    pub fn verify_lemma3(&self, trials: usize, seed: u64) -> Result<VerifierVerdict> {
        let system = self.assemble_holomorphic_planes(self.default_samples(), seed)?;
        let (kernel, elems) = self.sample_kernel_elements(&system, trials, seed);
        let mut v = VerifierVerdict::new("lemma 3");
        Self::kernel_numeric(&mut v, &system, &kernel);
        for r in &elems {
            v.absorb(self.check_rk(r));
        }
        v.numeric.insert("trials".into(), elems.len() as f64);
        Ok(v)
    }

    /// Random elements of the antiholomorphic-plane kernel have constant
    /// holomorphic and antiholomorphic sectional curvature and fit the model form.
    pub fn verify_lemma4(&self, trials: usize, seed: u64) -> Result<VerifierVerdict> {
        let system = self.assemble_antiholomorphic_planes(self.default_samples(), seed)?;
        let (kernel, elems) = self.sample_kernel_elements(&system, trials, seed);
        let mut v = VerifierVerdict::new("lemma 4");
        Self::kernel_numeric(&mut v, &system, &kernel);
        v.numeric.insert("distance to span{R1,R2}".into(), self.distance_to_model_span(&kernel));
        let mut rng = seeded(seed.wrapping_add(2));
        for r in &elems {
            v.absorb(self.check_lemma4_conclusion(r, &mut rng));
        }
        v.numeric.insert("trials".into(), elems.len() as f64);
        Ok(v)
    }

    /// The special-angle system has a trivial kernel.
    pub fn verify_special_angles(&self, seed: u64) -> Result<VerifierVerdict> {
        let system = self.assemble_special_angles(self.default_samples_per_angle(3), seed)?;
        let kernel = self.kernel(&system);
        let mut v = VerifierVerdict::new("special angles");
        Self::kernel_numeric(&mut v, &system, &kernel);
        v.numeric.insert("curvature space dimension".into(), self.basis.len() as f64);
        for t in &kernel.tensors {
            v.fail(Witness {
                description: "nonzero tensor vanishing on all special-angle planes".into(),
                vectors: vec![],
                residual: t.norm(),
            });
        }
        Ok(v)
    }

    /// Evaluates the curvature identities on `r`. Each identity records the
    /// hypothesis it needs; when `r` does not satisfy it the identity is
    /// reported as [`IdentityStatus::HypothesisNotSatisfied`] instead of evaluated.
    pub fn verify_identity_suite(&self, r: &CurvatureTensor, trials: usize, seed: u64) -> IdentitySuite {
        let ctx = &self.ctx;
        let mut rng = seeded(seed);
        let scale = r.norm().max(f64::MIN_POSITIVE);
        let tol = self.tol_verify;
        let hyp_hol = self.condition_residual(r, Condition::HolomorphicPlanes, trials, &mut rng).0;
        let hyp_anti = self.condition_residual(r, Condition::AntiholomorphicPlanes, trials, &mut rng).0;
        let has_normal = ctx.m() >= 3;

        // identity name, hypothesis, needs a Z normal to X, JX, Y, JY
        type Ident = fn(&Eval<'_>) -> f64;
        let identities: &[(&'static str, Condition, bool, Ident)] = &[
            ("K(X,Y)=K(JX,JY)", Condition::HolomorphicPlanes, false, |e| e.k(&e.x, &e.y) - e.k(&e.jx, &e.jy)),
            ("alpha expansion of H(X+aJY)", Condition::HolomorphicPlanes, false, |e| {
                let a2 = e.alpha * e.alpha;
                e.h(&e.x) - a2 * e.h(&e.y)
                    + (a2 - 1.0) * e.r(&e.x, &e.jx, &e.jy, &e.y)
                    + (a2 - 1.0) * e.r(&e.x, &e.jy, &e.jx, &e.y)
                    + a2 * e.k(&e.x, &e.jy)
                    - e.k(&e.jx, &e.y)
            }),
            ("H(X)-H(Y)=K(JX,Y)-K(X,JY)", Condition::HolomorphicPlanes, false, |e| {
                e.h(&e.x) - e.h(&e.y) + e.k(&e.x, &e.jy) - e.k(&e.jx, &e.y)
            }),
            ("H(Y) decomposition", Condition::HolomorphicPlanes, false, |e| {
                e.h(&e.y) - (e.r(&e.x, &e.jx, &e.jy, &e.y) + e.r(&e.x, &e.jy, &e.jx, &e.y) + e.k(&e.x, &e.jy))
            }),
            ("H(X) decomposition", Condition::HolomorphicPlanes, false, |e| {
                e.h(&e.x) - (e.r(&e.x, &e.jx, &e.jy, &e.y) + e.r(&e.x, &e.jy, &e.jx, &e.y) + e.k(&e.x, &e.jy))
            }),
            ("H(X)=H(Y)", Condition::HolomorphicPlanes, false, |e| e.h(&e.x) - e.h(&e.y)),
            ("K(JX,Y)=K(X,Y)", Condition::AntiholomorphicPlanes, false, |e| {
                e.k(&e.jx, &e.y) - e.k(&e.x, &e.y)
            }),
            ("H(X) decomposition, antiholomorphic", Condition::AntiholomorphicPlanes, false, |e| {
                e.h(&e.x) - (e.r(&e.x, &e.jx, &e.jy, &e.y) + e.r(&e.x, &e.jy, &e.jx, &e.y) + e.k(&e.x, &e.jy))
            }),
            ("H(X) decomposition via Bianchi", Condition::AntiholomorphicPlanes, false, |e| {
                e.h(&e.x) - (2.0 * e.r(&e.x, &e.jx, &e.jy, &e.y) + e.r(&e.jx, &e.jy, &e.x, &e.y) + e.k(&e.x, &e.jy))
            }),
            ("2H(X)=3R(X,JX,JY,Y)+K(X,Y)+K(X,JY)", Condition::AntiholomorphicPlanes, false, |e| {
                2.0 * e.h(&e.x) - (3.0 * e.r(&e.x, &e.jx, &e.jy, &e.y) + e.k(&e.x, &e.y) + e.k(&e.x, &e.jy))
            }),
            ("R(X,JX,JY,Y)=2(c-K)/3", Condition::AntiholomorphicPlanes, false, |e| {
                e.r(&e.x, &e.jx, &e.jy, &e.y) - 2.0 * (e.h(&e.x) - e.k(&e.x, &e.y)) / 3.0
            }),
            ("R(X,JY,JX,Y)=(c-K)/3", Condition::AntiholomorphicPlanes, false, |e| {
                e.r(&e.x, &e.jy, &e.jx, &e.y) - (e.h(&e.x) - e.k(&e.x, &e.y)) / 3.0
            }),
            ("R(JX,JY,X,Y)=(K-c)/3", Condition::AntiholomorphicPlanes, false, |e| {
                e.r(&e.jx, &e.jy, &e.x, &e.y) - (e.k(&e.x, &e.y) - e.h(&e.x)) / 3.0
            }),
            ("K(X,Y)=K(Y,Z)", Condition::AntiholomorphicPlanes, true, |e| e.k(&e.x, &e.y) - e.k(&e.y, e.z())),
            ("R(X,JX,Y,Z)=R(X,Y,Z,JX)=0", Condition::AntiholomorphicPlanes, true, |e| {
                e.r(&e.x, &e.jx, &e.y, e.z()).abs().max(e.r(&e.x, &e.y, e.z(), &e.jx).abs())
            }),
            ("R(X,JX,Z,Y)+R(X,Z,JX,Y)=0", Condition::AntiholomorphicPlanes, true, |e| {
                e.r(&e.x, &e.jx, e.z(), &e.y) + e.r(&e.x, e.z(), &e.jx, &e.y)
            }),
            ("R(X,Y,Z,JX)+R(X,Z,Y,JX)=0", Condition::AntiholomorphicPlanes, true, |e| {
                e.r(&e.x, &e.y, e.z(), &e.jx) + e.r(&e.x, e.z(), &e.y, &e.jx)
            }),
        ];

        let mut samples = Vec::with_capacity(trials);
        let alpha_dist = Uniform::new(-2.0, 2.0).expect("valid range");
        for _ in 0..trials {
            let (x, y) = sample_adapted_pair(ctx, &mut rng);
            let (jx, jy) = (ctx.apply_j(&x), ctx.apply_j(&y));
            let z = has_normal.then(|| ctx.random_unit_orthogonal(&mut rng, &[&x, &jx, &y, &jy]));
            let alpha = rng.sample(alpha_dist);
            samples.push(Eval {
                r,
                x,
                y,
                jx,
                jy,
                z,
                alpha,
            });
        }

        let checks = identities
            .iter()
            .map(|&(name, hypothesis, needs_z, f)| {
                let hyp = match hypothesis {
                    Condition::HolomorphicPlanes => hyp_hol,
                    _ => hyp_anti,
                };
                let mut check = IdentityCheck {
                    name,
                    hypothesis,
                    status: IdentityStatus::Holds,
                    max_residual: 0.0,
                    hypothesis_residual: hyp,
                };
                if needs_z && !has_normal {
                    check.status = IdentityStatus::NotApplicable;
                    return check;
                }
                if !(hyp < tol) {
                    check.status = IdentityStatus::HypothesisNotSatisfied;
                    return check;
                }
                check.max_residual = samples.iter().map(|e| (f(e) / scale).abs()).fold(0.0, f64::max);
                if !(check.max_residual < tol) {
                    check.status = IdentityStatus::Fails;
                }
                check
            })
            .collect();
        IdentitySuite { checks }
    }
}

impl VerifierVerdict {
    fn absorb_witnesses(&mut self, other: VerifierVerdict) {
        if !other.holds {
            self.holds = false;
        }
        for w in other.witnesses {
            self.fail(w);
        }
    }
}

/// Sampled vectors for one evaluation of the identity suite.
struct Eval<'a> {
    r: &'a CurvatureTensor,
    x: Vector,
    y: Vector,
    jx: Vector,
    jy: Vector,
    z: Option<Vector>,
    alpha: f64,
}

impl Eval<'_> {
    fn r(&self, a: &Vector, b: &Vector, c: &Vector, d: &Vector) -> f64 {
        evaluate(self.r, a, b, c, d).expect("context vectors")
    }

    fn k(&self, a: &Vector, b: &Vector) -> f64 {
        self.r(a, b, b, a)
    }

    fn h(&self, a: &Vector) -> f64 {
        let ja = self.r.context().apply_j(a);
        self.r(a, &ja, &ja, a)
    }

    fn z(&self) -> &Vector {
        self.z.as_ref().expect("normal vector sampled when m >= 3")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{model_tensor, r1_tensor, r2_tensor};

    fn lab(m: usize) -> Lab {
        Lab::new(&HermitianContext::canonical(m).unwrap())
    }

    fn random_curvature(lab: &Lab, seed: u64) -> CurvatureTensor {
        let mut rng = seeded(seed);
        let raw: Vec<f64> = (0..lab.ctx.dim().pow(4)).map(|_| rng.sample(StandardNormal)).collect();
        project_to_curvature(&raw, &lab.ctx).unwrap().normalized()
    }

    #[test]
    fn basis_dimension_and_fixed_points() {
        let l = lab(2);
        assert_eq!(l.basis().len(), 20);
        assert_eq!(curvature_space_dimension(4), 20);
        assert_eq!(curvature_space_dimension(6), 105);
        for b in 0..l.basis().len() {
            let t = l.basis().tensor(l.context(), b);
            t.validate().unwrap();
            let p = project_to_curvature(t.coeffs(), l.context()).unwrap();
            assert!(p.add_scaled(-1.0, &t).max_abs() < 1e-12);
        }
    }

    #[test]
    fn basis_dimension_matches_projection_trace() {
        // rank of an orthogonal projection is its trace; sum of <e, P e> over elementary e
        let ctx = HermitianContext::canonical(2).unwrap();
        let d: usize = 4;
        let mut trace = 0.0;
        for n in 0..d * d * d * d {
            let mut raw = vec![0.0; d.pow(4)];
            raw[n] = 1.0;
            trace += project_to_curvature(&raw, &ctx).unwrap().coeffs()[n];
        }
        assert!((trace - 20.0).abs() < 1e-9, "{trace}");
    }

    #[test]
    fn model_tensors_lie_in_holomorphic_kernel() {
        let l = lab(2);
        let sys = l.assemble_holomorphic_planes(l.default_samples(), 0).unwrap();
        assert_eq!(sys.row_count(), sys.structured + l.default_samples());
        for t in [r1_tensor(l.context()), r2_tensor(l.context()), model_tensor(l.context(), -2.0, 3.0)] {
            assert!(sys.apply(l.basis(), &t).amax() < 1e-12);
        }
        let g = random_curvature(&l, 3);
        assert!(sys.apply(l.basis(), &g).amax() > 1e-3);
    }

    #[test]
    fn too_few_rows_is_rejected() {
        let l = lab(2);
        assert!(matches!(
            l.assemble_special_angles(1, 0),
            Err(Error::TooFewRows { got: 3, min: 60 })
        ));
    }

    #[test]
    fn empty_system_kernel_is_everything() {
        let l = lab(2);
        let k = l.kernel(&l.empty_system(Condition::HolomorphicPlanes));
        assert_eq!(k.dim(), 20);
    }

    #[test]
    fn antiholomorphic_kernel_is_model_span() {
        let l = lab(2);
        let sys = l.assemble_antiholomorphic_planes(l.default_samples(), 1).unwrap();
        let k = l.kernel(&sys);
        assert_eq!(k.dim(), 2);
        assert!(l.distance_to_model_span(&k) < 1e-8);
        for t in &k.tensors {
            t.validate().unwrap();
            assert!(sys.apply(l.basis(), t).amax() < 1e-8);
        }
    }

    #[test]
    fn antiholomorphic_kernel_sits_inside_holomorphic_kernel() {
        for m in [2, 3] {
            let l = lab(m);
            let hol = l.kernel(&l.assemble_holomorphic_planes(l.default_samples(), 4).unwrap());
            let anti = l.kernel(&l.assemble_antiholomorphic_planes(l.default_samples(), 5).unwrap());
            for v in &anti.coords {
                let mut w = v.clone();
                for e in &hol.coords {
                    let p = e.dot(&w);
                    w.axpy(-p, e, 1.0);
                }
                assert!(w.norm() < 1e-8, "m={m}: {}", w.norm());
            }
        }
    }

    #[test]
    fn holomorphic_kernel_has_non_model_members() {
        // dimension 4 at m = 2 and 22 at m = 3, so the model span is a proper subspace
        let expected = [(2, 4), (3, 22)];
        for (m, dim) in expected {
            let l = lab(m);
            let k = l.kernel(&l.assemble_holomorphic_planes(l.default_samples(), 6).unwrap());
            assert_eq!(k.dim(), dim, "m={m}");
            let r = l.random_kernel_element(&k, &mut seeded(7)).unwrap();
            assert!(fit_model(&r).residual > 1e-3);
            assert!(rk_defect(&r) < 1e-12);
            let anti = crate::curvature::constancy_report(&r, CurvatureKind::Antiholomorphic, 100, &mut seeded(8));
            assert!(anti.max_deviation > 1e-3, "m={m}: {anti:?}");
        }
    }

    #[test]
    fn special_angle_kernel_is_trivial_and_needs_quarter_angle() {
        let l = lab(2);
        let v = l.verify_special_angles(0).unwrap();
        assert!(v.holds, "{v:?}");
        assert_eq!(v.numeric["kernel dimension"], 0.0);
        let n = l.default_samples_per_angle(2);
        let sys = l.assemble_angle_families(&[0.0, FRAC_PI_2], n, 0).unwrap();
        assert!(l.kernel(&sys).dim() >= 1);
    }

    #[test]
    fn lemma_verifiers_hold_at_m2() {
        let l = lab(2);
        assert!(l.verify_lemma1(5, 11).unwrap().holds);
        assert!(l.verify_lemma3(5, 11).unwrap().holds);
        let v = l.verify_lemma4(5, 11).unwrap();
        assert!(v.holds, "{v:?}");
        assert!(v.witnesses.is_empty());
    }

    #[test]
    fn negative_controls_fail_with_witnesses() {
        let l = lab(2);
        let g = random_curvature(&l, 3);
        let v = l.check_lemma1_conclusion(&g, &mut seeded(0));
        assert!(!v.holds && !v.witnesses.is_empty());
        let v = l.check_rk(&g);
        assert!(!v.holds && !v.witnesses.is_empty());
        let v = l.check_lemma4_conclusion(&g, &mut seeded(0));
        assert!(!v.holds);
        let v = l.check_condition(&g, Condition::HolomorphicPlanes, 50, 0);
        assert!(!v.holds && v.witnesses[0].vectors.len() == 4);
    }

    #[test]
    fn identity_suite_reports_hypothesis_failures() {
        let l = lab(2);
        let g = random_curvature(&l, 3);
        let suite = l.verify_identity_suite(&g, 20, 0);
        assert!(suite
            .checks
            .iter()
            .all(|c| matches!(c.status, IdentityStatus::HypothesisNotSatisfied | IdentityStatus::NotApplicable)));
        assert!(!suite.verdict().holds);

        let m = model_tensor(l.context(), 1.0, 4.0);
        let suite = l.verify_identity_suite(&m, 20, 0);
        assert_eq!(suite.get("K(X,Y)=K(Y,Z)").unwrap().status, IdentityStatus::NotApplicable);
        assert_eq!(suite.get("2H(X)=3R(X,JX,JY,Y)+K(X,Y)+K(X,JY)").unwrap().status, IdentityStatus::Holds);
        assert!(suite.verdict().holds);
    }

    #[test]
    fn kernel_dimension_is_stable_under_doubled_samples() {
        for m in [2, 3] {
            let l = lab(m);
            let n = l.default_samples();
            let k = l.default_samples_per_angle(3);
            let pairs = [
                (l.assemble_holomorphic_planes(n, 0).unwrap(), l.assemble_holomorphic_planes(2 * n, 0).unwrap()),
                (l.assemble_antiholomorphic_planes(n, 0).unwrap(), l.assemble_antiholomorphic_planes(2 * n, 0).unwrap()),
                (l.assemble_special_angles(k, 0).unwrap(), l.assemble_special_angles(2 * k, 0).unwrap()),
            ];
            for (a, b) in &pairs {
                assert_eq!(l.kernel(a).dim(), l.kernel(b).dim(), "m={m} {:?}", a.condition);
            }
        }
    }

    #[test]
    fn verdicts_ignore_positive_scaling() {
        let l = lab(2);
        let k = l.kernel(&l.assemble_antiholomorphic_planes(l.default_samples(), 2).unwrap());
        let r = l.random_kernel_element(&k, &mut seeded(3)).unwrap();
        let g = random_curvature(&l, 3);
        for s in [1e-3, 0.5, 10.0, 1e4] {
            for t in [&r, &g] {
                let scaled = t.scaled(s);
                assert_eq!(
                    l.check_lemma4_conclusion(t, &mut seeded(1)).holds,
                    l.check_lemma4_conclusion(&scaled, &mut seeded(1)).holds
                );
                assert_eq!(
                    l.check_lemma1_conclusion(t, &mut seeded(1)).holds,
                    l.check_lemma1_conclusion(&scaled, &mut seeded(1)).holds
                );
                assert_eq!(l.check_rk(t).holds, l.check_rk(&scaled).holds);
                assert_eq!(
                    l.check_condition(t, Condition::AntiholomorphicPlanes, 30, 0).holds,
                    l.check_condition(&scaled, Condition::AntiholomorphicPlanes, 30, 0).holds
                );
            }
        }
    }

    #[test]
    fn verdicts_are_deterministic() {
        let l = lab(2);
        assert_eq!(l.verify_lemma1(3, 4).unwrap(), l.verify_lemma1(3, 4).unwrap());
    }
}
