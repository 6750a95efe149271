//! Reproducible test tensors.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curvature::{model_tensor, project_to_curvature, r1_tensor, r2_tensor, CurvatureTensor};
use crate::error::{Error, Result};
use crate::hermitian::{seeded, HermitianContext};
use crate::lab::Lab;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// `K·R1`
    SpaceForm,
    /// `(c/4)(R1 + R2)`
    ComplexSpaceForm,
    /// `K·R1 + ((c − K)/3)·R2`
    Model,
    /// Projected Gaussian array, unit norm.
    Random,
    /// `J`-conjugation average of a random tensor, unit norm.
    RandomRk,
    /// Random unit element of the `R(X,JX,JX,Y) = 0` kernel.
    Kernel31,
    /// Random unit element of the `R(X,Y,Y,Z) = 0` kernel.
    Kernel38,
    /// Model tensor plus `ε` times a random unit curvature direction.
    Perturbed,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 8] = [
        GeneratorKind::SpaceForm,
        GeneratorKind::ComplexSpaceForm,
        GeneratorKind::Model,
        GeneratorKind::Random,
        GeneratorKind::RandomRk,
        GeneratorKind::Kernel31,
        GeneratorKind::Kernel38,
        GeneratorKind::Perturbed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::SpaceForm => "space-form",
            GeneratorKind::ComplexSpaceForm => "complex-space-form",
            GeneratorKind::Model => "model",
            GeneratorKind::Random => "random",
            GeneratorKind::RandomRk => "random-rk",
            GeneratorKind::Kernel31 => "kernel-31",
            GeneratorKind::Kernel38 => "kernel-38",
            GeneratorKind::Perturbed => "perturbed",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown generator kind '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub m: usize,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub c: Option<f64>,
    pub seed: u64,
    pub eps: Option<f64>,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, m: usize) -> Self {
        GeneratorSpec {
            kind,
            m,
            k: None,
            c: None,
            seed: 0,
            eps: None,
        }
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    /// Checks the parameter set required by the kind.
    pub fn validate(&self) -> Result<()> {
        use GeneratorKind::*;
        let (needs_k, needs_c, needs_eps) = match self.kind {
            SpaceForm => (Some(true), Some(false), false),
            ComplexSpaceForm => (Some(false), Some(true), false),
            Model => (Some(true), Some(true), false),
            Random | RandomRk | Kernel31 | Kernel38 => (Some(false), Some(false), false),
            Perturbed => (Some(true), Some(true), true),
        };
        let check = |name: &str, need: Option<bool>, have: Option<f64>| -> Result<()> {
            match (need, have) {
                (Some(true), None) => Err(Error::InvalidSpec(format!("{} requires {name}", self.kind))),
                (Some(false), Some(_)) => Err(Error::InvalidSpec(format!("{} does not take {name}", self.kind))),
                (_, Some(v)) if !v.is_finite() => Err(Error::InvalidSpec(format!("{name} must be finite"))),
                _ => Ok(()),
            }
        };
        check("K", needs_k, self.k)?;
        check("c", needs_c, self.c)?;
        match (needs_eps, self.eps) {
            (true, None) => return Err(Error::InvalidSpec(format!("{} requires eps", self.kind))),
            (false, Some(_)) => return Err(Error::InvalidSpec(format!("{} does not take eps", self.kind))),
            (true, Some(e)) if !(e >= 0.0 && e.is_finite()) => {
                return Err(Error::InvalidSpec("eps must be a finite non-negative number".into()))
            }
            _ => {}
        }
        if self.m < 2 {
            return Err(Error::DimensionTooSmall(self.m));
        }
        Ok(())
    }
}

/// Builds the tensor described by `spec` over the canonical context.
pub fn generate(spec: &GeneratorSpec) -> Result<CurvatureTensor> {
    spec.validate()?;
    let ctx = HermitianContext::canonical(spec.m)?;
    generate_in(&ctx, spec)
}

/// Builds the tensor described by `spec` over `ctx` (whose `m` must match).
pub fn generate_in(ctx: &HermitianContext, spec: &GeneratorSpec) -> Result<CurvatureTensor> {
    spec.validate()?;
    if ctx.m() != spec.m {
        return Err(Error::DimensionMismatch {
            expected: spec.m,
            got: ctx.m(),
        });
    }
    let k = spec.k.unwrap_or(0.0);
    let c = spec.c.unwrap_or(0.0);
    Ok(match spec.kind {
        GeneratorKind::SpaceForm => r1_tensor(ctx).scaled(k),
        // Kähler case of the model family: K = c/4 makes the R2 coefficient c/4 as well
        GeneratorKind::ComplexSpaceForm => r1_tensor(ctx).add_scaled(1.0, &r2_tensor(ctx)).scaled(c / 4.0),
        GeneratorKind::Model => model_tensor(ctx, k, c),
        GeneratorKind::Random => random_curvature(ctx, spec.seed),
        GeneratorKind::RandomRk => {
            let r = random_curvature(ctx, spec.seed);
            r.add_scaled(1.0, &r.j_conjugate()).scaled(0.5).normalized()
        }
        GeneratorKind::Kernel31 | GeneratorKind::Kernel38 => {
            let lab = Lab::new(ctx);
            let system = if spec.kind == GeneratorKind::Kernel31 {
                lab.assemble_holomorphic_planes(lab.default_samples(), spec.seed)?
            } else {
                lab.assemble_antiholomorphic_planes(lab.default_samples(), spec.seed)?
            };
            let kernel = lab.kernel(&system);
            lab.random_kernel_element(&kernel, &mut seeded(spec.seed.wrapping_add(1)))
                .unwrap_or_else(|| CurvatureTensor::zero(ctx))
        }
        GeneratorKind::Perturbed => perturb(&model_tensor(ctx, k, c), spec.seed, spec.eps.unwrap_or(0.0))?,
    })
}

/// Unit-norm projection of a seeded Gaussian array.
pub fn random_curvature(ctx: &HermitianContext, seed: u64) -> CurvatureTensor {
    let mut rng = seeded(seed);
    let raw: Vec<f64> = (0..ctx.dim().pow(4)).map(|_| rng.sample(StandardNormal)).collect();
    project_to_curvature(&raw, ctx).expect("shape").normalized()
}

/// `R + ε·U` for a unit random curvature direction `U`.
pub fn perturb(r: &CurvatureTensor, direction_seed: u64, eps: f64) -> Result<CurvatureTensor> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidSpec("eps must be a finite non-negative number".into()));
    }
    if eps == 0.0 {
        return Ok(r.clone());
    }
    let u = random_curvature(r.context(), direction_seed);
    Ok(r.add_scaled(eps, &u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{constancy_report, fit_model, rk_defect, CurvatureKind};

    #[test]
    fn space_form_is_scaled_r1() {
        let t = generate(&GeneratorSpec::new(GeneratorKind::SpaceForm, 2).with_k(1.0)).unwrap();
        let f = fit_model(&t);
        assert!((f.k - 1.0).abs() < 1e-14 && (f.c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_space_form_fixture() {
        let t = generate(&GeneratorSpec::new(GeneratorKind::ComplexSpaceForm, 2).with_c(4.0)).unwrap();
        let h = constancy_report(&t, CurvatureKind::Holomorphic, 30, &mut seeded(1));
        let a = constancy_report(&t, CurvatureKind::Antiholomorphic, 30, &mut seeded(1));
        assert!((h.mean - 4.0).abs() < 1e-12 && h.max_deviation < 1e-12);
        assert!((a.mean - 1.0).abs() < 1e-12 && a.max_deviation < 1e-12);
    }

    #[test]
    fn random_rk_is_rk_but_not_constant() {
        let t = generate(&GeneratorSpec::new(GeneratorKind::RandomRk, 2).with_seed(5)).unwrap();
        assert!(rk_defect(&t) < 1e-12);
        let h = constancy_report(&t, CurvatureKind::Holomorphic, 50, &mut seeded(0));
        assert!(h.max_deviation > 1e-3);
    }

    #[test]
    fn invalid_combinations_are_rejected() {
        assert!(generate(&GeneratorSpec::new(GeneratorKind::Model, 2).with_k(1.0)).is_err());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::SpaceForm, 2).with_k(1.0).with_c(2.0)).is_err());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::Random, 2).with_eps(0.1)).is_err());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::Perturbed, 2).with_k(1.0).with_c(1.0)).is_err());
        assert!(generate(&GeneratorSpec::new(GeneratorKind::Random, 1)).is_err());
        assert!("bogus".parse::<GeneratorKind>().is_err());
    }

    #[test]
    fn perturb_zero_is_identity() {
        let ctx = HermitianContext::canonical(2).unwrap();
        let m = model_tensor(&ctx, 1.0, 4.0);
        assert_eq!(perturb(&m, 3, 0.0).unwrap().coeffs(), m.coeffs());
        assert!(perturb(&m, 3, -1.0).is_err());
    }

    #[test]
    fn perturbation_residual_is_order_eps() {
        let ctx = HermitianContext::canonical(2).unwrap();
        let eps = 1e-2;
        let p = perturb(&model_tensor(&ctx, 1.0, 4.0), 3, eps).unwrap();
        p.validate().unwrap();
        let r = fit_model(&p).residual;
        assert!((eps / 2.0..=2.0 * eps).contains(&r), "{r}");
    }

    #[test]
    fn kinds_round_trip_through_names() {
        for k in GeneratorKind::ALL {
            assert_eq!(k.name().parse::<GeneratorKind>().unwrap(), k);
        }
    }
}
