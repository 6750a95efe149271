//! Analysis reports shared by the command-line tool and the C interface.
//!
//! JSON top-level keys are stable: `input`, `residuals`, `rk_defect`,
//! `constancy`, `fit`, `verdicts`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::curvature::{constancy_report, fit_model, rk_defect, Constancy, CurvatureKind, CurvatureTensor, ModelParameters, StructureResiduals};
use crate::exchange::RawTensor;
use crate::hermitian::{seeded, HermitianContext};
use crate::lab::{Condition, Lab, VerifierVerdict};
use crate::TOL_STRUCTURE;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tol: 1e-8,
            samples: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputInfo {
    pub path: String,
    pub dim: usize,
    pub m: usize,
    pub canonical: bool,
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Context and tensor symmetry residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub j_squared: f64,
    pub compatibility: f64,
    pub property_1: f64,
    pub property_2: f64,
    pub property_3: f64,
    pub pair_symmetry: f64,
}

impl Residuals {
    pub fn of_context(ctx: &HermitianContext) -> Self {
        Residuals {
            j_squared: ctx.j_square_residual(),
            compatibility: ctx.compatibility_residual(),
            property_1: 0.0,
            property_2: 0.0,
            property_3: 0.0,
            pair_symmetry: 0.0,
        }
    }

    pub fn of(t: &CurvatureTensor) -> Self {
        let s = t.residuals();
        Residuals {
            property_1: s.antisymmetry_12,
            property_2: s.bianchi,
            property_3: s.antisymmetry_34,
            pair_symmetry: s.pair_symmetry,
            ..Residuals::of_context(t.context())
        }
    }

    /// Residuals straight from a parsed document, valid context or not.
    pub fn of_raw(raw: &RawTensor) -> Self {
        let dim = raw.dim;
        let s = StructureResiduals::of(&raw.coeffs, dim);
        Residuals {
            j_squared: (&raw.j * &raw.j + DMatrix::identity(dim, dim)).amax(),
            compatibility: (raw.j.transpose() * &raw.g * &raw.j - &raw.g).amax(),
            property_1: s.antisymmetry_12,
            property_2: s.bianchi,
            property_3: s.antisymmetry_34,
            pair_symmetry: s.pair_symmetry,
        }
    }

    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("J^2 = -I", self.j_squared),
            ("g(JX,JY) = g(X,Y)", self.compatibility),
            ("property 1 (R(X,Y) = -R(Y,X))", self.property_1),
            ("property 2 (first Bianchi identity)", self.property_2),
            ("property 3 (R(X,Y,Z,U) = -R(X,Y,U,Z))", self.property_3),
            ("pair symmetry (R(X,Y,Z,U) = R(Z,U,X,Y))", self.pair_symmetry),
        ]
    }

    /// Residual threshold scaled by the coefficient magnitude.
    pub fn threshold(max_abs: f64) -> f64 {
        TOL_STRUCTURE * max_abs.max(1.0)
    }

    pub fn all_below(&self, tol: f64) -> bool {
        self.named().iter().all(|(_, v)| *v < tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstancyPair {
    pub holomorphic: Constancy,
    pub antiholomorphic: Constancy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    #[serde(flatten)]
    pub params: ModelParameters,
    pub relative_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub input: InputInfo,
    pub residuals: Residuals,
    pub rk_defect: f64,
    pub constancy: ConstancyPair,
    pub fit: Fit,
    pub verdicts: Vec<VerifierVerdict>,
}

/// Full analysis of a validated tensor.
pub fn analyze(t: &CurvatureTensor, path: &str, settings: &Settings) -> Report {
    let ctx = t.context();
    let mut lab = Lab::new(ctx);
    lab.tol_verify = settings.tol;
    let mut rng = seeded(settings.seed);
    let hol = constancy_report(t, CurvatureKind::Holomorphic, settings.samples, &mut rng);
    let anti = constancy_report(t, CurvatureKind::Antiholomorphic, settings.samples, &mut rng);
    let params = fit_model(t);
    let norm = t.norm();
    let verdicts = vec![
        lab.check_condition(t, Condition::HolomorphicPlanes, settings.samples, settings.seed),
        lab.check_condition(t, Condition::AntiholomorphicPlanes, settings.samples, settings.seed),
        lab.check_rk(t),
        lab.check_constancy(t, CurvatureKind::Holomorphic, &mut rng),
        lab.check_constancy(t, CurvatureKind::Antiholomorphic, &mut rng),
        lab.check_model_form(t),
    ];
    Report {
        input: InputInfo {
            path: path.to_string(),
            dim: ctx.dim(),
            m: ctx.m(),
            canonical: ctx.is_canonical(),
            tol: settings.tol,
            samples: settings.samples,
            seed: settings.seed,
        },
        residuals: Residuals::of(t),
        rk_defect: rk_defect(t),
        constancy: ConstancyPair {
            holomorphic: hol,
            antiholomorphic: anti,
        },
        fit: Fit {
            params,
            relative_residual: if norm > 0.0 { params.residual / norm } else { 0.0 },
        },
        verdicts,
    }
}

/// Shortest round-trip scientific formatting, so text and JSON carry the same values.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v.fract() == 0.0 && a < 1e15 {
        format!("{v:.0}")
    } else if (1e-3..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn format_verdict(out: &mut String, v: &VerifierVerdict) {
    let _ = writeln!(out, "verdict {}: {}", v.name, if v.holds { "holds" } else { "FAILS" });
    for (k, x) in &v.numeric {
        let _ = writeln!(out, "  {k}: {}", num(*x));
    }
    for w in &v.witnesses {
        let _ = writeln!(out, "  witness: {} (residual {})", w.description, num(w.residual));
        for vec in &w.vectors {
            let coords: Vec<String> = vec.iter().map(|c| format!("{c:.6}")).collect();
            let _ = writeln!(out, "    [{}]", coords.join(", "));
        }
    }
}

pub fn format_residuals(out: &mut String, r: &Residuals, tol: Option<f64>) {
    for (name, v) in r.named() {
        match tol {
            Some(t) => {
                let _ = writeln!(out, "  {name}: {} {}", num(v), if v < t { "ok" } else { "VIOLATED" });
            }
            None => {
                let _ = writeln!(out, "  {name}: {}", num(v));
            }
        }
    }
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let i = &self.input;
        let _ = writeln!(out, "input: {} (dim {}, m {}, canonical {})", i.path, i.dim, i.m, i.canonical);
        let _ = writeln!(out, "settings: tol {} samples {} seed {}", num(i.tol), i.samples, i.seed);
        let _ = writeln!(out, "residuals:");
        format_residuals(&mut out, &self.residuals, None);
        let _ = writeln!(out, "rk_defect: {}", num(self.rk_defect));
        for (name, c) in [
            ("holomorphic", &self.constancy.holomorphic),
            ("antiholomorphic", &self.constancy.antiholomorphic),
        ] {
            let _ = writeln!(
                out,
                "constancy {name}: mean {} max_deviation {} planes {}",
                num(c.mean),
                num(c.max_deviation),
                c.planes
            );
        }
        let f = &self.fit;
        let _ = writeln!(
            out,
            "fit: K {} c {} residual {} relative {}",
            num(f.params.k),
            num(f.params.c),
            num(f.params.residual),
            num(f.relative_residual)
        );
        for v in &self.verdicts {
            format_verdict(&mut out, v);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
