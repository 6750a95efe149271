//! JSON tensor exchange format.
//!
//! ```json
//! {
//!   "dim": 4,
//!   "J": [[0,0,-1,0],[0,0,0,-1],[1,0,0,0],[0,1,0,0]],
//!   "g": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],
//!   "R": [[0, 1, 1, 0, 1.0], [1, 0, 0, 1, 1.0], [0, 1, 0, 1, -1.0], [1, 0, 1, 0, -1.0]]
//! }
//! ```
//!
//! `J` and `g` are optional (canonical structure and identity metric) and may
//! be given as nested rows or as a flat row-major list. `R` is either the dense
//! nested `dim⁴` array or a sparse list of `[i, j, k, l, value]` records with
//! 0-based indices; unlisted entries are zero.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::curvature::{idx, CurvatureTensor};
use crate::error::{Error, Result};
use crate::hermitian::{canonical_j, HermitianContext};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixData {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TensorData {
    Sparse(Vec<[f64; 5]>),
    Dense(Vec<Vec<Vec<Vec<f64>>>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorDocument {
    pub dim: usize,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<MatrixData>,
    #[serde(rename = "R")]
    pub r: TensorData,
}

/// Contents of a tensor document after shape checks, before any invariant checks.
#[derive(Clone, Debug)]
pub struct RawTensor {
    pub dim: usize,
    pub j: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub coeffs: Vec<f64>,
}

impl RawTensor {
    /// Builds and validates the context.
    pub fn context(&self) -> Result<HermitianContext> {
        HermitianContext::new(self.dim / 2, Some(self.j.clone()), Some(self.g.clone()))
    }
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn matrix(name: &str, data: &MatrixData, dim: usize) -> Result<DMatrix<f64>> {
    match data {
        MatrixData::Rows(rows) => {
            if rows.len() != dim {
                return Err(format_err(format!("{name}: expected {dim} rows, got {}", rows.len())));
            }
            for (r, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return Err(format_err(format!("{name}[{r}]: expected {dim} entries, got {}", row.len())));
                }
            }
            Ok(DMatrix::from_fn(dim, dim, |r, c| rows[r][c]))
        }
        MatrixData::Flat(v) => {
            if v.len() != dim * dim {
                return Err(format_err(format!("{name}: expected {} entries, got {}", dim * dim, v.len())));
            }
            Ok(DMatrix::from_row_slice(dim, dim, v))
        }
    }
}

fn index(value: f64, dim: usize, record: usize, slot: usize) -> Result<usize> {
    if value.fract() != 0.0 || value < 0.0 || value >= dim as f64 {
        return Err(format_err(format!(
            "R[{record}][{slot}]: index {value} is not an integer in 0..{dim}"
        )));
    }
    Ok(value as usize)
}

impl TensorDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| format_err(format!("malformed tensor document: {e}")))
    }

    pub fn to_raw(&self) -> Result<RawTensor> {
        let dim = self.dim;
        if dim < 4 || !dim.is_multiple_of(2) {
            return Err(format_err(format!("dim: expected an even number >= 4, got {dim}")));
        }
        let j = match &self.j {
            Some(d) => matrix("J", d, dim)?,
            None => canonical_j(dim / 2),
        };
        let g = match &self.g {
            Some(d) => matrix("g", d, dim)?,
            None => DMatrix::identity(dim, dim),
        };
        let mut coeffs = vec![0.0; dim.pow(4)];
        match &self.r {
            TensorData::Sparse(records) => {
                let mut seen = vec![false; coeffs.len()];
                for (n, rec) in records.iter().enumerate() {
                    let i = index(rec[0], dim, n, 0)?;
                    let j = index(rec[1], dim, n, 1)?;
                    let k = index(rec[2], dim, n, 2)?;
                    let l = index(rec[3], dim, n, 3)?;
                    let at = idx(dim, i, j, k, l);
                    if seen[at] {
                        return Err(format_err(format!("R[{n}]: duplicate entry ({i}, {j}, {k}, {l})")));
                    }
                    seen[at] = true;
                    coeffs[at] = rec[4];
                }
            }
            TensorData::Dense(a) => {
                let bad = |path: String, got: usize| format_err(format!("R{path}: expected {dim} entries, got {got}"));
                if a.len() != dim {
                    return Err(bad(String::new(), a.len()));
                }
                for (i, ai) in a.iter().enumerate() {
                    if ai.len() != dim {
                        return Err(bad(format!("[{i}]"), ai.len()));
                    }
                    for (j, aij) in ai.iter().enumerate() {
                        if aij.len() != dim {
                            return Err(bad(format!("[{i}][{j}]"), aij.len()));
                        }
                        for (k, aijk) in aij.iter().enumerate() {
                            if aijk.len() != dim {
                                return Err(bad(format!("[{i}][{j}][{k}]"), aijk.len()));
                            }
                            coeffs[idx(dim, i, j, k, 0)..idx(dim, i, j, k, 0) + dim].copy_from_slice(aijk);
                        }
                    }
                }
            }
        }
        if let Some(n) = coeffs.iter().position(|v| !v.is_finite()) {
            return Err(format_err(format!("R: non-finite coefficient at flat index {n}")));
        }
        Ok(RawTensor { dim, j, g, coeffs })
    }

    /// Document for a tensor. Canonical `J` and identity `g` are omitted.
    pub fn from_tensor(t: &CurvatureTensor, sparse: bool) -> Self {
        let ctx = t.context();
        let dim = ctx.dim();
        let rows = |m: &DMatrix<f64>| MatrixData::Rows((0..dim).map(|r| m.row(r).iter().copied().collect()).collect());
        let canonical = ctx.is_canonical();
        let r = if sparse {
            let mut recs = Vec::new();
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        for l in 0..dim {
                            let v = t.get(i, j, k, l);
                            if v != 0.0 {
                                recs.push([i as f64, j as f64, k as f64, l as f64, v]);
                            }
                        }
                    }
                }
            }
            TensorData::Sparse(recs)
        } else {
            TensorData::Dense(
                (0..dim)
                    .map(|i| {
                        (0..dim)
                            .map(|j| (0..dim).map(|k| (0..dim).map(|l| t.get(i, j, k, l)).collect()).collect())
                            .collect()
                    })
                    .collect(),
            )
        };
        TensorDocument {
            dim,
            j: (!canonical).then(|| rows(ctx.j())),
            g: (!canonical).then(|| rows(ctx.g())),
            r,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("finite values serialize");
        s.push('\n');
        s
    }
}

/// Reads and shape-checks a tensor document.
pub fn read_raw(path: &Path) -> Result<RawTensor> {
    let text = std::fs::read_to_string(path).map_err(|e| format_err(format!("{}: {e}", path.display())))?;
    TensorDocument::parse(&text)?.to_raw()
}

pub fn write_tensor(path: &Path, t: &CurvatureTensor, sparse: bool) -> Result<()> {
    std::fs::write(path, TensorDocument::from_tensor(t, sparse).to_json())
        .map_err(|e| format_err(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{model_tensor, r1_tensor};
    use proptest::prelude::*;

    #[test]
    fn sparse_r1_parses() {
        let text = r#"{"dim": 4, "R": [[0,1,1,0,1.0],[1,0,0,1,1.0],[0,1,0,1,-1.0],[1,0,1,0,-1.0]]}"#;
        let raw = TensorDocument::parse(text).unwrap().to_raw().unwrap();
        let ctx = raw.context().unwrap();
        let t = CurvatureTensor::new(&ctx, raw.coeffs).unwrap();
        assert_eq!(t.get(0, 1, 1, 0), 1.0);
        assert_eq!(t.get(2, 3, 3, 2), 0.0);
    }

    #[test]
    fn errors_carry_context() {
        let e = TensorDocument::parse(r#"{"dim": 4, "R": [[0,1,1,0,1.0]"#).unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
        let e = TensorDocument::parse(r#"{"dim": 4, "R": [[0,9,1,0,1.0]]}"#).unwrap().to_raw().unwrap_err();
        assert!(e.to_string().contains("R[0][1]"), "{e}");
        let e = TensorDocument::parse(r#"{"dim": 4, "J": [[1,0],[0,1]], "R": []}"#).unwrap().to_raw().unwrap_err();
        assert!(e.to_string().starts_with("J:"), "{e}");
        let e = TensorDocument::parse(r#"{"dim": 3, "R": []}"#).unwrap().to_raw().unwrap_err();
        assert!(e.to_string().starts_with("dim"), "{e}");
        let e = TensorDocument::parse(r#"{"dim": 4, "R": [[0,1,1,0,1.0],[0,1,1,0,2.0]]}"#)
            .unwrap()
            .to_raw()
            .unwrap_err();
        assert!(e.to_string().contains("duplicate"), "{e}");
    }

    #[test]
    fn flat_matrices_are_row_major() {
        let mut doc = TensorDocument::from_tensor(&r1_tensor(&HermitianContext::canonical(2).unwrap()), true);
        doc.j = Some(MatrixData::Flat(vec![
            0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
        ]));
        let raw = doc.to_raw().unwrap();
        assert_eq!(raw.j, canonical_j(2));
    }

    #[test]
    fn non_canonical_context_is_written() {
        let g = DMatrix::identity(4, 4) * 3.0;
        let ctx = HermitianContext::new(2, None, Some(g.clone())).unwrap();
        let doc = TensorDocument::from_tensor(&r1_tensor(&ctx), false);
        let back = TensorDocument::parse(&doc.to_json()).unwrap().to_raw().unwrap();
        assert_eq!(back.g, g);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn documents_round_trip_bit_exactly(k in -5.0f64..5.0, c in -5.0f64..5.0, sparse: bool) {
            let ctx = HermitianContext::canonical(2).unwrap();
            let t = model_tensor(&ctx, k, c);
            let text = TensorDocument::from_tensor(&t, sparse).to_json();
            let raw = TensorDocument::parse(&text).unwrap().to_raw().unwrap();
            prop_assert_eq!(raw.coeffs.as_slice(), t.coeffs());
        }
    }
}
