//! JSON model configurations.
//!
//! ```json
//! { "variant": "atoms", "dim": 1,
//!   "atoms": [ { "point": [1.0], "mass": 0.5 }, { "point": [-1.0], "mass": 0.5 } ] }
//! ```
//!
//! Variants and their fields:
//!
//! | variant       | required                  | optional |
//! |---------------|---------------------------|----------|
//! | `atoms`       | `atoms`                   |          |
//! | `semi_stable` | `alpha`                   |          |
//! | `tempered`    | `beta`                    | `core`   |
//! | `psi1`        | `bernstein`               |          |
//! | `closed_form` | `closed_form_psi`         |          |
//!
//! Every variant also takes `dim`, an optional `label`, an optional
//! `closed_form_psi` (attached as the analytic exponent of a measure), and an
//! optional `bernstein` function used by the Nash and on-diagonal checks.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bernstein::{build_psi1, BernsteinFn, RepresentingMeasure};
use crate::error::{Error, Result};
use crate::levy_model::{Atom, ClosedForm, LevyMeasure, LevyModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Atoms,
    SemiStable,
    Tempered,
    Psi1,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub point: Vec<f64>,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BernsteinSpec {
    Power {
        alpha: f64,
    },
    Log1p,
    Ratio,
    /// `a + b x + ∫ (1 - e^{-xt}) μ(dt)` with `μ = Σ m_k δ_{t_k}`.
    Triplet {
        a: f64,
        b: f64,
        atoms: Vec<(f64, f64)>,
    },
}

impl BernsteinSpec {
    pub fn build(&self) -> Result<BernsteinFn> {
        match self {
            BernsteinSpec::Power { alpha } => BernsteinFn::power(*alpha),
            BernsteinSpec::Log1p => Ok(BernsteinFn::log1p()),
            BernsteinSpec::Ratio => Ok(BernsteinFn::ratio()),
            BernsteinSpec::Triplet { a, b, atoms } => {
                BernsteinFn::triplet(*a, *b, RepresentingMeasure::Atoms(atoms.clone()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: Variant,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<Box<ModelConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form_psi: Option<ClosedForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bernstein: Option<BernsteinSpec>,
}

fn require<T: Clone>(v: &Option<T>, field: &str, variant: Variant) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::invalid(format!("variant {variant:?} requires the field `{field}`")))
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ModelConfig =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.check_fields()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Rejects fields that the variant does not use.
    fn check_fields(&self) -> Result<()> {
        let present = [
            ("atoms", self.atoms.is_some()),
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
            ("core", self.core.is_some()),
        ];
        let allowed: &[&str] = match self.variant {
            Variant::Atoms => &["atoms"],
            Variant::SemiStable => &["alpha"],
            Variant::Tempered => &["beta", "core"],
            Variant::Psi1 | Variant::ClosedForm => &[],
        };
        for (name, is_set) in present {
            if is_set && !allowed.contains(&name) {
                return Err(Error::invalid(format!(
                    "field `{name}` does not apply to variant {:?}",
                    self.variant
                )));
            }
        }
        if let Some(core) = &self.core {
            if core.dim != self.dim {
                return Err(Error::invalid(
                    "the core measure must have the model's dimension",
                ));
            }
            if !matches!(
                core.variant,
                Variant::Atoms | Variant::SemiStable | Variant::Psi1
            ) {
                return Err(Error::invalid(
                    "the core must be an atomic, semi-stable or psi1 measure",
                ));
            }
            core.check_fields()?;
        }
        Ok(())
    }

    pub fn bernstein_fn(&self) -> Result<Option<BernsteinFn>> {
        self.bernstein
            .as_ref()
            .map(BernsteinSpec::build)
            .transpose()
    }

    fn measure(&self) -> Result<Option<LevyMeasure>> {
        let v = self.variant;
        Ok(match v {
            Variant::Atoms => {
                let atoms = require(&self.atoms, "atoms", v)?
                    .into_iter()
                    .map(|a| Atom {
                        point: a.point,
                        mass: a.mass,
                    })
                    .collect();
                Some(LevyMeasure::Atoms(atoms))
            }
            Variant::SemiStable => {
                Some(LevyMeasure::semi_stable(require(&self.alpha, "alpha", v)?)?)
            }
            Variant::Tempered => {
                let core = match &self.core {
                    Some(c) => c.measure()?,
                    None => None,
                };
                Some(LevyMeasure::tempered(
                    require(&self.beta, "beta", v)?,
                    core,
                )?)
            }
            Variant::Psi1 => {
                let f = require(&self.bernstein, "bernstein", v)?.build()?;
                build_psi1(&f, self.dim)?.measure().cloned()
            }
            Variant::ClosedForm => None,
        })
    }

    pub fn build(&self) -> Result<LevyModel> {
        self.check_fields()?;
        let model = match (self.measure()?, self.closed_form_psi) {
            (Some(m), cf) => {
                let model = LevyModel::new(m, self.dim)?;
                match cf {
                    Some(cf) => model.with_closed_form(cf)?,
                    None => model,
                }
            }
            (None, Some(cf)) => LevyModel::from_closed_form(cf, self.dim)?,
            (None, None) => {
                return Err(Error::invalid(
                    "variant closed_form requires the field `closed_form_psi`",
                ));
            }
        };
        Ok(match &self.label {
            Some(l) => model.with_label(l.clone()),
            None => model.with_label(self.default_label()),
        })
    }

    fn default_label(&self) -> String {
        match self.variant {
            Variant::Atoms => format!("atoms[{}]", self.atoms.as_ref().map_or(0, Vec::len)),
            Variant::SemiStable => format!("semi_stable[alpha={}]", self.alpha.unwrap_or(f64::NAN)),
            Variant::Tempered => format!("tempered[beta={}]", self.beta.unwrap_or(f64::NAN)),
            Variant::Psi1 => format!("psi1[{:?}]", self.bernstein),
            Variant::ClosedForm => format!("closed_form[{:?}]", self.closed_form_psi),
        }
    }
}

/// Hex SHA-256 of the raw config text.
pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CP1: &str = r#"{"variant":"atoms","dim":1,"atoms":[{"point":[1.0],"mass":0.5},{"point":[-1.0],"mass":0.5}]}"#;

    #[test]
    fn round_trip() {
        let texts = [
            CP1,
            r#"{"variant":"semi_stable","dim":1,"alpha":1.0}"#,
            r#"{"variant":"tempered","dim":1,"beta":2.0,"core":{"variant":"semi_stable","dim":1,"alpha":1.0}}"#,
            r#"{"variant":"psi1","dim":1,"bernstein":{"kind":"power","alpha":0.75}}"#,
            r#"{"variant":"closed_form","dim":2,"closed_form_psi":{"kind":"gaussian"},"label":"g"}"#,
        ];
        for t in texts {
            let a = ModelConfig::parse(t).unwrap();
            let b = ModelConfig::parse(&a.to_json()).unwrap();
            assert_eq!(a, b);
            a.build().unwrap();
        }
    }

    #[test]
    fn rejects_unknown_and_misplaced_fields() {
        assert!(
            ModelConfig::parse(r#"{"variant":"atoms","dim":1,"atoms":[],"colour":1}"#).is_err()
        );
        assert!(ModelConfig::parse(r#"{"variant":"atoms","dim":1,"alpha":1.0}"#).is_err());
        assert!(ModelConfig::parse(r#"{"variant":"semi_stable","dim":1}"#)
            .unwrap()
            .build()
            .is_err());
        assert!(ModelConfig::parse(r#"{"variant":"closed_form","dim":1}"#)
            .unwrap()
            .build()
            .is_err());
    }

    #[test]
    fn unit_pair_builds() {
        let m = ModelConfig::parse(CP1).unwrap().build().unwrap();
        assert!((m.cumulant_1d(1.0).unwrap() - 0.543_080_634_815_243_8).abs() < 1e-15);
        assert_eq!(config_hash("").len(), 64);
    }
}
