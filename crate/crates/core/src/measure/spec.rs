//! JSON measure-spec documents.
//!
//! ```json
//! { "type": "mixture", "components": [
//!     {"type": "dirac", "at": [0.0, 0.0], "mass": 0.5},
//!     {"type": "annulus_uniform", "center": [0, 0], "r_in": 0.9, "r_out": 1.0, "mass": 0.5} ] }
//! { "type": "family", "name": "example3", "n_max": 200 }
//! ```

use serde::{Deserialize, Serialize};

use super::{make_family, Atom, AtomicMeasure, ComplexPoint, FamilyName, RadialComponent};
use crate::error::{Error, Result};

const DEFAULT_FAMILY_N_MAX: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentSpec {
    Dirac {
        at: ComplexPoint,
        mass: f64,
    },
    AnnulusUniform {
        center: ComplexPoint,
        r_in: f64,
        r_out: f64,
        mass: f64,
    },
    CircleUniform {
        center: ComplexPoint,
        radius: f64,
        mass: f64,
    },
    /// A family scaled to total weight `mass` (1 when omitted).
    Family {
        name: FamilyName,
        #[serde(default)]
        n_max: Option<usize>,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        mass: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Mixture(MixtureSpec),
    Single(ComponentSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    #[serde(rename = "type")]
    pub kind: MixtureKind,
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureKind {
    Mixture,
}

impl ComponentSpec {
    fn build(&self) -> Result<(f64, AtomicMeasure)> {
        Ok(match self {
            ComponentSpec::Dirac { at, mass } => (*mass, AtomicMeasure::dirac(*at)),
            ComponentSpec::AnnulusUniform {
                center,
                r_in,
                r_out,
                mass,
            } => (
                *mass,
                AtomicMeasure::new(
                    vec![],
                    vec![RadialComponent::annulus(*center, *r_in, *r_out, 1.0)?],
                )?,
            ),
            ComponentSpec::CircleUniform {
                center,
                radius,
                mass,
            } => (
                *mass,
                AtomicMeasure::new(
                    vec![],
                    vec![RadialComponent::circle(*center, *radius, 1.0)?],
                )?,
            ),
            ComponentSpec::Family {
                name,
                n_max,
                p,
                mass,
            } => (
                mass.unwrap_or(1.0),
                make_family(*name, n_max.unwrap_or(DEFAULT_FAMILY_N_MAX), *p)?,
            ),
        })
    }
}

impl MeasureSpec {
    pub fn build(&self) -> Result<AtomicMeasure> {
        let comps: &[ComponentSpec] = match self {
            MeasureSpec::Mixture(m) => &m.components,
            MeasureSpec::Single(c) => std::slice::from_ref(c),
        };
        if let [ComponentSpec::Dirac { at, mass }] = comps {
            return AtomicMeasure::new(vec![Atom::new(*at, *mass)], vec![]);
        }
        let parts = comps
            .iter()
            .map(ComponentSpec::build)
            .collect::<Result<Vec<_>>>()?;
        AtomicMeasure::mixture(&parts)
    }
}

/// Parses and builds a measure. Every parse error names a line and column.
pub fn parse_measure_spec(text: &str) -> Result<AtomicMeasure> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let is_mixture = value.get("type").and_then(|t| t.as_str()) == Some("mixture");
    let spec = if is_mixture {
        serde_json::from_str(text).map(MeasureSpec::Mixture)
    } else {
        serde_json::from_str(text).map(MeasureSpec::Single)
    };
    spec.map_err(|e| locate(text, e))?.build()
}

/// Tagged enums are decoded from a buffered copy, so serde reports schema
/// errors without a position. Anchor them at the first occurrence of the
/// offending quoted name instead.
fn locate(text: &str, e: serde_json::Error) -> Error {
    if e.line() != 0 {
        return e.into();
    }
    let msg = e.to_string();
    let needle = msg
        .split('`')
        .nth(1)
        .map(|name| format!("\"{name}\""))
        .and_then(|q| text.find(&q));
    let offset = needle.unwrap_or(0);
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Error::invalid(format!("{msg} at line {line} column {column}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{FamilyTag, RegionSpec};

    #[test]
    fn mixture_document() {
        let m = parse_measure_spec(
            r#"{ "type": "mixture", "components": [
                 {"type":"dirac","at":[0.0,0.0],"mass":0.5},
                 {"type":"annulus_uniform","center":[0,0],"r_in":0.9,"r_out":1.0,"mass":0.5} ] }"#,
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_eq!(m.continuous().len(), 1);
        assert_eq!(
            m.mass_in(&RegionSpec::singleton(0.0)).unwrap().exact(),
            Some(0.5)
        );
    }

    #[test]
    fn family_document() {
        let m =
            parse_measure_spec(r#"{ "type":"family", "name":"example3", "n_max": 200 }"#).unwrap();
        assert_eq!(m.family(), FamilyTag::Example3);
        assert_eq!(m.atoms().len(), 200);
    }

    #[test]
    fn errors_carry_position() {
        let err = parse_measure_spec("{\n \"type\": \"dirac\",\n \"at\": [0, 0],\n \"mas\": 1 }")
            .unwrap_err();
        assert!(err.to_string().contains("line 4 column 2"), "{err}");
        let err = parse_measure_spec("{ \"type\": ").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn masses_must_sum_to_one() {
        let err = parse_measure_spec(
            r#"{"type":"mixture","components":[{"type":"dirac","at":[0,0],"mass":0.4}]}"#,
        );
        assert!(err.is_err());
    }
}
