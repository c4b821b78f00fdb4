//! JSON scenario documents and the shipped scenario set.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{
    build_model, Bump, LogGrid, Model, MomentPolytope, Perturbation, PolytopeKind, ReferenceKind,
    SubvarietyDescriptor, SubvarietyKind, WeightSymbol,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Model(#[from] Error),
}

/// An integer or a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalSpec {
    Int(i64),
    Text(String),
}

impl RationalSpec {
    fn value(&self) -> Result<Rational64, ScenarioError> {
        match self {
            RationalSpec::Int(k) => Ok((*k).into()),
            RationalSpec::Text(s) => s
                .trim()
                .parse::<Rational64>()
                .map_err(|_| ScenarioError::Validation(format!("not a rational: {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolytopeSpec {
    Interval { a: RationalSpec },
    Rectangle { a: RationalSpec, b: RationalSpec },
    Simplex { a: RationalSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubvarietySpec {
    Ambient,
    CoordinateCurve { axis: usize },
    Diagonal,
    LineInP2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub amplitude: f64,
    #[serde(default)]
    pub center: [f64; 2],
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    Zero,
    Bumps { bumps: Vec<BumpSpec> },
    Tilt { amount: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    /// `fubini_study`, `product` or `simplex`; inferred from the polytope when absent.
    #[serde(default)]
    pub reference: Option<String>,
    #[serde(default = "zero_perturbation")]
    pub perturbation: PerturbationSpec,
}

fn zero_perturbation() -> PerturbationSpec {
    PerturbationSpec::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_halfwidth")]
    pub halfwidth: f64,
    /// Defaults to 257 on curves and 33 on surfaces.
    #[serde(default)]
    pub n_per_axis: Option<usize>,
    #[serde(default)]
    pub ambient_n_per_axis: Option<usize>,
}

fn default_halfwidth() -> f64 {
    12.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            halfwidth: default_halfwidth(),
            n_per_axis: None,
            ambient_n_per_axis: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    Kernel,
    Envelope,
    Ma,
    VolumeReport,
    Report,
}

impl Artifact {
    pub const ALL: [Artifact; 5] = [
        Artifact::Kernel,
        Artifact::Envelope,
        Artifact::Ma,
        Artifact::VolumeReport,
        Artifact::Report,
    ];

    pub fn file_name(&self) -> &'static str {
        match self {
            Artifact::Kernel => "kernel.csv",
            Artifact::Envelope => "envelope.csv",
            Artifact::Ma => "ma.csv",
            Artifact::VolumeReport => "volume_report.csv",
            Artifact::Report => "report.txt",
        }
    }
}

fn all_artifacts() -> Vec<Artifact> {
    Artifact::ALL.to_vec()
}

fn default_m_max() -> u32 {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub polytope: PolytopeSpec,
    #[serde(default = "ambient")]
    pub subvariety: SubvarietySpec,
    #[serde(default = "default_weight")]
    pub weight: WeightSpec,
    #[serde(default)]
    pub grid: GridSpec,
    pub m_list: Vec<u32>,
    #[serde(default = "all_artifacts")]
    pub outputs: Vec<Artifact>,
    #[serde(default)]
    pub seed: u64,
    /// Upper bound on entries of `m_list`.
    #[serde(default = "default_m_max")]
    pub m_max: u32,
}

fn ambient() -> SubvarietySpec {
    SubvarietySpec::Ambient
}

fn default_weight() -> WeightSpec {
    WeightSpec {
        reference: None,
        perturbation: PerturbationSpec::Zero,
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    s.validate()?;
    Ok(s)
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |msg: String| Err(ScenarioError::Validation(msg));
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return invalid(format!("id {:?} must be nonempty and filesystem-safe", self.id));
        }
        if self.m_list.is_empty() {
            return invalid("m_list must be nonempty".into());
        }
        if self.m_list.contains(&0) {
            return invalid("m ≥ 1".into());
        }
        if self.m_list.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("m_list must be strictly increasing".into());
        }
        if let Some(&m) = self.m_list.last() {
            if m > self.m_max {
                return invalid(format!("m = {m} exceeds m_max = {}", self.m_max));
            }
        }
        if !(self.grid.halfwidth > 0.0) {
            return invalid("grid halfwidth must be positive".into());
        }
        for b in self.bumps() {
            if !(b.width > 0.0) || !b.amplitude.is_finite() {
                return invalid("bump width must be positive and amplitude finite".into());
            }
        }
        self.polytope()?;
        Ok(())
    }

    fn bumps(&self) -> &[BumpSpec] {
        match &self.weight.perturbation {
            PerturbationSpec::Bumps { bumps } => bumps,
            _ => &[],
        }
    }

    pub fn polytope(&self) -> Result<MomentPolytope, ScenarioError> {
        let kind = match &self.polytope {
            PolytopeSpec::Interval { a } => PolytopeKind::Interval { a: a.value()? },
            PolytopeSpec::Rectangle { a, b } => PolytopeKind::Rectangle {
                a: a.value()?,
                b: b.value()?,
            },
            PolytopeSpec::Simplex { a } => PolytopeKind::Simplex { a: a.value()? },
        };
        Ok(MomentPolytope::new(kind)?)
    }

    pub fn perturbation(&self) -> Perturbation {
        match &self.weight.perturbation {
            PerturbationSpec::Zero => Perturbation::Zero,
            PerturbationSpec::Bumps { bumps } => Perturbation::Bumps(
                bumps
                    .iter()
                    .map(|b| Bump {
                        amplitude: b.amplitude,
                        center: b.center,
                        width: b.width,
                    })
                    .collect(),
            ),
            PerturbationSpec::Tilt { amount } => Perturbation::Tilt { amount: *amount },
        }
    }

    pub fn build(&self) -> Result<Model, ScenarioError> {
        let polytope = self.polytope()?;
        let kind = match self.subvariety {
            SubvarietySpec::Ambient => SubvarietyKind::Ambient,
            SubvarietySpec::CoordinateCurve { axis } => SubvarietyKind::CoordinateCurve { axis },
            SubvarietySpec::Diagonal => SubvarietyKind::DiagonalCurve,
            SubvarietySpec::LineInP2 => SubvarietyKind::LineInP2,
        };
        let sub = SubvarietyDescriptor::new(kind, polytope.clone())?;
        let (a, b) = polytope.params();
        let reference = match self.weight.reference.as_deref() {
            None => ReferenceKind::for_polytope(&polytope),
            Some("fubini_study") => ReferenceKind::FubiniStudy { a },
            Some("product") => ReferenceKind::Product { a, b },
            Some("simplex") => ReferenceKind::Simplex { a },
            Some(other) => {
                return Err(ScenarioError::Validation(format!("unknown reference {other:?}")));
            }
        };
        let t = self.grid.halfwidth;
        let weight = WeightSymbol::new(reference, self.perturbation(), t);
        let p = sub.p();
        let n = self.grid.n_per_axis.unwrap_or(if p == 1 { 257 } else { 33 });
        let grid = LogGrid::new(p, n, t)?;
        let model = build_model(polytope, sub, weight, grid)?;
        Ok(match self.grid.ambient_n_per_axis {
            Some(n) if !model.subvariety().is_ambient() => model.with_ambient_points(n)?,
            _ => model,
        })
    }

    /// The same scenario with another perturbation (for invariance checks).
    pub fn with_perturbation(&self, g: PerturbationSpec) -> Self {
        let mut s = self.clone();
        s.weight.perturbation = g;
        s
    }
}

const SHIPPED: [(&str, &str); 6] = [
    ("p1_fs", include_str!("../scenarios/p1_fs.json")),
    ("p1_bump", include_str!("../scenarios/p1_bump.json")),
    ("diag_fs", include_str!("../scenarios/diag_fs.json")),
    ("diag_bump", include_str!("../scenarios/diag_bump.json")),
    ("line_p2", include_str!("../scenarios/line_p2.json")),
    ("p2_fs", include_str!("../scenarios/p2_fs.json")),
];

/// The shipped scenarios in a fixed order.
pub fn shipped_scenarios() -> Vec<Scenario> {
    SHIPPED
        .iter()
        .map(|(_, text)| parse_scenario(text).expect("shipped scenarios are valid"))
        .collect()
}

pub fn shipped_scenario(id: &str) -> Option<Scenario> {
    SHIPPED
        .iter()
        .find(|(name, _)| *name == id)
        .map(|(_, text)| parse_scenario(text).expect("shipped scenarios are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"id": "tiny", "polytope": {"kind": "interval", "a": 1}, "m_list": [8]}"#;

    #[test]
    fn minimal_document() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.subvariety, SubvarietySpec::Ambient);
        assert_eq!(s.outputs, Artifact::ALL.to_vec());
        let model = s.build().unwrap();
        assert_eq!(model.grid().n_per_axis(), 257);
    }

    #[test]
    fn rejects_zero_level_and_unknown_keys() {
        let zero = MINIMAL.replace("[8]", "[0]");
        match parse_scenario(&zero) {
            Err(ScenarioError::Validation(msg)) => assert!(msg.contains("m ≥ 1")),
            other => panic!("{other:?}"),
        }
        let extra = MINIMAL.replace("\"id\"", "\"foo\": 1, \"id\"");
        assert!(matches!(parse_scenario(&extra), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn rational_sides_and_mismatched_reference() {
        let half = MINIMAL.replace("\"a\": 1", "\"a\": \"3/2\"");
        let p = parse_scenario(&half).unwrap().polytope().unwrap();
        assert_eq!(p.params().0, 1.5);
        let wrong = MINIMAL.replace("\"m_list\"", "\"weight\": {\"reference\": \"simplex\"}, \"m_list\"");
        assert!(matches!(
            parse_scenario(&wrong).unwrap().build(),
            Err(ScenarioError::Model(Error::NonAmpleReference(_)))
        ));
    }

    #[test]
    fn shipped_set_builds() {
        let all = shipped_scenarios();
        assert_eq!(all.len(), 6);
        for s in &all {
            s.build().unwrap();
        }
    }
}
