//! Scenario execution and report files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::bergman::BergmanLevel;
use crate::envelope::equilibrium_envelope;
use crate::error::Error;
use crate::ma::monge_ampere;
use crate::scenario::{parse_scenario, Artifact, Scenario, ScenarioError};
use crate::volume::assemble;

/// A failed run: exit status and a machine-parsable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunError {
    pub exit_code: i32,
    pub code: String,
    pub message: String,
}

impl RunError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            exit_code: 2,
            code: "IO_OUT_DIR".into(),
            message: format!("{}: {e}", path.display()),
        }
    }

    /// `error=<CODE> <message>` on one line.
    pub fn line(&self) -> String {
        format!("error={} {}", self.code, self.message.replace('\n', " "))
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.line())
    }
}

impl std::error::Error for RunError {}

fn numeric_code(e: &Error) -> &'static str {
    match e {
        Error::InvalidPolytope(_) => "INVALID_POLYTOPE",
        Error::IncompatibleSubvariety { .. } => "INCOMPATIBLE_SUBVARIETY",
        Error::NonAmpleReference(_) => "NON_AMPLE_REFERENCE",
        Error::GridTooCoarse { .. } => "GRID_TOO_COARSE",
        Error::InvalidGrid(_) => "INVALID_GRID",
        Error::Overflow { .. } => "OVERFLOW",
        Error::QuadratureUnderflow { .. } => "QUADRATURE_UNDERFLOW",
        Error::NotPositiveDefinite { .. } => "NOT_POSITIVE_DEFINITE",
        Error::IllConditioned { .. } => "ILL_CONDITIONED",
        Error::LogOfZero { .. } => "LOG_OF_ZERO",
        Error::NotInImage(_) => "NOT_IN_IMAGE",
        Error::HullDegenerate(_) => "HULL_DEGENERATE",
        Error::InsufficientSweep(_) => "INSUFFICIENT_SWEEP",
        Error::Unbounded { .. } => "UNBOUNDED",
        Error::Precondition(_) => "PRECONDITION",
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        // Malformed model descriptions are validation failures.
        let exit_code = match e {
            Error::InvalidPolytope(_)
            | Error::IncompatibleSubvariety { .. }
            | Error::NonAmpleReference(_)
            | Error::GridTooCoarse { .. }
            | Error::InvalidGrid(_) => 3,
            _ => 1,
        };
        Self {
            exit_code,
            code: numeric_code(&e).into(),
            message: e.to_string(),
        }
    }
}

impl From<ScenarioError> for RunError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Parse { .. } => Self {
                exit_code: 3,
                code: "PARSE".into(),
                message: e.to_string(),
            },
            ScenarioError::Validation(_) => Self {
                exit_code: 3,
                code: "VALIDATION".into(),
                message: e.to_string(),
            },
            ScenarioError::Model(inner) => inner.into(),
        }
    }
}

/// Write through a temporary file in the same directory, then rename.
fn write_atomic(dir: &Path, name: &str, body: &str) -> Result<PathBuf, RunError> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, body).map_err(|e| RunError::io(&tmp, e))?;
    fs::rename(&tmp, &target).map_err(|e| RunError::io(&target, e))?;
    Ok(target)
}

fn kernel_csv(rows: &[(u32, crate::bergman::KernelGrid)]) -> String {
    let d = rows.first().map_or(1, |r| r.1.grid.dim());
    let mut out = String::from(if d == 1 { "m,t1,b,log_b\n" } else { "m,t1,t2,b,log_b\n" });
    for (m, k) in rows {
        for i in 0..k.grid.len() {
            let t = k.grid.point(i);
            let _ = write!(out, "{m},");
            for x in &t[..d] {
                let _ = write!(out, "{x:.16e},");
            }
            let _ = writeln!(out, "{:.16e},{:.16e}", k.values[i], k.log_values[i]);
        }
    }
    out
}

/// Run the pipeline and write the requested artifacts into `out_dir`.
/// Returns the written paths.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(out_dir).map_err(|e| RunError::io(out_dir, e))?;
    let probe = out_dir.join(".write_probe");
    fs::write(&probe, b"").map_err(|e| RunError::io(out_dir, e))?;
    let _ = fs::remove_file(&probe);

    let model = scenario.build()?;
    let wants = |a: Artifact| scenario.outputs.contains(&a);
    let mut written = Vec::new();

    let levels: Vec<(u32, BergmanLevel)> = scenario
        .m_list
        .par_iter()
        .map(|&m| Ok((m, BergmanLevel::new(&model, m)?)))
        .collect::<Result<_, Error>>()?;
    if wants(Artifact::Kernel) {
        let rows = levels
            .iter()
            .map(|(m, l)| Ok((*m, l.kernel_grid(&model, model.grid())?)))
            .collect::<Result<Vec<_>, Error>>()?;
        written.push(write_atomic(out_dir, Artifact::Kernel.file_name(), &kernel_csv(&rows))?);
    }
    let env = equilibrium_envelope(&model, true)?;
    if wants(Artifact::Envelope) {
        written.push(write_atomic(out_dir, Artifact::Envelope.file_name(), &env.to_csv())?);
    }
    if wants(Artifact::Ma) {
        let ma = monge_ampere(&env)?;
        written.push(write_atomic(out_dir, Artifact::Ma.file_name(), &ma.to_csv())?);
    }
    if wants(Artifact::VolumeReport) || wants(Artifact::Report) {
        let report = assemble(&scenario.id, &model, &scenario.m_list)?;
        if wants(Artifact::VolumeReport) {
            written.push(write_atomic(out_dir, Artifact::VolumeReport.file_name(), &report.to_csv())?);
        }
        if wants(Artifact::Report) {
            let mut text = report.to_text();
            for (m, l) in &levels {
                let _ = writeln!(text, "image_dims[{m}]={}", l.image_dims());
                let _ = writeln!(text, "trace[{m}]={}", l.trace());
            }
            written.push(write_atomic(out_dir, Artifact::Report.file_name(), &text)?);
        }
    }
    Ok(written)
}

/// Parse a scenario file and run it.
pub fn run_file(path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError {
        exit_code: 2,
        code: "IO_SCENARIO".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    let scenario = parse_scenario(&text)?;
    run(&scenario, out_dir)
}

/// Every scenario into its own subdirectory, in parallel. Results keep the
/// input order.
pub fn sweep(scenarios: &[Scenario], out_dir: &Path) -> Vec<(String, Result<Vec<PathBuf>, RunError>)> {
    scenarios
        .par_iter()
        .map(|s| (s.id.clone(), run(s, &out_dir.join(&s.id))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::shipped_scenario;

    #[test]
    fn error_codes() {
        let e: RunError = Error::NonAmpleReference("x".into()).into();
        assert_eq!(e.exit_code, 3);
        let e: RunError = Error::Unbounded { c: 1e13 }.into();
        assert_eq!((e.exit_code, e.code.as_str()), (1, "UNBOUNDED"));
        assert!(e.line().starts_with("error=UNBOUNDED "));
        let e: RunError = ScenarioError::Validation("m ≥ 1".into()).into();
        assert_eq!(e.exit_code, 3);
    }

    #[test]
    fn unwritable_out_dir() {
        let s = shipped_scenario("p1_fs").unwrap();
        let file = std::env::temp_dir().join(format!("tbk-not-a-dir-{}", std::process::id()));
        fs::write(&file, b"x").unwrap();
        let err = run(&s, &file.join("sub")).unwrap_err();
        fs::remove_file(&file).unwrap();
        assert_eq!((err.exit_code, err.code.as_str()), (2, "IO_OUT_DIR"));
    }
}
