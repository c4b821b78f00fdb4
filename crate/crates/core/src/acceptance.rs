//! The acceptance criteria as executable checks. Each check reports the
//! numbers it compared, so a failure is diagnosable from one line.

use std::time::Instant;

use rayon::prelude::*;

use crate::bergman::{extension_report, BergmanLevel};
use crate::envelope::{bergman_iteration_limit, equilibrium_envelope, regularity_probe, EnvelopeGrid};
use crate::error::Result;
use crate::geometry::Model;
use crate::ma::{monge_ampere, representation_residual, shipped_test_functions, weak_compare};
use crate::scenario::{shipped_scenario, shipped_scenarios, PerturbationSpec, Scenario};
use crate::sections::{dimension_sweep, restriction_map, section_basis};
use crate::volume::{
    ambient_pullback_envelope, fundamental_inequality_probe, invariance_check, moving_intersection,
    volume_from_dims_exact,
};

pub const DYADIC: [u32; 7] = [1, 2, 4, 8, 16, 32, 64];

/// Criteria whose pinned thresholds the implementation does not meet. They
/// are still computed and reported.
pub const KNOWN_FAILURES: [u8; 2] = [4, 9];

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub number: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} ({}): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.number,
            self.name,
            self.detail
        )
    }
}

fn outcome(number: u8, name: &'static str, r: Result<(bool, String)>) -> Outcome {
    match r {
        Ok((pass, detail)) => Outcome {
            number,
            name,
            pass,
            detail,
        },
        Err(e) => Outcome {
            number,
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn model(id: &str) -> Result<Model> {
    let s = shipped_scenario(id).expect("shipped scenario");
    s.build().map_err(|e| match e {
        crate::scenario::ScenarioError::Model(e) => e,
        other => crate::Error::Precondition(other.to_string()),
    })
}

fn build(s: &Scenario) -> Result<Model> {
    s.build().map_err(|e| match e {
        crate::scenario::ScenarioError::Model(e) => e,
        other => crate::Error::Precondition(other.to_string()),
    })
}

fn bump_model_at(n: usize) -> Result<Model> {
    let mut s = shipped_scenario("p1_bump").expect("shipped scenario");
    s.grid.n_per_axis = Some(n);
    build(&s)
}

pub fn trace_identity() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let start = Instant::now();
        let mut worst = (0.0f64, String::new());
        for s in shipped_scenarios() {
            let model = build(&s)?;
            let errs: Vec<(u32, f64)> = DYADIC
                .par_iter()
                .map(|&m| {
                    let level = BergmanLevel::new(&model, m)?;
                    let dims = level.image_dims() as f64;
                    Ok((m, (level.trace() - dims).abs() / dims))
                })
                .collect::<Result<_>>()?;
            for (m, e) in errs {
                if e >= worst.0 {
                    worst = (e, format!("{} m={m}", s.id));
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst.0 < 1e-8 && secs < 60.0,
            format!("max relative error {:.3e} at {}; {secs:.1} s", worst.0, worst.1),
        ))
    };
    outcome(1, "trace identity", run())
}

pub fn constant_kernel() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let model = model("p1_fs")?;
        let errs: Vec<f64> = (1..=64u32)
            .into_par_iter()
            .map(|m| {
                let k = BergmanLevel::new(&model, m)?.kernel_grid(&model, model.grid())?;
                let want = f64::from(m) + 1.0;
                Ok(k.values.iter().map(|b| (b - want).abs()).fold(0.0, f64::max))
            })
            .collect::<Result<_>>()?;
        let worst = errs.iter().cloned().fold(0.0, f64::max);
        Ok((worst < 1e-6, format!("sup |B - (m+1)| = {worst:.3e} over m = 1..64")))
    };
    outcome(2, "constant kernel", run())
}

pub fn main_convergence() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let model = model("p1_bump")?;
        let ma = monge_ampere(&equilibrium_envelope(&model, true)?)?;
        let tests = shipped_test_functions();
        let g8 = weak_compare(&BergmanLevel::new(&model, 8)?, &ma, &tests);
        let g64 = weak_compare(&BergmanLevel::new(&model, 64)?, &ma, &tests);
        let pass = g8.iter().zip(&g64).all(|(a, b)| b < a && *b < 0.05 * ma.total);
        let worst = g64.iter().cloned().fold(0.0, f64::max);
        let ratio = g8.iter().zip(&g64).map(|(a, b)| b / a).fold(0.0, f64::max);
        Ok((
            pass,
            format!("max gap(64) = {worst:.3e} (total {:.3}); max gap(64)/gap(8) = {ratio:.3}", ma.total),
        ))
    };
    outcome(3, "main convergence", run())
}

pub fn fundamental_inequality() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let mut pass = true;
        let mut notes = Vec::new();
        for s in shipped_scenarios() {
            let model = build(&s)?;
            let env = equilibrium_envelope(&model, true)?;
            let full = fundamental_inequality_probe(&model, &env, &[8, 16, 32, 64])?;
            let early = fundamental_inequality_probe(&model, &env, &[8, 16, 32])?;
            let change = (full.c - early.c).abs() / early.c;
            let ok = full.c <= 1e6 && change < 0.1;
            pass &= ok;
            notes.push(format!("{} C={:.4} Δ={:.1}%", s.id, full.c, 100.0 * change));
        }
        Ok((pass, notes.join("; ")))
    };
    outcome(4, "fundamental inequality", run())
}

pub fn triple_identity() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let cases = [("diag_fs", 2), ("diag_bump", 2), ("line_p2", 1), ("p1_fs", 1), ("p2_fs", 1)];
        let mut pass = true;
        let mut notes = Vec::new();
        for (id, want) in cases {
            let model = model(id)?;
            let dims: Vec<(u32, u64)> = dimension_sweep(model.polytope(), model.subvariety(), &DYADIC)?
                .into_iter()
                .map(|(m, _, img)| (m, img))
                .collect();
            let exact = volume_from_dims_exact(&dims, model.p())?;
            let restricted = monge_ampere(&equilibrium_envelope(&model, true)?)?.total;
            let pulled = if model.subvariety().is_ambient() {
                restricted
            } else {
                monge_ampere(&ambient_pullback_envelope(&model)?)?.total
            };
            let w = f64::from(want);
            let ok = exact == num_rational::BigRational::from_integer(want.into())
                && (restricted - w).abs() < 1e-6
                && (pulled - w).abs() < 1e-6;
            pass &= ok;
            notes.push(format!("{id} {exact}/{restricted:.9}/{pulled:.9}"));
        }
        Ok((pass, notes.join("; ")))
    };
    outcome(5, "restricted-volume triple identity", run())
}

pub fn representation_formula() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let coarse = bump_model_at(257)?;
        let fine = bump_model_at(513)?;
        let env_c = equilibrium_envelope(&coarse, true)?;
        let env_f = equilibrium_envelope(&fine, true)?;
        let total = monge_ampere(&env_c)?.total;
        let (off, gap_c) = representation_residual(&env_c, &coarse)?;
        let (_, gap_f) = representation_residual(&env_f, &fine)?;
        let factor = gap_f / gap_c;
        Ok((
            off < 1e-8 * total && factor <= 0.6,
            format!("off-contact mass {off:.3e}; gap {gap_c:.3e} -> {gap_f:.3e} (factor {factor:.3})"),
        ))
    };
    outcome(6, "representation formula", run())
}

pub fn envelope_convergence() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let model = model("p1_bump")?;
        let env = equilibrium_envelope(&model, true)?;
        let levels = [8, 16, 32, 64];
        let dist = bergman_iteration_limit(&model, &env, &levels)?;
        let fit = fundamental_inequality_probe(&model, &env, &levels)?;
        let decreasing = dist.windows(2).all(|w| w[1].1 < w[0].1);
        let p = model.p() as f64;
        let bound = (fit.log_c + p * 64f64.ln()) / 64.0;
        let last = dist[dist.len() - 1].1;
        let seq: Vec<String> = dist.iter().map(|(m, d)| format!("{m}:{d:.4e}")).collect();
        Ok((
            decreasing && last <= bound,
            format!("{}; bound at 64 = {bound:.4e}", seq.join(" ")),
        ))
    };
    outcome(7, "envelope convergence", run())
}

pub fn regularity() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let values: Vec<f64> = [257, 513, 1025]
            .iter()
            .map(|&n| Ok(regularity_probe(&equilibrium_envelope(&bump_model_at(n)?, true)?).0))
            .collect::<Result<_>>()?;
        let ratio = values[2] / values[0];
        Ok((
            ratio <= 1.5,
            format!("max |D²| {:.4} / {:.4} / {:.4}; ratio {ratio:.3}", values[0], values[1], values[2]),
        ))
    };
    outcome(8, "regularity proxy", run())
}

pub fn extension_boundedness() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let model = model("diag_fs")?;
        let norms: Vec<(u32, f64)> = [4u32, 8, 16, 32, 64]
            .par_iter()
            .map(|&m| {
                let rmap = restriction_map(&section_basis(model.polytope(), m)?, model.subvariety())?;
                Ok((m, extension_report(&model, &rmap, m)?.operator_norm))
            })
            .collect::<Result<_>>()?;
        let vals: Vec<f64> = norms.iter().map(|v| v.1).collect();
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let earlier = vals[..vals.len() - 1].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let last = vals[vals.len() - 1];
        let ok = max / min < 10.0 && last <= 1.2 * earlier;
        let seq: Vec<String> = norms.iter().map(|(m, v)| format!("{m}:{v:.4}")).collect();
        Ok((ok, format!("{}; max/min {:.3}", seq.join(" "), max / min)))
    };
    outcome(9, "extension-operator boundedness", run())
}

pub fn numerical_invariance() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let mut worst = 0.0f64;
        for id in ["diag_fs", "p1_fs", "line_p2"] {
            let s = shipped_scenario(id).expect("shipped scenario");
            let a = build(&s)?;
            for g in [
                PerturbationSpec::Tilt { amount: 0.3 },
                PerturbationSpec::Bumps {
                    bumps: vec![crate::scenario::BumpSpec {
                        amplitude: 0.25,
                        center: [0.5, -0.5],
                        width: 1.5,
                    }],
                },
            ] {
                let b = build(&s.with_perturbation(g))?;
                worst = worst.max(invariance_check(&a, &b)?.2);
            }
        }
        let a = model("diag_fs")?;
        let b = model("diag_bump")?;
        worst = worst.max(invariance_check(&a, &b)?.2);
        Ok((worst < 1e-6, format!("max relative gap {worst:.3e}")))
    };
    outcome(10, "numerical invariance", run())
}

pub fn moving_intersection_sweep() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let mut pass = true;
        let mut worst = 0.0f64;
        for s in shipped_scenarios() {
            let model = build(&s)?;
            let vol = model.subvariety().restricted_slopes().normalized_volume();
            let errs: Vec<f64> = DYADIC
                .par_iter()
                .map(|&m| Ok((moving_intersection(&model, m)? - vol).abs()))
                .collect::<Result<_>>()?;
            let monotone = errs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            let last = errs[errs.len() - 1];
            pass &= monotone && last < 1e-3;
            worst = worst.max(last);
        }
        Ok((pass, format!("max |moving(64) - vol| = {worst:.3e}")))
    };
    outcome(11, "moving intersection", run())
}

fn mass_error(env: &EnvelopeGrid) -> Result<f64> {
    let want = env.domain.normalized_volume();
    Ok((monge_ampere(env)?.total - want).abs() / want)
}

pub fn mass_conservation() -> Outcome {
    let run = || -> Result<(bool, String)> {
        let mut worst = (0.0f64, String::new());
        let mut check = |label: String, env: &EnvelopeGrid| -> Result<()> {
            let e = mass_error(env)?;
            if e >= worst.0 {
                worst = (e, label);
            }
            Ok(())
        };
        for s in shipped_scenarios() {
            let model = build(&s)?;
            check(format!("{} restricted", s.id), &equilibrium_envelope(&model, true)?)?;
            check(format!("{} ambient", s.id), &equilibrium_envelope(&model, false)?)?;
            if !model.subvariety().is_ambient() {
                check(format!("{} pullback", s.id), &ambient_pullback_envelope(&model)?)?;
            }
        }
        for n in [513, 1025] {
            check(format!("p1_bump n={n}"), &equilibrium_envelope(&bump_model_at(n)?, true)?)?;
        }
        Ok((worst.0 < 1e-6, format!("max relative error {:.3e} ({})", worst.0, worst.1)))
    };
    outcome(12, "mass conservation", run())
}

/// All twelve criteria in order.
pub fn run_all() -> Vec<Outcome> {
    vec![
        trace_identity(),
        constant_kernel(),
        main_convergence(),
        fundamental_inequality(),
        triple_identity(),
        representation_formula(),
        envelope_convergence(),
        regularity(),
        extension_boundedness(),
        numerical_invariance(),
        moving_intersection_sweep(),
        mass_conservation(),
    ]
}
