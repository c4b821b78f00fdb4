//! Restricted volumes from dimension counts, Monge-Ampere masses and the
//! Bergman potentials, assembled into one report.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::bergman::{potential_from_kernel, BergmanLevel};
use crate::envelope::{envelope_of_samples, equilibrium_envelope, pullback, EnvelopeGrid};
use crate::error::{Error, Result};
use crate::geometry::Model;
use crate::ma::monge_ampere;
use crate::scenario::{Scenario, ScenarioError};
use crate::sections::dimension_sweep;

/// Relative tolerance of the three-way agreement flag.
pub const AGREEMENT_TOL: f64 = 1e-6;
/// Largest acceptable fundamental-inequality constant.
pub const C_LIMIT: f64 = 1e12;

fn factorial(p: usize) -> u64 {
    (1..=p as u64).product()
}

/// Exact least-squares leading coefficient of `dims` against `1, m, …, mᵖ`,
/// times `p!`.
pub fn volume_from_dims_exact(dims: &[(u32, u64)], p: usize) -> Result<BigRational> {
    if dims.len() < 3 || dims.len() < p + 1 {
        return Err(Error::InsufficientSweep(format!("{} levels, need at least 3", dims.len())));
    }
    let top = dims.iter().map(|d| d.0).max().unwrap_or(0);
    if top < 32 {
        return Err(Error::InsufficientSweep(format!("largest m is {top}, need at least 32")));
    }
    let k = p + 1;
    let q = |x: u64| BigRational::from_integer(BigInt::from(x));
    let rows: Vec<Vec<BigRational>> = dims
        .iter()
        .map(|(m, _)| (0..k).map(|j| q(u64::from(*m).pow(j as u32))).collect())
        .collect();
    // Normal equations [AᵀA | Aᵀy].
    let mut a: Vec<Vec<BigRational>> = (0..k)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..k)
                .map(|j| rows.iter().fold(BigRational::zero(), |s, r| s + &r[i] * &r[j]))
                .collect();
            row.push(rows.iter().zip(dims).fold(BigRational::zero(), |s, (r, d)| s + &r[i] * q(d.1)));
            row
        })
        .collect();
    for c in 0..k {
        let piv = (c..k)
            .find(|&r| !a[r][c].is_zero())
            .ok_or_else(|| Error::InsufficientSweep("levels do not determine the fit".into()))?;
        a.swap(c, piv);
        let inv = BigRational::one() / &a[c][c];
        for x in a[c].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..k {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in c..=k {
                    let sub = &f * &a[c][j];
                    a[r][j] -= sub;
                }
            }
        }
    }
    Ok(&a[p][k] * q(factorial(p)))
}

pub fn volume_from_dims(dims: &[(u32, u64)], p: usize) -> Result<f64> {
    let v = volume_from_dims_exact(dims, p)?;
    v.to_f64()
        .ok_or_else(|| Error::Precondition("volume does not fit in f64".into()))
}

/// `u_m = ι*u + log(B)/m` on the grid of `Z`.
pub fn bergman_potential(model: &Model, m: u32) -> Result<Vec<f64>> {
    let level = BergmanLevel::new(model, m)?;
    let kernel = level.kernel_grid(model, model.grid())?;
    potential_from_kernel(model, &kernel)
}

/// Total Monge-Ampere mass of the slope-constrained hull of `u_m`.
pub fn moving_intersection(model: &Model, m: u32) -> Result<f64> {
    let u_m = bergman_potential(model, m)?;
    let env = envelope_of_samples(model.grid(), &u_m, &model.subvariety().restricted_slopes())?;
    Ok(monge_ampere(&env)?.total)
}

/// Smallest `C ≥ 1` with `C⁻¹ e^{-m(u-Pφ)} ≤ B ≤ C mᵖ e^{-m(u-Pφ)}` on the
/// inner half-grid, and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalFit {
    pub c: f64,
    pub log_c: f64,
    pub at_m: u32,
    pub at_t: [f64; 2],
}

pub fn fundamental_inequality_probe(model: &Model, env: &EnvelopeGrid, m_list: &[u32]) -> Result<FundamentalFit> {
    if env.grid != *model.grid() {
        return Err(Error::Precondition("envelope must live on the grid of Z".into()));
    }
    let p = model.p() as f64;
    let fits: Vec<FundamentalFit> = m_list
        .par_iter()
        .map(|&m| {
            let level = BergmanLevel::new(model, m)?;
            let kernel = level.kernel_grid(model, model.grid())?;
            let mf = f64::from(m);
            let mut best = FundamentalFit {
                c: 1.0,
                log_c: 0.0,
                at_m: m,
                at_t: [0.0; 2],
            };
            for k in (0..env.grid.len()).filter(|&k| env.grid.in_inner_half(k)) {
                let r = kernel.log_values[k] + mf * (env.samples[k] - env.values[k]);
                let need = f64::max(r - p * mf.ln(), -r);
                if need > best.log_c {
                    best.log_c = need;
                    best.at_t = env.grid.point(k);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut best = fits
        .into_iter()
        .fold(None, |acc: Option<FundamentalFit>, f| match acc {
            Some(a) if a.log_c >= f.log_c => Some(a),
            _ => Some(f),
        })
        .ok_or_else(|| Error::Precondition("empty m_list".into()))?;
    best.c = best.log_c.exp();
    if !(best.c <= C_LIMIT) {
        return Err(Error::Unbounded { c: best.c });
    }
    Ok(best)
}

/// Restricted MA volumes of two weights and their relative gap.
pub fn invariance_check(a: &Model, b: &Model) -> Result<(f64, f64, f64)> {
    if a.polytope() != b.polytope() || a.subvariety() != b.subvariety() {
        return Err(Error::Precondition("models differ beyond the weight".into()));
    }
    let va = monge_ampere(&equilibrium_envelope(a, true)?)?.total;
    let vb = monge_ampere(&equilibrium_envelope(b, true)?)?.total;
    Ok((va, vb, (va - vb).abs() / va.abs().max(f64::MIN_POSITIVE)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgreementFlags {
    pub three_way: bool,
    pub moving_converges: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeReport {
    pub scenario_id: String,
    pub p: usize,
    pub dims: Vec<(u32, u64)>,
    pub vol_from_dims: f64,
    pub vol_from_ma_restricted: f64,
    pub vol_from_ma_ambient_pullback: f64,
    pub moving: Vec<(u32, f64)>,
    pub fitted_c: FundamentalFit,
    pub flags: AgreementFlags,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Levels used for the dimension fit, merged with the scenario's own.
const DIM_LEVELS: [u32; 7] = [1, 2, 4, 8, 16, 32, 64];

/// `ι*P_Xφ` on the grid of `Z`, re-hulled under the restricted slopes.
pub fn ambient_pullback_envelope(model: &Model) -> Result<EnvelopeGrid> {
    let ambient = equilibrium_envelope(model, false)?;
    let pulled = pullback(model, &ambient);
    envelope_of_samples(model.grid(), &pulled, &model.subvariety().restricted_slopes())
}

pub fn assemble(id: &str, model: &Model, m_list: &[u32]) -> Result<VolumeReport> {
    let mut levels: Vec<u32> = DIM_LEVELS.iter().chain(m_list).copied().collect();
    levels.sort_unstable();
    levels.dedup();
    let dims: Vec<(u32, u64)> = dimension_sweep(model.polytope(), model.subvariety(), &levels)?
        .into_iter()
        .map(|(m, _, img)| (m, img))
        .collect();
    let p = model.p();
    let vol_from_dims = volume_from_dims(&dims, p)?;

    let env = equilibrium_envelope(model, true)?;
    let vol_from_ma_restricted = monge_ampere(&env)?.total;
    let vol_from_ma_ambient_pullback = if model.subvariety().is_ambient() {
        vol_from_ma_restricted
    } else {
        monge_ampere(&ambient_pullback_envelope(model)?)?.total
    };

    let moving: Vec<(u32, f64)> = m_list
        .par_iter()
        .map(|&m| Ok((m, moving_intersection(model, m)?)))
        .collect::<Result<_>>()?;
    let probe_levels: Vec<u32> = {
        let big: Vec<u32> = m_list.iter().copied().filter(|&m| m >= 8).collect();
        if big.is_empty() {
            m_list.to_vec()
        } else {
            big
        }
    };
    let fitted_c = fundamental_inequality_probe(model, &env, &probe_levels)?;

    let three_way = rel(vol_from_ma_restricted, vol_from_dims) < AGREEMENT_TOL
        && rel(vol_from_ma_ambient_pullback, vol_from_dims) < AGREEMENT_TOL
        && rel(vol_from_ma_restricted, vol_from_ma_ambient_pullback) < AGREEMENT_TOL;
    let errs: Vec<f64> = moving.iter().map(|(_, v)| (v - vol_from_dims).abs()).collect();
    let moving_converges =
        errs.windows(2).all(|w| w[1] <= w[0] + 1e-12) && errs.last().is_some_and(|e| *e < 1e-3);
    Ok(VolumeReport {
        scenario_id: id.to_string(),
        p,
        dims,
        vol_from_dims,
        vol_from_ma_restricted,
        vol_from_ma_ambient_pullback,
        moving,
        fitted_c,
        flags: AgreementFlags {
            three_way,
            moving_converges,
        },
    })
}

pub fn assemble_report(scenario: &Scenario) -> std::result::Result<VolumeReport, ScenarioError> {
    let model = scenario.build()?;
    Ok(assemble(&scenario.id, &model, &scenario.m_list)?)
}

impl VolumeReport {
    /// One `quantity,m,value` row per number.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,m,value\n");
        for (m, d) in &self.dims {
            let _ = writeln!(out, "image_dim,{m},{d}");
        }
        let _ = writeln!(out, "vol_from_dims,,{:.16e}", self.vol_from_dims);
        let _ = writeln!(out, "vol_from_ma_restricted,,{:.16e}", self.vol_from_ma_restricted);
        let _ = writeln!(out, "vol_from_ma_ambient_pullback,,{:.16e}", self.vol_from_ma_ambient_pullback);
        for (m, v) in &self.moving {
            let _ = writeln!(out, "moving,{m},{v:.16e}");
        }
        let _ = writeln!(out, "fitted_c,{},{:.16e}", self.fitted_c.at_m, self.fitted_c.c);
        out
    }

    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario={}", self.scenario_id);
        let _ = writeln!(out, "p={}", self.p);
        let _ = writeln!(out, "vol_from_dims={}", self.vol_from_dims);
        let _ = writeln!(out, "vol_from_ma_restricted={}", self.vol_from_ma_restricted);
        let _ = writeln!(out, "vol_from_ma_ambient_pullback={}", self.vol_from_ma_ambient_pullback);
        for (m, v) in &self.moving {
            let _ = writeln!(out, "moving[{m}]={v}");
        }
        let _ = writeln!(out, "fitted_c={}", self.fitted_c.c);
        let _ = writeln!(
            out,
            "fitted_c_at=m{}:({},{})",
            self.fitted_c.at_m, self.fitted_c.at_t[0], self.fitted_c.at_t[1]
        );
        let _ = writeln!(out, "three_way_agreement={}", self.flags.three_way);
        let _ = writeln!(out, "moving_converges={}", self.flags.moving_converges);
        out
    }
}
