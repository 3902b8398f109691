//! CSV tables behind the ΔT and u curves.
//!
//! Temperatures are written in °C (ΔT and u are differences, so K and °C
//! agree). Numbers use `%g`-style formatting with 6 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::radiometry::kelvin_to_celsius;

use super::{ParameterName, SweepResult, TubeBudget};

pub const SWEEP_HEADER: &str = "model,parameter,tube_temp_C,param_value,delta_T_C";
pub const BUDGET_HEADER: &str = "model,tube_temp_C,parameter,u_C,u_c_C,k,U_C";

/// Formats like C's `%.6g`.
pub fn format_sig6(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub model: ModelKind,
    pub parameter: ParameterName,
    pub tube_temp_c: f64,
    pub param_value: f64,
    pub delta_t_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRecord {
    pub model: ModelKind,
    pub tube_temp_c: f64,
    pub parameter: String,
    pub u_c: f64,
    pub combined_uc_c: f64,
    pub k: f64,
    pub expanded_u_c: f64,
}

fn display_value(p: ParameterName, v: f64) -> f64 {
    if p.is_temperature() {
        kelvin_to_celsius(v)
    } else {
        v
    }
}

pub fn sweep_records(sweeps: &[SweepResult]) -> Vec<SweepRecord> {
    let mut out = Vec::new();
    for s in sweeps {
        let p = s.parameter.name;
        for (i, &ts) in s.tube_temps.iter().enumerate() {
            for (j, &v) in s.grid.iter().enumerate() {
                out.push(SweepRecord {
                    model: s.model,
                    parameter: p,
                    tube_temp_c: kelvin_to_celsius(ts),
                    param_value: display_value(p, v),
                    delta_t_c: s.delta_t[i][j],
                });
            }
        }
    }
    out
}

pub fn budget_records(budgets: &[TubeBudget]) -> Vec<BudgetRecord> {
    let mut out = Vec::new();
    for tb in budgets {
        for (name, &u) in &tb.budget.per_parameter_u {
            out.push(BudgetRecord {
                model: tb.model,
                tube_temp_c: kelvin_to_celsius(tb.tube_temp),
                parameter: name.clone(),
                u_c: u,
                combined_uc_c: tb.budget.combined_uc,
                k: tb.budget.coverage_k,
                expanded_u_c: tb.budget.expanded_u,
            });
        }
    }
    out
}

pub fn sweep_csv(sweeps: &[SweepResult]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in sweep_records(sweeps) {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.model,
            r.parameter,
            format_sig6(r.tube_temp_c),
            format_sig6(r.param_value),
            format_sig6(r.delta_t_c)
        ));
    }
    s
}

pub fn budget_csv(budgets: &[TubeBudget]) -> String {
    let mut s = String::from(BUDGET_HEADER);
    s.push('\n');
    for r in budget_records(budgets) {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.model,
            format_sig6(r.tube_temp_c),
            r.parameter,
            format_sig6(r.u_c),
            format_sig6(r.combined_uc_c),
            format_sig6(r.k),
            format_sig6(r.expanded_u_c)
        ));
    }
    s
}

pub fn write_sweep_csv(sweeps: &[SweepResult], path: &Path) -> Result<()> {
    fs::write(path, sweep_csv(sweeps)).map_err(|e| Error::io(path, e))
}

pub fn write_budget_csv(budgets: &[TubeBudget], path: &Path) -> Result<()> {
    fs::write(path, budget_csv(budgets)).map_err(|e| Error::io(path, e))
}

/// Writes `sweep.csv` and `budget.csv` into `dir`, creating it if needed.
pub fn emit_sweep_report(
    sweeps: &[SweepResult],
    budgets: &[TubeBudget],
    dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let sweep_path = dir.join("sweep.csv");
    let budget_path = dir.join("budget.csv");
    write_sweep_csv(sweeps, &sweep_path)?;
    write_budget_csv(budgets, &budget_path)?;
    Ok((sweep_path, budget_path))
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (u64, Vec<&'a str>)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == header => {}
        _ => {
            return Err(Error::Parse {
                offset: 0,
                message: format!("expected header {header:?}"),
            })
        }
    }
    let mut offset = text.find('\n').map_or(text.len(), |i| i + 1) as u64;
    Ok(lines.map(move |l| {
        let at = offset;
        offset += l.len() as u64 + 1;
        (at, l.split(',').collect())
    }))
}

fn num(field: &str, offset: u64) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::Parse {
        offset,
        message: format!("not a number: {field:?}"),
    })
}

fn want_fields(fields: &[&str], n: usize, offset: u64) -> Result<()> {
    if fields.len() != n {
        return Err(Error::Parse {
            offset,
            message: format!("expected {n} fields, found {}", fields.len()),
        });
    }
    Ok(())
}

pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRecord>> {
    rows(text, SWEEP_HEADER)?
        .map(|(off, f)| {
            want_fields(&f, 5, off)?;
            Ok(SweepRecord {
                model: f[0].parse()?,
                parameter: f[1].parse()?,
                tube_temp_c: num(f[2], off)?,
                param_value: num(f[3], off)?,
                delta_t_c: num(f[4], off)?,
            })
        })
        .collect()
}

pub fn read_budget_csv(text: &str) -> Result<Vec<BudgetRecord>> {
    rows(text, BUDGET_HEADER)?
        .map(|(off, f)| {
            want_fields(&f, 7, off)?;
            Ok(BudgetRecord {
                model: f[0].parse()?,
                tube_temp_c: num(f[1], off)?,
                parameter: f[2].to_string(),
                u_c: num(f[3], off)?,
                combined_uc_c: num(f[4], off)?,
                k: num(f[5], off)?,
                expanded_u_c: num(f[6], off)?,
            })
        })
        .collect()
}
