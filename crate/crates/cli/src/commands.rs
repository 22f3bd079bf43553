//! Subcommand implementations, writing their reports to any `Write`.

use std::io::Write;
use std::path::Path;

use macalloc::{
    rate_split_analyze, solve, IterationTraceF64, UserSubset, ViolationReport,
    BRUTE_FORCE_MAX_USERS,
};

use crate::error::CliError;
use crate::format::sig12;
use crate::problem::Problem;

const STDOUT: &str = "<stdout>";

fn members(s: &UserSubset) -> String {
    s.iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn rate_scale(bits: bool) -> f64 {
    if bits {
        std::f64::consts::LOG2_E
    } else {
        1.0
    }
}

/// Writes one CSV row per iteration. Rates are scaled to bits when asked.
pub fn write_trace<W: Write>(
    trace: &IterationTraceF64,
    users: usize,
    bits: bool,
    out: W,
) -> csv::Result<()> {
    let scale = rate_scale(bits);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iter".to_string()];
    header.extend((1..=users).map(|i| format!("R_{i}")));
    header.extend(
        [
            "utility",
            "stepsize",
            "grad_norm",
            "violations_pre_projection",
            "projections",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for rec in &trace.records {
        let mut row = vec![rec.iter.to_string()];
        row.extend(rec.rates.iter().map(|r| sig12(r * scale)));
        row.push(sig12(rec.utility));
        row.push(sig12(rec.stepsize));
        row.push(sig12(rec.grad_norm));
        row.push(
            rec.violations_pre_projection
                .map_or(String::new(), |v| v.to_string()),
        );
        row.push(rec.projections.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_solve<W: Write>(
    problem: &Problem,
    trace_path: &Path,
    bits: bool,
    out: &mut W,
) -> Result<(), CliError> {
    let utility = problem
        .utility
        .as_deref()
        .ok_or_else(|| CliError::Validation("solve needs a \"utility\" entry".into()))?;
    let (best, trace) = solve(&problem.config, utility, &problem.rule, &problem.settings)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let file = std::fs::File::create(trace_path).map_err(CliError::io(trace_path))?;
    write_trace(
        &trace,
        problem.config.num_users(),
        bits,
        std::io::BufWriter::new(file),
    )
    .map_err(|e| CliError::Io {
        path: trace_path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;

    let scale = rate_scale(bits);
    let rates: Vec<String> = best.iter().map(|r| sig12(r * scale)).collect();
    writeln!(
        out,
        "utility={} iterations={} rates=[{}] unit={}",
        sig12(trace.best_utility),
        trace.records.len(),
        rates.join(","),
        if bits { "bits" } else { "nats" }
    )
    .map_err(CliError::io(STDOUT))
}

pub fn cmd_check<W: Write>(problem: &Problem, rates: &[f64], out: &mut W) -> Result<(), CliError> {
    let m = problem.config.num_users();
    if rates.len() != m {
        return Err(CliError::Validation(format!(
            "expected {m} --rate values, got {}",
            rates.len()
        )));
    }
    if let Some(i) = rates.iter().position(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(CliError::Validation(format!(
            "rate for user {} must be nonnegative and finite, got {}",
            i + 1,
            rates[i]
        )));
    }
    let report = rate_split_analyze(&problem.config, rates)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let line = match report {
        ViolationReport::Feasible {
            decoding_order,
            spinoff,
            ..
        } => {
            let order: Vec<String> = decoding_order
                .iter()
                .map(|&j| spinoff.users[j].members.to_string())
                .collect();
            format!("FEASIBLE order: {}", order.join(" then "))
        }
        ViolationReport::Violated { subset, slack, .. } => {
            format!("VIOLATED subset: {subset} slack: {}", sig12(slack))
        }
    };
    writeln!(out, "{line}").map_err(CliError::io(STDOUT))
}

pub fn cmd_region<W: Write>(problem: &Problem, out: &mut W) -> Result<(), CliError> {
    let m = problem.config.num_users();
    if m > BRUTE_FORCE_MAX_USERS {
        return Err(CliError::Validation(format!(
            "region lists 2^M - 1 constraints and is limited to {BRUTE_FORCE_MAX_USERS} users, got {m}"
        )));
    }
    let caps = problem
        .config
        .capacity_table()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let mut text = String::from("mask,members,capacity\n");
    for (mask, cap) in caps.iter().enumerate().skip(1) {
        let s = UserSubset::from_mask(mask as u64);
        text.push_str(&format!("{mask},{},{}\n", members(&s), sig12(*cap)));
    }
    out.write_all(text.as_bytes()).map_err(CliError::io(STDOUT))
}
