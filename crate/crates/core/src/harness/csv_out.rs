use std::io::Write;

use super::{ConvergenceRecord, InfSupRecord};
use crate::error::Result;

pub const CONVERGENCE_HEADER: [&str; 15] = [
    "family", "level", "h", "n_el", "ell", "m", "gamma_v", "gamma_p", "err_u_L2", "err_u_DG",
    "err_p_L2", "err_p_jump", "eoc_u_L2", "eoc_u_DG", "eoc_p_L2",
];

pub const INFSUP_HEADER: [&str; 12] = [
    "family", "level", "h", "n_el", "ell", "m", "k", "eta", "gamma_v", "gamma_p", "theta", "beta_h",
];

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

pub fn write_convergence_csv(records: &[ConvergenceRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONVERGENCE_HEADER)?;
    for r in records {
        let e = &r.errors;
        let eoc = |i: usize| opt_real(r.eoc.map(|v| v[i]));
        w.write_record([
            r.family.clone(),
            r.level.to_string(),
            fmt_real(e.h),
            r.n_el.to_string(),
            r.ell.to_string(),
            r.m.to_string(),
            fmt_real(r.gamma_v),
            fmt_real(r.gamma_p),
            fmt_real(e.err_u_l2),
            fmt_real(e.err_u_dg),
            fmt_real(e.err_p_l2),
            fmt_real(e.err_p_jump),
            eoc(0),
            eoc(1),
            eoc(2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_infsup_csv(records: &[InfSupRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(INFSUP_HEADER)?;
    for r in records {
        w.write_record([
            r.family.clone(),
            r.level.to_string(),
            fmt_real(r.h),
            r.n_el.to_string(),
            r.ell.to_string(),
            r.m.to_string(),
            r.k.to_string(),
            r.eta.to_string(),
            fmt_real(r.gamma_v),
            fmt_real(r.gamma_p),
            opt_real(r.theta),
            fmt_real(r.beta_h),
        ])?;
    }
    w.flush()?;
    Ok(())
}
