//! CSV and JSON emission. Floats in CSV use `{:.16e}` (17 significant
//! digits, round-trip exact); JSON uses serde_json's shortest round-trip
//! form. Nothing here depends on map iteration order or the clock unless
//! timings are requested.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use shadowlab_core::analysis::ErrorSeries;
use shadowlab_core::fullsolve::FullTrajectory;
use shadowlab_core::shadow::ShadowTrajectory;
use shadowlab_core::stability::{
    BoundSource, DissipativityVerdict, EvolutionFit, ProbeNorm, Subsystem, C64,
};

use crate::runner::{JacobianMode, RateStatus, StabilityRun, Sweep, TruncationRow};

pub const RESULTS_HEADER: &str =
    "epsilon,T,max_sup_U,max_sup_V,max_mean_gap,max_homog,psi_C_v0,psi_C_g,wallclock_ms";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// File-name label for an epsilon, e.g. `1e-2`.
pub fn eps_label(eps: f64) -> String {
    format!("{eps:e}")
}

/// `results.csv`: one line per epsilon in sweep order; failed rows carry
/// `NaN` metrics. `wallclock_ms` is 0 unless `timings` is set.
pub fn results_csv(sweep: &Sweep, timings: bool) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for row in &sweep.rows {
        let values = match &row.outcome {
            Ok(m) => [m.max_sup_u, m.max_sup_v, m.max_mean_gap, m.max_homog, m.psi_fit.c_v0, m.psi_fit.c_g],
            Err(_) => [f64::NAN; 6],
        };
        let _ = write!(out, "{},{}", num(row.epsilon), num(row.horizon));
        for v in values {
            let _ = write!(out, ",{}", num(v));
        }
        let _ = writeln!(out, ",{}", if timings { row.wallclock_ms } else { 0 });
    }
    out
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn rates_json(sweep: &Sweep, alpha: f64, t_cap: f64) -> Value {
    let metrics: serde_json::Map<String, Value> = sweep
        .rates
        .iter()
        .map(|(name, status)| {
            let v = match status {
                RateStatus::Fitted(f) => json!({
                    "status": "fitted",
                    "slope": finite_or_null(f.slope),
                    "intercept": finite_or_null(f.intercept),
                    "r_squared": finite_or_null(f.r_squared),
                    "eps_list": f.eps_list,
                    "err_list": f.err_list,
                }),
                RateStatus::Zero => json!({ "status": "zero", "slope": 0.0, "intercept": 0.0, "r_squared": 0.0 }),
                RateStatus::Skipped(reason) => json!({ "status": "skipped", "reason": reason }),
            };
            (name.to_string(), v)
        })
        .collect();
    let failed: Vec<Value> = sweep
        .rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| json!({ "epsilon": r.epsilon, "error": e })))
        .collect();
    json!({
        "model": sweep.model,
        "alpha": alpha,
        "T_cap": t_cap,
        "metrics": Value::Object(metrics),
        "failed_rows": failed,
    })
}

/// Plot-ready error time series of one row.
pub fn series_csv(series: &ErrorSeries) -> String {
    let mut out = String::from("t,sup_U,sup_V,mean_gap,homog,mean_v\n");
    for k in 0..series.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(series.times[k]),
            num(series.sup_u[k]),
            num(series.sup_v[k]),
            num(series.mean_gap[k]),
            num(series.homog[k]),
            num(series.mean_v[k])
        );
    }
    out
}

/// Means and sup norms of the full solution over time.
pub fn full_csv(traj: &FullTrajectory) -> String {
    let m = traj.states.first().map_or(0, |s| s.u.len());
    let mut out = String::from("t");
    for i in 1..=m {
        let _ = write!(out, ",mean_u{i},sup_u{i}");
    }
    out.push_str(",mean_v,osc_v\n");
    for s in &traj.states {
        out.push_str(&num(s.t));
        for u in &s.u {
            let _ = write!(out, ",{},{}", num(u.mean()), num(u.sup_norm()));
        }
        let mean = s.v.mean();
        let osc = s.v.nodal().iter().fold(0.0f64, |a, x| a.max((x - mean).abs()));
        let _ = writeln!(out, ",{},{}", num(mean), num(osc));
    }
    out
}

pub fn shadow_csv(traj: &ShadowTrajectory) -> String {
    let m = traj.states.first().map_or(0, |s| s.u.len());
    let mut out = String::from("t");
    for i in 1..=m {
        let _ = write!(out, ",mean_u{i},sup_u{i}");
    }
    out.push_str(",v\n");
    for s in &traj.states {
        out.push_str(&num(s.t));
        for u in &s.u {
            let _ = write!(out, ",{},{}", num(u.mean()), num(u.sup_norm()));
        }
        let _ = writeln!(out, ",{}", num(s.v));
    }
    out
}

fn complex_list(points: &[C64]) -> Value {
    Value::Array(points.iter().map(|z| json!([z.re, z.im])).collect())
}

fn verdict_json(v: &DissipativityVerdict) -> Value {
    json!({
        "subsystem": match v.subsystem { Subsystem::Full => "full", Subsystem::OdeOnly => "ode_only" },
        "mu": v.mu,
        "kappa_integral": v.kappa_integral,
        "max_eigenvalue": finite_or_null(v.max_eigenvalue),
        "worst": v.worst.map(|(t, k)| json!({ "t": t, "node": k })),
        "dissipative": v.dissipative,
    })
}

fn fit_json(f: &EvolutionFit) -> Value {
    json!({
        "C": finite_or_null(f.c),
        "rate": finite_or_null(f.rate),
        "growth_detected": f.growth_detected,
        "probe_rates": f.probe_rates.iter().map(|r| finite_or_null(*r)).collect::<Vec<_>>(),
    })
}

pub fn stability_json(run: &StabilityRun, r_exponent: f64) -> Value {
    let r = &run.report;
    let opts = &run.options;
    json!({
        "model": run.model,
        "jacobian": match run.mode { JacobianMode::Trajectory => "trajectory", JacobianMode::FinalState => "final_state" },
        "diffusion": run.diffusion,
        "probe": {
            "probe_count": opts.evolution.probe_count,
            "T_probe": opts.evolution.t_probe,
            "dt": opts.evolution.dt,
            "p_norm": match opts.evolution.norm { ProbeNorm::Sup => "inf", ProbeNorm::L2 => "2" },
            "r_exponent": r_exponent,
            "seed": opts.evolution.seed,
        },
        "sigma_A": {
            "points": complex_list(&r.sigma_a.points),
            "re_min": r.sigma_a.re_min,
            "re_max": r.sigma_a.re_max,
            "fattening": r.sigma_a.fattening,
        },
        "Sigma": r.sigma.as_deref().map(complex_list),
        "spectral_bound": r.spectral_bound,
        "spectral_bound_source": match r.bound_source {
            BoundSource::Decomposition => "decomposition",
            BoundSource::OperatorMatrix => "operator_matrix",
        },
        "dissipative": { "full": verdict_json(&r.dissipative_full), "ode_only": verdict_json(&r.dissipative_ode) },
        "evolution_fit": fit_json(&r.evolution_fit),
        "ode_fit": r.ode_fit.as_ref().map(fit_json),
        "oracle_gap": r.oracle_gap,
        "jacobian_sup": r.sup_bound,
    })
}

pub fn truncation_json(model: &str, rows: &[(f64, Result<TruncationRow, String>)]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|(eps, row)| match row {
            Ok(t) => json!({
                "epsilon": t.epsilon,
                "T": t.horizon,
                "delta0": t.config.delta0,
                "L": t.config.l,
                "radius": t.config.radius(),
                "truncated_size": t.truncated_size,
                "premise_holds": t.premise_holds,
                "max_difference": t.max_difference,
                "samples": t.samples,
                "remainder_constant": finite_or_null(t.remainder_constant),
            }),
            Err(e) => json!({ "epsilon": eps, "error": e }),
        })
        .collect();
    json!({ "model": model, "rows": rows })
}

pub fn write_json(path: &Path, value: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::{Row, RowMetrics};
    use shadowlab_core::shadow::PsiDecayFit;

    fn sweep() -> Sweep {
        let fit = PsiDecayFit { c_v0: 0.25, c_g: 0.003, lambda1_over_eps: 98.7, residual: 0.0 };
        let ok = RowMetrics { max_sup_u: 0.1, max_sup_v: 1.0 / 3.0, max_mean_gap: 2e-3, max_homog: 5e-4, psi_fit: fit };
        Sweep {
            model: "predator-prey".into(),
            rows: vec![
                Row { epsilon: 0.1, horizon: 20.0, outcome: Ok(ok), series: None, wallclock_ms: 1234 },
                Row { epsilon: 0.01, horizon: 20.0, outcome: Err("blow-up".into()), series: None, wallclock_ms: 5 },
            ],
            rates: crate::runner::fit_rates(&[]),
        }
    }

    #[test]
    fn results_format_is_fixed() {
        let text = results_csv(&sweep(), false);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], RESULTS_HEADER);
        assert_eq!(
            lines[1],
            "1.0000000000000001e-1,2.0000000000000000e1,1.0000000000000001e-1,3.3333333333333331e-1,\
             2.0000000000000000e-3,5.0000000000000001e-4,2.5000000000000000e-1,3.0000000000000001e-3,0"
        );
        assert!(lines[2].starts_with("1.0000000000000000e-2,2.0000000000000000e1,NaN,NaN"));
        assert!(results_csv(&sweep(), true).lines().nth(1).unwrap().ends_with(",1234"));
    }

    #[test]
    fn csv_floats_round_trip() {
        let text = results_csv(&sweep(), false);
        let fields: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields[3], 1.0 / 3.0);
        assert_eq!(fields[0], 0.1);
    }

    #[test]
    fn rates_list_failed_rows() {
        let v = rates_json(&sweep(), 1.0, 50.0);
        assert_eq!(v["failed_rows"][0]["epsilon"], json!(0.01));
        assert_eq!(v["metrics"]["max_sup_U"]["status"], json!("skipped"));
    }

    #[test]
    fn eps_labels() {
        assert_eq!(eps_label(0.01), "1e-2");
        assert_eq!(eps_label(0.003), "3e-3");
    }
}
