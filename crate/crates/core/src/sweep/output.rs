//! CSV and JSON writers for sweep results. Floats are written with the
//! shortest round-trip representation, so identical inputs give identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::lindblad::SolverSettings;
use crate::model::{PulsePolicy, SystemParams};

use super::bound::BoundCheck;
use super::pareto::{Family, ParetoScan, BIN_WIDTH};
use super::tradeoff::TradeoffCurve;

pub const CURVE_HEADER: [&str; 4] = ["sigma", "p_ex", "fidelity", "p_pure_ratio"];

pub fn curve_file_name(curve: &TradeoffCurve) -> String {
    format!("curve_{}_S{}.csv", curve.config_label, curve.pulse_area)
}

/// Writes `curve_<label>_S<area>.csv` and its `.meta.json` provenance sidecar.
pub fn write_curve(dir: &Path, curve: &TradeoffCurve, params: &SystemParams, settings: &SolverSettings) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(curve_file_name(curve));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(CURVE_HEADER)?;
    for p in &curve.points {
        w.write_record([
            p.sigma.to_string(),
            p.p_ex.to_string(),
            p.fidelity.to_string(),
            p.p_pure_ratio.to_string(),
        ])?;
    }
    w.flush()?;

    #[derive(Serialize)]
    struct Meta<'a> {
        config_label: &'a str,
        pulse_area: f64,
        params: &'a SystemParams,
        solver: &'a SolverSettings,
        orientation: super::tradeoff::Orientation,
        signed_area: f64,
        grid_points: Vec<usize>,
        windows: Vec<f64>,
        runtimes: Vec<f64>,
        failures: &'a [super::tradeoff::FailedPoint],
    }
    let meta = Meta {
        config_label: &curve.config_label,
        pulse_area: curve.pulse_area,
        params,
        solver: settings,
        orientation: curve.orientation,
        signed_area: curve.signed_area,
        grid_points: curve.points.iter().map(|p| p.result.grid.n).collect(),
        windows: curve.points.iter().map(|p| p.result.grid.end).collect(),
        runtimes: curve.points.iter().map(|p| p.runtime).collect(),
        failures: &curve.failures,
    };
    fs::write(path.with_extension("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(path)
}

fn provenance_header() -> Vec<&'static str> {
    vec![
        "g", "kappa", "gamma_u", "gamma_g", "delta_u", "delta_e", "rtol", "atol", "residual",
    ]
}

fn provenance(params: &SystemParams, settings: &SolverSettings) -> Vec<String> {
    vec![
        params.g.to_string(),
        params.kappa.to_string(),
        params.gamma_u.to_string(),
        params.gamma_g.to_string(),
        params.delta_u.to_string(),
        params.delta_e.to_string(),
        settings.rtol.to_string(),
        settings.atol.to_string(),
        settings.residual.to_string(),
    ]
}

fn pulse_columns(pulse: &PulsePolicy) -> [String; 5] {
    match pulse {
        PulsePolicy::SymmetricGaussian { omega0, sigma, t_c } => [
            "symmetric_gaussian".into(),
            omega0.to_string(),
            sigma.to_string(),
            sigma.to_string(),
            t_c.to_string(),
        ],
        PulsePolicy::AsymmetricGaussian {
            omega0,
            sigma1,
            sigma2,
            t_c,
        } => [
            "asymmetric_gaussian".into(),
            omega0.to_string(),
            sigma1.to_string(),
            sigma2.to_string(),
            t_c.to_string(),
        ],
        PulsePolicy::Tabulated { samples } => [
            "tabulated".into(),
            pulse.peak().to_string(),
            String::new(),
            String::new(),
            samples.last().map(|s| s.0.to_string()).unwrap_or_default(),
        ],
    }
}

/// One row per sweep point carrying parameters, pulse, grid and tolerances.
pub fn write_samples(dir: &Path, curves: &[TradeoffCurve], params: &SystemParams, settings: &SolverSettings) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("samples.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["label", "area", "shape", "omega0", "sigma1", "sigma2", "t_c"];
    header.extend(provenance_header());
    header.extend([
        "grid_points", "window", "p_ex", "fidelity", "j_re", "j_im", "p_pure_ratio", "p_ent", "bound",
    ]);
    w.write_record(&header)?;
    for c in curves {
        for p in &c.points {
            let mut row = vec![c.config_label.clone(), c.pulse_area.to_string()];
            row.extend(pulse_columns(&p.pulse));
            row.extend(provenance(params, settings));
            let bound = p
                .result
                .bound(params)
                .map(|b| b.bound_value.to_string())
                .unwrap_or_default();
            row.extend([
                p.result.grid.n.to_string(),
                p.result.grid.end.to_string(),
                p.p_ex.to_string(),
                p.fidelity.to_string(),
                p.result.swap.j_avg.re.to_string(),
                p.result.swap.j_avg.im.to_string(),
                p.p_pure_ratio.to_string(),
                p.result.swap.p_ent.to_string(),
                bound,
            ]);
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(path)
}

/// `frontier.csv`: one row per family and occupied bin.
pub fn write_frontier(dir: &Path, scan: &ParetoScan) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("frontier.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "family", "bin", "p_lo", "p_hi", "p_ex", "fidelity", "area", "sigma1", "sigma2", "sample",
    ])?;
    let families = [
        ("symmetric", &scan.symmetric),
        (Family::FastFall.label(), &scan.fast_fall),
        (Family::FastRise.label(), &scan.fast_rise),
        ("combined", &scan.combined),
    ];
    for (name, frontier) in families {
        for e in frontier.bins.iter().flatten() {
            let s = &scan.samples[e.sample];
            w.write_record([
                name.to_string(),
                e.bin.to_string(),
                (e.bin as f64 * BIN_WIDTH).to_string(),
                ((e.bin + 1) as f64 * BIN_WIDTH).to_string(),
                e.p_ex.to_string(),
                e.fidelity.to_string(),
                s.area.to_string(),
                s.sigma1.to_string(),
                s.sigma2.to_string(),
                e.sample.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(path)
}

/// `scan_samples.csv`: every scan sample with provenance.
pub fn write_scan_samples(dir: &Path, scan: &ParetoScan, params: &SystemParams, settings: &SolverSettings) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("scan_samples.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["index", "family", "area", "sigma1", "sigma2", "p_ex", "fidelity"];
    header.extend(provenance_header());
    w.write_record(&header)?;
    for (k, s) in scan.samples.iter().enumerate() {
        let mut row = vec![
            k.to_string(),
            s.family.label().to_string(),
            s.area.to_string(),
            s.sigma1.to_string(),
            s.sigma2.to_string(),
            s.p_ex.to_string(),
            s.fidelity.to_string(),
        ];
        row.extend(provenance(params, settings));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_bound_report(dir: &Path, checks: &[BoundCheck]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("bound_report.json");
    fs::write(&path, serde_json::to_string_pretty(checks)?)?;
    Ok(path)
}
