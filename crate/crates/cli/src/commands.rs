use fpt_core::asymptotics::{
    bridge_endpoint_asymptotic, kep_integral_test, large_time_beta_pos, regularity_spot_check,
};
use fpt_core::catalog::{for_curve, DiffusionSpec};
use fpt_core::identity::{transform_density, TransformReceipt};
use fpt_core::images::{closed_form_boundary, density_from_images, solve_boundary, transform_measure};
use fpt_core::mcsim::{estimate_defective_mass, simulate_crossing_times, MCConfig};
use fpt_core::moebius::Curve;
use serde_json::{json, Value};

use crate::cli::{AsymArgs, DensityArgs, Format, IdentityArgs, ImagesArgs, McArgs, TransformArgs};
use crate::error::{CliError, CliResult};
use crate::parse;

/// What a command produced: text for stdout, files for `--out-dir`, and the
/// parsed inputs echoed into the manifest.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(String, String)>,
    pub inputs: Value,
    pub seed: Option<u64>,
    /// Set by `validate`; `Some(false)` maps to exit code 1.
    pub passed: Option<bool>,
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON serializes") + "\n"
}

fn grid_csv(header: &str, grid: &[f64], cols: &[&[f64]]) -> String {
    let mut s = format!("{header}\n");
    for (i, t) in grid.iter().enumerate() {
        s.push_str(&format!("{t:?}"));
        for c in cols {
            s.push_str(&format!(",{:?}", c[i]));
        }
        s.push('\n');
    }
    s
}

pub fn transform(a: &TransformArgs) -> CliResult<Output> {
    let f = parse::curve(&a.curve)?;
    if !a.beta.is_finite() {
        return Err(CliError::usage("beta must be finite"));
    }
    let g = f.transform(a.beta);
    let body = pretty(&g.to_json());
    Ok(Output {
        files: vec![("curve.json".into(), body.clone())],
        stdout: body,
        inputs: json!({ "curve": f.to_json(), "beta": a.beta }),
        ..Default::default()
    })
}

pub fn density(a: &DensityArgs) -> CliResult<Output> {
    let spec = parse::spec(&a.spec, a.x)?;
    let f = parse::curve(&a.curve)?;
    let grid = parse::grid(&a.grid)?;
    let table = for_curve(&spec, &f)?.tabulate(&grid)?;
    let (name, body) = match a.format {
        Format::Csv => ("density.csv", table.to_csv()),
        Format::Json => ("density.json", pretty(&table.to_json())),
    };
    Ok(Output {
        files: vec![(name.into(), body.clone())],
        stdout: body,
        inputs: json!({ "spec": spec.to_json(), "curve": f.to_json(), "grid": grid }),
        ..Default::default()
    })
}

pub fn identity(a: &IdentityArgs) -> CliResult<Output> {
    let spec = parse::spec(&a.spec, a.x)?;
    let f = parse::curve(&a.curve)?;
    let grid = parse::grid(&a.grid)?;
    let base = for_curve(&spec, &f)?;
    let p = transform_density(&base, &spec, a.beta, &f)?;
    let table = p.tabulate(&grid)?;
    let receipt = TransformReceipt::new(&spec, a.beta, &f).to_json(&grid)?;
    let report = json!({ "density": table.to_json(), "receipt": receipt });
    Ok(Output {
        stdout: pretty(&report),
        files: vec![
            ("density.csv".into(), table.to_csv()),
            ("density.json".into(), pretty(&table.to_json())),
            ("receipt.json".into(), pretty(&receipt)),
        ],
        inputs: json!({ "spec": spec.to_json(), "curve": f.to_json(), "beta": a.beta, "grid": grid }),
        ..Default::default()
    })
}

fn mc_config(a: &McArgs, seed: u64) -> CliResult<MCConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("invalid MC config {path}: {e}")))?;
            MCConfig::from_json(&v)?
        }
        None => MCConfig::default(),
    };
    cfg.seed = seed;
    if let Some(n) = &a.n {
        cfg.n_paths = parse::count(n)?;
    }
    if let Some(dt) = a.dt {
        cfg.dt = dt;
    }
    if let Some(h) = a.horizon {
        cfg.horizon = h;
    }
    if let Some(b) = a.bins {
        cfg.bins = b;
    }
    if let Some(s) = a.streams {
        cfg.streams = s;
    }
    if a.no_bridge {
        cfg.bridge_correction = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn mc(a: &McArgs, seed: u64) -> CliResult<Output> {
    let spec = parse::spec(&a.spec, a.x)?;
    let f = parse::curve(&a.curve)?;
    let cfg = mc_config(a, seed)?;
    let est = simulate_crossing_times(&spec, &f, &cfg)?;
    let tail = match estimate_defective_mass(&spec, &f, &cfg) {
        Ok(m) => json!({
            "defect": m.defect,
            "standard_error": m.standard_error,
            "crossing_probability": 1.0 - m.defect,
            "crossed_by_horizon": m.crossed_by_horizon,
            "horizon": m.horizon,
        }),
        Err(fpt_core::Error::Unavailable(why)) => json!({ "unavailable": why }),
        Err(e) => return Err(e.into()),
    };
    let report = json!({
        "estimate": est.to_json(),
        "tail_completed_mass": tail,
    });
    Ok(Output {
        stdout: pretty(&report),
        files: vec![
            ("estimate.csv".into(), est.to_csv()),
            ("estimate.json".into(), pretty(&est.to_json())),
            ("report.json".into(), pretty(&report)),
        ],
        inputs: json!({ "spec": spec.to_json(), "curve": f.to_json(), "config": cfg.to_json() }),
        seed: Some(seed),
        ..Default::default()
    })
}

pub fn images(a: &ImagesArgs) -> CliResult<Output> {
    let mut m = parse::measure(&a.measure)?;
    if let Some(beta) = a.beta {
        m = transform_measure(&m, beta)?;
    }
    let grid = parse::grid(&a.grid)?;
    let boundary = grid.iter().map(|&t| solve_boundary(&m, t)).collect::<Result<Vec<_>, _>>()?;
    let dens = grid.iter().map(|&t| density_from_images(&m, t)).collect::<Result<Vec<_>, _>>()?;
    let closed = closed_form_boundary(&m).map(|c| c.to_json());
    let csv = grid_csv("t,boundary,density", &grid, &[&boundary, &dens]);
    let report = json!({
        "measure": m.to_json()?,
        "closed_form_boundary": closed,
        "grid": grid,
        "boundary": boundary,
        "density": dens,
    });
    let stdout = match a.format {
        Format::Csv => csv.clone(),
        Format::Json => pretty(&report),
    };
    Ok(Output {
        stdout,
        files: vec![("images.csv".into(), csv), ("images.json".into(), pretty(&report))],
        inputs: json!({ "measure": parse::measure(&a.measure)?.to_json()?, "beta": a.beta, "grid": grid }),
        ..Default::default()
    })
}

fn approximant_grid(f: &Curve, a: &AsymArgs, beta: f64, grid: &[f64]) -> CliResult<Vec<f64>> {
    if beta > 0.0 {
        let pf = for_curve(&DiffusionSpec::brownian(0.0), f)?;
        Ok(grid
            .iter()
            .map(|&t| large_time_beta_pos(&pf, f, beta, t))
            .collect::<Result<Vec<_>, _>>()?)
    } else if beta < 0.0 {
        let r = a
            .r
            .ok_or_else(|| CliError::usage("beta < 0 needs --r, the crossing probability of the curve"))?;
        Ok(grid
            .iter()
            .map(|&t| bridge_endpoint_asymptotic(f, r, beta, t))
            .collect::<Result<Vec<_>, _>>()?)
    } else {
        Err(CliError::usage("beta must be nonzero for an approximant"))
    }
}

pub fn asym(a: &AsymArgs) -> CliResult<Output> {
    let f = parse::curve(&a.curve)?;
    let mut report = json!({ "curve": f.to_json() });
    let mut files = Vec::new();
    if f.lifetime().is_infinite() {
        report["transience"] = kep_integral_test(&f)?.to_json();
    }
    if let Some(w) = &a.spot_check {
        let g = parse::grid(w)?;
        if g.len() != 2 {
            return Err(CliError::usage("--spot-check takes t_lo,t_hi"));
        }
        report["spot_check_warnings"] = json!(regularity_spot_check(&f, g[0], g[1])?);
    }
    match (a.beta, &a.grid) {
        (Some(beta), Some(g)) => {
            let grid = parse::grid(g)?;
            let vals = approximant_grid(&f, a, beta, &grid)?;
            files.push(("approximant.csv".into(), grid_csv("t,approximant", &grid, &[&vals])));
            report["approximant"] = json!({ "beta": beta, "r": a.r, "grid": grid, "values": vals });
        }
        (None, None) => {}
        _ => return Err(CliError::usage("--beta and --grid go together")),
    }
    if report.get("transience").is_none() && report.get("approximant").is_none() {
        return Err(CliError::usage(
            "curve has a finite lifetime: the integral test does not apply; pass --beta and --grid",
        ));
    }
    files.push(("asym.json".into(), pretty(&report)));
    Ok(Output {
        stdout: pretty(&report),
        files,
        inputs: json!({ "curve": f.to_json(), "beta": a.beta, "r": a.r, "grid": a.grid }),
        ..Default::default()
    })
}
