use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use bilin_core::energy::{control_configuration, energy_ratio_sweep, transversal_configuration, write_sweep_csv};
use bilin_core::freewave::{
    bilinear_lp_norm, elliptic_pair, estimate_scaling_exponent, generate_knapp, generate_knapp_in_window,
    generate_lee_pair, init_wave, write_scaling_csv, CubeRegion, FrequencyGrid, ScaleData,
};
use bilin_core::geometry::{
    check_c1, check_c2_with, check_c3_with, check_c3bb_and_clee_with, check_lfw_with, default_h_samples,
    CheckOptions, ConditionReport, CurveOptions, Domain, SurfaceKind, SurfaceSpec,
};
use bilin_core::quad::bump;
use bilin_core::tables::{build_table, iterate_recursion, write_trace, RecursionParams};
use bilin_core::wavepacket::{
    decompose, fit_constant, margin_shift_constant, max_packet_diameter, packet_radius, reconstruction_residual,
    write_inventory,
};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{EnergyName, Experiment, ExperimentConfig, PairName, ValidationError};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Validation(ValidationError),
    #[error("{0}")]
    Core(#[from] bilin_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(v) if v.resource => 4,
            RunError::Validation(_) => 2,
            RunError::Core(_) => 3,
            RunError::Io(_) => 4,
        }
    }
}

/// Execution settings that do not affect numerical results.
#[derive(Clone, Debug, Default)]
pub struct RunSettings {
    pub threads: Option<usize>,
}

#[derive(Serialize)]
struct Meta<'a> {
    file: String,
    version: &'static str,
    threads: usize,
    config: &'a ExperimentConfig,
}

struct Emitter<'a> {
    dir: PathBuf,
    config: &'a ExperimentConfig,
    threads: usize,
    files: Vec<PathBuf>,
}

impl Emitter<'_> {
    fn emit(&mut self, name: &str, body: &[u8]) -> std::io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        let meta = Meta { file: name.into(), version: env!("CARGO_PKG_VERSION"), threads: self.threads, config: self.config };
        let mut text = serde_json::to_vec_pretty(&meta).map_err(std::io::Error::other)?;
        text.push(b'\n');
        fs::write(self.dir.join(format!("{name}.meta.json")), text)?;
        self.files.push(path);
        Ok(())
    }

    fn emit_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
        text.push(b'\n');
        self.emit(name, &text)
    }
}

/// Validates and runs one experiment, returning the files written.
pub fn run(config: &ExperimentConfig, settings: &RunSettings) -> Result<Vec<PathBuf>, RunError> {
    config.validate().map_err(RunError::Validation)?;
    let dir = config.out.clone().expect("validated");
    fs::create_dir_all(&dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.threads.unwrap_or(0))
        .build()
        .map_err(std::io::Error::other)?;
    let threads = pool.current_num_threads();
    let mut em = Emitter { dir, config, threads, files: Vec::new() };
    pool.install(|| dispatch(config, &mut em))?;
    Ok(em.files)
}

fn dispatch(config: &ExperimentConfig, em: &mut Emitter) -> Result<(), RunError> {
    match &config.experiment {
        Experiment::Certify { surfaces, theta, curve_scan, h_per_axis, lfw_h } => {
            let s1 = SurfaceSpec::from_descriptor(&surfaces[0])?;
            let s2 = SurfaceSpec::from_descriptor(&surfaces[1])?;
            certify(em, &s1, &s2, *theta, *curve_scan, *h_per_axis, lfw_h.as_deref())
        }
        Experiment::Scaling { pair, r_list, p_list } => scaling(em, *pair, r_list, p_list),
        Experiment::Packets { r, c, decay, n_omega, period, resolution, bumps } => {
            packets(em, config.seed.unwrap_or(0), *r, *c, *decay, *n_omega, *period, *resolution, *bumps)
        }
        Experiment::Tables { r_list, c, c0, m_sub } => tables(em, r_list, *c, *c0, *m_sub),
        Experiment::Energy { configuration, r_list } => {
            let cfg = match configuration {
                EnergyName::Transversal => transversal_configuration()?,
                EnergyName::Control => control_configuration()?,
            };
            let sweep = energy_ratio_sweep(&cfg, r_list)?;
            let mut csv = Vec::new();
            write_sweep_csv(&mut csv, &sweep)?;
            em.emit("energy.csv", &csv)?;
            em.emit_json("energy.json", &sweep)?;
            Ok(())
        }
        Experiment::Recursion { n, p_list, c_exp, c_big, r0, r_max, sentinel, additive } => {
            let mut summary = Vec::new();
            for &p in p_list {
                let params = RecursionParams {
                    p,
                    n: *n,
                    c_exp: *c_exp,
                    c_big: *c_big,
                    r0: *r0,
                    r_max: *r_max,
                    sentinel: *sentinel,
                    additive: *additive,
                };
                let trace = iterate_recursion(&params);
                let mut csv = Vec::new();
                write_trace(&mut csv, &trace)?;
                em.emit(&format!("recursion_p{}.csv", label(p)), &csv)?;
                summary.push(json!({"p": p, "exponent": trace.exponent, "sup": trace.sup, "bounded": trace.bounded}));
            }
            em.emit_json("recursion.json", &summary)?;
            Ok(())
        }
    }
}

fn label(p: f64) -> String {
    format!("{p:.4}").replace('.', "_")
}

fn certify(
    em: &mut Emitter,
    s1: &SurfaceSpec,
    s2: &SurfaceSpec,
    theta: f64,
    curve_scan: usize,
    h_per_axis: usize,
    lfw_h: Option<&[f64]>,
) -> Result<(), RunError> {
    let opts = CheckOptions { curve: CurveOptions { scan: curve_scan, ..CurveOptions::default() }, ..CheckOptions::default() };
    let hs = default_h_samples(s1, s2, h_per_axis);
    let mut reports: Vec<ConditionReport> = vec![check_c1(s1, s2, opts.surface_grid, theta)];
    let (g, l) = check_c2_with(s1, s2, &hs, theta, &opts)?;
    reports.push(g);
    reports.push(l);
    reports.push(check_c3_with(s1, s2, &hs, theta, &opts)?);
    let (bb, lee) = check_c3bb_and_clee_with(s1, s2, &hs, theta, &opts)?;
    reports.push(bb);
    reports.push(lee);
    if let Some(h) = lfw_h {
        reports.push(check_lfw_with(s1, s2, &DVector::from_column_slice(h), theta, &opts)?);
    }
    em.emit_json("certify.json", &reports)?;
    Ok(())
}

fn scaling(em: &mut Emitter, pair: PairName, r_list: &[f64], p_list: &[f64]) -> Result<(), RunError> {
    let mut fits = Vec::new();
    for &p in p_list {
        let fit = estimate_scaling_exponent(
            |r| {
                let k = match pair {
                    PairName::Elliptic => {
                        let (s1, s2) = elliptic_pair()?;
                        generate_knapp(&s1, &s2, r)?
                    }
                    PairName::Lee => generate_lee_pair(r)?.2,
                };
                let [w1, w2] = k.waves;
                Ok(ScaleData { w1, w2, cube: k.cube, t_samples: k.t_samples })
            },
            p,
            r_list,
            false,
        )?;
        let mut csv = Vec::new();
        write_scaling_csv(&mut csv, &fit.points)?;
        em.emit(&format!("scaling_p{}.csv", label(p)), &csv)?;
        fits.push(fit);
    }
    em.emit_json("scaling.json", &fits)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn packets(
    em: &mut Emitter,
    seed: u64,
    r: f64,
    c: f64,
    decay: u32,
    n_omega: usize,
    period: f64,
    resolution: usize,
    bumps: usize,
) -> Result<(), RunError> {
    let s = Arc::new(SurfaceSpec::new(2, SurfaceKind::EllipticParaboloid, Domain::ball(&[0.0, 0.0], 0.2), 0.1)?);
    let grid = Arc::new(FrequencyGrid::centered(&[0.0, 0.0], resolution, std::f64::consts::TAU / period, &[0.0, 0.0])?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = 0.25 * r;
    let centers: Vec<([f64; 2], [f64; 2])> = (0..bumps)
        .map(|_| {
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            let rad = 0.1 * rng.random::<f64>().sqrt();
            let y = [rng.random_range(-spread..spread), rng.random_range(-spread..spread)];
            ([rad * a.cos(), rad * a.sin()], y)
        })
        .collect();
    let f = init_wave(
        s,
        |x| {
            let mut v = Complex64::new(0.0, 0.0);
            for (ctr, y) in &centers {
                let d = (x[0] - ctr[0]).hypot(x[1] - ctr[1]);
                v += Complex64::from_polar(bump(d / 0.09, 1.0), -(x[0] * y[0] + x[1] * y[1]));
            }
            v
        },
        grid,
    )?;
    let q = CubeRegion::new(vec![0.0, 0.0, 0.0], r)?;
    let d = decompose(&f, &q, c, decay, n_omega)?;
    let mut csv = Vec::new();
    write_inventory(&mut csv, &d)?;
    em.emit("packets.csv", &csv)?;
    let report = json!({
        "params": d.params,
        "tubes": d.tubes.len(),
        "reconstruction_residual": reconstruction_residual(&d),
        "margin_shift_constant": margin_shift_constant(&d),
        "max_packet_diameter": max_packet_diameter(&d),
        "fit_constant": fit_constant(&d)?,
    });
    em.emit_json("packets.json", &report)?;
    Ok(())
}

fn tables(em: &mut Emitter, r_list: &[f64], c: f64, c0: u32, m_sub: usize) -> Result<(), RunError> {
    let (s1, s2) = elliptic_pair()?;
    let mut rows = Vec::new();
    let mut csv = Vec::new();
    writeln!(csv, "R,tubes,residual,mass_ratio,fit_constant,cross_aggregate,cross_max,bilinear_l2")?;
    for &r in r_list {
        let unit = packet_radius(r) / (c * c);
        let k = generate_knapp_in_window(&s1, &s2, r, Some(unit))?;
        let [phi, psi] = k.waves.clone();
        let d = decompose(&phi, &k.cube, c, 10, 3)?;
        let t = build_table(d, std::slice::from_ref(&psi), c0, m_sub)?;
        let residual = t.reconstruction_residual();
        let mass_ratio = t.mass()? / phi.mass();
        let cfit = t.mass_fit_constant()?;
        let agg = t.cross_term_aggregate(std::slice::from_ref(&psi), c);
        let mx = t.cross_term_max(std::slice::from_ref(&psi), c);
        let bil = bilinear_lp_norm(&phi, &psi, &k.cube, 2.0, k.t_samples)?;
        writeln!(
            csv,
            "{r},{},{residual:.6e},{mass_ratio:.12e},{cfit:.6e},{agg:.12e},{:.12e},{bil:.12e}",
            t.decomposition.tubes.len(),
            mx.value
        )?;
        let mut summary = Vec::new();
        t.write_summary(&mut summary)?;
        em.emit(&format!("table_R{r}.csv"), &summary)?;
        rows.push(json!({"R": r, "residual": residual, "mass_ratio": mass_ratio, "fit_constant": cfit,
            "cross_aggregate": agg, "cross_max": mx.value, "cross_max_pair": [mx.pair.0, mx.pair.1]}));
    }
    em.emit("tables.csv", &csv)?;
    em.emit_json("tables.json", &rows)?;
    Ok(())
}
