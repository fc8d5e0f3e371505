//! `loewner`, `sle` and `qle`.

use clap::{Args, Subcommand, ValueEnum};
use qlekit::field::GreenKind;
use qlekit::io::{num, rainbow, Image, Table};
use qlekit::loewner::{extract_driving, hull_boundary, solve_forward, solve_reverse, Direction, DrivingMeasure, SolverOptions, Trajectory};
use qlekit::lqg::CircleMeasure;
use qlekit::qle::{qle_init, qle_run};
use qlekit::sle::{coupling_h, sample_radial_sle, verify_fh_ito, verify_green_flow};
use qlekit::C64;
use serde::Serialize;
use serde_json::json;
use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use crate::error::{CliError, CliResult};
use crate::output::Ctx;
use crate::parse_c64;

#[derive(Args, Debug, Serialize)]
pub struct FlowArgs {
    /// Uniform driving measure (the default).
    #[arg(long, conflicts_with = "atom")]
    pub uniform: bool,
    /// Constant unit atom at this angle.
    #[arg(long, allow_hyphen_values = true)]
    pub atom: Option<f64>,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t_end: f64,
    /// Driving slice length and maximal solver step.
    #[arg(long, default_value_t = 1e-2)]
    pub dt: f64,
    /// Tracked point, `re` or `re,im`; repeatable.
    #[arg(long, value_parser = parse_c64, allow_hyphen_values = true)]
    pub probe: Vec<C64>,
    /// Points on the forward hull boundary.
    #[arg(long, default_value_t = 256)]
    pub hull_resolution: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ExtractArgs {
    /// CSV file with `re,im` columns; the curve must start on the circle.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Without `--curve`, a radial slit from 1 of this length.
    #[arg(long, default_value_t = 0.5)]
    pub slit_length: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoewnerCmd {
    Forward(FlowArgs),
    Reverse(FlowArgs),
    /// Driving function of a simple curve.
    Extract(ExtractArgs),
}

impl LoewnerCmd {
    pub fn name(&self) -> &'static str {
        match self {
            LoewnerCmd::Forward(_) => "forward",
            LoewnerCmd::Reverse(_) => "reverse",
            LoewnerCmd::Extract(_) => "extract",
        }
    }
}

fn positive(x: f64, what: &str) -> CliResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} must be positive")))
    }
}

fn driving_table(nu: &DrivingMeasure) -> Table {
    let mut t = Table::new(&["t", "angle", "mass"]);
    for (i, s) in nu.slices.iter().enumerate() {
        let ti = num(i as f64 * nu.dt);
        for (a, m) in measure_points(s) {
            t.push(vec![ti.clone(), num(a), num(m)]);
        }
    }
    t
}

/// (angle, mass) pairs; density cells are reported at their centers.
fn measure_points(m: &CircleMeasure) -> Vec<(f64, f64)> {
    match m {
        CircleMeasure::Atoms(a) => a.clone(),
        CircleMeasure::Density(c) => {
            let n = c.len() as f64;
            c.iter().enumerate().map(|(j, &w)| (2.0 * PI * j as f64 / n, w)).collect()
        }
    }
}

pub fn loewner(cmd: &LoewnerCmd, ctx: &mut Ctx) -> CliResult<()> {
    let (a, direction) = match cmd {
        LoewnerCmd::Forward(a) => (a, Direction::Forward),
        LoewnerCmd::Reverse(a) => (a, Direction::Reverse),
        LoewnerCmd::Extract(e) => return extract(e, ctx),
    };
    positive(a.t_end, "--T")?;
    positive(a.dt, "--dt")?;
    let slices = (a.t_end / a.dt - 1e-9).ceil().max(1.0) as usize;
    let nu = match a.atom {
        Some(th) => DrivingMeasure::atoms(a.dt, &vec![th; slices])?,
        None => DrivingMeasure::uniform(a.dt, slices),
    };
    let probes = if a.probe.is_empty() { vec![C64::new(0.5, 0.0)] } else { a.probe.clone() };
    let o = SolverOptions { dt_max: a.dt.min(SolverOptions::default().dt_max), ..SolverOptions::default() };
    let traj = match direction {
        Direction::Forward => solve_forward(&nu, &probes, a.t_end, &o)?,
        Direction::Reverse => solve_reverse(&nu, &probes, a.t_end, &o)?,
    };
    ctx.table("trajectory", &trajectory_table(&traj))?;
    ctx.table("driving", &driving_table(&nu))?;
    let mut hull = None;
    if direction == Direction::Forward {
        let h = hull_boundary(&traj, a.t_end, a.hull_resolution, 1e-3)?;
        let mut t = Table::new(&["index", "re", "im"]);
        for (i, z) in h.iter().enumerate() {
            t.push(vec![i.to_string(), num(z.re), num(z.im)]);
        }
        ctx.table("hull", &t)?;
        hull = Some(h);
    }
    if ctx.wants_image() {
        let mut im = disk_canvas();
        if let Some(h) = &hull {
            polyline(&mut im, h, [0, 0, 0], true);
        }
        let n = traj.states.len().max(2) - 1;
        for j in 0..probes.len() {
            let path: Vec<C64> = traj.states.iter().map(|s| s.points[j].g).collect();
            for (k, w) in path.windows(2).enumerate() {
                polyline(&mut im, w, rainbow(k as f64 / n as f64), false);
            }
        }
        ctx.image("trajectory", &im)?;
    }
    let last = traj.last();
    for p in &last.points {
        match p.tau {
            Some(tau) => println!("z0={} swallowed=true tau={}", fmt_c(p.z0), tau),
            None => println!("z0={} swallowed=false g={} dg={}", fmt_c(p.z0), fmt_c(p.g), fmt_c(p.dg)),
        }
    }
    println!("t={} deriv0={}", last.t, last.deriv0);
    Ok(())
}

fn fmt_c(z: C64) -> String {
    format!("{},{}", num(z.re), num(z.im))
}

fn trajectory_table(traj: &Trajectory) -> Table {
    let mut t = Table::new(&["t", "point", "re", "im", "swallowed"]);
    for s in &traj.states {
        for (j, p) in s.points.iter().enumerate() {
            let gone = p.tau.is_some_and(|tau| tau <= s.t);
            t.push(vec![num(s.t), j.to_string(), num(p.g.re), num(p.g.im), gone.to_string()]);
        }
    }
    t
}

fn read_curve(path: &PathBuf) -> CliResult<Vec<C64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.chars().any(|c| c.is_ascii_alphabetic())) {
            continue;
        }
        out.push(parse_c64(line).map_err(|e| CliError::Usage(format!("{}:{}: {e}", path.display(), i + 1)))?);
    }
    Ok(out)
}

fn extract(a: &ExtractArgs, ctx: &mut Ctx) -> CliResult<()> {
    positive(a.dt, "--dt")?;
    let curve = match &a.curve {
        Some(p) => read_curve(p)?,
        None => {
            if !(a.slit_length > 0.0 && a.slit_length < 1.0) || a.samples < 2 {
                return Err(CliError::Usage("need 0 < --slit-length < 1 and --samples ≥ 2".into()));
            }
            (0..=a.samples).map(|k| C64::new(1.0 - a.slit_length * k as f64 / a.samples as f64, 0.0)).collect()
        }
    };
    let nu = extract_driving(&curve, a.dt)?;
    ctx.table("driving", &driving_table(&nu))?;
    println!("slices={} capacity={}", nu.slices.len(), num(nu.horizon()));
    Ok(())
}

/// White disk on a grey background, 512 px across [−1, 1]².
fn disk_canvas() -> Image {
    let n = 512;
    let mut im = Image::new(n, n, [200, 200, 200]);
    for y in 0..n {
        for x in 0..n {
            let z = from_px(x as i64, y as i64, n);
            if z.norm() < 1.0 {
                im.set(x as i64, y as i64, [255, 255, 255]);
            }
        }
    }
    im
}

fn to_px(z: C64, n: usize) -> (i64, i64) {
    let h = (n as f64 - 1.0) / 2.0;
    ((h + z.re * h).round() as i64, (h - z.im * h).round() as i64)
}

fn from_px(x: i64, y: i64, n: usize) -> C64 {
    let h = (n as f64 - 1.0) / 2.0;
    C64::new((x as f64 - h) / h, (h - y as f64) / h)
}

fn polyline(im: &mut Image, pts: &[C64], c: [u8; 3], closed: bool) {
    let n = im.width;
    for w in pts.windows(2) {
        im.line(to_px(w[0], n), to_px(w[1], n), c);
    }
    if closed && pts.len() > 2 {
        im.line(to_px(pts[pts.len() - 1], n), to_px(pts[0], n), c);
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SleRunArgs {
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, value_parser = parse_c64, allow_hyphen_values = true)]
    pub probe: Vec<C64>,
    /// Run the centered reverse flow and report the coupling field.
    #[arg(long)]
    pub reverse: bool,
    /// Force-point weight of a reverse SLE_κ(ρ).
    #[arg(long, allow_hyphen_values = true, requires = "reverse")]
    pub rho: Option<f64>,
    /// Initial force point (default −1).
    #[arg(long, value_parser = parse_c64, allow_hyphen_values = true, requires = "rho")]
    pub force: Option<C64>,
}

#[derive(Args, Debug, Serialize)]
pub struct ItoArgs {
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, value_parser = parse_c64, allow_hyphen_values = true, default_value = "0.3")]
    pub z: C64,
    #[arg(long = "T", default_value_t = 0.5)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenArg {
    Dirichlet,
    Neumann,
}

#[derive(Args, Debug, Serialize)]
pub struct GreenArgs {
    #[arg(long, value_enum, default_value_t = GreenArg::Dirichlet)]
    pub kind: GreenArg,
    #[arg(long, value_parser = parse_c64, allow_hyphen_values = true, default_value = "0.3")]
    pub z: C64,
    #[arg(long, value_parser = parse_c64, allow_hyphen_values = true, default_value = "-0.2,0.4")]
    pub w: C64,
    #[arg(long = "T", default_value_t = 0.5)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    /// Driving W_t = amplitude·sin(frequency·t).
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 3.0)]
    pub frequency: f64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SleCmd {
    Run(SleRunArgs),
    /// Monte Carlo check of the drift and quadratic variation of the coupling field.
    VerifyIto(ItoArgs),
    /// Finite-difference check of the Green's-function flow.
    VerifyGreen(GreenArgs),
}

impl SleCmd {
    pub fn name(&self) -> &'static str {
        match self {
            SleCmd::Run(_) => "run",
            SleCmd::VerifyIto(_) => "verify-ito",
            SleCmd::VerifyGreen(_) => "verify-green",
        }
    }
}

pub fn sle(cmd: &SleCmd, ctx: &mut Ctx) -> CliResult<()> {
    match cmd {
        SleCmd::Run(a) => sle_run(a, ctx),
        SleCmd::VerifyIto(a) => {
            let s = verify_fh_ito(a.kappa, a.rho, a.z, a.t_end, a.dt, a.runs, ctx.seed)?;
            let ok = s.drift_ok(3.0);
            ctx.json("stats", &json!({ "stats": s, "drift_within_3se": ok, "variance_rel_err": s.variance_rel_err() }))?;
            println!(
                "runs={} truncated={} mean={} se={} predicted_drift={} variance={} predicted_variance={} drift_ok={}",
                s.runs, s.truncated, s.mean, s.mean_se, s.predicted_drift, s.variance, s.predicted_variance, ok
            );
            Ok(())
        }
        SleCmd::VerifyGreen(a) => {
            let kind = match a.kind {
                GreenArg::Dirichlet => GreenKind::Dirichlet,
                GreenArg::Neumann => GreenKind::Neumann,
            };
            let (amp, freq) = (a.amplitude, a.frequency);
            let dev = verify_green_flow(kind, move |t| amp * (freq * t).sin(), a.z, a.w, a.t_end, a.dt)?;
            ctx.json("result", &json!({ "max_abs_deviation": dev }))?;
            println!("max_abs_deviation={dev}");
            Ok(())
        }
    }
}

fn sle_run(a: &SleRunArgs, ctx: &mut Ctx) -> CliResult<()> {
    let probes = if a.probe.is_empty() { vec![C64::new(0.3, 0.0)] } else { a.probe.clone() };
    let direction = if a.reverse { Direction::Reverse } else { Direction::Forward };
    let run = sample_radial_sle(a.kappa, a.t_end, a.dt, &probes, ctx.seed, direction, a.rho, a.force)?;
    let mut t = Table::new(&["step", "t", "w", "point", "re", "im", "dre", "dim"]);
    for (k, &tk) in run.times.iter().enumerate() {
        for j in 0..probes.len() {
            let (f, d) = (run.maps[k][j], run.derivs[k][j]);
            t.push(vec![k.to_string(), num(tk), num(run.w[k]), j.to_string(), num(f.re), num(f.im), num(d.re), num(d.im)]);
        }
    }
    ctx.table("run", &t)?;
    if a.reverse {
        let mut h = Table::new(&["t", "point", "h"]);
        for &tk in &run.times {
            for (j, &z) in probes.iter().enumerate() {
                h.push(vec![num(tk), j.to_string(), num(coupling_h(&run, z, tk)?)]);
            }
        }
        ctx.table("coupling", &h)?;
    }
    for (j, s) in run.swallowed.iter().enumerate() {
        if let Some(tau) = s {
            println!("point={j} swallowed=true tau={tau}");
        }
    }
    println!("steps={} w_end={} status={:?}", run.times.len() - 1, num(*run.w.last().unwrap_or(&0.0)), run.status);
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct QleInitArgs {
    #[arg(long, default_value_t = 6.0)]
    pub kappa: f64,
    /// Truncation degree N of the field.
    #[arg(long, default_value_t = 16)]
    pub degree: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct QleRunArgs {
    #[arg(long, default_value_t = 6.0)]
    pub kappa: f64,
    /// Block length δ.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long = "T", default_value_t = 0.5)]
    pub t_end: f64,
    #[arg(long, default_value_t = 16)]
    pub degree: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QleCmd {
    /// Initial field and seed law.
    Init(QleInitArgs),
    /// δ-approximation run; writes the trajectory bundle.
    Run(QleRunArgs),
}

impl QleCmd {
    pub fn name(&self) -> &'static str {
        match self {
            QleCmd::Init(_) => "init",
            QleCmd::Run(_) => "run",
        }
    }
}

fn coefficients(t: &mut Table, block: usize, time: f64, f: &qlekit::field::HarmonicDiskField) {
    for (k, (c, s)) in f.cos.iter().zip(&f.sin).enumerate() {
        t.push(vec![block.to_string(), num(time), (k + 1).to_string(), num(*c), num(*s)]);
    }
}

pub fn qle(cmd: &QleCmd, ctx: &mut Ctx) -> CliResult<()> {
    match cmd {
        QleCmd::Init(a) => {
            let s = qle_init(a.kappa, a.degree, ctx.seed)?;
            ctx.json("state", &s)?;
            let mut t = Table::new(&["angle", "mass"]);
            for (th, m) in measure_points(&s.seed_law()?) {
                t.push(vec![num(th), num(m)]);
            }
            ctx.table("seed_law", &t)?;
            println!("kappa={} degree={} origin={} tip={}", a.kappa, s.degree(), num(s.origin), fmt_c(s.tip));
            Ok(())
        }
        QleCmd::Run(a) => {
            let tr = qle_run(a.kappa, a.delta, a.t_end, a.degree, a.dt, ctx.seed)?;
            let mut states = Table::new(&["block", "t", "k", "cos", "sin"]);
            for s in &tr.states {
                coefficients(&mut states, s.block, s.t, &s.field);
            }
            ctx.table("states", &states)?;
            let mut atoms = Table::new(&["block", "t", "angle"]);
            let mut nus = Table::new(&["block", "angle", "mass"]);
            for (l, b) in tr.blocks.iter().enumerate() {
                atoms.push(vec![l.to_string(), num(l as f64 * tr.delta), num(b.atom)]);
                for (th, m) in measure_points(&b.nu) {
                    nus.push(vec![l.to_string(), num(th), num(m)]);
                }
            }
            ctx.table("atoms", &atoms)?;
            ctx.table("nu_snapshots", &nus)?;
            let mut hulls = Table::new(&["block", "t", "index", "re", "im"]);
            for (l, h) in tr.hulls.iter().enumerate() {
                let t = num((l + 1) as f64 * tr.delta);
                for (i, z) in h.iter().enumerate() {
                    hulls.push(vec![(l + 1).to_string(), t.clone(), i.to_string(), num(z.re), num(z.im)]);
                }
            }
            ctx.table("hulls", &hulls)?;
            if ctx.wants_image() {
                let mut im = disk_canvas();
                let n = tr.hulls.len().max(1) as f64;
                for (l, h) in tr.hulls.iter().enumerate() {
                    polyline(&mut im, h, rainbow((l + 1) as f64 / n), true);
                }
                ctx.image("hulls", &im)?;
            }
            let last = tr.states.last().expect("at least the initial state");
            println!("blocks={} t={} tip={}", tr.blocks.len(), num(last.t), fmt_c(last.tip));
            Ok(())
        }
    }
}
