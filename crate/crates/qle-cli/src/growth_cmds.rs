//! `grow` and `fpp`.

use clap::{Args, Subcommand, ValueEnum};
use qlekit::growth::{fpp_ball, grow_dbm, tiling_graph, Clock, DbmParams, Graph, GrowthCluster, Sampler, Stop, Weights};
use qlekit::io::{num, rainbow, Image, Table};
use qlekit::lqg::SquareTiling;
use qlekit::rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::field_cmds::{tiling, Bc};
use crate::output::Ctx;

/// Graph to grow on: the square grid, or the adjacency graph of an LQG
/// square tiling when `--lqg-gamma` is given.
#[derive(Args, Debug, Serialize)]
pub struct SubstrateArgs {
    /// Grid side (a power of two for tilings).
    #[arg(long, default_value_t = 41)]
    pub size: usize,
    #[arg(long)]
    pub lqg_gamma: Option<f64>,
    /// Tiling threshold.
    #[arg(long, default_value_t = 2e-3)]
    pub delta: f64,
}

struct Substrate {
    graph: Graph,
    seed: usize,
    /// Vertices joined to the absorbing target of the harmonic measure.
    boundary: Vec<usize>,
    size: usize,
    /// Tiling and the node index of each vertex.
    tiles: Option<(SquareTiling, Vec<usize>)>,
}

fn substrate(a: &SubstrateArgs, seed: u64) -> CliResult<Substrate> {
    if a.size < 3 {
        return Err(CliError::Usage("--size must be at least 3".into()));
    }
    let n = a.size;
    if let Some(gamma) = a.lqg_gamma {
        let tl = tiling(n, Bc::Zero, gamma, a.delta, seed)?;
        let tg = tiling_graph(&tl);
        let centre = tg
            .vertex_at(&tl, n / 2, n / 2)
            .ok_or_else(|| CliError::Numerical("no tile at the centre".into()))?;
        return Ok(Substrate { graph: tg.graph, seed: centre, boundary: tg.boundary, size: n, tiles: Some((tl, tg.leaves)) });
    }
    let graph = Graph::grid(n, n);
    let mut boundary = Vec::new();
    for k in 0..n {
        boundary.extend([k, (n - 1) * n + k, k * n, k * n + n - 1]);
    }
    Ok(Substrate { graph, seed: (n / 2) * n + n / 2, boundary, size: n, tiles: None })
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockArg {
    Steps,
    Capacity,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerArg {
    Exact,
    Walk,
}

#[derive(Args, Debug, Serialize)]
pub struct GrowArgs {
    #[command(flatten)]
    pub substrate: SubstrateArgs,
    /// Edges to add.
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = ClockArg::Steps)]
    pub clock: ClockArg,
    #[arg(long, value_enum, default_value_t = SamplerArg::Exact)]
    pub sampler: SamplerArg,
}

#[derive(Args, Debug, Serialize)]
pub struct DbmArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub eta: f64,
    #[command(flatten)]
    pub grow: GrowArgs,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowCmd {
    /// η = 0.
    Eden(GrowArgs),
    /// η = 1.
    Dla(GrowArgs),
    /// η-dielectric breakdown.
    Dbm(DbmArgs),
}

impl GrowCmd {
    pub fn name(&self) -> &'static str {
        match self {
            GrowCmd::Eden(_) => "eden",
            GrowCmd::Dla(_) => "dla",
            GrowCmd::Dbm(_) => "dbm",
        }
    }
}

pub fn grow(cmd: &GrowCmd, ctx: &mut Ctx) -> CliResult<()> {
    let (eta, a) = match cmd {
        GrowCmd::Eden(a) => (0.0, a),
        GrowCmd::Dla(a) => (1.0, a),
        GrowCmd::Dbm(d) => (d.eta, &d.grow),
    };
    let s = substrate(&a.substrate, ctx.seed)?;
    let params = DbmParams {
        eta,
        steps: a.steps,
        clock: match a.clock {
            ClockArg::Steps => Clock::Steps,
            ClockArg::Capacity => Clock::Capacity,
        },
        sampler: match a.sampler {
            SamplerArg::Exact => Sampler::Exact,
            SamplerArg::Walk => Sampler::Walk,
        },
    };
    let mut g = s.graph.clone();
    let target = g.attach_super_vertex(&s.boundary);
    let c = grow_dbm(&g, s.seed, target, &params, &mut rng::stream(ctx.seed, 1))?;
    emit(&s, &c, ctx)
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightsArg {
    Exponential,
    Unit,
}

#[derive(Args, Debug, Serialize)]
pub struct FppArgs {
    #[command(flatten)]
    pub substrate: SubstrateArgs,
    #[arg(long, value_enum, default_value_t = WeightsArg::Exponential)]
    pub weights: WeightsArg,
    /// Rate of the exponential edge weights.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Stop at this passage time.
    #[arg(long, conflicts_with = "count")]
    pub time: Option<f64>,
    /// Stop after this many vertices (default 200).
    #[arg(long)]
    pub count: Option<usize>,
}

pub fn fpp(a: &FppArgs, ctx: &mut Ctx) -> CliResult<()> {
    let s = substrate(&a.substrate, ctx.seed)?;
    let weights = match a.weights {
        WeightsArg::Exponential => Weights::Exponential(a.rate),
        WeightsArg::Unit => Weights::Unit,
    };
    let stop = match (a.time, a.count) {
        (Some(t), _) => Stop::Time(t),
        (None, c) => Stop::Count(c.unwrap_or(200)),
    };
    let c = fpp_ball(&s.graph, s.seed, weights, stop, &mut rng::stream(ctx.seed, 1))?;
    emit(&s, &c, ctx)
}

fn emit(s: &Substrate, c: &GrowthCluster, ctx: &mut Ctx) -> CliResult<()> {
    let mut t = Table::new(&["step", "edge", "vertex", "weight", "clock"]);
    for h in &c.history {
        t.push(vec![h.step.to_string(), h.edge.to_string(), h.vertex.to_string(), num(h.weight), num(h.clock)]);
    }
    ctx.table("history", &t)?;
    if ctx.wants_image() {
        ctx.image("cluster", &render(s, c))?;
    }
    println!("added={} clock={} status={:?}", c.history.len(), num(c.history.last().map_or(0.0, |h| h.clock)), c.status);
    Ok(())
}

/// Cluster colored by normalized arrival time.
fn render(s: &Substrate, c: &GrowthCluster) -> Image {
    let n = s.size;
    let scale = (512 / n).max(1);
    let mut im = Image::new(n * scale, n * scale, [24, 24, 24]);
    let total = c.history.last().map_or(0.0, |h| h.clock);
    let mut paint = |v: usize, col: [u8; 3]| {
        let (x, y, w) = match &s.tiles {
            Some((tl, leaves)) => match leaves.get(v) {
                Some(&i) => {
                    let q = &tl.nodes[i];
                    (q.x, q.y, q.size)
                }
                None => return,
            },
            None if v < n * n => (v % n, v / n, 1),
            None => return,
        };
        im.fill_rect(x * scale, y * scale, w * scale, w * scale, col);
    };
    paint(s.seed, rainbow(0.0));
    for h in &c.history {
        let t = if total > 0.0 { h.clock / total } else { 0.0 };
        paint(h.vertex, rainbow(t));
    }
    im
}
