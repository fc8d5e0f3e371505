//! `maps` and `scaling`.

use clap::{Args, Subcommand, ValueEnum};
use qlekit::growth::Graph;
use qlekit::io::{num, Image, Table};
use qlekit::maps::counting::{phi, RootEvent};
use qlekit::maps::dla::{compare_dla_lerw, DlaParams};
use qlekit::maps::mullin::{mullin, sample_walk, DecoratedMap};
use qlekit::maps::peeling::{explore_seeded, kernel_row, reshuffle_necklaces, Mode, Necklace};
use qlekit::maps::spanning::wilson_ust;
use qlekit::rng;
use qlekit::scaling::{eta_curves, watabiki_d, Curve, ExponentRecord};
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::Ctx;

#[derive(Args, Debug, Serialize)]
pub struct PhiArgs {
    /// Interior vertices.
    #[arg(long)]
    pub n: u64,
    /// Boundary length minus two.
    #[arg(long)]
    pub m: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Percolation,
    Eden,
}

#[derive(Args, Debug, Serialize)]
pub struct ExploreArgs {
    #[arg(long, default_value_t = 10)]
    pub m: u64,
    #[arg(long, default_value_t = 20)]
    pub n: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Percolation)]
    pub mode: ModeArg,
}

#[derive(Args, Debug, Serialize)]
pub struct MullinArgs {
    /// Map edges.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Tree edges; mixed over all values if omitted.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct WilsonArgs {
    /// Grid side.
    #[arg(long, default_value_t = 32)]
    pub size: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct DlaArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapsCmd {
    /// Number of triangulations of an (m+2)-gon with n interior vertices.
    Phi(PhiArgs),
    /// Exact peeling kernel row at (m, n).
    Peel(PhiArgs),
    /// Peeling exploration towards a uniform target edge.
    Explore(ExploreArgs),
    /// Exploration with every necklace re-glued at a uniform offset.
    Reshuffle(ExploreArgs),
    /// Tree-decorated map from a random Mullin walk.
    Mullin(MullinArgs),
    /// Uniform spanning tree of the grid, rooted at vertex 0.
    Wilson(WilsonArgs),
    /// DLA against loop-erased walk statistics on tree-decorated maps.
    CompareDlaLerw(DlaArgs),
}

impl MapsCmd {
    pub fn name(&self) -> &'static str {
        match self {
            MapsCmd::Phi(_) => "phi",
            MapsCmd::Peel(_) => "peel",
            MapsCmd::Explore(_) => "explore",
            MapsCmd::Reshuffle(_) => "reshuffle",
            MapsCmd::Mullin(_) => "mullin",
            MapsCmd::Wilson(_) => "wilson",
            MapsCmd::CompareDlaLerw(_) => "compare-dla-lerw",
        }
    }
}

fn event_cells(e: &RootEvent) -> [String; 4] {
    match e {
        RootEvent::Terminate => ["terminate".into(), String::new(), String::new(), String::new()],
        RootEvent::NewVertex => ["new_vertex".into(), String::new(), String::new(), String::new()],
        RootEvent::Split { m1, n1, first } => ["split".into(), m1.to_string(), n1.to_string(), first.to_string()],
    }
}

fn necklace_table(log: &[Necklace]) -> Table {
    let mut t = Table::new(&["step", "event", "m1", "n1", "first", "side", "bubble_m", "bubble_n", "triangles", "boundary_len", "offset"]);
    for (i, k) in log.iter().enumerate() {
        let [ev, m1, n1, first] = event_cells(&k.event);
        let side = k.side.map(|s| format!("{s:?}").to_lowercase()).unwrap_or_default();
        let (bm, bn) = k.bubble.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
        t.push(vec![
            i.to_string(),
            ev,
            m1,
            n1,
            first,
            side,
            bm,
            bn,
            k.triangles.to_string(),
            k.boundary_len.to_string(),
            k.offset.to_string(),
        ]);
    }
    t
}

pub fn maps(cmd: &MapsCmd, ctx: &mut Ctx) -> CliResult<()> {
    match cmd {
        MapsCmd::Phi(a) => {
            let v = phi(a.n, a.m);
            let mut t = Table::new(&["n", "m", "phi"]);
            t.push(vec![a.n.to_string(), a.m.to_string(), v.to_string()]);
            ctx.table("phi", &t)?;
            println!("{v}");
        }
        MapsCmd::Peel(a) => {
            let mut t = Table::new(&["event", "m1", "n1", "first", "numerator", "denominator"]);
            for (e, p) in kernel_row(a.m, a.n) {
                let [ev, m1, n1, first] = event_cells(&e);
                t.push(vec![ev, m1, n1, first, p.numer().to_string(), p.denom().to_string()]);
            }
            println!("events={}", t.rows.len());
            ctx.table("kernel", &t)?;
        }
        MapsCmd::Explore(a) | MapsCmd::Reshuffle(a) => {
            let mode = match a.mode {
                ModeArg::Percolation => Mode::Percolation,
                ModeArg::Eden => Mode::Eden,
            };
            let ex = explore_seeded(a.m, a.n, mode, ctx.seed)?;
            let mut p = Table::new(&["step", "m", "n"]);
            for (i, (m, n)) in ex.path.iter().enumerate() {
                p.push(vec![i.to_string(), m.to_string(), n.to_string()]);
            }
            ctx.table("path", &p)?;
            let log = if matches!(cmd, MapsCmd::Reshuffle(_)) {
                reshuffle_necklaces(&ex.log, &mut rng::stream(ctx.seed, 1))
            } else {
                ex.log.clone()
            };
            ctx.table("necklaces", &necklace_table(&log))?;
            println!("steps={} triangles={}", ex.log.len(), ex.triangles());
        }
        MapsCmd::Mullin(a) => {
            let w = sample_walk(a.n, a.m, &mut rng::from_seed(ctx.seed))?;
            let map = mullin(&w)?;
            write_map(&map, ctx)?;
            let steps: String = w.steps.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(" ");
            ctx.json("walk", &json!({ "steps": steps }))?;
            println!("vertices={} edges={} faces={}", map.n_vertices, map.n_edges(), map.n_faces());
        }
        MapsCmd::Wilson(a) => {
            if a.size < 2 {
                return Err(CliError::Usage("--size must be at least 2".into()));
            }
            let g = Graph::grid(a.size, a.size);
            let parent = wilson_ust(&g, 0, &mut rng::from_seed(ctx.seed))?;
            let tree: Vec<usize> = parent.iter().copied().filter(|&e| e != usize::MAX).collect();
            let mut t = Table::new(&["vertex", "edge", "parent"]);
            for (v, &e) in parent.iter().enumerate() {
                if e != usize::MAX {
                    t.push(vec![v.to_string(), e.to_string(), g.other(e, v).to_string()]);
                }
            }
            ctx.table("tree", &t)?;
            if ctx.wants_image() {
                ctx.image("tree", &render_tree(&g, &tree, a.size))?;
            }
            println!("edges={}", tree.len());
        }
        MapsCmd::CompareDlaLerw(a) => {
            let s = compare_dla_lerw(&DlaParams { n: a.n, m: a.m, k: a.k }, a.samples, ctx.seed)?;
            let mut t = Table::new(&["statistic", "value", "lerw", "dla"]);
            for key in s.lerw_edges.keys().chain(s.dla_edges.keys()).collect::<std::collections::BTreeSet<_>>() {
                let c = |m: &std::collections::BTreeMap<usize, usize>| m.get(key).copied().unwrap_or(0).to_string();
                t.push(vec!["edges".into(), key.to_string(), c(&s.lerw_edges), c(&s.dla_edges)]);
            }
            for key in s.lerw_unzip.keys().chain(s.dla_unzip.keys()).collect::<std::collections::BTreeSet<_>>() {
                let c = |m: &std::collections::BTreeMap<_, usize>| m.get(key).copied().unwrap_or(0).to_string();
                let v = format!("{}/{}/{}", key.0, key.1, key.2);
                t.push(vec!["unzip".into(), v, c(&s.lerw_unzip), c(&s.dla_unzip)]);
            }
            ctx.table("counts", &t)?;
            ctx.json("summary", &json!({ "samples": s.samples, "tv_edges": s.tv_edges, "tv_unzip": s.tv_unzip }))?;
            println!("samples={} tv_edges={} tv_unzip={}", s.samples, s.tv_edges, s.tv_unzip);
        }
    }
    Ok(())
}

fn write_map(map: &DecoratedMap, ctx: &mut Ctx) -> CliResult<()> {
    let mut e = Table::new(&["edge", "u", "v", "tree"]);
    for k in 0..map.n_edges() {
        let d = 2 * k;
        e.push(vec![k.to_string(), map.vertex[d].to_string(), map.vertex[DecoratedMap::twin(d)].to_string(), map.tree[k].to_string()]);
    }
    ctx.table("edges", &e)?;
    let mut r = Table::new(&["dart", "vertex", "next", "root"]);
    for d in 0..map.vertex.len() {
        r.push(vec![d.to_string(), map.vertex[d].to_string(), map.next[d].to_string(), (map.root == Some(d)).to_string()]);
    }
    ctx.table("rotation", &r)
}

fn render_tree(g: &Graph, tree: &[usize], n: usize) -> Image {
    let s = (512 / n).max(2) as i64;
    let side = (n as i64) * s;
    let mut im = Image::new(side as usize, side as usize, [255, 255, 255]);
    let px = |v: usize| (((v % n) as i64) * s + s / 2, ((v / n) as i64) * s + s / 2);
    for &e in tree {
        let (u, v) = g.edge(e);
        im.line(px(u), px(v), [0, 0, 0]);
    }
    im
}

#[derive(Args, Debug, Serialize)]
pub struct CurveArgs {
    /// γ² runs over 4j/points for j = 1..=points.
    #[arg(long, default_value_t = 48)]
    pub points: usize,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingCmd {
    /// Exponent records on both curves and the dimension d(κ).
    Table(CurveArgs),
    /// η(γ²) on the upper, middle and trivial curves.
    Curves(CurveArgs),
}

impl ScalingCmd {
    pub fn name(&self) -> &'static str {
        match self {
            ScalingCmd::Table(_) => "table",
            ScalingCmd::Curves(_) => "curves",
        }
    }
}

fn grid(points: usize) -> CliResult<Vec<f64>> {
    if points == 0 {
        return Err(CliError::Usage("--points must be positive".into()));
    }
    Ok((1..=points).map(|j| 4.0 * j as f64 / points as f64).collect())
}

pub fn scaling(cmd: &ScalingCmd, ctx: &mut Ctx) -> CliResult<()> {
    match cmd {
        ScalingCmd::Curves(a) => {
            let mut t = Table::new(&["gamma_sq", "upper", "middle", "trivial"]);
            let mut rows = Vec::new();
            for g2 in grid(a.points)? {
                let (u, m) = eta_curves(g2)?;
                rows.push((g2, u, m));
                t.push(vec![num(g2), num(u), num(m), num(-1.0)]);
            }
            print!("{}", t.to_csv());
            ctx.table("curves", &t)?;
            if ctx.wants_image() {
                let pts: Vec<Vec<(f64, f64)>> = vec![
                    rows.iter().map(|r| (r.0, r.1)).collect(),
                    rows.iter().map(|r| (r.0, r.2)).collect(),
                    rows.iter().map(|r| (r.0, -1.0)).collect(),
                ];
                ctx.image("curves", &plot(&pts, (0.0, 4.0), (-1.5, 3.0)))?;
            }
        }
        ScalingCmd::Table(a) => {
            let mut t = Table::new(&["curve", "gamma_sq", "gamma", "kappa", "q", "alpha", "beta", "eta", "d", "delta_bar"]);
            for g2 in grid(a.points)? {
                for (name, c) in [("upper", Curve::Upper), ("middle", Curve::Middle)] {
                    let r = ExponentRecord::on_curve(g2.sqrt(), c)?;
                    t.push(vec![
                        name.into(),
                        num(g2),
                        num(r.gamma),
                        num(r.kappa),
                        num(r.q),
                        num(r.alpha),
                        num(r.beta),
                        num(r.eta),
                        num(r.d),
                        num(r.delta_bar),
                    ]);
                }
            }
            ctx.table("exponents", &t)?;
            let mut d = Table::new(&["kappa", "d"]);
            let mut curve = Vec::new();
            for j in 0..=a.points {
                let k = 10.0 * j as f64 / a.points as f64;
                let v = watabiki_d(k)?;
                curve.push((k, v));
                d.push(vec![num(k), num(v)]);
            }
            ctx.table("dimension", &d)?;
            if ctx.wants_image() {
                ctx.image("dimension", &plot(&[curve], (0.0, 10.0), (0.0, 8.0)))?;
            }
            println!("rows={} dimension_rows={}", t.rows.len(), d.rows.len());
        }
    }
    Ok(())
}

/// Line plot of several series in the box xr × yr.
fn plot(series: &[Vec<(f64, f64)>], xr: (f64, f64), yr: (f64, f64)) -> Image {
    let (w, h) = (640usize, 480usize);
    let mut im = Image::new(w, h, [255, 255, 255]);
    let px = |(x, y): (f64, f64)| {
        let u = (x - xr.0) / (xr.1 - xr.0) * (w as f64 - 1.0);
        let v = (yr.1 - y) / (yr.1 - yr.0) * (h as f64 - 1.0);
        (u.round() as i64, v.round() as i64)
    };
    im.line(px((xr.0, 0.0)), px((xr.1, 0.0)), [160, 160, 160]);
    let colors = [[200, 30, 30], [30, 30, 200], [30, 150, 30]];
    for (i, s) in series.iter().enumerate() {
        for p in s.windows(2) {
            im.line(px(p[0]), px(p[1]), colors[i % colors.len()]);
        }
    }
    im
}
