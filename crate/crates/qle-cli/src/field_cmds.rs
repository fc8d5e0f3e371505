//! `gff-sample` and `lqg-tile`.

use clap::{Args, ValueEnum};
use qlekit::field::{sample_dgff_seeded, Boundary, LatticeField};
use qlekit::io::{self, diverging, num, rainbow, Image, Table};
use qlekit::lqg::{lqg_mass, square_decompose, SquareTiling};
use serde::Serialize;

use crate::error::CliResult;
use crate::output::Ctx;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Zero,
    Free,
}

impl From<Bc> for Boundary {
    fn from(b: Bc) -> Self {
        match b {
            Bc::Zero => Boundary::Zero,
            Bc::Free => Boundary::Free,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct GffArgs {
    /// Grid side.
    #[arg(long, default_value_t = 129)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Bc::Zero)]
    pub bc: Bc,
}

pub fn gff_sample(a: &GffArgs, ctx: &mut Ctx) -> CliResult<()> {
    let f = sample_dgff_seeded(a.n, a.bc.into(), ctx.seed)?;
    let mut t = Table::new(&["i", "j", "value"]);
    for i in 0..f.n {
        for j in 0..f.n {
            t.push(vec![i.to_string(), j.to_string(), num(f.get(i, j))]);
        }
    }
    ctx.table("field", &t)?;
    io::write_field_snapshot(&ctx.path("field.bin"), &f)?;
    ctx.file("field.bin");
    let (mean, var) = moments(&f.values);
    if ctx.wants_image() {
        ctx.image("field", &render_field(&f, 3.0 * var.sqrt()))?;
    }
    println!("n={} mean={} variance={}", f.n, mean, var);
    Ok(())
}

fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len().max(1) as f64;
    let mean = v.iter().sum::<f64>() / n;
    (mean, v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

fn render_field(f: &LatticeField, scale: f64) -> Image {
    let mut im = Image::new(f.n, f.n, [0, 0, 0]);
    for i in 0..f.n {
        for j in 0..f.n {
            im.set(j as i64, i as i64, diverging(f.get(i, j), scale));
        }
    }
    im
}

#[derive(Args, Debug, Serialize)]
pub struct TileArgs {
    /// Grid side, a power of two.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub gamma: f64,
    /// Squares are split while their mass is at least δ.
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = Bc::Zero)]
    pub bc: Bc,
}

/// Samples a field and its δ-tiling; shared with the growth commands.
pub fn tiling(n: usize, bc: Bc, gamma: f64, delta: f64, seed: u64) -> CliResult<SquareTiling> {
    let f = sample_dgff_seeded(n, bc.into(), seed)?;
    Ok(square_decompose(&lqg_mass(&f, gamma)?, delta)?)
}

pub fn lqg_tile(a: &TileArgs, ctx: &mut Ctx) -> CliResult<()> {
    let tl = tiling(a.n, a.bc, a.gamma, a.delta, ctx.seed)?;
    let mut t = Table::new(&["x", "y", "size", "mass", "depth", "floor"]);
    let mut leaves = 0;
    let mut floor = 0;
    for s in tl.leaves() {
        leaves += 1;
        floor += s.floor as usize;
        t.push(vec![s.x.to_string(), s.y.to_string(), s.size.to_string(), num(s.mass), s.depth.to_string(), s.floor.to_string()]);
    }
    ctx.table("tiles", &t)?;
    if ctx.wants_image() {
        ctx.image("tiles", &render_tiling(&tl, a.n))?;
    }
    println!("leaves={leaves} floor={floor} mass={}", tl.leaf_mass_sum());
    Ok(())
}

/// Squares colored by Euclidean size (small blue, large red), outlined in
/// black.
pub fn render_tiling(tl: &SquareTiling, n: usize) -> Image {
    let scale = (1024 / n.max(1)).max(1);
    let side = n * scale;
    let mut im = Image::new(side, side, [0, 0, 0]);
    let top = (n.max(1) as f64).log2().max(1.0);
    for s in tl.leaves() {
        let c = rainbow((s.size as f64).log2() / top);
        let (x, y, w) = (s.x * scale, s.y * scale, s.size * scale);
        im.fill_rect(x, y, w, w, [0, 0, 0]);
        if w > 2 {
            im.fill_rect(x + 1, y + 1, w - 1, w - 1, c);
        } else {
            im.fill_rect(x, y, w, w, c);
        }
    }
    im
}
