//! Deterministic SVG of a 2D coordinate projection of a complex or a fan.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Result};
use clap::ValueEnum;
use lelek::fans::Fan;
use lelek::mahavier::{project, SegmentComplex};
use lelek::rational::{to_fixed, Q};
use lelek::relations::BranchLabel;
use num_traits::{One, Zero};

const PALETTE: [&str; 8] = ["#1f4e79", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#16a085", "#7f8c8d", "#2c3e50"];
const DIGITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorBy {
    /// Number of non-identity letters in a segment's word, or edges of a leg.
    WordLength,
    LegId,
}

#[derive(Debug, Clone)]
pub struct RenderSpec {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    pub stroke: Q,
    pub coords: (i64, i64),
    pub color_by: ColorBy,
}

impl RenderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            bail!("width and height must be positive");
        }
        if 2 * self.margin >= self.width.min(self.height) {
            bail!("margin leaves no room to draw");
        }
        if self.stroke <= Q::zero() {
            bail!("stroke width must be positive");
        }
        if self.coords.0 == self.coords.1 {
            bail!("projection coordinates must differ");
        }
        Ok(())
    }
}

/// Polylines in the projection plane with a colour index each.
pub struct Drawing {
    pub items: Vec<(Vec<(Q, Q)>, usize)>,
}

pub fn complex_drawing(cx: &SegmentComplex, spec: &RenderSpec) -> Result<Drawing> {
    let items = project(cx, spec.coords.0, spec.coords.1)?
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            let colour = match spec.color_by {
                ColorBy::WordLength => s.word.iter().filter(|&&b| cx.relation.branches[b].label != BranchLabel::Identity).count(),
                ColorBy::LegId => k,
            };
            (vec![s.from, s.to], colour)
        })
        .collect();
    Ok(Drawing { items })
}

pub fn fan_drawing(fan: &Fan, spec: &RenderSpec) -> Result<Drawing> {
    let dim = fan.top.len() as i64;
    let pos = |i: i64| -> Result<usize> {
        if i < 1 || i > dim {
            bail!("coordinate {i} is outside 1..={dim}");
        }
        Ok((i - 1) as usize)
    };
    let (pi, pj) = (pos(spec.coords.0)?, pos(spec.coords.1)?);
    let items = fan
        .legs
        .iter()
        .map(|l| {
            let pts = l.polyline.iter().map(|p| (p[pi].clone(), p[pj].clone())).collect();
            let colour = match spec.color_by {
                ColorBy::WordLength => l.polyline.len() - 1,
                ColorBy::LegId => l.id,
            };
            (pts, colour)
        })
        .collect();
    Ok(Drawing { items })
}

pub fn svg(drawing: &Drawing, spec: &RenderSpec) -> Result<String> {
    spec.validate()?;
    let all = drawing.items.iter().flat_map(|(p, _)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (None::<Q>, None::<Q>, None::<Q>, None::<Q>);
    for (x, y) in all {
        x0 = Some(x0.map_or(x.clone(), |v| v.min(x.clone())));
        x1 = Some(x1.map_or(x.clone(), |v| v.max(x.clone())));
        y0 = Some(y0.map_or(y.clone(), |v| v.min(y.clone())));
        y1 = Some(y1.map_or(y.clone(), |v| v.max(y.clone())));
    }
    let (x0, x1, y0, y1) = match (x0, x1, y0, y1) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Err(anyhow!("nothing to draw")),
    };
    let extent = |lo: &Q, hi: &Q| if hi > lo { hi - lo } else { Q::one() };
    let (ex, ey) = (extent(&x0, &x1), extent(&y0, &y1));
    let m = Q::from_integer(spec.margin.into());
    let w = Q::from_integer(spec.width.into());
    let h = Q::from_integer(spec.height.into());
    let sx = (&w - &m * Q::from_integer(2.into())) / ex;
    let sy = (&h - &m * Q::from_integer(2.into())) / ey;
    let px = |x: &Q| to_fixed(&(&m + (x - &x0) * &sx), DIGITS);
    let py = |y: &Q| to_fixed(&(&h - &m - (y - &y0) * &sy), DIGITS);

    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">"#,
        spec.width, spec.height
    )?;
    writeln!(out, r#"<rect width="{}" height="{}" fill="white"/>"#, spec.width, spec.height)?;
    writeln!(out, r#"<g fill="none" stroke-width="{}" stroke-linecap="round">"#, to_fixed(&spec.stroke, DIGITS))?;
    for (pts, colour) in &drawing.items {
        let c = PALETTE[colour % PALETTE.len()];
        let mut d = String::new();
        for (k, (x, y)) in pts.iter().enumerate() {
            if k > 0 {
                d.push(' ');
            }
            write!(d, "{}{} {}", if k == 0 { "M" } else { "L" }, px(x), py(y))?;
        }
        if pts.len() == 1 || pts.windows(2).all(|w| w[0] == w[1]) {
            let (x, y) = &pts[0];
            writeln!(out, r#"<circle cx="{}" cy="{}" r="{}" fill="{c}"/>"#, px(x), py(y), to_fixed(&spec.stroke, DIGITS))?;
        } else {
            writeln!(out, r#"<path d="{d}" stroke="{c}"/>"#)?;
        }
    }
    writeln!(out, "</g>")?;
    writeln!(out, "</svg>")?;
    Ok(out)
}
