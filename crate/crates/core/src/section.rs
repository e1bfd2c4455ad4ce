//! Links of germs: the section at a scale `t`, its components, their
//! nesting, and the tangent-cone link obtained as `t → 0`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{clip, march, Grid, Polyline2};
use crate::error::{GermError, Result};
use crate::geom::{dist, lerp, point_polyline_dist, polyline_length, Point};
use crate::germ::{ConeSheet, GermModel, HolderTriangle, ImplicitSheet, Sheet, WINDOW};

/// Grid cells per unit of `t` along each axis.
pub const DEFAULT_RESOLUTION: usize = 256;
pub const MIN_RESOLUTION: usize = 32;
pub const CONVERGENCE_TOL: f64 = 1e-3;
/// Relative gluing tolerance between exactly evaluated pieces.
const EXACT_GLUING: f64 = 1e-9;
/// Samples of the `u` parameter used for Hölder triangles.
const HOLDER_SAMPLES: usize = 17;

/// Components closer than this are joined: four grid cells.
pub fn gluing_tolerance(t: f64, resolution: usize) -> f64 {
    4.0 * t / resolution as f64
}

/// `2^-from, 2^-(from+step), …, 2^-to`.
pub fn dyadic_ladder(from: i32, to: i32, step: i32) -> Vec<f64> {
    (from..=to).step_by(step.max(1) as usize).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub closed: bool,
    pub points: Vec<Point>,
    /// Names of the sheets this component came from.
    #[serde(default)]
    pub tags: Vec<String>,
}

impl Component {
    pub fn length(&self) -> f64 {
        polyline_length(&self.points, self.closed)
    }

    pub fn endpoints(&self) -> Option<(Point, Point)> {
        match (self.closed, self.points.first(), self.points.last()) {
            (false, Some(a), Some(b)) => Some((*a, *b)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyLink {
    pub t: f64,
    pub components: Vec<Component>,
    /// Sheets whose section came out empty at this scale.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub empty_sheets: Vec<String>,
}

impl PolyLink {
    /// The link scaled by `1/t`, so that it lives at `t = 1`.
    pub fn rescaled(&self) -> PolyLink {
        let s = 1.0 / self.t;
        PolyLink {
            t: 1.0,
            components: self
                .components
                .iter()
                .map(|c| Component {
                    closed: c.closed,
                    points: c.points.iter().map(|p| [p[0] * s, p[1] * s, p[2] * s, 1.0]).collect(),
                    tags: c.tags.clone(),
                })
                .collect(),
            empty_sheets: self.empty_sheets.clone(),
        }
    }

    pub fn closed_count(&self) -> usize {
        self.components.iter().filter(|c| c.closed).count()
    }

    pub fn open_count(&self) -> usize {
        self.components.len() - self.closed_count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Wavefront OBJ with one `l` element per polyline segment.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let mut base = 1;
        for (k, c) in self.components.iter().enumerate() {
            let _ = writeln!(out, "o component_{k}");
            for p in &c.points {
                let _ = writeln!(out, "v {} {} {}", p[0], p[1], p[2]);
            }
            let n = c.points.len();
            for i in 0..n.saturating_sub(1) {
                let _ = writeln!(out, "l {} {}", base + i, base + i + 1);
            }
            if c.closed && n > 2 {
                let _ = writeln!(out, "l {} {}", base + n - 1, base);
            }
            base += n;
        }
        out
    }

    /// One point per row: `component,closed,x,y,z,t`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("component,closed,x,y,z,t\n");
        for (k, c) in self.components.iter().enumerate() {
            for p in &c.points {
                let _ = writeln!(out, "{k},{},{},{},{},{}", c.closed, p[0], p[1], p[2], p[3]);
            }
        }
        out
    }
}

/// Section of the germ by `{t = const}`.
pub fn section_at(model: &GermModel, t: f64, resolution: usize) -> Result<PolyLink> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(GermError::InvalidInput(format!("scale t must lie in (0, 1], got {t}")));
    }
    if resolution < MIN_RESOLUTION {
        return Err(GermError::InvalidInput(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    let per_sheet: Vec<(String, bool, Vec<(Vec<Point>, bool)>)> = model
        .sheets
        .par_iter()
        .map(|ns| {
            let exact = !matches!(ns.sheet, Sheet::Implicit(_));
            (ns.name.clone(), exact, sheet_section(&ns.sheet, t, resolution))
        })
        .collect();

    // contour pieces carry discretization error; exactly evaluated pieces only
    // glue where they genuinely meet
    let loose = gluing_tolerance(t, resolution);
    let tight = EXACT_GLUING * t;
    let mut components = Vec::new();
    let mut tols = Vec::new();
    let mut empty_sheets = Vec::new();
    for (name, exact, pieces) in per_sheet {
        if pieces.is_empty() {
            empty_sheets.push(name);
            continue;
        }
        for (points, closed) in pieces {
            components.push(Component { closed, points, tags: vec![name.clone()] });
            tols.push(if exact { tight } else { loose });
        }
    }
    let components = glue_with(components, tols);
    Ok(PolyLink { t, components, empty_sheets })
}

/// Section of a single sheet as `(points, closed)` pieces.
pub fn sheet_section(sheet: &Sheet, t: f64, resolution: usize) -> Vec<(Vec<Point>, bool)> {
    match sheet {
        Sheet::Implicit(s) => implicit_section(s, t, resolution),
        Sheet::Cone(c) => cone_section(c, t),
        Sheet::Holder(h) => vec![holder_section(h, t)],
    }
}

fn implicit_section(s: &ImplicitSheet, t: f64, resolution: usize) -> Vec<(Vec<Point>, bool)> {
    let scaled = s.poly.at_scale(t);
    let cells = (2.0 * WINDOW) as usize * resolution;
    let lines = march(Grid { half: WINDOW, cells }, |x, y| scaled.eval(x, y));
    let g = |p: [f64; 2]| {
        s.constraints
            .iter()
            .map(|c| c.eval(t * p[0], t * p[1], t))
            .fold(f64::INFINITY, f64::min)
    };
    lines
        .iter()
        .flat_map(|l| clip(l, g))
        .map(|Polyline2 { pts, closed }| {
            (pts.into_iter().map(|p| [t * p[0], t * p[1], 0.0, t]).collect(), closed)
        })
        .collect()
}

fn cone_section(c: &ConeSheet, t: f64) -> Vec<(Vec<Point>, bool)> {
    let unit: Vec<Point> = c.curve.iter().map(|v| [v[0], v[1], v[2], 1.0]).collect();
    let scale = |pts: Vec<Point>| -> Vec<Point> {
        pts.into_iter().map(|p| [t * p[0], t * p[1], t * p[2], t]).collect()
    };
    let Some(gap) = &c.gap else {
        return vec![(scale(unit), c.closed)];
    };
    let total = polyline_length(&unit, c.closed);
    let centre = gap.center * total;
    let half = gap.half_width * (gap.beta - crate::Rational::one()).pow_of(t);
    if 2.0 * half >= total {
        return Vec::new();
    }
    if c.closed {
        vec![(scale(arc_range(&unit, true, centre + half, centre - half + total)), false)]
    } else {
        [(0.0, centre - half), (centre + half, total)]
            .into_iter()
            .filter(|(a, b)| b > a)
            .map(|(a, b)| (scale(arc_range(&unit, false, a, b)), false))
            .collect()
    }
}

/// The part of a polyline between arclengths `a < b`; closed curves may wrap once.
fn arc_range(pts: &[Point], closed: bool, a: f64, b: f64) -> Vec<Point> {
    let mut path: Vec<Point> = pts.to_vec();
    if closed {
        path.extend_from_slice(pts);
        path.push(pts[0]);
    }
    let mut cum = vec![0.0];
    for w in path.windows(2) {
        cum.push(cum.last().unwrap() + dist(&w[0], &w[1]));
    }
    let at = |s: f64| -> Point {
        let i = cum.partition_point(|&c| c <= s).clamp(1, cum.len() - 1);
        let l = cum[i] - cum[i - 1];
        let f = if l > 0.0 { ((s - cum[i - 1]) / l).clamp(0.0, 1.0) } else { 0.0 };
        lerp(&path[i - 1], &path[i], f)
    };
    let mut out = vec![at(a)];
    for (p, &c) in path.iter().zip(&cum) {
        if c > a && c < b {
            out.push(*p);
        }
    }
    out.push(at(b));
    out
}

fn holder_section(h: &HolderTriangle, t: f64) -> (Vec<Point>, bool) {
    let n = HOLDER_SAMPLES - 1;
    let pts = (0..=n).map(|i| h.eval(-1.0 + 2.0 * i as f64 / n as f64, t)).collect();
    (pts, false)
}

/// Joins open components whose endpoints lie within `tol`, closest pairs first.
pub fn glue(comps: Vec<Component>, tol: f64) -> Vec<Component> {
    let n = comps.len();
    glue_with(comps, vec![tol; n])
}

/// Gluing with a tolerance per component; a pair uses the larger of the two.
fn glue_with(mut comps: Vec<Component>, mut tols: Vec<f64>) -> Vec<Component> {
    loop {
        let mut best: Option<(f64, usize, bool, usize, bool)> = None;
        let open: Vec<usize> = (0..comps.len()).filter(|&i| !comps[i].closed).collect();
        for (a, &i) in open.iter().enumerate() {
            let ci = &comps[i];
            let ends_i = [(false, ci.points[0]), (true, *ci.points.last().unwrap())];
            if ci.points.len() >= 3 {
                let d = dist(&ends_i[0].1, &ends_i[1].1);
                if d < tols[i] && best.is_none_or(|b| d < b.0) {
                    best = Some((d, i, true, i, false));
                }
            }
            for &j in &open[a + 1..] {
                let cj = &comps[j];
                let tol = tols[i].max(tols[j]);
                for &(ei, pi) in &ends_i {
                    for (ej, pj) in [(false, cj.points[0]), (true, *cj.points.last().unwrap())] {
                        let d = dist(&pi, &pj);
                        if d < tol && best.is_none_or(|b| d < b.0) {
                            best = Some((d, i, ei, j, ej));
                        }
                    }
                }
            }
        }
        let Some((_, i, ei, j, ej)) = best else { break };
        if i == j {
            let c = &mut comps[i];
            if dist(&c.points[0], c.points.last().unwrap()) < 1e-12 * tols[i].max(1e-300) {
                c.points.pop();
            }
            c.closed = true;
            continue;
        }
        let mut cj = comps.remove(j);
        let tj = tols.remove(j);
        tols[i] = tols[i].max(tj);
        let ci = &mut comps[i];
        if !ei {
            ci.points.reverse();
        }
        if ej {
            cj.points.reverse();
        }
        if dist(ci.points.last().unwrap(), &cj.points[0]) == 0.0 {
            cj.points.remove(0);
        }
        ci.points.extend(cj.points);
        let tags: BTreeSet<String> = ci.tags.drain(..).chain(cj.tags).collect();
        ci.tags = tags.into_iter().collect();
    }
    comps
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub closed: usize,
    pub open: usize,
    pub endpoints: Vec<Point>,
    pub lengths: Vec<f64>,
}

pub fn component_analysis(link: &PolyLink) -> ComponentSummary {
    let mut s = ComponentSummary::default();
    for c in &link.components {
        if let Some((a, b)) = c.endpoints() {
            s.open += 1;
            s.endpoints.extend([a, b]);
        } else {
            s.closed += 1;
        }
        s.lengths.push(c.length());
    }
    s
}

/// Smallest share of a curve's length that each side of a pinch must carry.
pub const PINCH_MIN_SHARE: f64 = 0.1;

/// Splits closed components that touch themselves (two non-adjacent stretches
/// closer than `tol`) into separate loops.
pub fn split_pinches(link: &PolyLink, tol: f64) -> PolyLink {
    let mut out = Vec::new();
    let mut stack: Vec<Component> = link.components.iter().rev().cloned().collect();
    while let Some(c) = stack.pop() {
        match c.closed.then(|| find_pinch(&c.points, tol)).flatten() {
            Some((i, j)) => {
                let a: Vec<Point> = c.points[i..j].to_vec();
                let mut b: Vec<Point> = c.points[j..].to_vec();
                b.extend_from_slice(&c.points[..i]);
                stack.push(Component { closed: true, points: b, tags: c.tags.clone() });
                stack.push(Component { closed: true, points: a, tags: c.tags });
            }
            None => out.push(c),
        }
    }
    PolyLink { t: link.t, components: out, empty_sheets: link.empty_sheets.clone() }
}

fn find_pinch(pts: &[Point], tol: f64) -> Option<(usize, usize)> {
    let n = pts.len();
    if n < 6 {
        return None;
    }
    // cumulative arclength, to demand both loops be genuinely long
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        cum.push(cum.last().unwrap() + dist(&w[0], &w[1]));
    }
    let total = cum[n - 1] + dist(&pts[n - 1], &pts[0]);
    // tangent branches stay within `tol` along a stretch; only a split that
    // leaves a sizeable loop on both sides is a pinch
    let min_loop = (8.0 * tol).max(PINCH_MIN_SHARE * total);
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..n {
        for j in i + 2..n {
            let inner = cum[j] - cum[i];
            if inner < min_loop || total - inner < min_loop {
                continue;
            }
            let d = dist(&pts[i], &pts[j]);
            if d < tol && best.is_none_or(|b| d < b.0) {
                best = Some((d, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Rooted forest of closed planar components; `parent[k]` is the smallest curve strictly enclosing `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestingTree {
    pub parent: Vec<Option<usize>>,
}

impl NestingTree {
    pub fn roots(&self) -> Vec<usize> {
        (0..self.parent.len()).filter(|&k| self.parent[k].is_none()).collect()
    }

    pub fn children(&self, k: usize) -> Vec<usize> {
        (0..self.parent.len()).filter(|&c| self.parent[c] == Some(k)).collect()
    }

    /// Canonical string of the unlabelled forest; equal strings mean isomorphic forests.
    pub fn canonical(&self) -> String {
        let mut roots: Vec<String> = self.roots().into_iter().map(|r| self.encode(r)).collect();
        roots.sort();
        roots.concat()
    }

    fn encode(&self, k: usize) -> String {
        let mut kids: Vec<String> = self.children(k).into_iter().map(|c| self.encode(c)).collect();
        kids.sort();
        format!("({})", kids.concat())
    }

    /// Readable form, e.g. `root(2 leaves)` or `root(root(1 leaf)) + leaf`.
    pub fn describe(&self) -> String {
        let mut roots: Vec<(String, usize)> = self.roots().into_iter().map(|r| (self.encode(r), r)).collect();
        roots.sort();
        roots.into_iter().map(|(_, r)| self.describe_node(r)).collect::<Vec<_>>().join(" + ")
    }

    fn describe_node(&self, k: usize) -> String {
        let mut kids: Vec<(String, usize)> = self.children(k).into_iter().map(|c| (self.encode(c), c)).collect();
        if kids.is_empty() {
            return "leaf".into();
        }
        kids.sort();
        let leaves = kids.iter().filter(|(e, _)| e == "()").count();
        let mut parts: Vec<String> =
            kids.iter().filter(|(e, _)| e != "()").map(|&(_, c)| self.describe_node(c)).collect();
        if leaves > 0 {
            parts.push(format!("{leaves} {}", if leaves == 1 { "leaf" } else { "leaves" }));
        }
        format!("root({})", parts.join(", "))
    }

    pub fn isomorphic(&self, other: &NestingTree) -> bool {
        self.canonical() == other.canonical()
    }
}

pub fn nesting_tree(link: &PolyLink) -> Result<NestingTree> {
    let comps = &link.components;
    if let Some(k) = comps.iter().position(|c| !c.closed) {
        return Err(GermError::InvalidInput(format!("component {k} is not closed")));
    }
    if let Some(k) = comps.iter().position(|c| c.points.len() < 3) {
        return Err(GermError::InvalidInput(format!("component {k} has fewer than 3 vertices")));
    }
    let all: Vec<&Point> = comps.iter().flat_map(|c| &c.points).collect();
    if let Some(p0) = all.first() {
        let scale = all.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max).max(1e-300);
        if all.iter().any(|p| (p[2] - p0[2]).abs() > 1e-9 * scale || (p[3] - p0[3]).abs() > 1e-9 * scale) {
            return Err(GermError::InvalidInput("components are not coplanar".into()));
        }
    }
    let polys: Vec<Vec<[f64; 2]>> =
        comps.iter().map(|c| c.points.iter().map(|p| [p[0], p[1]]).collect()).collect();
    let n = polys.len();
    let extent = polys
        .iter()
        .flatten()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(0.0, f64::max)
        .max(1e-300);
    let on_curve = |poly: &[[f64; 2]], p: [f64; 2]| {
        let m = poly.len();
        (0..m).any(|i| seg_dist2(p, poly[i], poly[(i + 1) % m]).sqrt() < 1e-9 * extent)
    };
    // inside[a][b]: curve a lies inside curve b
    let mut inside = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            // vertices lying on the other curve (touching points) carry no information
            let flags: Vec<bool> = polys[a]
                .iter()
                .filter(|&&p| !on_curve(&polys[b], p))
                .map(|&p| contains(&polys[b], p))
                .collect();
            let ins = flags.iter().filter(|&&f| f).count();
            if ins != 0 && ins != flags.len() {
                return Err(GermError::InvalidInput(format!("components {a} and {b} intersect")));
            }
            inside[a][b] = !flags.is_empty() && ins == flags.len();
        }
    }
    let parent = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| inside[a][b])
                .min_by(|&x, &y| area(&polys[x]).abs().total_cmp(&area(&polys[y]).abs()))
        })
        .collect();
    Ok(NestingTree { parent })
}

fn area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// Point-in-polygon by winding number; a point on the boundary is nudged
/// along `+x` by half the mean edge length and retested.
pub fn contains(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = poly.len();
    let mean_edge = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
        })
        .sum::<f64>()
        / n as f64;
    let near = (0..n).any(|i| seg_dist2(p, poly[i], poly[(i + 1) % n]).sqrt() < 1e-9 * mean_edge.max(1e-300));
    let q = if near { [p[0] + 0.5 * mean_edge, p[1]] } else { p };
    winding(poly, q) != 0
}

fn seg_dist2(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    let s = if l2 > 0.0 { (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let d = [p[0] - a[0] - s * ab[0], p[1] - a[1] - s * ab[1]];
    d[0] * d[0] + d[1] * d[1]
}

fn winding(poly: &[[f64; 2]], p: [f64; 2]) -> i32 {
    let n = poly.len();
    let mut w = 0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        if a[1] <= p[1] {
            if b[1] > p[1] && cross > 0.0 {
                w += 1;
            }
        } else if b[1] <= p[1] && cross < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Symmetric Hausdorff distance between the vertex sets of two links, each
/// vertex measured against the other link's polylines.
pub fn hausdorff(a: &PolyLink, b: &PolyLink) -> f64 {
    match (a.components.is_empty(), b.components.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    directed(a, b).max(directed(b, a))
}

fn directed(a: &PolyLink, b: &PolyLink) -> f64 {
    let pts: Vec<&Point> = a.components.iter().flat_map(|c| &c.points).collect();
    pts.par_iter()
        .map(|p| {
            b.components
                .iter()
                .map(|c| point_polyline_dist(p, &c.points, c.closed))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub ladder: Vec<f64>,
    /// `distances[i]` compares the rescaled sections at rungs `i` and `i + 1`.
    pub distances: Vec<f64>,
    pub tolerance: f64,
    pub converged: bool,
    /// First rung from which the stopping rule holds, if any.
    pub converged_at: Option<usize>,
}

impl ConvergenceReport {
    pub fn new(ladder: Vec<f64>, distances: Vec<f64>, tolerance: f64) -> Self {
        let rule = |d: &[f64]| -> bool {
            let Some(&last) = d.last() else { return false };
            let tail = &d[d.len().saturating_sub(3)..];
            last < tolerance && tail.windows(2).all(|w| w[1] <= w[0] + 1e-9)
        };
        let converged = rule(&distances);
        let converged_at = (1..=distances.len()).find(|&k| rule(&distances[..k]));
        Self { ladder, distances, tolerance, converged, converged_at }
    }
}

/// Sections along a decreasing ladder of scales, rescaled to `t = 1`; the
/// last one approximates the link of the tangent cone.
pub fn tangent_cone_link(
    model: &GermModel,
    ladder: &[f64],
    resolution: usize,
) -> Result<(PolyLink, ConvergenceReport)> {
    if ladder.len() < 4 {
        return Err(GermError::InvalidInput(format!("ladder needs at least 4 rungs, got {}", ladder.len())));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(GermError::InvalidInput("ladder must be strictly decreasing".into()));
    }
    let mut prev: Option<PolyLink> = None;
    let mut distances = Vec::new();
    for &t in ladder {
        let cur = section_at(model, t, resolution)?.rescaled();
        if let Some(p) = &prev {
            distances.push(hausdorff(p, &cur));
        }
        prev = Some(cur);
    }
    let report = ConvergenceReport::new(ladder.to_vec(), distances, CONVERGENCE_TOL);
    Ok((prev.unwrap(), report))
}
