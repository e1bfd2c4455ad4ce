//! Metric quantities of germs: tangency orders of arcs, inner distance
//! exponents, distances to sheets and empirical bi-Lipschitz distortion.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};
use crate::fit::{fit_power_law, FitOutcome, MIN_RUNGS};
use crate::geom::{dist, point_at_fraction, point_polyline_dist, Point};
use crate::germ::{ArcSpec, GermModel, PLMap, PowerArc, Sheet};
use crate::section::{section_at, sheet_section};

/// Scale layers below each rung in the inner-distance mesh, halving each time.
const MESH_LAYERS: usize = 12;
/// Levels per octave in a distance band.
const BAND_LEVELS_PER_OCTAVE: i32 = 16;
pub const MIN_DISTORTION_SAMPLES: usize = 10_000;
/// Mapped samples must land within this multiple of `t` of their target sheet.
pub const ON_TARGET_TOL: f64 = 1e-6;

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.len() < MIN_RUNGS {
        return Err(GermError::InvalidInput(format!(
            "ladder needs at least {MIN_RUNGS} rungs, got {}",
            ladder.len()
        )));
    }
    Ok(())
}

/// Exponent of `‖a(t) − b(t)‖` as `t → 0`.
pub fn tangency_order<A, B>(a: A, b: B, ladder: &[f64]) -> Result<FitOutcome>
where
    A: Fn(f64) -> Result<Point>,
    B: Fn(f64) -> Result<Point>,
{
    check_ladder(ladder)?;
    let values = ladder.iter().map(|&t| Ok(dist(&a(t)?, &b(t)?))).collect::<Result<Vec<_>>>()?;
    fit_power_law(ladder, &values)
}

pub fn tangency_order_power(a: &PowerArc, b: &PowerArc, ladder: &[f64]) -> Result<FitOutcome> {
    tangency_order(|t| Ok(a.eval(t)), |t| Ok(b.eval(t)), ladder)
}

/// Tangency order of two named arcs of a model.
pub fn tangency_order_arcs(model: &GermModel, a: &str, b: &str, ladder: &[f64]) -> Result<FitOutcome> {
    tangency_order(|t| model.eval_arc(a, t), |t| model.eval_arc(b, t), ladder)
}

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0)
    }
}

struct Graph {
    points: Vec<Point>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    fn add_node(&mut self, p: Point) -> usize {
        self.points.push(p);
        self.adj.push(Vec::new());
        self.points.len() - 1
    }

    fn connect(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let d = dist(&self.points[a], &self.points[b]);
        self.adj[a].push((b, d));
        self.adj[b].push((a, d));
    }

    fn shortest(&self, from: usize, to: usize) -> Option<f64> {
        let mut best = vec![f64::INFINITY; self.points.len()];
        let mut heap = BinaryHeap::new();
        best[from] = 0.0;
        heap.push((Dist(0.0), from));
        while let Some((Dist(d), u)) = heap.pop() {
            if u == to {
                return Some(d);
            }
            if d > best[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < best[v] {
                    best[v] = nd;
                    heap.push((Dist(nd), v));
                }
            }
        }
        None
    }
}

fn arc_sheet(spec: &ArcSpec) -> Option<&str> {
    match spec {
        ArcSpec::Power { sheet, .. } => sheet.as_deref(),
        ArcSpec::Implicit { sheet, .. } => Some(sheet),
    }
}

fn nearest(points: &[Point], candidates: &[usize], p: &Point) -> Option<usize> {
    candidates.iter().copied().min_by(|&a, &b| dist(&points[a], p).total_cmp(&dist(&points[b], p)))
}

/// Length of a shortest path inside the germ between two named arcs at scale `t`.
///
/// The germ is meshed by its sections at `t, t/2, …`; consecutive sections
/// are joined by nearest-vertex edges and the innermost one is collapsed to the origin.
pub fn inner_distance(model: &GermModel, arc1: &str, arc2: &str, t: f64, resolution: usize) -> Result<f64> {
    let spec = |name: &str| {
        model.arc(name).ok_or_else(|| GermError::InvalidInput(format!("unknown arc {name:?}")))
    };
    let (s1, s2) = (spec(arc1)?, spec(arc2)?);
    let p1 = model.eval_arc_spec(s1, t)?;
    let p2 = model.eval_arc_spec(s2, t)?;
    if dist(&p1, &p2) == 0.0 {
        return Ok(0.0);
    }

    let links = (0..=MESH_LAYERS)
        .into_par_iter()
        .map(|j| section_at(model, t * 0.5f64.powi(j as i32), resolution))
        .collect::<Result<Vec<_>>>()?;

    let mut g = Graph { points: Vec::new(), adj: Vec::new() };
    // per layer: node ids, and node ids grouped by sheet tag
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut top_by_sheet: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (j, link) in links.iter().enumerate() {
        let mut ids = Vec::new();
        for c in &link.components {
            let first = g.points.len();
            for p in &c.points {
                ids.push(g.add_node(*p));
            }
            let last = g.points.len() - 1;
            for k in first..last {
                g.connect(k, k + 1);
            }
            if c.closed && last > first + 1 {
                g.connect(last, first);
            }
            if j == 0 {
                for tag in &c.tags {
                    top_by_sheet.entry(tag.clone()).or_default().extend(first..=last);
                }
            }
        }
        layers.push(ids);
    }
    let links_between: Vec<Vec<(usize, usize)>> = layers
        .par_windows(2)
        .map(|w| {
            let (upper, lower) = (&w[0], &w[1]);
            let mut e = Vec::new();
            for &a in upper {
                if let Some(b) = nearest(&g.points, lower, &g.points[a]) {
                    e.push((a, b));
                }
            }
            for &b in lower {
                if let Some(a) = nearest(&g.points, upper, &g.points[b]) {
                    e.push((a, b));
                }
            }
            e
        })
        .collect();
    for (a, b) in links_between.into_iter().flatten() {
        g.connect(a, b);
    }
    let origin = g.add_node([0.0, 0.0, 0.0, 0.0]);
    for &v in layers.last().unwrap() {
        g.connect(origin, v);
    }

    let all_top = layers[0].clone();
    let attach = |g: &mut Graph, p: Point, sheet: Option<&str>| -> Result<usize> {
        let pool = sheet.and_then(|s| top_by_sheet.get(s)).unwrap_or(&all_top);
        let v = nearest(&g.points, pool, &p).ok_or(GermError::Disconnected { rung: t })?;
        let id = g.add_node(p);
        g.connect(id, v);
        Ok(id)
    };
    let a = attach(&mut g, p1, arc_sheet(s1))?;
    let b = attach(&mut g, p2, arc_sheet(s2))?;
    g.shortest(a, b).ok_or(GermError::Disconnected { rung: t })
}

/// Exponent of the inner distance between two arcs.
pub fn inner_distance_exponent(
    model: &GermModel,
    arc1: &str,
    arc2: &str,
    ladder: &[f64],
    resolution: usize,
) -> Result<FitOutcome> {
    check_ladder(ladder)?;
    let values = ladder
        .iter()
        .map(|&t| inner_distance(model, arc1, arc2, t, resolution))
        .collect::<Result<Vec<_>>>()?;
    fit_power_law(ladder, &values)
}

/// Sections of one sheet over the scales `t · [1/2, 2]`, for distance queries near scale `t`.
pub struct SheetBand {
    levels: Vec<(f64, Vec<(Vec<Point>, bool)>)>,
}

impl SheetBand {
    pub fn new(sheet: &Sheet, t: f64, resolution: usize) -> Self {
        let levels = (-BAND_LEVELS_PER_OCTAVE..=BAND_LEVELS_PER_OCTAVE)
            .map(|j| t * 2f64.powf(j as f64 / BAND_LEVELS_PER_OCTAVE as f64))
            .filter(|&s| s > 0.0 && s <= 1.0)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|s| (s, sheet_section(sheet, s, resolution)))
            .collect();
        Self { levels }
    }

    pub fn distance(&self, p: &Point) -> f64 {
        let mut order: Vec<&(f64, Vec<(Vec<Point>, bool)>)> = self.levels.iter().collect();
        order.sort_by(|a, b| (a.0 - p[3]).abs().total_cmp(&(b.0 - p[3]).abs()));
        let mut best = f64::INFINITY;
        for (s, pieces) in order {
            // every point of a level is at least |s − t| away
            if (s - p[3]).abs() >= best {
                break;
            }
            for (pts, closed) in pieces {
                best = best.min(point_polyline_dist(p, pts, *closed));
            }
        }
        best
    }
}

/// Euclidean distance from `p` to a sheet, sampled on a band of sections around the scale of `p`.
pub fn distance_to_sheet(p: &Point, sheet: &Sheet, resolution: usize) -> f64 {
    SheetBand::new(sheet, p[3], resolution).distance(p)
}

/// How far `p` is from lying on `sheet`, to first order.
pub fn off_sheet_distance(p: &Point, sheet: &Sheet, resolution: usize) -> f64 {
    let t = p[3];
    match sheet {
        Sheet::Implicit(s) => {
            let f = |x: f64, y: f64, t: f64| s.poly.eval(x, y, t);
            let h = 1e-6 * t.max(1e-300);
            let gx = (f(p[0] + h, p[1], t) - f(p[0] - h, p[1], t)) / (2.0 * h);
            let gy = (f(p[0], p[1] + h, t) - f(p[0], p[1] - h, t)) / (2.0 * h);
            let gt = (f(p[0], p[1], t + h) - f(p[0], p[1], t - h)) / (2.0 * h);
            let grad = (gx * gx + gy * gy + gt * gt).sqrt();
            let v = f(p[0], p[1], t).abs();
            let level = if grad > 0.0 { v / grad } else if v == 0.0 { 0.0 } else { f64::INFINITY };
            let violation = s
                .constraints
                .iter()
                .map(|g| (-g.eval(p[0], p[1], t)).max(0.0))
                .fold(0.0, f64::max);
            level.max(violation).max(p[2].abs())
        }
        _ => sheet_section(sheet, t, resolution)
            .iter()
            .map(|(pts, closed)| point_polyline_dist(p, pts, *closed))
            .fold(f64::INFINITY, f64::min),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleDistortion {
    pub t: f64,
    pub min: f64,
    pub max: f64,
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub scales: Vec<ScaleDistortion>,
    pub global_min: f64,
    pub global_max: f64,
    pub samples: usize,
    pub seed: u64,
    /// Largest distance of a mapped sample from its target sheet, divided by its scale.
    pub max_off_target: f64,
}

impl DistortionReport {
    pub fn ratio(&self) -> f64 {
        self.global_max / self.global_min
    }

    /// Largest relative spread of the per-scale minima or maxima across scales.
    pub fn variation(&self) -> f64 {
        let spread = |vals: Vec<f64>| {
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi / lo - 1.0
        };
        let mins = spread(self.scales.iter().map(|s| s.min).collect());
        let maxs = spread(self.scales.iter().map(|s| s.max).collect());
        mins.max(maxs)
    }

    pub fn certified(&self, max_ratio: f64, max_variation: f64) -> bool {
        self.global_min > 0.0
            && self.global_max.is_finite()
            && self.ratio() <= max_ratio
            && self.variation() < max_variation
    }
}

/// Sample positions on one sheet's section at one scale.
struct Pool {
    pieces: Vec<(Vec<Point>, bool)>,
    exact: bool,
}

impl Pool {
    /// Draws a point from two uniforms: exact sections are sampled along
    /// their segments, contour sections only at their (exact) vertices.
    fn draw(&self, u: f64, v: f64) -> Option<Point> {
        if self.pieces.is_empty() {
            return None;
        }
        let k = ((u * self.pieces.len() as f64) as usize).min(self.pieces.len() - 1);
        let (pts, closed) = &self.pieces[k];
        if self.exact {
            Some(point_at_fraction(pts, *closed, v))
        } else {
            Some(pts[((v * pts.len() as f64) as usize).min(pts.len() - 1)])
        }
    }
}

/// Empirical distortion of a piecewise map over dyadic scales `2^-10 … 1`.
///
/// Every scale replays the same random stream, so differences between
/// scales reflect the geometry rather than sampling noise. Pairs are taken
/// within and across sheets, half of them across two adjacent scales.
pub fn certify_bilipschitz(
    map: &PLMap,
    source: &GermModel,
    target: &GermModel,
    samples: usize,
    seed: u64,
    resolution: usize,
) -> Result<DistortionReport> {
    if samples < MIN_DISTORTION_SAMPLES {
        return Err(GermError::InvalidInput(format!(
            "need at least {MIN_DISTORTION_SAMPLES} samples, got {samples}"
        )));
    }
    map.check_cover(source)?;
    for p in &map.pieces {
        if target.sheet(&p.target).is_none() {
            return Err(GermError::InvalidInput(format!("map targets unknown sheet {:?}", p.target)));
        }
    }
    let scales: Vec<f64> = (0..=10).rev().map(|k| 2f64.powi(-k)).collect();
    let mut pool_scales = scales.clone();
    pool_scales.insert(0, scales[0] / 2.0);
    let pools: Vec<Vec<Pool>> = pool_scales
        .par_iter()
        .map(|&t| {
            source
                .sheets
                .iter()
                .map(|ns| Pool {
                    pieces: sheet_section(&ns.sheet, t, resolution),
                    exact: !matches!(ns.sheet, Sheet::Implicit(_)),
                })
                .collect()
        })
        .collect();

    let per_scale = samples.div_ceil(scales.len());
    let n_sheets = source.sheets.len();
    let pieces: Vec<_> = source.sheets.iter().map(|s| map.piece(&s.name).unwrap()).collect();
    let targets: Vec<&Sheet> = pieces.iter().map(|p| target.sheet(&p.target).unwrap()).collect();

    let results = scales
        .par_iter()
        .enumerate()
        .map(|(si, &t)| -> Result<(ScaleDistortion, f64)> {
            let here = &pools[si + 1];
            let below = &pools[si];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut lo, mut hi, mut pairs, mut off) = (f64::INFINITY, 0.0f64, 0, 0.0f64);
            let mut mapped = |k: usize, p: Point| -> Result<Point> {
                let q = pieces[k].map.apply(&p);
                let d = off_sheet_distance(&q, targets[k], resolution);
                if d > ON_TARGET_TOL * p[3] {
                    return Err(GermError::NotOnTarget { sheet: pieces[k].source.clone(), t: p[3], distance: d });
                }
                off = off.max(d / p[3]);
                Ok(q)
            };
            for _ in 0..per_scale {
                let a = rng.gen_range(0..n_sheets);
                let b = rng.gen_range(0..n_sheets);
                let cross_scale = rng.gen_bool(0.5);
                let (u1, v1, u2, v2) = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
                let pool_b = if cross_scale { &below[b] } else { &here[b] };
                let (Some(p), Some(q)) = (here[a].draw(u1, v1), pool_b.draw(u2, v2)) else {
                    continue;
                };
                let d = dist(&p, &q);
                if d < 1e-300 {
                    continue;
                }
                let fp = mapped(a, p)?;
                let fq = mapped(b, q)?;
                let r = dist(&fp, &fq) / d;
                lo = lo.min(r);
                hi = hi.max(r);
                pairs += 1;
            }
            if pairs == 0 {
                return Err(GermError::Degenerate(format!("no sample pairs at t = {t}")));
            }
            Ok((ScaleDistortion { t, min: lo, max: hi, pairs }, off))
        })
        .collect::<Result<Vec<_>>>()?;

    let max_off_target = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let scales: Vec<ScaleDistortion> = results.into_iter().map(|r| r.0).collect();
    Ok(DistortionReport {
        global_min: scales.iter().map(|s| s.min).fold(f64::INFINITY, f64::min),
        global_max: scales.iter().map(|s| s.max).fold(0.0, f64::max),
        samples: scales.iter().map(|s| s.pairs).sum(),
        scales,
        seed,
        max_off_target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::{
        make_cone_sheet, make_holder_triangle, make_implicit_sheet, unit_t_constraints, PieceMap, Sign,
    };
    use crate::poly::Poly;
    use crate::section::dyadic_ladder;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn bridge() -> GermModel {
        GermModel::single(3, "T+", make_holder_triangle(r(2, 1), r(3, 1), Sign::Plus).unwrap())
            .with_sheet("T-", make_holder_triangle(r(2, 1), r(3, 1), Sign::Minus).unwrap())
            .with_arc(
                "up",
                ArcSpec::Power { arc: PowerArc::new(&[], &[(1.0, r(3, 1))], &[]), sheet: Some("T+".into()) },
            )
            .with_arc(
                "down",
                ArcSpec::Power { arc: PowerArc::new(&[], &[(-1.0, r(3, 1))], &[]), sheet: Some("T-".into()) },
            )
    }

    #[test]
    fn bridge_arcs_have_order_q() {
        let f = tangency_order_arcs(&bridge(), "up", "down", &dyadic_ladder(4, 14, 1)).unwrap();
        assert!((f.slope() - 3.0).abs() < 0.01);
    }

    #[test]
    fn tangency_is_symmetric() {
        let m = bridge();
        let l = dyadic_ladder(4, 14, 1);
        let a = tangency_order_arcs(&m, "up", "down", &l).unwrap().slope();
        let b = tangency_order_arcs(&m, "down", "up", &l).unwrap().slope();
        assert_eq!(a, b);
    }

    #[test]
    fn arc_with_itself_is_coincident() {
        let f = tangency_order_arcs(&bridge(), "up", "up", &dyadic_ladder(4, 14, 1)).unwrap();
        assert!(f.is_coincident());
    }

    #[test]
    fn short_ladder_rejected() {
        assert!(tangency_order_arcs(&bridge(), "up", "down", &dyadic_ladder(4, 7, 1)).is_err());
    }

    #[test]
    fn bridge_inner_distance_has_exponent_one() {
        let m = bridge();
        let f = inner_distance_exponent(&m, "up", "down", &dyadic_ladder(3, 9, 1), 64).unwrap();
        assert!((f.slope() - 1.0).abs() < 0.1, "slope {}", f.slope());
        let outer = tangency_order_arcs(&m, "up", "down", &dyadic_ladder(3, 9, 1)).unwrap();
        assert!(f.slope() <= outer.slope() + 0.1);
    }

    #[test]
    fn inner_distance_same_point_is_coincident() {
        let f = inner_distance_exponent(&bridge(), "up", "up", &dyadic_ladder(3, 8, 1), 64).unwrap();
        assert!(f.is_coincident());
    }

    #[test]
    fn disconnected_arcs_are_reported() {
        // a lone arc off any sheet still attaches; a model with no sections cannot
        let f = &(&Poly::x().pow(2) + &Poly::y().pow(2)) + &Poly::t().pow(2);
        let m = GermModel::single(3, "E", make_implicit_sheet(f, unit_t_constraints()).unwrap())
            .with_arc("a", ArcSpec::Power { arc: PowerArc::new(&[(1.0, r(1, 1))], &[], &[]), sheet: None })
            .with_arc("b", ArcSpec::Power { arc: PowerArc::new(&[(-1.0, r(1, 1))], &[], &[]), sheet: None });
        let e = inner_distance(&m, "a", "b", 0.25, 32).unwrap_err();
        assert!(matches!(e, GermError::Disconnected { rung } if rung == 0.25));
    }

    #[test]
    fn distance_to_plane_sheet() {
        // the plane x = 0, as an implicit sheet
        let s = make_implicit_sheet(Poly::x(), unit_t_constraints()).unwrap();
        let t = 0.125;
        let d = distance_to_sheet(&[t, 0.1 * t, 0.0, t], &s, 64);
        assert!((d - t).abs() < 1e-12, "{d}");
        let on = distance_to_sheet(&[0.0, 0.3 * t, 0.0, t], &s, 64);
        assert!(on < 2.0 * t / 64.0);
    }

    #[test]
    fn identity_has_unit_distortion() {
        let circle: Vec<[f64; 3]> = (0..40)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / 40.0;
                [1.0 + 0.5 * a.cos(), 0.5 * a.sin(), 0.0]
            })
            .collect();
        let m = GermModel::single(3, "C", make_cone_sheet(circle, true).unwrap())
            .with_sheet("T", make_holder_triangle(r(3, 2), r(2, 1), Sign::Plus).unwrap());
        let rep = certify_bilipschitz(&PLMap::identity(&m), &m, &m, 10_000, 0, 64).unwrap();
        assert!((rep.global_min - 1.0).abs() < 1e-12 && (rep.global_max - 1.0).abs() < 1e-12);
        assert!(rep.certified(100.0, 0.1));
        assert!(rep.samples >= 10_000);
    }

    #[test]
    fn off_target_map_is_rejected() {
        let circle: Vec<[f64; 3]> = (0..16)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / 16.0;
                [1.0 + 0.5 * a.cos(), 0.5 * a.sin(), 0.0]
            })
            .collect();
        let m = GermModel::single(3, "C", make_cone_sheet(circle, true).unwrap());
        let mut mat = [[0.0; 4]; 4];
        for (i, row) in mat.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        mat[0][3] = 0.5;
        let map = PLMap {
            pieces: vec![crate::germ::MapPiece {
                source: "C".into(),
                target: "C".into(),
                map: PieceMap::Linear { matrix: mat },
            }],
        };
        let e = certify_bilipschitz(&map, &m, &m, 10_000, 0, 64).unwrap_err();
        assert!(matches!(e, GermError::NotOnTarget { ref sheet, .. } if sheet == "C"));
    }

    #[test]
    fn too_few_samples_rejected() {
        let m = bridge();
        assert!(certify_bilipschitz(&PLMap::identity(&m), &m, &m, 100, 0, 64).is_err());
    }
}
