//! Invariants of polygonal links: generic diagrams, linking numbers,
//! Alexander polynomials and connected sums.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};
use crate::geom::{segment_segment_dist, v3_add, v3_cross, v3_dot, v3_lerp, v3_norm, v3_scale, v3_sub, Vec3};
use crate::laurent::{determinant, LaurentPoly};
use crate::section::{NestingTree, PolyLink};

pub type Polygon = Vec<Vec3>;

/// Relative tolerance for near-parallel strands, crossings near vertices and triple points.
pub const GENERICITY_TOL: f64 = 1e-6;
pub const RETRY_BUDGET: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub component: usize,
    pub segment: usize,
    /// Position along the segment, in `(0, 1)`.
    pub param: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub over: Passage,
    pub under: Passage,
    pub sign: i8,
    pub position: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkDiagram {
    /// Viewing direction; the viewer sits at `+direction`.
    pub direction: Vec3,
    pub components: Vec<Polygon>,
    pub crossings: Vec<Crossing>,
}

impl LinkDiagram {
    /// Sum of the signs of crossings between components `a` and `b`.
    pub fn crossing_sum(&self, a: usize, b: usize) -> i64 {
        self.crossings
            .iter()
            .filter(|c| {
                let (x, y) = (c.over.component, c.under.component);
                (x == a && y == b) || (x == b && y == a)
            })
            .map(|c| c.sign as i64)
            .sum()
    }

    /// One Gauss code per component, e.g. `O1+U2-…`, crossings numbered from 1.
    pub fn gauss_codes(&self) -> Vec<String> {
        (0..self.components.len())
            .map(|comp| {
                let mut passes: Vec<(usize, f64, String)> = Vec::new();
                for (k, c) in self.crossings.iter().enumerate() {
                    let s = if c.sign > 0 { '+' } else { '-' };
                    for (p, tag) in [(&c.over, 'O'), (&c.under, 'U')] {
                        if p.component == comp {
                            passes.push((p.segment, p.param, format!("{tag}{}{s}", k + 1)));
                        }
                    }
                }
                passes.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
                passes.into_iter().map(|p| p.2).collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Export<'a> {
            direction: Vec3,
            crossings: &'a [Crossing],
            gauss_codes: Vec<String>,
        }
        Ok(serde_json::to_string_pretty(&Export {
            direction: self.direction,
            crossings: &self.crossings,
            gauss_codes: self.gauss_codes(),
        })?)
    }
}

/// Closed components of a link as spatial polygons.
pub fn link_polygons(link: &PolyLink) -> Result<Vec<Polygon>> {
    link.components
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if !c.closed {
                return Err(GermError::InvalidInput(format!("component {k} is not closed")));
            }
            Ok(c.points.iter().map(|p| [p[0], p[1], p[2]]).collect())
        })
        .collect()
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn diameter(polys: &[Polygon]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in polys.iter().flatten() {
        for i in 0..3 {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    v3_norm(&v3_sub(&hi, &lo)).max(1e-300)
}

fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = v3_norm(&v);
        if n > 0.1 && n <= 1.0 {
            return v3_scale(&v, 1.0 / n);
        }
    }
}

/// Diagram from a random direction, retried until the projection is generic.
pub fn project_generic(link: &PolyLink, seed: u64) -> Result<LinkDiagram> {
    project_polygons(&link_polygons(link)?, seed)
}

pub fn project_polygons(polys: &[Polygon], seed: u64) -> Result<LinkDiagram> {
    let scale = diameter(polys);
    let polys: Vec<Polygon> = polys.iter().map(|p| dedup(p, GENERICITY_TOL * scale)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RETRY_BUDGET {
        let d = random_direction(&mut rng);
        if let Some(diag) = project_along(&polys, d) {
            return Ok(diag);
        }
    }
    Err(GermError::NoGenericProjection { attempts: RETRY_BUDGET })
}

/// Diagram in a fixed direction, or `None` if that projection is not generic.
pub fn project_along(polys: &[Polygon], direction: Vec3) -> Option<LinkDiagram> {
    let d = v3_scale(&direction, 1.0 / v3_norm(&direction));
    let a = if d[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = {
        let v = v3_sub(&a, &v3_scale(&d, v3_dot(&a, &d)));
        v3_scale(&v, 1.0 / v3_norm(&v))
    };
    let e2 = v3_cross(&d, &e1);
    let scale = diameter(polys);
    let tol = GENERICITY_TOL;

    struct Seg {
        comp: usize,
        idx: usize,
        n: usize,
        a: [f64; 2],
        b: [f64; 2],
        ha: f64,
        hb: f64,
    }
    let proj = |v: &Vec3| ([v3_dot(v, &e1), v3_dot(v, &e2)], v3_dot(v, &d));
    let segs: Vec<Seg> = polys
        .iter()
        .enumerate()
        .flat_map(|(comp, poly)| {
            let n = poly.len();
            (0..n).map(move |idx| {
                let (a, ha) = proj(&poly[idx]);
                let (b, hb) = proj(&poly[(idx + 1) % n]);
                Seg { comp, idx, n, a, b, ha, hb }
            })
        })
        .collect();
    let adjacent = |s: &Seg, t: &Seg| {
        s.comp == t.comp && {
            let diff = (s.idx as isize - t.idx as isize).rem_euclid(s.n as isize) as usize;
            diff == 0 || diff == 1 || diff == s.n - 1
        }
    };

    let found: Vec<Option<Vec<Crossing>>> = (0..segs.len())
        .into_par_iter()
        .map(|i| {
            let s = &segs[i];
            let r = [s.b[0] - s.a[0], s.b[1] - s.a[1]];
            let rl = (r[0] * r[0] + r[1] * r[1]).sqrt();
            let mut out = Vec::new();
            for t in &segs[i + 1..] {
                if adjacent(s, t) {
                    continue;
                }
                let q = [t.b[0] - t.a[0], t.b[1] - t.a[1]];
                let ql = (q[0] * q[0] + q[1] * q[1]).sqrt();
                let ca = [t.a[0] - s.a[0], t.a[1] - s.a[1]];
                let denom = cross2(r, q);
                if denom.abs() <= tol * rl * ql {
                    // nearly parallel: only a problem if the strands nearly overlap
                    let close = segment_segment_dist(
                        &[s.a[0], s.a[1], 0.0],
                        &[s.b[0], s.b[1], 0.0],
                        &[t.a[0], t.a[1], 0.0],
                        &[t.b[0], t.b[1], 0.0],
                    ) < tol * scale;
                    if close {
                        return None;
                    }
                    continue;
                }
                let u = cross2(ca, q) / denom;
                let v = cross2(ca, r) / denom;
                if u < -tol || u > 1.0 + tol || v < -tol || v > 1.0 + tol {
                    continue;
                }
                if u < tol || u > 1.0 - tol || v < tol || v > 1.0 - tol {
                    return None;
                }
                let h1 = s.ha + u * (s.hb - s.ha);
                let h2 = t.ha + v * (t.hb - t.ha);
                if (h1 - h2).abs() < tol * scale {
                    return None;
                }
                let ps = Passage { component: s.comp, segment: s.idx, param: u };
                let pt = Passage { component: t.comp, segment: t.idx, param: v };
                let (over, under, od, ud) = if h1 > h2 { (ps, pt, r, q) } else { (pt, ps, q, r) };
                let sign = if cross2(od, ud) > 0.0 { 1 } else { -1 };
                let position = [s.a[0] + u * r[0], s.a[1] + u * r[1]];
                out.push(Crossing { over, under, sign, position });
            }
            Some(out)
        })
        .collect();
    let mut crossings = Vec::new();
    for f in found {
        crossings.extend(f?);
    }
    for (i, a) in crossings.iter().enumerate() {
        for b in &crossings[i + 1..] {
            let dx = a.position[0] - b.position[0];
            let dy = a.position[1] - b.position[1];
            if (dx * dx + dy * dy).sqrt() < tol * scale {
                return None;
            }
        }
    }
    Some(LinkDiagram { direction: d, components: polys.to_vec(), crossings })
}

/// Gauss linking integral of two closed polygons, summed exactly over segment pairs
/// as signed solid angles.
pub fn gauss_integral(a: &Polygon, b: &Polygon) -> f64 {
    let na = a.len();
    let nb = b.len();
    (0..na)
        .into_par_iter()
        .map(|i| {
            let (p1, p2) = (a[i], a[(i + 1) % na]);
            (0..nb).map(|j| segment_pair_solid_angle(&p1, &p2, &b[j], &b[(j + 1) % nb])).sum::<f64>()
        })
        .sum::<f64>()
        / (4.0 * std::f64::consts::PI)
}

fn segment_pair_solid_angle(p1: &Vec3, p2: &Vec3, p3: &Vec3, p4: &Vec3) -> f64 {
    let r13 = v3_sub(p3, p1);
    let r14 = v3_sub(p4, p1);
    let r23 = v3_sub(p3, p2);
    let r24 = v3_sub(p4, p2);
    let unit = |v: Vec3| {
        let n = v3_norm(&v);
        (n > 0.0).then(|| v3_scale(&v, 1.0 / n))
    };
    let (Some(n1), Some(n2), Some(n3), Some(n4)) = (
        unit(v3_cross(&r13, &r14)),
        unit(v3_cross(&r14, &r24)),
        unit(v3_cross(&r24, &r23)),
        unit(v3_cross(&r23, &r13)),
    ) else {
        return 0.0;
    };
    let asin = |x: f64| x.clamp(-1.0, 1.0).asin();
    let omega = asin(v3_dot(&n1, &n2)) + asin(v3_dot(&n2, &n3)) + asin(v3_dot(&n3, &n4)) + asin(v3_dot(&n4, &n1));
    let r12 = v3_sub(p2, p1);
    let r34 = v3_sub(p4, p3);
    let s = v3_dot(&v3_cross(&r34, &r12), &r13);
    if s > 0.0 {
        omega
    } else if s < 0.0 {
        -omega
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkingReport {
    pub value: i64,
    pub gauss: f64,
    pub diagram: i64,
    pub refined: bool,
}

/// Linking number of two closed polygons, by the Gauss integral and by the
/// half-sum of crossing signs; the two must agree.
pub fn linking_number_polygons(a: &Polygon, b: &Polygon, seed: u64) -> Result<LinkingReport> {
    let attempt = |a: &Polygon, b: &Polygon, seed: u64| -> Result<(f64, i64, bool)> {
        let eps = GENERICITY_TOL * diameter(&[a.clone(), b.clone()]);
        let (a, b) = (&dedup(a, eps), &dedup(b, eps));
        let g = gauss_integral(a, b);
        let diag = project_polygons(&[a.clone(), b.clone()], seed)?;
        let sum = diag.crossing_sum(0, 1);
        let agree = sum % 2 == 0 && (g - (sum / 2) as f64).abs() < 0.05;
        Ok((g, sum / 2, agree))
    };
    let (g, d, ok) = attempt(a, b, seed)?;
    if ok {
        return Ok(LinkingReport { value: d, gauss: g, diagram: d, refined: false });
    }
    let (g2, d2, ok2) = attempt(&subdivide(a), &subdivide(b), seed.wrapping_add(1))?;
    if ok2 {
        return Ok(LinkingReport { value: d2, gauss: g2, diagram: d2, refined: true });
    }
    Err(GermError::Degenerate(format!(
        "linking number methods disagree: Gauss integral {g2:.6}, crossing half-sum {d2} (first try {g:.6} vs {d})"
    )))
}

/// Linking number of components `a` and `b` of a link.
pub fn linking_number_gauss(link: &PolyLink, a: usize, b: usize, seed: u64) -> Result<i64> {
    if a == b {
        return Err(GermError::InvalidInput("linking number needs two distinct components".into()));
    }
    let polys = link_polygons(link)?;
    let get = |k: usize| {
        polys.get(k).ok_or_else(|| GermError::InvalidInput(format!("no component {k}")))
    };
    Ok(linking_number_polygons(get(a)?, get(b)?, seed)?.value)
}

/// Alexander polynomial of a one-component diagram, in normal form.
pub fn alexander_polynomial(diag: &LinkDiagram) -> Result<LaurentPoly> {
    if diag.components.len() != 1 {
        return Err(GermError::InvalidInput(format!(
            "Alexander polynomial needs a knot diagram, got {} components",
            diag.components.len()
        )));
    }
    let n = diag.crossings.len();
    if n == 0 {
        return Ok(LaurentPoly::one());
    }
    // passages along the knot: (segment, param, crossing, is_under)
    let mut passes: Vec<(usize, f64, usize, bool)> = Vec::with_capacity(2 * n);
    for (k, c) in diag.crossings.iter().enumerate() {
        passes.push((c.over.segment, c.over.param, k, false));
        passes.push((c.under.segment, c.under.param, k, true));
    }
    passes.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    // arc m runs from the m-th under-passage to the next one
    let mut arc_at = vec![0usize; passes.len()];
    let mut unders = 0;
    let mut under_pos = vec![0usize; n];
    let mut over_arc = vec![0usize; n];
    for (idx, p) in passes.iter().enumerate() {
        arc_at[idx] = unders % n;
        if p.3 {
            under_pos[p.2] = idx;
            unders += 1;
        } else {
            over_arc[p.2] = unders % n;
        }
    }
    let t = LaurentPoly::monomial(1, 1);
    let one = LaurentPoly::one();
    let mut m = vec![vec![LaurentPoly::zero(); n]; n];
    for (c, cr) in diag.crossings.iter().enumerate() {
        let i = arc_at[under_pos[c]];
        let j = (i + 1) % n;
        let k = over_arc[c];
        let (ck, ci, cj) = if cr.sign > 0 {
            (&one - &t, t.clone(), -&one)
        } else {
            (&t - &one, one.clone(), -&t)
        };
        m[c][k] = &m[c][k] + &ck;
        m[c][i] = &m[c][i] + &ci;
        m[c][j] = &m[c][j] + &cj;
    }
    let reduced: Vec<Vec<LaurentPoly>> = m[..n - 1].iter().map(|row| row[..n - 1].to_vec()).collect();
    Ok(determinant(reduced)?.normalized())
}

/// Alexander polynomial of a polygonal knot via a seeded generic projection.
pub fn alexander_of_polygon(knot: &Polygon, seed: u64) -> Result<LaurentPoly> {
    alexander_polynomial(&project_polygons(std::slice::from_ref(knot), seed)?)
}

/// Drops vertices within `eps` of their predecessor (cyclically), such as
/// the doubled junctions of glued section pieces.
pub fn dedup(p: &Polygon, eps: f64) -> Polygon {
    let mut out: Polygon = Vec::with_capacity(p.len());
    for v in p {
        if out.last().is_none_or(|w| v3_norm(&v3_sub(v, w)) > eps) {
            out.push(*v);
        }
    }
    while out.len() > 1 && v3_norm(&v3_sub(&out[0], out.last().unwrap())) <= eps {
        out.pop();
    }
    out
}

/// Every edge split at its midpoint.
pub fn subdivide(p: &Polygon) -> Polygon {
    let n = p.len();
    (0..n).flat_map(|i| [p[i], v3_lerp(&p[i], &p[(i + 1) % n], 0.5)]).collect()
}

pub fn reversed(p: &Polygon) -> Polygon {
    p.iter().rev().cloned().collect()
}

pub fn translated(p: &Polygon, v: Vec3) -> Polygon {
    p.iter().map(|x| v3_add(x, &v)).collect()
}

fn bounds(p: &Polygon) -> (Vec3, Vec3) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in p {
        for i in 0..3 {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    (lo, hi)
}

/// Whether segment `[p, q]` meets triangle `(a, b, c)`.
fn segment_hits_triangle(p: &Vec3, q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let e1 = v3_sub(b, a);
    let e2 = v3_sub(c, a);
    let dir = v3_sub(q, p);
    let h = v3_cross(&dir, &e2);
    let det = v3_dot(&e1, &h);
    let scale = v3_norm(&e1) * v3_norm(&e2) * v3_norm(&dir);
    if det.abs() <= 1e-12 * scale {
        // parallel to the plane: treat as a hit only if it lies in it close by
        let n = v3_cross(&e1, &e2);
        let nn = v3_norm(&n).max(1e-300);
        let off = v3_dot(&v3_sub(p, a), &n).abs() / nn;
        return off < 1e-9 * v3_norm(&e1).max(v3_norm(&e2))
            && segment_segment_dist(p, q, a, b).min(segment_segment_dist(p, q, b, c)).min(segment_segment_dist(p, q, c, a))
                < 1e-9 * v3_norm(&e1).max(v3_norm(&e2));
    }
    let f = 1.0 / det;
    let s = v3_sub(p, a);
    let u = f * v3_dot(&s, &h);
    if !(-1e-9..=1.0 + 1e-9).contains(&u) {
        return false;
    }
    let qv = v3_cross(&s, &e1);
    let v = f * v3_dot(&dir, &qv);
    if v < -1e-9 || u + v > 1.0 + 1e-9 {
        return false;
    }
    let w = f * v3_dot(&e2, &qv);
    (-1e-9..=1.0 + 1e-9).contains(&w)
}

/// Connected sum: `b` is translated to the right of `a`, one edge is removed
/// from each, and the ends are joined by two bridges spanning an embedded band.
pub fn connected_sum(a: &Polygon, b: &Polygon) -> Result<Polygon> {
    if a.len() < 3 || b.len() < 3 {
        return Err(GermError::InvalidInput("connected sum needs closed polygons with ≥ 3 vertices".into()));
    }
    let (alo, ahi) = bounds(a);
    let (blo, bhi) = bounds(b);
    let gap = 0.5 * v3_norm(&v3_sub(&ahi, &alo)).max(v3_norm(&v3_sub(&bhi, &blo)));
    let shift = [
        ahi[0] - blo[0] + gap,
        0.5 * (alo[1] + ahi[1]) - 0.5 * (blo[1] + bhi[1]),
        0.5 * (alo[2] + ahi[2]) - 0.5 * (blo[2] + bhi[2]),
    ];
    let b = translated(b, shift);
    let (na, nb) = (a.len(), b.len());
    let mut ea: Vec<usize> = (0..na).collect();
    ea.sort_by(|&i, &j| {
        let x = |k: usize| a[k][0].max(a[(k + 1) % na][0]);
        x(j).total_cmp(&x(i))
    });
    let mut eb: Vec<usize> = (0..nb).collect();
    eb.sort_by(|&i, &j| {
        let x = |k: usize| b[k][0].min(b[(k + 1) % nb][0]);
        x(i).total_cmp(&x(j))
    });
    let budget = 8;
    for &i in ea.iter().take(budget) {
        for &j in eb.iter().take(budget) {
            if band_is_clear(a, i, &b, j) {
                let mut out = Vec::with_capacity(na + nb);
                for k in 0..na {
                    out.push(a[(i + 1 + k) % na]);
                }
                for k in 0..nb {
                    out.push(b[(j + 1 + k) % nb]);
                }
                return Ok(out);
            }
        }
    }
    Err(GermError::Construction(format!(
        "no clear splice band found after {} edge pairs",
        budget * budget
    )))
}

/// The band spanned by edge `i` of `a` and edge `j` of `b` must meet no other edge.
fn band_is_clear(a: &Polygon, i: usize, b: &Polygon, j: usize) -> bool {
    let (na, nb) = (a.len(), b.len());
    let (a0, a1) = (a[i], a[(i + 1) % na]);
    let (b0, b1) = (b[j], b[(j + 1) % nb]);
    // bridges a0 → b1 and b0 → a1 must not meet each other
    if segment_segment_dist(&a0, &b1, &b0, &a1) < 1e-9 {
        return false;
    }
    let tris = [(a0, a1, b0), (a0, b0, b1)];
    let others = (0..na)
        .filter(|&k| k != i && k != (i + 1) % na && (k + 1) % na != i)
        .map(|k| (a[k], a[(k + 1) % na]))
        .chain(
            (0..nb)
                .filter(|&k| k != j && k != (j + 1) % nb && (k + 1) % nb != j)
                .map(|k| (b[k], b[(k + 1) % nb])),
        );
    for (p, q) in others {
        for (x, y, z) in &tris {
            if segment_hits_triangle(&p, &q, x, y, z) {
                return false;
            }
        }
    }
    true
}

pub fn compare_nesting(a: &NestingTree, b: &NestingTree) -> bool {
    a.isomorphic(b)
}

#[derive(Clone, Debug, Deserialize)]
pub struct KnotEntry {
    pub name: String,
    pub alexander: Vec<i64>,
    pub vertices: Vec<Vec3>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct KnotTable {
    pub knots: Vec<KnotEntry>,
}

impl KnotTable {
    pub fn from_json(s: &str) -> Result<Self> {
        let table: KnotTable = serde_json::from_str(s)?;
        if let Some(k) = table.knots.iter().find(|k| k.vertices.len() < 3) {
            return Err(GermError::Parse(format!("knot {:?} has fewer than 3 vertices", k.name)));
        }
        Ok(table)
    }

    pub fn entry(&self, name: &str) -> Result<&KnotEntry> {
        self.knots
            .iter()
            .find(|k| k.name == name)
            .ok_or_else(|| GermError::InvalidInput(format!("unknown knot {name:?}")))
    }

    /// Tabulated Alexander polynomial in normal form.
    pub fn alexander(&self, name: &str) -> Result<LaurentPoly> {
        Ok(LaurentPoly::from_coeffs(&self.entry(name)?.alexander).normalized())
    }
}

/// The built-in knot table: unknot, trefoil, figure-eight.
pub fn knot_table() -> &'static KnotTable {
    static TABLE: OnceLock<KnotTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        serde_json::from_str(include_str!("../data/knots.json")).expect("built-in knot table is valid JSON")
    })
}

/// A knot by name; `a#b` denotes the connected sum of two table entries.
pub fn knot(name: &str) -> Result<Polygon> {
    if let Some((x, y)) = name.split_once('#') {
        return connected_sum(&knot(x)?, &knot(y)?);
    }
    knot_table()
        .knots
        .iter()
        .find(|k| k.name == name)
        .map(|k| k.vertices.clone())
        .ok_or_else(|| GermError::InvalidInput(format!("unknown knot {name:?}")))
}

/// Tabulated Alexander polynomial; for `a#b`, the product.
pub fn expected_alexander(name: &str) -> Result<LaurentPoly> {
    if let Some((x, y)) = name.split_once('#') {
        return Ok((&expected_alexander(x)? * &expected_alexander(y)?).normalized());
    }
    knot_table()
        .knots
        .iter()
        .find(|k| k.name == name)
        .map(|k| LaurentPoly::from_coeffs(&k.alexander).normalized())
        .ok_or_else(|| GermError::InvalidInput(format!("unknown knot {name:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(c: Vec3, r: f64, n: usize, plane: usize) -> Polygon {
        (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                let (x, y) = (r * a.cos(), r * a.sin());
                match plane {
                    0 => [c[0] + x, c[1] + y, c[2]],
                    _ => [c[0] + x, c[1], c[2] + y],
                }
            })
            .collect()
    }

    fn hopf() -> (Polygon, Polygon) {
        (circle([0.0, 0.0, 0.0], 1.0, 24, 0), circle([1.0, 0.0, 0.0], 1.0, 24, 1))
    }

    fn poly(c: &[i64]) -> LaurentPoly {
        LaurentPoly::from_coeffs(c)
    }

    #[test]
    fn disjoint_coplanar_circles_have_no_crossings() {
        let polys = [circle([-2.0, 0.0, 0.0], 1.0, 20, 0), circle([2.0, 0.0, 0.0], 1.0, 20, 0)];
        let d = project_along(&polys, [0.0, 0.0, 1.0]).unwrap();
        assert!(d.crossings.is_empty());
    }

    #[test]
    fn hopf_link_has_two_crossings_of_equal_sign() {
        let (a, b) = hopf();
        let d = project_polygons(&[a, b], 0).unwrap();
        let inter: Vec<&Crossing> = d.crossings.iter().filter(|c| c.over.component != c.under.component).collect();
        assert_eq!(inter.len(), 2);
        assert_eq!(inter[0].sign, inter[1].sign);
    }

    #[test]
    fn linking_numbers() {
        let (a, b) = hopf();
        let r = linking_number_polygons(&a, &b, 0).unwrap();
        assert_eq!(r.value.abs(), 1);
        assert!((r.gauss - r.value as f64).abs() < 1e-9);
        assert_eq!(linking_number_polygons(&b, &a, 0).unwrap().value, r.value);
        assert_eq!(linking_number_polygons(&reversed(&a), &b, 0).unwrap().value, -r.value);
        let far = translated(&b, [10.0, 0.0, 0.0]);
        assert_eq!(linking_number_polygons(&a, &far, 0).unwrap().value, 0);
    }

    #[test]
    fn table_knots_have_expected_alexander() {
        assert_eq!(alexander_of_polygon(&knot("unknot").unwrap(), 0).unwrap(), LaurentPoly::one());
        assert_eq!(alexander_of_polygon(&knot("trefoil").unwrap(), 0).unwrap(), poly(&[1, -1, 1]));
        assert_eq!(alexander_of_polygon(&knot("figure-eight").unwrap(), 0).unwrap(), poly(&[1, -3, 1]));
    }

    #[test]
    fn trefoil_diagram_has_at_least_three_crossings() {
        let d = project_polygons(&[knot("trefoil").unwrap()], 3).unwrap();
        assert!(d.crossings.len() >= 3);
        assert_eq!(d.gauss_codes().len(), 1);
        assert_eq!(d.gauss_codes()[0].matches('O').count(), d.crossings.len());
    }

    #[test]
    fn unknotted_triangle() {
        let tri = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.3]];
        assert_eq!(alexander_of_polygon(&tri, 0).unwrap(), LaurentPoly::one());
    }

    #[test]
    fn alexander_rejects_links() {
        let (a, b) = hopf();
        let d = project_polygons(&[a, b], 0).unwrap();
        assert!(alexander_polynomial(&d).is_err());
    }

    #[test]
    fn connected_sums_multiply() {
        let names = ["unknot", "trefoil", "figure-eight"];
        for x in names {
            for y in names {
                let k = connected_sum(&knot(x).unwrap(), &knot(y).unwrap()).unwrap();
                let got = alexander_of_polygon(&k, 0).unwrap();
                let want = (&expected_alexander(x).unwrap() * &expected_alexander(y).unwrap()).normalized();
                assert_eq!(got, want, "{x} # {y}");
            }
        }
        assert_eq!(expected_alexander("trefoil#figure-eight").unwrap(), poly(&[1, -4, 5, -4, 1]));
    }

    #[test]
    fn invariants_survive_refinement_and_other_directions() {
        let k = knot("figure-eight").unwrap();
        let fine = subdivide(&k);
        for seed in 0..5 {
            assert_eq!(alexander_of_polygon(&k, seed).unwrap(), poly(&[1, -3, 1]));
            assert_eq!(alexander_of_polygon(&fine, seed).unwrap(), poly(&[1, -3, 1]));
        }
    }

    #[test]
    fn degenerate_input_exhausts_budget() {
        // two identical coplanar squares coincide everywhere
        let sq = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let e = project_polygons(&[sq.clone(), sq], 0).unwrap_err();
        assert!(matches!(e, GermError::NoGenericProjection { attempts: 64 }));
    }

    #[test]
    fn empty_forests_compare_equal() {
        let e = NestingTree { parent: vec![] };
        assert!(compare_nesting(&e, &e));
    }
}
