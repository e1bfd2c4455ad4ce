//! Builders for the example germs, the twisted family, and the surgeries on them.

use crate::error::{GermError, Result};
use crate::geom::{v3_add, v3_cross, v3_dot, v3_norm, v3_scale, v3_sub, Vec3};
use crate::germ::{
    make_cone_sheet, make_holder_triangle, make_implicit_sheet, unit_t_constraints, ArcSpec, Branch,
    BridgeSpec, ConeSheet, GermModel, HolderGap, HolderTriangle, MapPiece, NamedSheet, PLMap, PieceMap,
    PowerArc, Sheet, Sign, TemplateTerm, TriangleRole,
};
use crate::knots::{self, Polygon};
use crate::poly::Poly;
use crate::section::{section_at, PolyLink};
use crate::Rational;

/// Vertices of each small circle of the planar examples.
pub const CIRCLE_VERTICES: usize = 64;
/// Vertices of the braid helix per half twist.
pub const HALF_TWIST_VERTICES: usize = 16;
/// Radius of the braid helix.
pub const BRAID_RADIUS: f64 = 0.25;
/// Height of the braid axis above the plane of `G`, outside the ball of radius √2.
pub const BRAID_HEIGHT: f64 = 2.0;
/// Scale used for surgery sections.
pub const SURGERY_SCALE: f64 = 0.125;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d).expect("non-zero denominator")
}

fn ri(n: i64) -> Rational {
    Rational::int(n)
}

fn circle(cx: f64, cy: f64, radius: f64, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            [cx + radius * a.cos(), cy + radius * a.sin(), 0.0]
        })
        .collect()
}

fn translation(dx: f64, dy: f64) -> PieceMap {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m[0][3] = dx;
    m[1][3] = dy;
    PieceMap::Linear { matrix: m }
}

// ---------------------------------------------------------------- Example 1

/// `((x−t)² + y² − t²)((x+t)² + y² − t²) − t^k`.
pub fn u1_poly(k: Rational) -> Poly {
    let x2y2 = &Poly::x().pow(2) + &Poly::y().pow(2);
    let xt = (&Poly::x() * &Poly::t()).scale(ri(2));
    let left = &x2y2 - &xt;
    let right = &x2y2 + &xt;
    &(&left * &right) - &Poly::t_pow(k)
}

fn example1_base(k: Rational) -> Result<GermModel> {
    if k <= ri(4) {
        return Err(GermError::InvalidInput(format!("Example 1 needs k > 4, got k = {k}")));
    }
    let mut m = GermModel::empty(3)
        .with_sheet("U1", make_implicit_sheet(u1_poly(k), unit_t_constraints())?)
        .with_arc("gamma+", ArcSpec::Implicit { sheet: "U1".into(), coef: 0.0, mu: ri(1), branch: Branch::Upper })
        .with_arc("gamma-", ArcSpec::Implicit { sheet: "U1".into(), coef: 0.0, mu: ri(1), branch: Branch::Lower });
    m.metadata.insert("k".into(), k.to_string());
    Ok(m)
}

/// `X₁ = U₁ ∪ U₂ ∪ U₃` (both small circles in the right lobe) and
/// `X₂ = U₁ ∪ V₂ ∪ V₃` (one small circle per lobe).
pub fn build_example1(k: Rational) -> Result<(GermModel, GermModel)> {
    let base = example1_base(k)?;
    let cone = |cx: f64, cy: f64| make_cone_sheet(circle(cx, cy, 0.25, CIRCLE_VERTICES), true);
    let mut x1 = base.clone().with_sheet("U2", cone(1.0, 0.5)?).with_sheet("U3", cone(1.0, -0.5)?);
    let mut x2 = base.with_sheet("V2", cone(1.0, 0.0)?).with_sheet("V3", cone(-1.0, 0.0)?);
    x1.metadata.insert("example".into(), "example1/X1".into());
    x2.metadata.insert("example".into(), "example1/X2".into());
    Ok((x1, x2))
}

/// The piecewise linear map `X₁ → X₂`: identity on `U₁`, `(x, y − t/2)` on `U₂`, `(x − 2t, y + t/2)` on `U₃`.
pub fn example1_map() -> PLMap {
    let piece = |s: &str, t: &str, map| MapPiece { source: s.into(), target: t.into(), map };
    PLMap {
        pieces: vec![
            piece("U1", "U1", PieceMap::identity()),
            piece("U2", "V2", translation(0.0, -0.5)),
            piece("U3", "V3", translation(-2.0, 0.5)),
        ],
    }
}

// ---------------------------------------------------------------- bridges

/// `A_{q,β} = T₊ ∪ T₋` with its four boundary arcs `x = ±t^β, y = ±t^q`.
pub fn build_bridge(q: Rational, beta: Rational) -> Result<GermModel> {
    let mut m = GermModel::empty(3)
        .with_sheet("T+", make_holder_triangle(beta, q, Sign::Plus)?)
        .with_sheet("T-", make_holder_triangle(beta, q, Sign::Minus)?);
    let mut names = Vec::new();
    for (ys, sheet) in [(1.0, "T+"), (-1.0, "T-")] {
        for (xs, side) in [(-1.0, "left"), (1.0, "right")] {
            let name = format!("{sheet}:{side}");
            let arc = PowerArc::new(&[(xs, beta)], &[(ys, q)], &[]);
            m = m.with_arc(&name, ArcSpec::Power { arc, sheet: Some(sheet.into()) });
            names.push(name);
        }
    }
    let p = (beta + q) / ri(2);
    m.bridges.push(BridgeSpec {
        name: "A".into(),
        q,
        beta,
        p,
        boundary_arcs: [names[0].clone(), names[1].clone(), names[2].clone(), names[3].clone()],
        sheets: ["T+".into(), "T-".into()],
        broken: None,
    });
    m.metadata.insert("example".into(), "bridge".into());
    Ok(m)
}

fn bridge_index(model: &GermModel, bridge: &str) -> Result<usize> {
    model
        .bridges
        .iter()
        .position(|b| b.name == bridge)
        .ok_or_else(|| GermError::InvalidInput(format!("model has no bridge named {bridge:?}")))
}

fn holder_piece(h: &HolderTriangle, role: TriangleRole, beta: Rational, x: Vec<TemplateTerm>) -> Sheet {
    Sheet::Holder(HolderTriangle {
        beta,
        q: h.q,
        sign: h.sign,
        role,
        template: [x, vec![TemplateTerm::new(h.sign.value(), 0, h.q)], vec![]],
    })
}

/// The part of a bridge side between `x = s·t^p` and `x = s·t^β`.
fn outer_piece(h: &HolderTriangle, p: Rational, s: f64) -> Sheet {
    let x = vec![
        TemplateTerm::new(0.5 * s, 0, h.beta),
        TemplateTerm::new(0.5 * s, 0, p),
        TemplateTerm::new(0.5, 1, h.beta),
        TemplateTerm::new(-0.5, 1, p),
    ];
    holder_piece(h, TriangleRole::Piece, h.beta, x)
}

fn wall_poly(p: Rational, s: i64) -> Poly {
    &Poly::x() - &Poly::t_pow(p).scale(ri(s))
}

fn excision_constraint(p: Rational) -> Poly {
    &Poly::x().pow(2) - &Poly::t_pow(p * ri(2))
}

fn implicit_of<'a>(model: &'a GermModel, name: &str) -> Result<&'a crate::germ::ImplicitSheet> {
    match model.sheet(name) {
        Some(Sheet::Implicit(s)) => Ok(s),
        _ => Err(GermError::InvalidInput(format!("{name:?} is not an implicit sheet"))),
    }
}

fn holder_of<'a>(model: &'a GermModel, name: &str) -> Result<&'a HolderTriangle> {
    match model.sheet(name) {
        Some(Sheet::Holder(h)) => Ok(h),
        _ => Err(GermError::InvalidInput(format!("{name:?} is not a Hölder triangle"))),
    }
}

fn replace_sheet(model: &mut GermModel, name: &str, with: Vec<(String, Sheet)>) {
    let at = model.sheets.iter().position(|s| s.name == name).expect("sheet present");
    model.sheets.remove(at);
    for (k, (n, s)) in with.into_iter().enumerate() {
        model.sheets.insert(at + k, NamedSheet { name: n, sheet: s });
    }
}

/// Replaces the middle `p`-Hölder part of each bridge side by two rerouting
/// walls `{x = ±t^p, between the sides}`.
pub fn break_bridge(model: &GermModel, bridge: &str, p: Rational) -> Result<GermModel> {
    let idx = bridge_index(model, bridge)?;
    let mut spec = model.bridges[idx].clone();
    if spec.broken.is_some() {
        return Err(GermError::InvalidInput(format!("bridge {bridge:?} is already broken")));
    }
    spec.p = p;
    spec.check()?;
    let mut out = model.clone();
    let wall = |s: i64| format!("{}/wall{}", spec.name, if s > 0 { "+" } else { "-" });
    if spec.sheets[0] == spec.sheets[1] {
        // both sides live in one implicit sheet: cut out |x| < t^p, add walls inside the sheet's gap
        let name = &spec.sheets[0];
        let sheet = implicit_of(model, name)?.clone();
        let mut cut = sheet.clone();
        cut.constraints.push(excision_constraint(p));
        let mut walls = Vec::new();
        for s in [1, -1] {
            let mut constraints = sheet.constraints.clone();
            constraints.push(sheet.poly.scale(ri(-1)));
            walls.push((wall(s), make_implicit_sheet(wall_poly(p, s), constraints)?));
        }
        let mut with = vec![(name.clone(), Sheet::Implicit(cut))];
        with.extend(walls);
        replace_sheet(&mut out, name, with);
    } else {
        for name in &spec.sheets {
            let h = holder_of(model, name)?.clone();
            let pieces = vec![
                (format!("{name}/left"), outer_piece(&h, p, -1.0)),
                (format!("{name}/right"), outer_piece(&h, p, 1.0)),
            ];
            replace_sheet(&mut out, name, pieces);
        }
        let h = holder_of(model, &spec.sheets[0])?;
        for s in [1, -1] {
            let wall_sheet = Sheet::Holder(HolderTriangle {
                beta: h.q,
                q: h.q,
                sign: Sign::Plus,
                role: TriangleRole::Reroute,
                template: [
                    vec![TemplateTerm::new(s as f64, 0, p)],
                    vec![TemplateTerm::new(1.0, 1, h.q)],
                    vec![],
                ],
            });
            out.sheets.push(NamedSheet { name: wall(s), sheet: wall_sheet });
        }
    }
    spec.broken = Some(p);
    out.bridges[idx] = spec;
    Ok(out)
}

/// Inverse of [`break_bridge`]: the walls are replaced by the removed middle pieces.
pub fn restore_bridge(model: &GermModel, bridge: &str) -> Result<GermModel> {
    let idx = bridge_index(model, bridge)?;
    let mut spec = model.bridges[idx].clone();
    let Some(p) = spec.broken else {
        return Err(GermError::InvalidInput(format!("bridge {bridge:?} is not broken")));
    };
    let mut out = model.clone();
    let walls = [format!("{}/wall+", spec.name), format!("{}/wall-", spec.name)];
    out.sheets.retain(|s| !walls.contains(&s.name));
    if spec.sheets[0] == spec.sheets[1] {
        let name = &spec.sheets[0];
        let mut sheet = implicit_of(model, name)?.clone();
        let cut = excision_constraint(p);
        let before = sheet.constraints.len();
        sheet.constraints.retain(|g| *g != cut);
        if sheet.constraints.len() + 1 != before {
            return Err(GermError::InvalidInput(format!("sheet {name:?} carries no excision")));
        }
        replace_sheet(&mut out, name, vec![(name.clone(), Sheet::Implicit(sheet))]);
    } else {
        for name in &spec.sheets {
            let left = format!("{name}/left");
            let h = holder_of(model, &left)?;
            let middle = holder_piece(h, TriangleRole::Piece, p, vec![TemplateTerm::new(1.0, 1, p)]);
            let at = out.sheets.iter().position(|s| s.name == left).expect("piece present");
            out.sheets.insert(at + 1, NamedSheet { name: format!("{name}/middle"), sheet: middle });
        }
    }
    spec.broken = None;
    out.bridges[idx] = spec;
    Ok(out)
}

// ---------------------------------------------------------------- G and the twisted family

fn strip_constraints() -> Vec<Poly> {
    let mut c = unit_t_constraints();
    c.push(&Poly::t().pow(2) - &Poly::y().pow(2));
    c
}

/// `y²t² − x⁴ − (x² + y² − 2t²)⁴`.
pub fn g_poly() -> Poly {
    let lhs = &(&Poly::y().pow(2) * &Poly::t().pow(2)) - &Poly::x().pow(4);
    let inner = &(&Poly::x().pow(2) + &Poly::y().pow(2)) - &Poly::t().pow(2).scale(ri(2));
    &lhs - &inner.pow(4)
}

/// `y² − x² − (x² + y² − 2t²)²`.
pub fn h_poly() -> Poly {
    let lhs = &Poly::y().pow(2) - &Poly::x().pow(2);
    let inner = &(&Poly::x().pow(2) + &Poly::y().pow(2)) - &Poly::t().pow(2).scale(ri(2));
    &lhs - &inner.pow(2)
}

/// The surface `G` with its `(3, 2)`-bridge `|x| ≤ t²` designated, and the
/// two arcs over `x = t²/2`.
pub fn build_g() -> Result<GermModel> {
    let mut m = GermModel::empty(4).with_sheet("G", make_implicit_sheet(g_poly(), strip_constraints())?);
    let arc = |coef: f64, branch| ArcSpec::Implicit { sheet: "G".into(), coef, mu: ri(2), branch };
    m = m.with_arc("gamma+", arc(0.5, Branch::Upper)).with_arc("gamma-", arc(0.5, Branch::Lower));
    let mut names = Vec::new();
    for (branch, b) in [(Branch::Upper, "A+"), (Branch::Lower, "A-")] {
        for (coef, side) in [(-1.0, "left"), (1.0, "right")] {
            let name = format!("{b}:{side}");
            m = m.with_arc(&name, arc(coef, branch));
            names.push(name);
        }
    }
    m.bridges.push(BridgeSpec {
        name: "A".into(),
        q: ri(3),
        beta: ri(2),
        p: r(5, 2),
        boundary_arcs: [names[0].clone(), names[1].clone(), names[2].clone(), names[3].clone()],
        sheets: ["G".into(), "G".into()],
        broken: None,
    });
    Ok(m)
}

/// The two strands of the braid `σ₁^{2i}` joining `(±1, −1, 0)` to `(±1, 1, 0)` outside the ball `U`.
///
/// Each strand leaves its attachment point radially, climbs to the braid
/// height, and winds `i` full turns around the axis `{x = 0, z = BRAID_HEIGHT}`
/// opposite the other strand.
pub fn braid_strands(i: usize) -> [Vec<Vec3>; 2] {
    let n = (2 * i).max(1) * HALF_TWIST_VERTICES;
    let turns = std::f64::consts::PI * (2 * i) as f64;
    let strand = |s: f64| -> Vec<Vec3> {
        let mut pts = vec![[s, -1.0, 0.0], [1.5 * s, -1.5, 0.0], [1.5 * s, -1.5, BRAID_HEIGHT]];
        for k in 0..=n {
            let th = turns * k as f64 / n as f64;
            let y = -1.0 + 2.0 * k as f64 / n as f64;
            pts.push([s * BRAID_RADIUS * th.cos(), y, BRAID_HEIGHT + s * BRAID_RADIUS * th.sin()]);
        }
        pts.extend([[1.5 * s, 1.5, BRAID_HEIGHT], [1.5 * s, 1.5, 0.0], [s, 1.0, 0.0]]);
        pts
    };
    [strand(1.0), strand(-1.0)]
}

/// `Xᵢ`: `G` together with the straight cone over a two-strand braid with `i` full twists.
pub fn build_family_xi(i: usize) -> Result<GermModel> {
    let [a, b] = braid_strands(i);
    let mut m = build_g()?.with_sheet("S+", make_cone_sheet(a, false)?).with_sheet("S-", make_cone_sheet(b, false)?);
    m.metadata.insert("example".into(), "family".into());
    m.metadata.insert("twists".into(), i.to_string());
    Ok(m)
}

/// The surfaces `X₀` and `X₁` of the `G` example: no twist and one full twist.
pub fn build_example4() -> Result<(GermModel, GermModel)> {
    let mut x0 = build_family_xi(0)?;
    let mut x1 = build_family_xi(1)?;
    x0.metadata.insert("example".into(), "example4/X0".into());
    x1.metadata.insert("example".into(), "example4/X1".into());
    Ok((x0, x1))
}

fn cone_curve<'a>(model: &'a GermModel, name: &str) -> Result<&'a ConeSheet> {
    match model.sheet(name) {
        Some(Sheet::Cone(c)) => Ok(c),
        _ => Err(GermError::InvalidInput(format!("{name:?} is not a cone sheet"))),
    }
}

/// Identity on the non-conical sheets, conical extension of the arclength
/// correspondence on cone sheets of the same name.
pub fn conical_map(source: &GermModel, target: &GermModel) -> Result<PLMap> {
    let mut pieces = Vec::new();
    for s in &source.sheets {
        let map = match &s.sheet {
            Sheet::Cone(c) => {
                let t = cone_curve(target, &s.name)?;
                if c.closed != t.closed {
                    return Err(GermError::InvalidInput(format!("cone {:?} changes closedness", s.name)));
                }
                PieceMap::Conical { source_curve: c.curve.clone(), target_curve: t.curve.clone(), closed: c.closed }
            }
            _ => {
                if target.sheet(&s.name) != Some(&s.sheet) {
                    return Err(GermError::InvalidInput(format!("sheet {:?} differs between the models", s.name)));
                }
                PieceMap::identity()
            }
        };
        pieces.push(MapPiece { source: s.name.clone(), target: s.name.clone(), map });
    }
    Ok(PLMap { pieces })
}

// ---------------------------------------------------------------- knot placement

fn unit(v: Vec3) -> Vec3 {
    v3_scale(&v, 1.0 / v3_norm(&v))
}

fn diameter(poly: &[Vec3]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in poly.iter().enumerate() {
        for b in &poly[i + 1..] {
            d = d.max(v3_norm(&v3_sub(a, b)));
        }
    }
    d
}

/// An edge `(e, e+1)` and a unit normal `m ⟂ edge` with every other vertex strictly on the `+m` side,
/// chosen to maximize the clearance.
fn supporting_edge(poly: &[Vec3]) -> Option<(usize, Vec3, f64)> {
    let n = poly.len();
    let diam = diameter(poly);
    let mut best: Option<(usize, Vec3, f64)> = None;
    for e in 0..n {
        let w0 = poly[e];
        let w1 = poly[(e + 1) % n];
        let d = v3_sub(&w1, &w0);
        if v3_norm(&d) < 1e-12 * diam {
            continue;
        }
        let d = unit(d);
        let helper = if d[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let p1 = unit(v3_cross(&d, &helper));
        let p2 = v3_cross(&d, &p1);
        for k in 0..64 {
            let a = std::f64::consts::TAU * k as f64 / 64.0;
            let m = v3_add(&v3_scale(&p1, a.cos()), &v3_scale(&p2, a.sin()));
            let clearance = (0..n)
                .filter(|&j| j != e && j != (e + 1) % n)
                .map(|j| v3_dot(&m, &v3_sub(&poly[j], &w0)))
                .fold(f64::INFINITY, f64::min)
                / diam;
            if best.is_none_or(|b| clearance > b.2) {
                best = Some((e, m, clearance));
            }
        }
    }
    best.filter(|b| b.2 > 1e-3)
}

/// The knot `K` as an open arc from `a` to `b`: `K` is rotated and scaled to
/// diameter `size` so that one of its edges faces the segment `[a, b]` at
/// distance `gap` in the direction `outward`, then that edge is dropped and
/// its ends joined to `a` and `b`. Closing the arc with the straight segment
/// `[b, a]` gives a polygon isotopic to `K`.
pub fn splice_arc(knot: &Polygon, a: Vec3, b: Vec3, outward: Vec3, size: f64, gap: f64) -> Result<Vec<Vec3>> {
    if knot.len() < 3 {
        return Err(GermError::InvalidInput(format!("knot polygon needs at least 3 vertices, got {}", knot.len())));
    }
    let (e, m, _) = supporting_edge(knot)
        .ok_or_else(|| GermError::InvalidInput("knot polygon has no edge on its convex hull".into()))?;
    let n = knot.len();
    let w0 = knot[e];
    let w1 = knot[(e + 1) % n];
    let u1 = unit(v3_sub(&w1, &w0));
    let u3 = v3_cross(&u1, &m);
    let f1 = unit(v3_sub(&a, &b));
    let f2 = unit(v3_sub(&outward, &v3_scale(&f1, v3_dot(&outward, &f1))));
    let f3 = v3_cross(&f1, &f2);
    let s = size / diameter(knot);
    let mid = v3_scale(&v3_add(&w0, &w1), 0.5);
    let centre = v3_add(&v3_scale(&v3_add(&a, &b), 0.5), &v3_scale(&f2, gap));
    let place = |v: &Vec3| -> Vec3 {
        let rel = v3_sub(v, &mid);
        let mut out = centre;
        for (u, f) in [(&u1, &f1), (&m, &f2), (&u3, &f3)] {
            out = v3_add(&out, &v3_scale(f, s * v3_dot(u, &rel)));
        }
        out
    };
    let mut arc = vec![a];
    arc.extend((1..=n).map(|k| place(&knot[(e + k) % n])));
    arc.push(b);
    Ok(arc)
}

// ---------------------------------------------------------------- Example 3

const KNOT_SIZE: f64 = 1.5;
const KNOT_GAP: f64 = 0.25;

/// `H ∪ K₁' ∪ K₂'` where `K'` is the cone over `K` minus its splice segment.
fn example3_model(right: &Polygon, left: &Polygon, names: [&str; 2]) -> Result<GermModel> {
    let arc_r = splice_arc(right, [1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 0.0, 0.0], KNOT_SIZE, KNOT_GAP)
        .map_err(|e| GermError::InvalidInput(format!("{}: {e}", names[0])))?;
    let arc_l = splice_arc(left, [-1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 0.0], KNOT_SIZE, KNOT_GAP)
        .map_err(|e| GermError::InvalidInput(format!("{}: {e}", names[1])))?;
    Ok(GermModel::empty(4)
        .with_sheet("H", make_implicit_sheet(h_poly(), strip_constraints())?)
        .with_sheet(names[0], make_cone_sheet(arc_r, false)?)
        .with_sheet(names[1], make_cone_sheet(arc_l, false)?))
}

/// `X₁ = K₁' ∪ H ∪ K₂'` and `X₂ = K₃' ∪ H ∪ K₄'` with `K₃ = K₁ # K₂` and `K₄` the unknot.
pub fn build_example3(k1: &Polygon, k2: &Polygon) -> Result<(GermModel, GermModel)> {
    let k3 = knots::connected_sum(k1, k2)?;
    let k4 = knots::knot("unknot")?;
    let mut x1 = example3_model(k1, k2, ["K1", "K2"])?;
    let mut x2 = example3_model(&k3, &k4, ["K3", "K4"])?;
    x1.metadata.insert("example".into(), "example3/X1".into());
    x2.metadata.insert("example".into(), "example3/X2".into());
    Ok((x1, x2))
}

/// Identity on `H`, conical arclength correspondences `K₁' → K₃'` and `K₂' → K₄'`.
pub fn example3_map(x1: &GermModel, x2: &GermModel) -> Result<PLMap> {
    let mut pieces = vec![MapPiece { source: "H".into(), target: "H".into(), map: PieceMap::identity() }];
    for (s, t) in [("K1", "K3"), ("K2", "K4")] {
        let a = cone_curve(x1, s)?;
        let b = cone_curve(x2, t)?;
        pieces.push(MapPiece {
            source: s.into(),
            target: t.into(),
            map: PieceMap::Conical { source_curve: a.curve.clone(), target_curve: b.curve.clone(), closed: false },
        });
    }
    Ok(PLMap { pieces })
}

// ---------------------------------------------------------------- Steps 2 and 3

/// Splice window on the outward climb of strand `S+`.
const SPLICE_LOW: f64 = 0.5;
const SPLICE_HIGH: f64 = 1.5;

/// `Yᵢ`: the link of `Xᵢ` with the knot `L'` spliced into strand `S+` on its
/// vertical climb at `(1.5, −1.5)`, between heights 0.5 and 1.5.
pub fn attach_connected_sum(base: &GermModel, lprime: &Polygon) -> Result<GermModel> {
    let strand = cone_curve(base, "S+")?;
    let corner = [1.5, -1.5];
    let climb = strand
        .curve
        .windows(2)
        .position(|w| {
            w.iter().all(|v| (v[0] - corner[0]).abs() < 1e-12 && (v[1] - corner[1]).abs() < 1e-12)
                && w[0][2] <= SPLICE_LOW
                && w[1][2] >= SPLICE_HIGH
        })
        .ok_or_else(|| GermError::InvalidInput("strand S+ has no free vertical climb to splice into".into()))?;
    let lo = [corner[0], corner[1], SPLICE_LOW];
    let hi = [corner[0], corner[1], SPLICE_HIGH];
    let outward = [1.0, -1.0, 0.0];
    let arc = splice_arc(lprime, lo, hi, outward, 1.0, KNOT_GAP)?;
    let mut curve = strand.curve[..=climb].to_vec();
    curve.extend(arc);
    curve.extend_from_slice(&strand.curve[climb + 1..]);
    let mut out = base.clone();
    replace_sheet(&mut out, "S+", vec![("S+".into(), make_cone_sheet(curve, false)?)]);
    out.metadata.insert("splice".into(), "S+ climb at (1.5, -1.5), z in [0.5, 1.5]".into());
    Ok(out)
}

/// Default half-width (in arclength of the `t = 1` curve) of the removed triangle.
pub const REMOVED_HALF_WIDTH: f64 = 0.25;

/// `Zᵢ = Xᵢ − T_β`: removes the `β`-Hölder triangle centred on the middle of strand `S+`.
pub fn remove_holder_triangle(model: &GermModel, beta: Rational) -> Result<GermModel> {
    if beta < ri(1) {
        return Err(GermError::InvalidInput(format!("a Hölder triangle needs β ≥ 1, got {beta}")));
    }
    let cone = cone_curve(model, "S+")?;
    if cone.gap.is_some() {
        return Err(GermError::InvalidInput("strand S+ already has a triangle removed".into()));
    }
    let pts: Vec<crate::geom::Point> = cone.curve.iter().map(|v| [v[0], v[1], v[2], 1.0]).collect();
    let len = crate::geom::polyline_length(&pts, cone.closed);
    // the strand's ends lie on G; the triangle must stay inside the conical part at every scale
    if REMOVED_HALF_WIDTH >= 0.5 * len - 1e-9 {
        return Err(GermError::InvalidInput("the removed triangle would overlap G".into()));
    }
    let mut cone = cone.clone();
    cone.gap = Some(HolderGap { center: 0.5, half_width: REMOVED_HALF_WIDTH, beta });
    let mut out = model.clone();
    replace_sheet(&mut out, "S+", vec![("S+".into(), Sheet::Cone(cone))]);
    out.metadata.insert("removed".into(), format!("S+ middle, beta {beta}"));
    Ok(out)
}

// ---------------------------------------------------------------- surgery invariant

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SurgeryReport {
    pub t: f64,
    pub p: Rational,
    pub components: usize,
    /// Open components, closed by a chord before linking.
    pub open: usize,
    /// `|lk|` of the two components of the broken link.
    pub linking_number: i64,
    pub gauss: f64,
}

/// Breaks the model's bridge and measures the linking number of the two resulting link components.
pub fn surgery_linking_number(
    model: &GermModel,
    bridge: &str,
    p: Option<Rational>,
    t: f64,
    resolution: usize,
    seed: u64,
) -> Result<SurgeryReport> {
    let spec = &model.bridges[bridge_index(model, bridge)?];
    let p = p.unwrap_or(spec.p);
    let broken = break_bridge(model, bridge, p)?;
    let link = section_at(&broken, t, resolution)?;
    surgery_on_link(&link, p, seed)
}

pub fn surgery_on_link(link: &PolyLink, p: Rational, seed: u64) -> Result<SurgeryReport> {
    if link.components.len() != 2 {
        return Err(GermError::Degenerate(format!(
            "broken link at t = {} has {} components, expected 2",
            link.t,
            link.components.len()
        )));
    }
    let polys: Vec<Polygon> = link
        .rescaled()
        .components
        .iter()
        .map(|c| c.points.iter().map(|p| [p[0], p[1], p[2]]).collect())
        .collect();
    let rep = knots::linking_number_polygons(&polys[0], &polys[1], seed)?;
    Ok(SurgeryReport {
        t: link.t,
        p,
        components: 2,
        open: link.open_count(),
        linking_number: rep.value.abs(),
        gauss: rep.gauss.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knots::{alexander_of_polygon, expected_alexander, knot, link_polygons};
    use crate::laurent::LaurentPoly;
    use crate::metrics::tangency_order_arcs;
    use crate::section::{dyadic_ladder, gluing_tolerance, hausdorff, nesting_tree};

    fn knot_of(link: &PolyLink) -> LaurentPoly {
        assert_eq!(link.components.len(), 1, "expected a single component");
        let polys = link_polygons(link).unwrap();
        alexander_of_polygon(&polys[0], 0).unwrap()
    }

    #[test]
    fn example1_links_are_three_nested_circles() {
        let (x1, x2) = build_example1(ri(5)).unwrap();
        for m in [&x1, &x2] {
            let link = section_at(m, 0.125, 256).unwrap();
            assert_eq!(link.closed_count(), 3);
            assert_eq!(link.open_count(), 0);
            assert_eq!(nesting_tree(&link).unwrap().canonical(), "(()())");
        }
    }

    #[test]
    fn example1_tangency_is_k_over_4() {
        let ladder = dyadic_ladder(4, 14, 1);
        for k in [5, 6, 8] {
            let (x1, _) = build_example1(ri(k)).unwrap();
            let order = tangency_order_arcs(&x1, "gamma+", "gamma-", &ladder).unwrap().slope();
            assert!((order - k as f64 / 4.0).abs() < 0.05, "k = {k}: {order}");
        }
    }

    #[test]
    fn example1_rejects_small_k() {
        assert!(matches!(build_example1(ri(4)), Err(GermError::InvalidInput(_))));
        assert!(build_example1(r(9, 2)).is_ok());
    }

    #[test]
    fn example1_map_carries_circles_onto_circles() {
        let (x1, x2) = build_example1(ri(5)).unwrap();
        let map = example1_map();
        map.check_cover(&x1).unwrap();
        for (s, t) in [("U2", "V2"), ("U3", "V3")] {
            let src = cone_curve(&x1, s).unwrap();
            let tgt = cone_curve(&x2, t).unwrap();
            let piece = map.piece(s).unwrap();
            for (v, w) in src.curve.iter().zip(&tgt.curve) {
                let tt = 0.3;
                let img = piece.map.apply(&[tt * v[0], tt * v[1], 0.0, tt]);
                assert!((img[0] - tt * w[0]).abs() < 1e-12 && (img[1] - tt * w[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn broken_bridge_reroutes_through_walls() {
        let a = build_bridge(ri(3), ri(2)).unwrap();
        let t: f64 = 0.25;
        let b = break_bridge(&a, "A", r(5, 2)).unwrap();
        let link = section_at(&b, t, 256).unwrap();
        assert_eq!(link.components.len(), 2);
        assert_eq!(link.open_count(), 2);
        let tp = t.powf(2.5);
        for c in &link.components {
            // each component turns through the wall x = ±t^p
            assert!(c.points.iter().any(|p| (p[0].abs() - tp).abs() < 1e-12 && p[1].abs() < 1e-12));
            assert!(c.points.iter().all(|p| p[0].abs() >= tp - 1e-12));
        }
    }

    #[test]
    fn break_then_restore_is_identity_on_sections() {
        let a = build_bridge(ri(3), ri(2)).unwrap();
        let back = restore_bridge(&break_bridge(&a, "A", r(5, 2)).unwrap(), "A").unwrap();
        assert_eq!(back.bridges, a.bridges);
        for t in [0.5, 0.25, 0.0625] {
            let s0 = section_at(&a, t, 128).unwrap();
            let s1 = section_at(&back, t, 128).unwrap();
            assert_eq!(s1.components.len(), 2);
            assert!(hausdorff(&s0, &s1) < gluing_tolerance(t, 128));
        }
        let g = build_family_xi(1).unwrap();
        let back = restore_bridge(&break_bridge(&g, "A", r(5, 2)).unwrap(), "A").unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn breaking_needs_p_between_beta_and_q() {
        let a = build_bridge(ri(3), ri(2)).unwrap();
        for p in [ri(2), ri(3), ri(4), r(3, 2)] {
            assert!(matches!(break_bridge(&a, "A", p), Err(GermError::InvalidInput(_))));
        }
        assert!(break_bridge(&a, "B", r(5, 2)).is_err());
        let b = break_bridge(&a, "A", r(5, 2)).unwrap();
        assert!(break_bridge(&b, "A", r(5, 2)).is_err());
        assert!(restore_bridge(&a, "A").is_err());
    }

    #[test]
    fn g_arcs_have_tangency_three() {
        let g = build_g().unwrap();
        let order = tangency_order_arcs(&g, "gamma+", "gamma-", &dyadic_ladder(4, 14, 1)).unwrap().slope();
        assert!((order - 3.0).abs() < 0.05, "{order}");
    }

    #[test]
    fn example4_links_are_unknots_told_apart_by_surgery() {
        let (x0, x1) = build_example4().unwrap();
        for m in [&x0, &x1] {
            let link = section_at(m, SURGERY_SCALE, 256).unwrap();
            assert_eq!(link.closed_count(), 1);
            assert_eq!(knot_of(&link), LaurentPoly::one());
        }
        let broken = break_bridge(&x0, "A", r(5, 2)).unwrap();
        let link = section_at(&broken, SURGERY_SCALE, 256).unwrap();
        assert_eq!(link.closed_count(), 2);
        let s0 = surgery_linking_number(&x0, "A", None, SURGERY_SCALE, 256, 0).unwrap();
        let s1 = surgery_linking_number(&x1, "A", None, SURGERY_SCALE, 256, 0).unwrap();
        assert_eq!((s0.linking_number, s1.linking_number), (0, 1));
    }

    #[test]
    fn family_linking_number_counts_twists() {
        let x3 = build_family_xi(3).unwrap();
        let link = section_at(&x3, SURGERY_SCALE, 256).unwrap();
        assert_eq!(knot_of(&link), LaurentPoly::one());
        let s = surgery_linking_number(&x3, "A", None, SURGERY_SCALE, 256, 0).unwrap();
        assert_eq!(s.linking_number, 3);
        assert!((s.gauss - 3.0).abs() < 0.05);
    }

    #[test]
    fn braid_strands_stay_outside_the_ball() {
        for i in 0..=4 {
            for s in braid_strands(i) {
                for v in &s[1..s.len() - 1] {
                    assert!(v3_norm(v) > 2f64.sqrt());
                }
                assert!((v3_norm(&s[0]) - 2f64.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn splice_arc_keeps_knot_type() {
        for name in ["unknot", "trefoil", "figure-eight"] {
            let k = knot(name).unwrap();
            let arc = splice_arc(&k, [1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 0.0, 0.0], 1.5, 0.25).unwrap();
            assert_eq!(arc[0], [1.0, 1.0, 0.0]);
            assert_eq!(*arc.last().unwrap(), [1.0, -1.0, 0.0]);
            assert!(arc[1..arc.len() - 1].iter().all(|v| v[0] > 1.2));
            assert_eq!(alexander_of_polygon(&arc, 3).unwrap(), expected_alexander(name).unwrap());
        }
        assert!(splice_arc(&vec![[0.0; 3]; 2], [1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 0.0, 0.0], 1.0, 0.1).is_err());
    }

    #[test]
    fn example3_links_are_the_connected_sum() {
        let (x1, x2) = build_example3(&knot("trefoil").unwrap(), &knot("figure-eight").unwrap()).unwrap();
        let expected = expected_alexander("trefoil#figure-eight").unwrap();
        for m in [&x1, &x2] {
            let link = section_at(m, 0.125, 256).unwrap();
            assert_eq!(link.closed_count(), 1);
            assert_eq!(knot_of(&link), expected);
        }
        example3_map(&x1, &x2).unwrap().check_cover(&x1).unwrap();
    }

    #[test]
    fn trefoil_attachment_keeps_linking_number() {
        let tref = knot("trefoil").unwrap();
        for i in [0usize, 1] {
            let y = attach_connected_sum(&build_family_xi(i).unwrap(), &tref).unwrap();
            let link = section_at(&y, SURGERY_SCALE, 256).unwrap();
            assert_eq!(knot_of(&link), LaurentPoly::from_coeffs(&[1, -1, 1]));
            let s = surgery_linking_number(&y, "A", None, SURGERY_SCALE, 256, 0).unwrap();
            assert_eq!(s.linking_number, i as i64);
        }
    }

    #[test]
    fn removing_a_triangle_opens_the_link() {
        let x = build_family_xi(2).unwrap();
        let z = remove_holder_triangle(&x, ri(2)).unwrap();
        let link = section_at(&z, SURGERY_SCALE, 256).unwrap();
        assert_eq!((link.components.len(), link.open_count()), (1, 1));
        let s = surgery_linking_number(&z, "A", None, SURGERY_SCALE, 256, 0).unwrap();
        assert_eq!((s.linking_number, s.open), (2, 1));
        assert!(remove_holder_triangle(&x, r(1, 2)).is_err());
        assert!(remove_holder_triangle(&z, ri(2)).is_err());
    }

    #[test]
    fn family_map_is_identity_on_g() {
        let map = conical_map(&build_family_xi(0).unwrap(), &build_family_xi(2).unwrap()).unwrap();
        assert_eq!(map.piece("G").unwrap().map, PieceMap::identity());
        assert!(matches!(map.piece("S+").unwrap().map, PieceMap::Conical { .. }));
    }
}
