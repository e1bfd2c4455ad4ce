//! Surface germs as finite unions of named sheets.
//!
//! Three kinds of sheet cover every surface the constructions need:
//! zero sets of polynomials in a coordinate plane, straight cones over
//! polygonal curves in `{t = 1}`, and Hölder triangles given by a
//! `(u, t)` template. Models are plain data; all operations are pure.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};
use crate::geom::{Point, Vec3};
use crate::poly::{real_roots, Poly};
use crate::rational::Rational;

pub const SCHEMA_VERSION: u32 = 1;

/// Half-width of the rescaled window `[-3t, 3t]` in which sections live.
pub const WINDOW: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `{F = 0, g_i ≥ 0}` in the `(x, y)` plane at each scale `t` (and `z = 0` in dimension 4).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicitSheet {
    pub poly: Poly,
    /// Each polynomial `g` encodes the inequality `g ≥ 0`.
    pub constraints: Vec<Poly>,
}

impl ImplicitSheet {
    pub fn satisfies(&self, x: f64, y: f64, t: f64, slack: f64) -> bool {
        self.constraints.iter().all(|g| g.eval(x, y, t) >= -slack)
    }
}

/// A β-horn removed from a cone: the part of the curve within arclength
/// `half_width · t^(β-1)` of `center` (a fraction of the curve length) is absent at scale `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderGap {
    pub center: f64,
    pub half_width: f64,
    pub beta: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSheet {
    /// Vertices of the curve in the hyperplane `{t = 1}`; `z = 0` in dimension 3.
    pub curve: Vec<Vec3>,
    pub closed: bool,
    #[serde(default)]
    pub pinched: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<HolderGap>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriangleRole {
    /// One side of a `(q, β)`-bridge; requires `β < q`.
    Bridge,
    /// A rerouting wall inserted by bridge breaking.
    Reroute,
    /// A piece cut out of a bridge side.
    Piece,
}

/// `coef · u^u_pow · t^t_exp`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateTerm {
    pub coef: f64,
    pub u_pow: u32,
    pub t_exp: Rational,
}

impl TemplateTerm {
    pub fn new(coef: f64, u_pow: u32, t_exp: Rational) -> Self {
        Self { coef, u_pow, t_exp }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderTriangle {
    pub beta: Rational,
    pub q: Rational,
    pub sign: Sign,
    pub role: TriangleRole,
    /// Coordinate templates for `(x, y, z)` over `(u, t) ∈ [-1, 1] × (0, 1]`.
    pub template: [Vec<TemplateTerm>; 3],
}

impl HolderTriangle {
    pub fn eval(&self, u: f64, t: f64) -> Point {
        let c = |terms: &[TemplateTerm]| -> f64 {
            terms.iter().map(|k| k.coef * u.powi(k.u_pow as i32) * k.t_exp.pow_of(t)).sum()
        };
        [c(&self.template[0]), c(&self.template[1]), c(&self.template[2]), t]
    }

    pub fn is_linear_in_u(&self) -> bool {
        self.template.iter().flatten().all(|k| k.u_pow <= 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Sheet {
    Implicit(ImplicitSheet),
    Cone(ConeSheet),
    Holder(HolderTriangle),
}

impl Sheet {
    pub fn kind(&self) -> &'static str {
        match self {
            Sheet::Implicit(_) => "implicit",
            Sheet::Cone(_) => "cone",
            Sheet::Holder(_) => "holder",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedSheet {
    pub name: String,
    #[serde(flatten)]
    pub sheet: Sheet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coef: f64,
    pub exp: Rational,
}

/// An arc `t ↦ (Σ c t^e, …)`, one term list per spatial coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerArc {
    pub coords: [Vec<PowerTerm>; 3],
}

impl PowerArc {
    pub fn new(x: &[(f64, Rational)], y: &[(f64, Rational)], z: &[(f64, Rational)]) -> Self {
        let conv = |v: &[(f64, Rational)]| {
            v.iter().map(|&(coef, exp)| PowerTerm { coef, exp }).collect::<Vec<_>>()
        };
        Self { coords: [conv(x), conv(y), conv(z)] }
    }

    pub fn eval(&self, t: f64) -> Point {
        let c = |terms: &[PowerTerm]| -> f64 { terms.iter().map(|k| k.coef * k.exp.pow_of(t)).sum() };
        [c(&self.coords[0]), c(&self.coords[1]), c(&self.coords[2]), t]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Upper,
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ArcSpec {
    Power {
        arc: PowerArc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sheet: Option<String>,
    },
    /// The highest or lowest point of an implicit sheet over `x = coef · t^mu`.
    Implicit { sheet: String, coef: f64, mu: Rational, branch: Branch },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedArc {
    pub name: String,
    #[serde(flatten)]
    pub spec: ArcSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeSpec {
    pub name: String,
    pub q: Rational,
    pub beta: Rational,
    pub p: Rational,
    pub boundary_arcs: [String; 4],
    /// Sheets carrying the two triangles; both entries name the same sheet
    /// when the bridge sits inside one implicit sheet.
    pub sheets: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broken: Option<Rational>,
}

impl BridgeSpec {
    pub fn check(&self) -> Result<()> {
        if !(self.beta < self.p && self.p < self.q) {
            return Err(GermError::InvalidInput(format!(
                "bridge {}: need β < p < q, got β={}, p={}, q={}",
                self.name, self.beta, self.p, self.q
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GermModel {
    pub schema_version: u32,
    pub dimension: u8,
    pub sheets: Vec<NamedSheet>,
    #[serde(default)]
    pub arcs: Vec<NamedArc>,
    #[serde(default)]
    pub bridges: Vec<BridgeSpec>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl GermModel {
    pub fn empty(dimension: u8) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dimension,
            sheets: Vec::new(),
            arcs: Vec::new(),
            bridges: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn single(dimension: u8, name: &str, sheet: Sheet) -> Self {
        let mut m = Self::empty(dimension);
        m.sheets.push(NamedSheet { name: name.into(), sheet });
        m
    }

    pub fn with_sheet(mut self, name: &str, sheet: Sheet) -> Self {
        self.sheets.push(NamedSheet { name: name.into(), sheet });
        self
    }

    pub fn with_arc(mut self, name: &str, spec: ArcSpec) -> Self {
        self.arcs.push(NamedArc { name: name.into(), spec });
        self
    }

    pub fn sheet(&self, name: &str) -> Option<&Sheet> {
        self.sheets.iter().find(|s| s.name == name).map(|s| &s.sheet)
    }

    pub fn arc(&self, name: &str) -> Option<&ArcSpec> {
        self.arcs.iter().find(|a| a.name == name).map(|a| &a.spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: GermModel = serde_json::from_str(s)?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(GermError::Parse(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        if m.dimension != 3 && m.dimension != 4 {
            return Err(GermError::Parse(format!("dimension must be 3 or 4, got {}", m.dimension)));
        }
        Ok(m)
    }

    /// Evaluates a named arc at scale `t`.
    pub fn eval_arc(&self, name: &str, t: f64) -> Result<Point> {
        let spec = self
            .arc(name)
            .ok_or_else(|| GermError::InvalidInput(format!("unknown arc {name:?}")))?;
        self.eval_arc_spec(spec, t)
    }

    pub fn eval_arc_spec(&self, spec: &ArcSpec, t: f64) -> Result<Point> {
        match spec {
            ArcSpec::Power { arc, .. } => Ok(arc.eval(t)),
            ArcSpec::Implicit { sheet, coef, mu, branch } => {
                let s = match self.sheet(sheet) {
                    Some(Sheet::Implicit(s)) => s,
                    _ => {
                        return Err(GermError::InvalidInput(format!(
                            "arc refers to {sheet:?}, which is not an implicit sheet"
                        )))
                    }
                };
                let x = coef * mu.pow_of(t);
                let ys = implicit_column_roots(s, x / t, t);
                let y = match branch {
                    Branch::Upper => ys.last(),
                    Branch::Lower => ys.first(),
                };
                let y = y.ok_or_else(|| {
                    GermError::Degenerate(format!("sheet {sheet:?} has no point over x = {x:e} at t = {t}"))
                })?;
                Ok([x, t * y, 0.0, t])
            }
        }
    }
}

/// Rescaled `Y` coordinates of the points of an implicit sheet over the rescaled abscissa `x_rescaled`.
pub fn implicit_column_roots(sheet: &ImplicitSheet, x_rescaled: f64, t: f64) -> Vec<f64> {
    let scaled = sheet.poly.at_scale(t);
    let col = scaled.column(x_rescaled);
    real_roots(&col, -WINDOW, WINDOW)
        .into_iter()
        .filter(|&y| sheet.satisfies(t * x_rescaled, t * y, t, 1e-12 * t))
        .collect()
}

/// Straight cone over a polygonal curve in `{t = 1}`.
pub fn make_cone_sheet(curve: Vec<Vec3>, closed: bool) -> Result<Sheet> {
    if curve.len() < 2 {
        return Err(GermError::InvalidInput(format!(
            "cone curve needs at least 2 vertices, got {}",
            curve.len()
        )));
    }
    Ok(Sheet::Cone(ConeSheet { curve, closed, pinched: false, gap: None }))
}

pub fn make_implicit_sheet(poly: Poly, constraints: Vec<Poly>) -> Result<Sheet> {
    if poly.is_zero() {
        return Err(GermError::InvalidInput("implicit sheet polynomial is zero".into()));
    }
    Ok(Sheet::Implicit(ImplicitSheet { poly, constraints }))
}

/// Constraints `0 ≤ t ≤ 1`.
pub fn unit_t_constraints() -> Vec<Poly> {
    vec![Poly::t(), &Poly::int(1) - &Poly::t()]
}

/// `{-t^β ≤ x ≤ t^β, y = ±t^q, z = 0}`.
pub fn make_holder_triangle(beta: Rational, q: Rational, sign: Sign) -> Result<Sheet> {
    if beta < Rational::one() {
        return Err(GermError::InvalidInput(format!("need β ≥ 1, got {beta}")));
    }
    if beta >= q {
        return Err(GermError::InvalidInput(format!("need β < q, got β={beta}, q={q}")));
    }
    Ok(Sheet::Holder(HolderTriangle {
        beta,
        q,
        sign,
        role: TriangleRole::Bridge,
        template: [
            vec![TemplateTerm::new(1.0, 1, beta)],
            vec![TemplateTerm::new(sign.value(), 0, q)],
            vec![],
        ],
    }))
}

/// Unions models, suffixing colliding sheet and arc names with `#2`, `#3`, ….
pub fn union(models: &[GermModel]) -> Result<GermModel> {
    let Some(first) = models.first() else {
        return Err(GermError::InvalidInput("union of no models".into()));
    };
    let mut out = GermModel::empty(first.dimension);
    for m in models {
        if m.dimension != out.dimension {
            return Err(GermError::InvalidInput(format!(
                "dimension mismatch in union: {} vs {}",
                out.dimension, m.dimension
            )));
        }
        let mut renames = BTreeMap::new();
        for s in &m.sheets {
            let name = fresh_name(&s.name, |n| out.sheets.iter().any(|x| x.name == n));
            renames.insert(s.name.clone(), name.clone());
            out.sheets.push(NamedSheet { name, sheet: s.sheet.clone() });
        }
        let rename = |n: &String| renames.get(n).cloned().unwrap_or_else(|| n.clone());
        for a in &m.arcs {
            let name = fresh_name(&a.name, |n| out.arcs.iter().any(|x| x.name == n));
            let spec = match &a.spec {
                ArcSpec::Power { arc, sheet } => {
                    ArcSpec::Power { arc: arc.clone(), sheet: sheet.as_ref().map(rename) }
                }
                ArcSpec::Implicit { sheet, coef, mu, branch } => {
                    ArcSpec::Implicit { sheet: rename(sheet), coef: *coef, mu: *mu, branch: *branch }
                }
            };
            out.arcs.push(NamedArc { name, spec });
        }
        for b in &m.bridges {
            let mut b = b.clone();
            b.sheets = [rename(&b.sheets[0]), rename(&b.sheets[1])];
            out.bridges.push(b);
        }
        for (k, v) in &m.metadata {
            out.metadata.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }
    Ok(out)
}

fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (2..).map(|i| format!("{base}#{i}")).find(|n| !taken(n)).unwrap()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Violation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub sheet: Option<String>,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Violation => "violation",
        };
        match &self.sheet {
            Some(s) => write!(f, "{sev} [{s}]: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

/// Checks every sheet invariant; an empty report means the model is well formed.
pub fn validate(model: &GermModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |sheet: Option<&str>, severity, message: String| {
        out.push(Diagnostic { sheet: sheet.map(String::from), severity, message })
    };
    if model.dimension != 3 && model.dimension != 4 {
        push(None, Severity::Violation, format!("dimension must be 3 or 4, got {}", model.dimension));
    }
    for ns in &model.sheets {
        let name = Some(ns.name.as_str());
        match &ns.sheet {
            Sheet::Implicit(s) => {
                if s.poly.is_zero() {
                    push(name, Severity::Violation, "polynomial is identically zero".into());
                }
                let t_only: Vec<&Poly> = s.constraints.iter().filter(|g| g.is_t_only()).collect();
                if !t_only.iter().any(|g| g.eval(0.0, 0.0, -1e-3) < 0.0) {
                    push(name, Severity::Violation, "constraints must include t ≥ 0".into());
                }
                if !t_only.iter().any(|g| g.eval(0.0, 0.0, 1.0 + 1e-3) < 0.0) {
                    push(name, Severity::Violation, "constraints must include t ≤ 1".into());
                }
                if s.poly.min_degree().is_zero() {
                    push(name, Severity::Violation, "closure does not contain the origin".into());
                }
            }
            Sheet::Cone(c) => {
                if c.curve.len() < 2 {
                    push(name, Severity::Violation, "cone curve needs at least 2 vertices".into());
                }
                if !c.pinched && c.curve.iter().any(|v| v.iter().all(|x| x.abs() < 1e-12)) {
                    push(name, Severity::Violation, "cone curve passes through the origin".into());
                }
                if model.dimension == 3 && c.curve.iter().any(|v| v[2] != 0.0) {
                    push(name, Severity::Violation, "z ≠ 0 in a 3-dimensional model".into());
                }
                if c.curve.iter().any(|v| v.iter().any(|x| x.abs() > WINDOW)) {
                    push(
                        name,
                        Severity::Warning,
                        "cone curve leaves the section window at t = 1".into(),
                    );
                }
                if let Some(g) = &c.gap {
                    if g.beta < Rational::one() || g.half_width <= 0.0 {
                        push(name, Severity::Violation, "gap needs β ≥ 1 and positive width".into());
                    }
                }
            }
            Sheet::Holder(h) => {
                if h.beta < Rational::one() {
                    push(name, Severity::Violation, "β ≥ 1 required".into());
                }
                if h.role == TriangleRole::Bridge && h.beta >= h.q {
                    push(name, Severity::Violation, "β < q required".into());
                }
                if h.template.iter().flatten().any(|k| !k.t_exp.is_positive()) {
                    push(name, Severity::Violation, "template terms must vanish at t = 0".into());
                }
                if model.dimension == 3 && !h.template[2].is_empty() {
                    push(name, Severity::Violation, "z template in a 3-dimensional model".into());
                }
            }
        }
    }
    for a in &model.arcs {
        match &a.spec {
            ArcSpec::Power { arc, sheet } => {
                if arc.coords.iter().flatten().any(|k| !k.exp.is_positive()) {
                    push(Some(&a.name), Severity::Violation, "arc exponents must be positive".into());
                }
                if let Some(s) = sheet {
                    if model.sheet(s).is_none() {
                        push(Some(&a.name), Severity::Violation, format!("unknown sheet {s:?}"));
                    }
                }
            }
            ArcSpec::Implicit { sheet, mu, .. } => {
                if !matches!(model.sheet(sheet), Some(Sheet::Implicit(_))) {
                    push(Some(&a.name), Severity::Violation, format!("{sheet:?} is not an implicit sheet"));
                }
                if *mu < Rational::one() {
                    push(Some(&a.name), Severity::Violation, "μ ≥ 1 required".into());
                }
            }
        }
    }
    for b in &model.bridges {
        if let Err(e) = b.check() {
            push(None, Severity::Violation, e.to_string());
        }
        for s in &b.sheets {
            if model.sheet(s).is_none() {
                push(None, Severity::Violation, format!("bridge {} names unknown sheet {s:?}", b.name));
            }
        }
    }
    out
}

/// One piece of a piecewise map between germs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PieceMap {
    /// Linear map on `(x, y, z, t)`.
    Linear { matrix: [[f64; 4]; 4] },
    /// Conical extension of the arclength-proportional correspondence between two curves in `{t = 1}`.
    Conical { source_curve: Vec<Vec3>, target_curve: Vec<Vec3>, closed: bool },
}

impl PieceMap {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        PieceMap::Linear { matrix: m }
    }

    pub fn apply(&self, p: &Point) -> Point {
        match self {
            PieceMap::Linear { matrix } => {
                let mut out = [0.0; 4];
                for (i, row) in matrix.iter().enumerate() {
                    out[i] = row.iter().zip(p).map(|(a, b)| a * b).sum();
                }
                out
            }
            PieceMap::Conical { source_curve, target_curve, closed } => {
                let t = p[3];
                if t <= 0.0 {
                    return *p;
                }
                let lift = |c: &[Vec3]| c.iter().map(|v| [v[0], v[1], v[2], 1.0]).collect::<Vec<_>>();
                let src = lift(source_curve);
                let tgt = lift(target_curve);
                let v = [p[0] / t, p[1] / t, p[2] / t, 1.0];
                let s = crate::geom::fraction_of_nearest(&src, *closed, &v);
                let w = crate::geom::point_at_fraction(&tgt, *closed, s);
                [t * w[0], t * w[1], t * w[2], t]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapPiece {
    pub source: String,
    pub target: String,
    pub map: PieceMap,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PLMap {
    pub pieces: Vec<MapPiece>,
}

impl PLMap {
    pub fn identity(model: &GermModel) -> Self {
        Self {
            pieces: model
                .sheets
                .iter()
                .map(|s| MapPiece { source: s.name.clone(), target: s.name.clone(), map: PieceMap::identity() })
                .collect(),
        }
    }

    pub fn piece(&self, source: &str) -> Option<&MapPiece> {
        self.pieces.iter().find(|p| p.source == source)
    }

    /// Every source sheet must be covered exactly once.
    pub fn check_cover(&self, source: &GermModel) -> Result<()> {
        for s in &source.sheets {
            let n = self.pieces.iter().filter(|p| p.source == s.name).count();
            if n != 1 {
                return Err(GermError::InvalidInput(format!(
                    "sheet {:?} covered {n} times by the map",
                    s.name
                )));
            }
        }
        if let Some(p) = self.pieces.iter().find(|p| source.sheet(&p.source).is_none()) {
            return Err(GermError::InvalidInput(format!("map piece for unknown sheet {:?}", p.source)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn circle(cx: f64, cy: f64, rad: f64, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                [cx + rad * a.cos(), cy + rad * a.sin(), 0.0]
            })
            .collect()
    }

    #[test]
    fn cone_needs_two_vertices() {
        assert!(make_cone_sheet(vec![], true).is_err());
        assert!(make_cone_sheet(vec![[1.0, 0.0, 0.0]], true).is_err());
        assert!(make_cone_sheet(circle(0.0, 0.0, 1.0, 32), true).is_ok());
    }

    #[test]
    fn implicit_rejects_zero() {
        assert!(make_implicit_sheet(Poly::zero(), unit_t_constraints()).is_err());
    }

    #[test]
    fn holder_triangle_requires_beta_below_q() {
        assert!(make_holder_triangle(r(3, 1), r(3, 1), Sign::Plus).is_err());
        let Sheet::Holder(h) = make_holder_triangle(r(2, 1), r(3, 1), Sign::Plus).unwrap() else {
            panic!()
        };
        let a = h.eval(-1.0, 0.25);
        let b = h.eval(1.0, 0.25);
        assert_eq!(a, [-1.0 / 16.0, 1.0 / 64.0, 0.0, 0.25]);
        assert_eq!(b, [1.0 / 16.0, 1.0 / 64.0, 0.0, 0.25]);
    }

    #[test]
    fn validate_flags_beta_equal_q() {
        let mut h = match make_holder_triangle(r(2, 1), r(3, 1), Sign::Minus).unwrap() {
            Sheet::Holder(h) => h,
            _ => unreachable!(),
        };
        h.beta = r(3, 1);
        let m = GermModel::single(4, "T", Sheet::Holder(h));
        let d = validate(&m);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("β < q required"));
    }

    #[test]
    fn validate_warns_on_cone_outside_window() {
        let m = GermModel::single(3, "C", make_cone_sheet(circle(5.0, 0.0, 0.5, 16), true).unwrap());
        let d = validate(&m);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
    }

    #[test]
    fn validate_requires_t_bounds() {
        let m = GermModel::single(3, "P", make_implicit_sheet(Poly::x(), vec![Poly::t()]).unwrap());
        let d = validate(&m);
        assert!(d.iter().any(|d| d.message.contains("t ≤ 1")));
        let ok = GermModel::single(3, "P", make_implicit_sheet(Poly::x(), unit_t_constraints()).unwrap());
        assert!(validate(&ok).is_empty());
    }

    #[test]
    fn union_suffixes_collisions_and_checks_dimension() {
        let a = GermModel::single(3, "S", make_cone_sheet(circle(0.0, 0.0, 1.0, 8), true).unwrap());
        let b = a.clone();
        let u = union(&[a.clone(), b]).unwrap();
        let names: Vec<_> = u.sheets.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["S", "S#2"]);
        let c = GermModel::single(4, "S", make_cone_sheet(circle(0.0, 0.0, 1.0, 8), true).unwrap());
        assert!(union(&[a.clone(), c]).is_err());
        assert_eq!(union(std::slice::from_ref(&a)).unwrap(), a);
    }

    #[test]
    fn model_json_roundtrip() {
        let t = Poly::t();
        let f = &(&Poly::x().pow(2) + &Poly::y().pow(2)) - &t.pow(2);
        let m = GermModel::single(3, "U", make_implicit_sheet(f, unit_t_constraints()).unwrap())
            .with_sheet("C", make_cone_sheet(circle(1.0, 0.5, 0.25, 8), true).unwrap())
            .with_arc(
                "g",
                ArcSpec::Power { arc: PowerArc::new(&[], &[(1.0, r(5, 4))], &[]), sheet: Some("U".into()) },
            );
        let s = m.to_json().unwrap();
        assert!(s.contains("\"kind\": \"implicit\""));
        assert!(s.contains("\"payload\""));
        let back = GermModel::from_json(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn implicit_arc_finds_branches() {
        // y^2 - x^2 - t^4 = 0: branches y = ±sqrt(x^2 + t^4)
        let f = &(&Poly::y().pow(2) - &Poly::x().pow(2)) - &Poly::t().pow(4);
        let m = GermModel::single(3, "S", make_implicit_sheet(f, unit_t_constraints()).unwrap())
            .with_arc("up", ArcSpec::Implicit { sheet: "S".into(), coef: 1.0, mu: r(2, 1), branch: Branch::Upper })
            .with_arc("lo", ArcSpec::Implicit { sheet: "S".into(), coef: 1.0, mu: r(2, 1), branch: Branch::Lower });
        let t: f64 = 0.01;
        let up = m.eval_arc("up", t).unwrap();
        let lo = m.eval_arc("lo", t).unwrap();
        let expect = (t.powi(4) + t.powi(4)).sqrt();
        assert!((up[1] - expect).abs() < 1e-15);
        assert!((lo[1] + expect).abs() < 1e-15);
    }

    #[test]
    fn linear_piece_applies_matrix() {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        m[1][3] = -0.5;
        let p = PieceMap::Linear { matrix: m };
        assert_eq!(p.apply(&[1.0, 0.5, 0.0, 1.0]), [1.0, 0.0, 0.0, 1.0]);
    }
}
