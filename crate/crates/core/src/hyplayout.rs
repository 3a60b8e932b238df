//! Hyperbolic picture of a train track: the cut-open surface as a
//! 2n-gon coned off at the puncture, a circle packing of that
//! triangulation, its development into the Poincaré disk, and SVG output.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use crate::analysis::{InfinitesimalEdge, SingularityReport, TrainTrackStructure};
use crate::error::{Error, Result};
use crate::graph::{EmbeddedGraph, OrientedEdge, VertexId};

/// Cap on Gauss-Seidel sweeps in [`circle_pack`].
pub const MAX_SWEEPS: usize = 100_000;
/// Default angle-sum tolerance for [`circle_pack`].
pub const DEFAULT_PACKING_TOL: f64 = 1e-10;
pub const FAN_CLOSURE_TOL: f64 = 1e-8;
pub const SIDE_LENGTH_TOL: f64 = 1e-6;

/// A vertex of the closed-up surface: the puncture or a graph vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuotientVertex {
    Apex,
    Graph(VertexId),
}

/// The 2n-gon bounded by `rho`, with the puncture at an interior apex.
///
/// Side `i` carries `rho[i]` from corner `i` to corner `i + 1`; triangle
/// `i` is (apex, corner `i`, corner `i + 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeTriangulation {
    pub sides: Vec<OrientedEdge>,
    /// Graph vertex at each corner.
    pub corners: Vec<VertexId>,
    pub vertices: Vec<QuotientVertex>,
    pub genus: u32,
}

impl ConeTriangulation {
    pub fn side_count(&self) -> usize {
        self.sides.len()
    }

    pub fn triangles(&self) -> impl Iterator<Item = [QuotientVertex; 3]> + '_ {
        let m = self.sides.len();
        (0..m).map(move |i| {
            [
                QuotientVertex::Apex,
                QuotientVertex::Graph(self.corners[i]),
                QuotientVertex::Graph(self.corners[(i + 1) % m]),
            ]
        })
    }

    /// `V - E + F` of the quotient: spokes are not identified, sides are
    /// identified in pairs.
    pub fn euler_characteristic(&self) -> i64 {
        let m = self.sides.len() as i64;
        self.vertices.len() as i64 - (m / 2 + m) + m
    }
}

pub fn cone_triangulation(g: &EmbeddedGraph) -> Result<ConeTriangulation> {
    g.rotation_system()?;
    let sides = g.rho().to_vec();
    if sides.len() != 2 * g.edge_count() {
        return Err(Error::InvalidGraph(
            "boundary word must cross every edge twice".into(),
        ));
    }
    let corners = sides.iter().map(|&d| g.origin(d)).collect();
    let vertices = std::iter::once(QuotientVertex::Apex)
        .chain(g.vertices().map(QuotientVertex::Graph))
        .collect();
    Ok(ConeTriangulation {
        sides,
        corners,
        vertices,
        genus: g.genus()?,
    })
}

/// Angle at the circle of radius `x` in the triangle formed by mutually
/// tangent hyperbolic circles of radii `x`, `y`, `z`.
pub fn corner_angle(x: f64, y: f64, z: f64) -> f64 {
    let s = (y.sinh() * z.sinh() / ((x + y).sinh() * (x + z).sinh())).sqrt();
    2.0 * s.min(1.0).asin()
}

/// Hyperbolic circle radii with angle sum `2π` at every quotient vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct PackingRadii {
    pub radius: BTreeMap<QuotientVertex, f64>,
    pub sweeps: usize,
}

impl PackingRadii {
    pub fn angle_sums(&self, t: &ConeTriangulation) -> BTreeMap<QuotientVertex, f64> {
        angle_sums(t, &self.radius)
    }

    pub fn max_defect(&self, t: &ConeTriangulation) -> f64 {
        self.angle_sums(t)
            .values()
            .map(|s| (s - TAU).abs())
            .fold(0.0, f64::max)
    }
}

fn angle_sums(
    t: &ConeTriangulation,
    r: &BTreeMap<QuotientVertex, f64>,
) -> BTreeMap<QuotientVertex, f64> {
    let mut sums: BTreeMap<QuotientVertex, f64> = t.vertices.iter().map(|&v| (v, 0.0)).collect();
    for [a, b, c] in t.triangles() {
        let (ra, rb, rc) = (r[&a], r[&b], r[&c]);
        *sums.get_mut(&a).expect("known vertex") += corner_angle(ra, rb, rc);
        *sums.get_mut(&b).expect("known vertex") += corner_angle(rb, rc, ra);
        *sums.get_mut(&c).expect("known vertex") += corner_angle(rc, ra, rb);
    }
    sums
}

fn angle_sum_at(
    t: &ConeTriangulation,
    r: &BTreeMap<QuotientVertex, f64>,
    v: QuotientVertex,
) -> f64 {
    let mut sum = 0.0;
    for tri in t.triangles() {
        for k in 0..3 {
            if tri[k] == v {
                sum += corner_angle(r[&tri[k]], r[&tri[(k + 1) % 3]], r[&tri[(k + 2) % 3]]);
            }
        }
    }
    sum
}

/// Thurston's packing by Gauss-Seidel sweeps. The angle sum at a vertex
/// decreases in its own radius, so each radius is fixed by bisection
/// with the others held.
pub fn circle_pack(t: &ConeTriangulation, tol: f64) -> Result<PackingRadii> {
    if t.genus < 2 {
        return Err(Error::Packing(format!(
            "genus {} admits no hyperbolic packing",
            t.genus
        )));
    }
    let mut radius: BTreeMap<QuotientVertex, f64> = t.vertices.iter().map(|&v| (v, 1.0)).collect();
    for sweep in 0..MAX_SWEEPS {
        let sums = angle_sums(t, &radius);
        if sums.values().all(|s| (s - TAU).abs() < tol) {
            return Ok(PackingRadii {
                radius,
                sweeps: sweep,
            });
        }
        for &v in &t.vertices {
            let (mut lo, mut hi) = (1e-12f64, 1.0f64);
            let mut trial = radius.clone();
            let at = |x: f64, trial: &mut BTreeMap<QuotientVertex, f64>| {
                trial.insert(v, x);
                angle_sum_at(t, trial, v)
            };
            while at(hi, &mut trial) > TAU {
                hi *= 2.0;
                if hi > 1e3 {
                    return Err(Error::Packing(format!("radius at {v:?} diverges")));
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if at(mid, &mut trial) > TAU {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON * hi {
                    break;
                }
            }
            radius.insert(v, 0.5 * (lo + hi));
        }
    }
    Err(Error::Packing(format!(
        "no convergence within {MAX_SWEEPS} sweeps"
    )))
}

/// A point of the Poincaré disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    fn polar(r: f64, theta: f64) -> Self {
        Self {
            x: r * theta.cos(),
            y: r * theta.sin(),
        }
    }

    fn norm2(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    fn sub(self, o: Self) -> Self {
        Self {
            x: self.x - o.x,
            y: self.y - o.y,
        }
    }
}

pub fn hyperbolic_distance(a: Point, b: Point) -> f64 {
    let d = a.sub(b).norm2();
    (1.0 + 2.0 * d / ((1.0 - a.norm2()) * (1.0 - b.norm2()))).acosh()
}

/// The developed fan: corner `i` of the polygon at `corners[i]`, the
/// apex at the origin. `closing` is corner `0` reached again after going
/// once around the apex.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskLayout {
    pub corners: Vec<Point>,
    pub closing: Point,
    pub sides: Vec<OrientedEdge>,
}

impl DiskLayout {
    pub fn closure_defect(&self) -> f64 {
        self.closing.sub(self.corners[0]).norm2().sqrt()
    }

    pub fn side_length(&self, i: usize) -> f64 {
        let m = self.corners.len();
        hyperbolic_distance(self.corners[i], self.corners[(i + 1) % m])
    }

    /// Largest length difference between the two sides carrying an edge.
    pub fn max_side_mismatch(&self) -> f64 {
        let mut first: BTreeMap<_, f64> = BTreeMap::new();
        let mut worst = 0.0f64;
        for (i, d) in self.sides.iter().enumerate() {
            let len = self.side_length(i);
            match first.get(&d.edge) {
                Some(&other) => worst = worst.max((len - other).abs()),
                None => {
                    first.insert(d.edge, len);
                }
            }
        }
        worst
    }
}

pub fn develop(t: &ConeTriangulation, r: &PackingRadii) -> Result<DiskLayout> {
    let apex = r.radius[&QuotientVertex::Apex];
    let m = t.side_count();
    let spoke = |i: usize| apex + r.radius[&QuotientVertex::Graph(t.corners[i % m])];
    let mut theta = 0.0;
    let mut corners = Vec::with_capacity(m);
    for (i, [a, b, c]) in t.triangles().enumerate() {
        corners.push(Point::polar((spoke(i) / 2.0).tanh(), theta));
        theta += corner_angle(r.radius[&a], r.radius[&b], r.radius[&c]);
    }
    let closing = Point::polar((spoke(0) / 2.0).tanh(), theta);
    let layout = DiskLayout {
        corners,
        closing,
        sides: t.sides.clone(),
    };
    let defect = layout.closure_defect();
    if defect.is_nan() || defect >= FAN_CLOSURE_TOL {
        return Err(Error::Layout(format!("fan fails to close by {defect:e}")));
    }
    let mismatch = layout.max_side_mismatch();
    if mismatch.is_nan() || mismatch >= SIDE_LENGTH_TOL {
        return Err(Error::Layout(format!(
            "identified sides differ in length by {mismatch:e}"
        )));
    }
    Ok(layout)
}

/// Circle orthogonal to the unit circle through `a` and `b`, as
/// (centre, radius); `None` when the geodesic is a diameter.
fn geodesic_circle(a: Point, b: Point) -> Option<(Point, f64)> {
    let cross = a.x * b.y - a.y * b.x;
    if cross.abs() < 1e-12 {
        return None;
    }
    // centre c satisfies 2 c·p = |p|² + 1 for p = a, b
    let (ra, rb) = (0.5 * (a.norm2() + 1.0), 0.5 * (b.norm2() + 1.0));
    let c = Point {
        x: (ra * b.y - rb * a.y) / cross,
        y: (a.x * rb - b.x * ra) / cross,
    };
    Some((c, (c.norm2() - 1.0).sqrt()))
}

/// Fixed precision, without a sign on zero.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        s[1..].to_string()
    } else {
        s
    }
}

/// SVG coordinates flip the y axis.
fn fmt_point(p: Point) -> String {
    format!("{} {}", num(p.x), num(-p.y))
}

fn geodesic_path(a: Point, b: Point) -> String {
    match geodesic_circle(a, b) {
        None => format!("M {} L {}", fmt_point(a), fmt_point(b)),
        Some((c, radius)) => {
            let (u, v) = (a.sub(c), b.sub(c));
            // the short arc; after the y flip, counterclockwise becomes sweep 0
            let ccw = u.x * v.y - u.y * v.x > 0.0;
            let r = num(radius);
            format!(
                "M {} A {r} {r} 0 0 {} {}",
                fmt_point(a),
                u8::from(!ccw),
                fmt_point(b)
            )
        }
    }
}

/// Point at hyperbolic distance `d` from `p` towards the origin.
fn towards_origin(p: Point, d: f64) -> Point {
    let r = p.norm2().sqrt();
    let dist = 2.0 * r.atanh();
    let s = ((dist - d).max(0.0) / 2.0).tanh();
    Point {
        x: p.x * s / r,
        y: p.y * s / r,
    }
}

fn midpoint(a: Point, b: Point) -> Point {
    match geodesic_circle(a, b) {
        None => Point {
            x: 0.5 * (a.x + b.x),
            y: 0.5 * (a.y + b.y),
        },
        Some((c, radius)) => {
            let (u, v) = (a.sub(c), b.sub(c));
            let (mut t0, t1) = (u.y.atan2(u.x), v.y.atan2(v.x));
            if (t1 - t0).abs() > PI {
                t0 += if t1 > t0 { TAU } else { -TAU };
            }
            let t = 0.5 * (t0 + t1);
            Point {
                x: c.x + radius * t.cos(),
                y: c.y + radius * t.sin(),
            }
        }
    }
}

/// Distance from a corner to the schematic drawing of a blown-up vertex.
const VERTEX_OFFSET: f64 = 0.35;
const POLYGON_SIZE: f64 = 0.035;

/// The picture. Polygon sides are geodesics labelled by their edge; an
/// infinitesimal edge joining the two sides at a corner is drawn as a
/// short link; each infinitesimal polygon is a shaded regular k-gon near
/// the first corner at its vertex.
pub fn emit_svg(
    t: &ConeTriangulation,
    layout: &DiskLayout,
    report: &SingularityReport,
    structure: &TrainTrackStructure,
) -> String {
    let m = t.side_count();
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="-1.05 -1.05 2.1 2.1" width="800" height="800">"#
    );
    let _ = writeln!(
        s,
        "<style>.disk{{fill:none;stroke:#999;stroke-width:0.004}} .side{{fill:none;stroke:#000;stroke-width:0.006}} \
.spoke{{fill:none;stroke:#ccc;stroke-width:0.002}} .track-link{{fill:none;stroke:#c00;stroke-width:0.004}} \
.singularity{{fill:#888;fill-opacity:0.6;stroke:#000;stroke-width:0.002}} .puncture{{fill:#fff;stroke:#000;stroke-width:0.004}} \
.side-label,.polygon-label{{font-family:sans-serif;font-size:0.045px;text-anchor:middle;dominant-baseline:middle}}</style>"
    );
    let _ = writeln!(s, r#"<circle class="disk" cx="0" cy="0" r="1"/>"#);
    let origin = Point { x: 0.0, y: 0.0 };
    for p in &layout.corners {
        let _ = writeln!(
            s,
            r#"<path class="spoke" d="{}"/>"#,
            geodesic_path(origin, *p)
        );
    }
    for i in 0..m {
        let (a, b) = (layout.corners[i], layout.corners[(i + 1) % m]);
        let _ = writeln!(s, r#"<path class="side" d="{}"/>"#, geodesic_path(a, b));
    }
    for i in 0..m {
        let (a, b) = (layout.corners[i], layout.corners[(i + 1) % m]);
        let label = towards_origin(midpoint(a, b), 0.12);
        let arrow = if t.sides[i].forward { "" } else { "\u{2032}" };
        let _ = writeln!(
            s,
            r#"<text class="side-label" x="{}" y="{}">{}{arrow}</text>"#,
            num(label.x),
            num(-label.y),
            OrientedEdge::new(t.sides[i].edge, true)
        );
    }
    // corner i sits between the end of side i-1 and the start of side i
    for i in 0..m {
        let before = t.sides[(i + m - 1) % m].reverse();
        let after = t.sides[i];
        let (ga, gb) = (
            structure.gates.gate_of(before),
            structure.gates.gate_of(after),
        );
        let link = InfinitesimalEdge {
            vertex: t.corners[i],
            gates: (ga.min(gb), ga.max(gb)),
        };
        if ga != gb && structure.edges.contains(&link) {
            let c = layout.corners[i];
            let p = midpoint(c, layout.corners[(i + m - 1) % m]);
            let q = midpoint(c, layout.corners[(i + 1) % m]);
            let near = |x: Point| Point {
                x: c.x + 0.25 * (x.x - c.x),
                y: c.y + 0.25 * (x.y - c.y),
            };
            let ctrl = towards_origin(c, 0.02);
            let _ = writeln!(
                s,
                r#"<path class="track-link" d="M {} Q {} {}"/>"#,
                fmt_point(near(p)),
                fmt_point(ctrl),
                fmt_point(near(q))
            );
        }
    }
    let mut placed: BTreeMap<VertexId, usize> = BTreeMap::new();
    for poly in &structure.polygons {
        let k = report
            .polygons
            .iter()
            .find(|p| p.label == poly.label)
            .map_or(poly.k(), |p| p.k);
        let nth = placed.entry(poly.vertex).or_insert(0);
        let corners_at: Vec<usize> = (0..m).filter(|&i| t.corners[i] == poly.vertex).collect();
        let corner = corners_at[*nth % corners_at.len()];
        let depth = VERTEX_OFFSET * (1.0 + (*nth / corners_at.len()) as f64);
        *nth += 1;
        let centre = towards_origin(layout.corners[corner], depth);
        let points: Vec<String> = (0..k)
            .map(|j| {
                let a = TAU * j as f64 / k as f64;
                fmt_point(Point {
                    x: centre.x + POLYGON_SIZE * a.cos(),
                    y: centre.y + POLYGON_SIZE * a.sin(),
                })
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon class="singularity" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text class="polygon-label" x="{}" y="{}">{}</text>"#,
            num(centre.x),
            num(-centre.y - 1.6 * POLYGON_SIZE),
            poly.label
        );
    }
    let _ = writeln!(s, r#"<circle class="puncture" cx="0" cy="0" r="0.015"/>"#);
    s.push_str("</svg>\n");
    s
}

/// Triangulates, packs, develops and draws the final graph of a run.
pub fn render(map: &crate::map::GraphSelfMap, report: &SingularityReport) -> Result<String> {
    let structure = crate::analysis::train_track_structure(map)?;
    let t = cone_triangulation(map.graph())?;
    let radii = circle_pack(&t, DEFAULT_PACKING_TOL)?;
    let layout = develop(&t, &radii)?;
    Ok(emit_svg(&t, &layout, report, &structure))
}
