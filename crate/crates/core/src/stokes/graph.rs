use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::trace::{trace_stokes_lines, LineEnd, StokesTrace, TraceOptions};
use super::{centered, ray_angle, ClassCode, SectorRelation};
use crate::action::{segment_distance, turning_point_action, ActionOptions};
use crate::error::{Error, Result};
use crate::potential::{CubicPotential, Multiplicity, TurningPointLabels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vertex {
    /// Turning point, by index into the turning-point set.
    Internal(usize),
    /// Asymptotic ray `φ_k`, `k ∈ {0,…,4}`.
    External(i32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: Vertex,
    pub to: Vertex,
    /// Index of the traced line realizing the edge.
    pub line: usize,
}

/// Decorated Stokes complex of a potential.
///
/// Labels for classes other than (320) and (300) are canonical choices:
/// for (310)/(311) λ₀ and λ₁ are the ends of the internal line (λ₀ the one
/// whose shifted ray indices sort first) and λ₋₁ the remaining point; for
/// (100)/(110) λ₀ = λ₋₁ is the double point and λ₁ the simple one; for
/// (000) all labels sit at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesComplexGraph {
    pub trace: StokesTrace,
    pub edges: Vec<GraphEdge>,
    pub class_code: ClassCode,
    pub decoration_shift: i32,
    pub tp_labels: TurningPointLabels,
    /// Relation computed from the topology of the traced complex.
    pub relation: SectorRelation,
}

impl StokesComplexGraph {
    pub fn internal_edges(&self) -> impl Iterator<Item = &GraphEdge> {
        self.edges
            .iter()
            .filter(|e| matches!(e.to, Vertex::Internal(_)))
    }

    /// Rays reached by the external lines of turning point `i`.
    pub fn rays_of(&self, i: usize) -> Vec<i32> {
        let mut v: Vec<i32> = self
            .edges
            .iter()
            .filter_map(|e| match (e.from, e.to) {
                (Vertex::Internal(a), Vertex::External(k)) if a == i => Some(k),
                _ => None,
            })
            .collect();
        v.sort();
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        let tps = &self.trace.turning_points;
        let label_of = |z: Complex64| {
            let mut out = vec![];
            if z == self.tp_labels.lambda0 {
                out.push("lambda0");
            }
            if z == self.tp_labels.lambda1 {
                out.push("lambda1");
            }
            if z == self.tp_labels.lambda_minus1 {
                out.push("lambda-1");
            }
            out
        };
        let mut vertices: Vec<serde_json::Value> = tps
            .roots
            .iter()
            .enumerate()
            .map(|(i, r)| {
                json!({
                    "id": format!("t{i}"),
                    "kind": "turning_point",
                    "re": r.value.re,
                    "im": r.value.im,
                    "multiplicity": r.multiplicity.order(),
                    "labels": label_of(r.value),
                })
            })
            .collect();
        for k in 0..5 {
            vertices.push(json!({
                "id": format!("r{}", centered(k)),
                "kind": "ray",
                "k": centered(k),
                "angle": ray_angle(k),
            }));
        }
        let vid = |v: Vertex| match v {
            Vertex::Internal(i) => format!("t{i}"),
            Vertex::External(k) => format!("r{}", centered(k)),
        };
        let edges: Vec<serde_json::Value> = self
            .edges
            .iter()
            .map(|e| json!({"from": vid(e.from), "to": vid(e.to), "internal": matches!(e.to, Vertex::Internal(_))}))
            .collect();
        json!({
            "vertices": vertices,
            "edges": edges,
            "class_code": self.class_code.to_string(),
            "shift": self.decoration_shift,
            "unrelated_pairs": self.relation.unrelated_pairs(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EdgeKind {
    Line(usize),
    Arc,
}

struct Embedded {
    /// `(u, v, kind)`; darts `2e: u→v`, `2e+1: v→u`.
    edges: Vec<(usize, usize, EdgeKind)>,
    rot: Vec<Vec<usize>>,
    n_tp: usize,
}

impl Embedded {
    fn tail(&self, d: usize) -> usize {
        let e = self.edges[d / 2];
        if d.is_multiple_of(2) {
            e.0
        } else {
            e.1
        }
    }

    fn head(&self, d: usize) -> usize {
        self.tail(d ^ 1)
    }

    fn is_ray(&self, v: usize) -> bool {
        v >= self.n_tp
    }

    /// Faces as dart cycles, each face lying to the left of its darts.
    fn faces(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let n = 2 * self.edges.len();
        let mut pos = vec![0usize; n];
        for r in &self.rot {
            for (i, &d) in r.iter().enumerate() {
                pos[d] = i;
            }
        }
        let mut face_of = vec![usize::MAX; n];
        let mut faces = vec![];
        for start in 0..n {
            if face_of[start] != usize::MAX {
                continue;
            }
            let id = faces.len();
            let mut cyc = vec![];
            let mut d = start;
            while face_of[d] == usize::MAX {
                face_of[d] = id;
                cyc.push(d);
                let t = d ^ 1;
                let r = &self.rot[self.tail(t)];
                d = r[(pos[t] + r.len() - 1) % r.len()];
            }
            faces.push(cyc);
        }
        (faces, face_of)
    }
}

fn angle_offset(arg: f64, k: i32) -> f64 {
    let mut d = (arg - ray_angle(k)).rem_euclid(2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    }
    d
}

fn ambiguous(reason: impl Into<String>) -> Error {
    Error::AmbiguousClass {
        nearest: vec![],
        reason: reason.into(),
    }
}

/// Pairs the two traced halves of each internal line and returns the graph
/// edges, one per Stokes line.
fn assemble_edges(trace: &StokesTrace) -> Result<Vec<GraphEdge>> {
    let lines = &trace.lines;
    let partner = |idx: usize| -> Option<usize> {
        let l = &lines[idx];
        let LineEnd::TurningPoint(j) = l.end else { return None };
        let arr = l.arrival_angle.expect("internal line has an arrival angle");
        lines
            .iter()
            .enumerate()
            .filter(|(_, m)| m.from == j)
            .min_by(|a, b| {
                let da = angle_offset(a.1.launch_angle, 0) - angle_offset(arr, 0);
                let db = angle_offset(b.1.launch_angle, 0) - angle_offset(arr, 0);
                let w = |x: f64| (x + PI).rem_euclid(2.0 * PI) - PI;
                w(da).abs().total_cmp(&w(db).abs())
            })
            .map(|(k, _)| k)
    };
    let mut edges = vec![];
    for (idx, l) in lines.iter().enumerate() {
        match l.end {
            LineEnd::Ray(k) => edges.push(GraphEdge {
                from: Vertex::Internal(l.from),
                to: Vertex::External(k),
                line: idx,
            }),
            LineEnd::TurningPoint(j) => {
                let q = partner(idx).ok_or_else(|| ambiguous("internal line without partner"))?;
                let back = &lines[q];
                if back.end != LineEnd::TurningPoint(l.from) || partner(q) != Some(idx) {
                    return Err(ambiguous(format!(
                        "line {idx} reaches turning point {j} but the reverse trace disagrees"
                    )));
                }
                if idx < q {
                    edges.push(GraphEdge {
                        from: Vertex::Internal(l.from),
                        to: Vertex::Internal(j),
                        line: idx,
                    });
                }
            }
        }
    }
    Ok(edges)
}

fn embed(trace: &StokesTrace, edges: &[GraphEdge]) -> Embedded {
    let n_tp = trace.turning_points.roots.len();
    let lines = &trace.lines;
    let mut all: Vec<(usize, usize, EdgeKind)> = vec![];
    // sort keys for the counter-clockwise rotation at each vertex
    let mut keyed: Vec<Vec<(f64, usize)>> = vec![vec![]; n_tp + 5];
    let partner_line = |e: &GraphEdge| -> usize {
        // the reverse trace of an internal line: launched from `to` towards `from`
        let Vertex::Internal(j) = e.to else { unreachable!() };
        let Vertex::Internal(i) = e.from else { unreachable!() };
        let arr = lines[e.line].arrival_angle.unwrap_or(0.0);
        lines
            .iter()
            .enumerate()
            .filter(|(_, m)| m.from == j && m.end == LineEnd::TurningPoint(i))
            .min_by(|a, b| {
                let w = |x: f64| ((x - arr) + PI).rem_euclid(2.0 * PI) - PI;
                w(a.1.launch_angle).abs().total_cmp(&w(b.1.launch_angle).abs())
            })
            .map(|(k, _)| k)
            .expect("partner exists")
    };
    for e in edges {
        let id = all.len();
        let Vertex::Internal(i) = e.from else { unreachable!() };
        let l = &lines[e.line];
        keyed[i].push((l.launch_angle.rem_euclid(2.0 * PI), 2 * id));
        match e.to {
            Vertex::Internal(j) => {
                let q = partner_line(e);
                keyed[j].push((lines[q].launch_angle.rem_euclid(2.0 * PI), 2 * id + 1));
                all.push((i, j, EdgeKind::Line(e.line)));
            }
            Vertex::External(k) => {
                let off = angle_offset(l.exit_arg.unwrap_or(ray_angle(k)), k);
                keyed[n_tp + k as usize].push((1.0 + (PI / 5.0 - off), 2 * id + 1));
                all.push((i, n_tp + k as usize, EdgeKind::Line(e.line)));
            }
        }
    }
    for k in 0..5usize {
        let id = all.len();
        let next = (k + 1) % 5;
        all.push((n_tp + k, n_tp + next, EdgeKind::Arc));
        keyed[n_tp + k].push((0.0, 2 * id));
        keyed[n_tp + next].push((10.0, 2 * id + 1));
    }
    let rot = keyed
        .into_iter()
        .map(|mut v| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v.into_iter().map(|x| x.1).collect()
        })
        .collect();
    Embedded {
        edges: all,
        rot,
        n_tp,
    }
}

struct Topology {
    sector_face: [usize; 5],
    face_of: Vec<usize>,
    /// Per face: component index of each line edge on its boundary.
    components: Vec<HashMap<usize, usize>>,
    is_band: Vec<bool>,
}

fn topology(emb: &Embedded) -> Result<Topology> {
    let (faces, face_of) = emb.faces();
    let mut sector_face = [usize::MAX; 5];
    let mut is_band = vec![false; faces.len()];
    let mut components = vec![HashMap::new(); faces.len()];
    let mut outer_seen = false;
    for (f, cyc) in faces.iter().enumerate() {
        let fwd: Vec<usize> = cyc
            .iter()
            .filter(|&&d| d % 2 == 0 && emb.edges[d / 2].2 == EdgeKind::Arc)
            .copied()
            .collect();
        let back = cyc
            .iter()
            .filter(|&&d| d % 2 == 1 && emb.edges[d / 2].2 == EdgeKind::Arc)
            .count();
        if back > 0 {
            if back != 5 || !fwd.is_empty() || outer_seen {
                return Err(Error::GraphInvariant("malformed outer face".into()));
            }
            outer_seen = true;
            continue;
        }
        match fwd.len() {
            0 => is_band[f] = true,
            1 => {
                let k = emb.edges[fwd[0] / 2].1 - emb.n_tp;
                sector_face[k] = f;
            }
            _ => {
                return Err(Error::GraphInvariant(
                    "an asymptotic ray has no Stokes line".into(),
                ))
            }
        }
        // split the boundary into connected components at ray vertices
        let start = cyc
            .iter()
            .position(|&d| emb.is_ray(emb.head(d)))
            .ok_or_else(|| Error::GraphInvariant("bounded face".into()))?;
        let mut comp = 0;
        for s in 1..=cyc.len() {
            let d = cyc[(start + s) % cyc.len()];
            if let EdgeKind::Line(_) = emb.edges[d / 2].2 {
                components[f].insert(d / 2, comp);
            }
            if emb.is_ray(emb.head(d)) {
                comp += 1;
            }
        }
        let distinct: BTreeSet<usize> = components[f].values().copied().collect();
        let expected = if is_band[f] { 2 } else { 1 };
        if distinct.len() != expected {
            return Err(Error::GraphInvariant(format!(
                "sector with {} boundary components",
                distinct.len()
            )));
        }
    }
    if sector_face.contains(&usize::MAX) {
        return Err(Error::GraphInvariant("missing Stokes sector".into()));
    }
    Ok(Topology {
        sector_face,
        face_of,
        components,
        is_band,
    })
}

fn related(emb: &Embedded, topo: &Topology, j: usize, k: usize) -> bool {
    if j == k {
        return true;
    }
    let target = topo.sector_face[k];
    fn walk(
        emb: &Embedded,
        topo: &Topology,
        face: usize,
        entry: Option<usize>,
        target: usize,
        visited: &mut Vec<usize>,
    ) -> bool {
        let entry_comp = entry.map(|e| topo.components[face][&e]);
        for (&e, &comp) in &topo.components[face] {
            if Some(comp) == entry_comp || visited.contains(&e) {
                continue;
            }
            let (f0, f1) = (topo.face_of[2 * e], topo.face_of[2 * e + 1]);
            let other = if f0 == face { f1 } else { f0 };
            if other == face {
                continue;
            }
            if other == target {
                return true;
            }
            if topo.is_band[other] {
                visited.push(e);
                if walk(emb, topo, other, Some(e), target, visited) {
                    return true;
                }
                visited.pop();
            }
        }
        false
    }
    walk(emb, topo, topo.sector_face[j], None, target, &mut vec![])
}

fn check_invariants(trace: &StokesTrace, edges: &[GraphEdge]) -> Result<()> {
    let tps = &trace.turning_points;
    let n = tps.roots.len();
    let mut degree = vec![0usize; n];
    let mut ray_degree = [0usize; 5];
    let mut pairs = BTreeSet::new();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for e in edges {
        let Vertex::Internal(i) = e.from else { unreachable!() };
        degree[i] += 1;
        let key = match e.to {
            Vertex::Internal(j) => {
                degree[j] += 1;
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a == b {
                    return Err(Error::GraphInvariant("internal subgraph has a cycle".into()));
                }
                parent[a] = b;
                (i.min(j), i.max(j) + 100)
            }
            Vertex::External(k) => {
                ray_degree[k as usize] += 1;
                (i, 200 + k as usize)
            }
        };
        if !pairs.insert(key) {
            return Err(Error::GraphInvariant("two edges join the same vertices".into()));
        }
    }
    for (i, r) in tps.roots.iter().enumerate() {
        if degree[i] != r.multiplicity.valency() {
            return Err(Error::GraphInvariant(format!(
                "turning point {} has valency {} instead of {}",
                r.value,
                degree[i],
                r.multiplicity.valency()
            )));
        }
    }
    if ray_degree.contains(&0) {
        return Err(Error::GraphInvariant("an asymptotic ray has no Stokes line".into()));
    }
    Ok(())
}

fn shifted_key(rays: &[i32], m: i32) -> Vec<i32> {
    let mut v: Vec<i32> = rays.iter().map(|k| (k - m).rem_euclid(5)).collect();
    v.sort();
    v
}

fn ray_set(rays: &[i32]) -> BTreeSet<i32> {
    rays.iter().map(|k| k.rem_euclid(5)).collect()
}

fn set_of(ks: &[i32]) -> BTreeSet<i32> {
    ks.iter().map(|k| k.rem_euclid(5)).collect()
}

/// Assigns class, shift and labels once the relation is known.
fn finish(
    trace: StokesTrace,
    edges: Vec<GraphEdge>,
    relation: SectorRelation,
) -> Result<StokesComplexGraph> {
    let tps = &trace.turning_points;
    let n_simple = tps
        .roots
        .iter()
        .filter(|r| r.multiplicity == Multiplicity::Simple)
        .count();
    let n_internal = edges
        .iter()
        .filter(|e| matches!(e.to, Vertex::Internal(_)))
        .count();
    let candidates: Vec<ClassCode> = ClassCode::ALL
        .into_iter()
        .filter(|c| c.simple_count() == n_simple && c.internal_count() == n_internal)
        .collect();
    let mut matches = vec![];
    for &c in &candidates {
        for m in 0..5 {
            if SectorRelation::for_class(c, m) == relation {
                matches.push((c, m));
            }
        }
    }
    let Some(&(code, mut shift)) = matches.first() else {
        let nearest = ClassCode::ALL
            .into_iter()
            .filter(|c| c.simple_count() == n_simple)
            .collect();
        return Err(Error::AmbiguousClass {
            nearest,
            reason: format!(
                "{n_simple} simple turning points, {n_internal} internal lines, unrelated pairs {:?}",
                relation.unrelated_pairs()
            ),
        });
    };
    let rays = |i: usize| -> Vec<i32> {
        let mut v: Vec<i32> = edges
            .iter()
            .filter_map(|e| match (e.from, e.to) {
                (Vertex::Internal(a), Vertex::External(k)) if a == i => Some(k),
                _ => None,
            })
            .collect();
        v.sort();
        v
    };
    let internal_degree = |i: usize| {
        edges
            .iter()
            .filter(|e| {
                matches!(e.to, Vertex::Internal(_))
                    && (e.from == Vertex::Internal(i) || e.to == Vertex::Internal(i))
            })
            .count()
    };
    let val = |i: usize| tps.roots[i].value;
    let bad = |what: &str| Error::GraphInvariant(format!("cannot place labels for class {code}: {what}"));
    let labels = match code {
        ClassCode::C000 => {
            shift = 0;
            TurningPointLabels {
                lambda0: val(0),
                lambda1: val(0),
                lambda_minus1: val(0),
            }
        }
        ClassCode::C100 | ClassCode::C110 => {
            let d = (0..2)
                .find(|&i| tps.roots[i].multiplicity == Multiplicity::Double)
                .ok_or_else(|| bad("no double point"))?;
            TurningPointLabels {
                lambda0: val(d),
                lambda1: val(1 - d),
                lambda_minus1: val(d),
            }
        }
        ClassCode::C320 => {
            let l0 = (0..3)
                .find(|&i| internal_degree(i) == 2)
                .ok_or_else(|| bad("no vertex with two internal lines"))?;
            let others: Vec<usize> = (0..3).filter(|&i| i != l0).collect();
            let up = set_of(&[shift, shift + 1]);
            let down = set_of(&[shift - 1, shift - 2]);
            let (l1, lm) = if ray_set(&rays(others[0])) == up {
                (others[0], others[1])
            } else {
                (others[1], others[0])
            };
            if ray_set(&rays(l1)) != up || ray_set(&rays(lm)) != down {
                return Err(bad("outer rays do not match"));
            }
            TurningPointLabels {
                lambda0: val(l0),
                lambda1: val(l1),
                lambda_minus1: val(lm),
            }
        }
        ClassCode::C300 => {
            let mut found = None;
            for i in 0..3 {
                for m in 0..5 {
                    if ray_set(&rays(i)) == set_of(&[m - 1, m, m + 2]) && rays(i).len() == 3 {
                        found = Some((i, m));
                    }
                }
            }
            let (l0, m) = found.ok_or_else(|| bad("no vertex with rays {m−1, m, m+2}"))?;
            shift = m;
            let others: Vec<usize> = (0..3).filter(|&i| i != l0).collect();
            let up = set_of(&[m, m + 1, m + 2]);
            let down = set_of(&[m + 2, m + 3, m + 4]);
            let (l1, lm) = if ray_set(&rays(others[0])) == up {
                (others[0], others[1])
            } else {
                (others[1], others[0])
            };
            if ray_set(&rays(l1)) != up || ray_set(&rays(lm)) != down {
                return Err(bad("outer rays do not match"));
            }
            TurningPointLabels {
                lambda0: val(l0),
                lambda1: val(l1),
                lambda_minus1: val(lm),
            }
        }
        ClassCode::C310 | ClassCode::C311 => {
            let e = edges
                .iter()
                .find(|e| matches!(e.to, Vertex::Internal(_)))
                .expect("one internal line");
            let (Vertex::Internal(u), Vertex::Internal(v)) = (e.from, e.to) else { unreachable!() };
            let w = 3 - u - v;
            let (l0, l1) = if shifted_key(&rays(u), shift) <= shifted_key(&rays(v), shift) {
                (u, v)
            } else {
                (v, u)
            };
            TurningPointLabels {
                lambda0: val(l0),
                lambda1: val(l1),
                lambda_minus1: val(w),
            }
        }
    };
    Ok(StokesComplexGraph {
        trace,
        edges,
        class_code: code,
        decoration_shift: shift.rem_euclid(5),
        tp_labels: labels,
        relation,
    })
}

/// Builds and classifies the decorated graph of an already traced complex.
pub fn classify_traced(trace: StokesTrace) -> Result<StokesComplexGraph> {
    if trace.anti_stokes {
        return Err(Error::InvalidArgument(
            "classification is defined for Stokes lines only".into(),
        ));
    }
    let edges = assemble_edges(&trace)?;
    check_invariants(&trace, &edges)?;
    let emb = embed(&trace, &edges);
    let topo = topology(&emb)?;
    let nv = emb.rot.len();
    let ne = emb.edges.len();
    let nf = topo.components.len();
    if nv + nf != ne + 2 {
        return Err(Error::GraphInvariant("embedding is not planar".into()));
    }
    let mut matrix = [[false; 5]; 5];
    for j in 0..5 {
        for k in 0..5 {
            matrix[j][k] = related(&emb, &topo, j, k);
        }
    }
    let relation = SectorRelation { matrix };
    if !relation.is_symmetric() {
        return Err(ambiguous("sector relation is not symmetric"));
    }
    finish(trace, edges, relation)
}

/// Traces the Stokes complex of `p` and classifies it.
pub fn classify(p: &CubicPotential, opts: &TraceOptions) -> Result<StokesComplexGraph> {
    classify_traced(trace_stokes_lines(p, opts)?)
}

/// Class guess from the number of turning-point pairs joined by a path with
/// vanishing `Re S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodClass {
    C300,
    C31x,
    C320,
}

impl PeriodClass {
    pub fn matches(self, c: ClassCode) -> bool {
        matches!(
            (self, c),
            (PeriodClass::C300, ClassCode::C300)
                | (PeriodClass::C31x, ClassCode::C310)
                | (PeriodClass::C31x, ClassCode::C311)
                | (PeriodClass::C320, ClassCode::C320)
        )
    }
}

/// Fast classifier from `Re ∫_{λᵢ}^{λⱼ} √V` over the three straight segments.
/// Relative values below `zero_tol` count as vanishing; values between
/// `zero_tol` and `ambiguity_tol` are reported as ambiguous.
pub fn classify_by_periods(p: &CubicPotential, zero_tol: f64, ambiguity_tol: f64) -> Result<PeriodClass> {
    let opts = ActionOptions::default();
    let tps = p.turning_points(opts.cluster_tol);
    if tps.roots.len() != 3 || !tps.all_simple() {
        return Err(Error::DegenerateTurningPoint(
            "period classification needs three simple turning points".into(),
        ));
    }
    let r: Vec<Complex64> = tps.roots.iter().map(|t| t.value).collect();
    let sep = tps.min_separation();
    let action = |i: usize, j: usize| -> Result<Complex64> {
        let d = r[j] - r[i];
        let hint = 0.5 * (r[i] + r[j]) + Complex64::i() * d / d.norm() * (0.25 * sep);
        Ok(turning_point_action(p, r[i], r[j], hint, &opts)?.value)
    };
    let mut zeros = 0;
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let k = 3 - i - j;
        let rel = if segment_distance(r[i], r[j], r[k]) < 1e-3 * sep {
            // collinear: the segment runs through the third root
            let (a, b) = (action(i, k)?, action(k, j)?);
            let plus = (a + b).re.abs() / (a + b).norm();
            let minus = (a - b).re.abs() / (a - b).norm();
            plus.min(minus)
        } else {
            let s = action(i, j)?;
            s.re.abs() / s.norm()
        };
        if rel < zero_tol {
            zeros += 1;
        } else if rel < ambiguity_tol {
            return Err(Error::AmbiguousClass {
                nearest: vec![ClassCode::C300, ClassCode::C310, ClassCode::C320],
                reason: format!("relative Re S = {rel:.2e} between turning points {i} and {j}"),
            });
        }
    }
    match zeros {
        0 => Ok(PeriodClass::C300),
        1 => Ok(PeriodClass::C31x),
        2 => Ok(PeriodClass::C320),
        _ => Err(Error::GraphInvariant("three vanishing periods".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::GroupElement;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cls(p: &CubicPotential) -> StokesComplexGraph {
        classify(p, &TraceOptions::default()).unwrap()
    }

    #[test]
    fn pure_cubic_is_000() {
        let g = cls(&CubicPotential::real(0.0, 0.0));
        assert_eq!(g.class_code, ClassCode::C000);
        assert_eq!(g.edges.len(), 5);
    }

    #[test]
    fn three_real_roots_give_one_internal_line() {
        let g = cls(&CubicPotential::real(1.0, 0.0));
        assert!(matches!(g.class_code, ClassCode::C310 | ClassCode::C311));
        assert_eq!(g.internal_edges().count(), 1);
        assert_eq!(g.trace.lines.len(), 9);
    }

    #[test]
    fn table_pair_is_boutroux_graph() {
        let g = cls(&CubicPotential::real(-2.347_591_993_156_67, -0.063_997_742_659_733));
        assert_eq!(g.class_code, ClassCode::C320);
        assert_eq!(g.decoration_shift, 0);
        assert!(g.tp_labels.lambda0.im.abs() < 1e-9 && g.tp_labels.lambda0.re < 0.0);
        assert!(g.tp_labels.lambda1.im > 0.0);
        assert!((g.tp_labels.lambda_minus1 - g.tp_labels.lambda1.conj()).norm() < 1e-9);
    }

    #[test]
    fn double_point_families() {
        // (λ+c)²(λ−2c)·4 with a = 6c², b = 2c³/7
        let cc: f64 = 0.8;
        let g = cls(&CubicPotential::real(6.0 * cc * cc, 2.0 * cc.powi(3) / 7.0));
        assert!(matches!(g.class_code, ClassCode::C110 | ClassCode::C100));
        assert_eq!(g.trace.lines.len(), 7);
        let g = cls(&CubicPotential::real(6.0 * cc * cc, -2.0 * cc.powi(3) / 7.0));
        assert!(matches!(g.class_code, ClassCode::C110 | ClassCode::C100));
    }

    #[test]
    fn generic_complex_potential_is_300() {
        let g = cls(&CubicPotential::new(c(0.3, 1.1), c(-0.4, 0.25)));
        assert_eq!(g.class_code, ClassCode::C300);
        assert!(g.relation.unrelated_pairs().is_empty());
    }

    #[test]
    fn decoration_shifts_with_group_action() {
        let p = CubicPotential::real(-2.347_591_993_156_67, -0.063_997_742_659_733);
        for m in 0..5 {
            let q = GroupElement::new(1.3, m).apply(&p);
            let g = cls(&q);
            assert_eq!(g.class_code, ClassCode::C320);
            assert_eq!(g.decoration_shift, m);
        }
    }

    #[test]
    fn json_dump_has_expected_keys() {
        let g = cls(&CubicPotential::real(1.0, 0.0));
        let js = g.to_json();
        assert_eq!(js["vertices"].as_array().unwrap().len(), 8);
        assert_eq!(js["edges"].as_array().unwrap().len(), 8);
        assert!(js["class_code"].as_str().unwrap().starts_with("31"));
    }

    #[test]
    fn periods_classifier_on_simple_cases() {
        assert_eq!(
            classify_by_periods(&CubicPotential::real(1.0, 0.0), 1e-6, 1e-3).unwrap(),
            PeriodClass::C31x
        );
        assert_eq!(
            classify_by_periods(&CubicPotential::new(c(0.3, 1.1), c(-0.4, 0.25)), 1e-6, 1e-3).unwrap(),
            PeriodClass::C300
        );
    }
}
