//! Stokes complexes: tracing of Stokes lines, the decorated graph, its
//! classification into the seven admissible classes and the sector relation.

mod graph;
mod svg;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use graph::{
    classify, classify_by_periods, classify_traced, GraphEdge, PeriodClass, StokesComplexGraph,
    Vertex,
};
pub use svg::{to_svg, SvgOptions};
pub use trace::{trace_stokes_lines, LineEnd, StokesLine, StokesTrace, TraceOptions};

/// Ray arguments `φ_k = (2k+1)π/5`.
pub fn ray_angle(k: i32) -> f64 {
    (2 * k + 1) as f64 * std::f64::consts::PI / 5.0
}

/// Representative of `k mod 5` in `{−2, …, 2}`.
pub fn centered(k: i32) -> i32 {
    let r = k.rem_euclid(5);
    if r > 2 {
        r - 5
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassCode {
    #[serde(rename = "300")]
    C300,
    #[serde(rename = "310")]
    C310,
    #[serde(rename = "311")]
    C311,
    #[serde(rename = "320")]
    C320,
    #[serde(rename = "100")]
    C100,
    #[serde(rename = "110")]
    C110,
    #[serde(rename = "000")]
    C000,
}

impl ClassCode {
    pub const ALL: [ClassCode; 7] = [
        ClassCode::C300,
        ClassCode::C310,
        ClassCode::C311,
        ClassCode::C320,
        ClassCode::C100,
        ClassCode::C110,
        ClassCode::C000,
    ];

    /// `(simple turning points, internal lines, index)`.
    pub fn digits(self) -> (u8, u8, u8) {
        match self {
            ClassCode::C300 => (3, 0, 0),
            ClassCode::C310 => (3, 1, 0),
            ClassCode::C311 => (3, 1, 1),
            ClassCode::C320 => (3, 2, 0),
            ClassCode::C100 => (1, 0, 0),
            ClassCode::C110 => (1, 1, 0),
            ClassCode::C000 => (0, 0, 0),
        }
    }

    pub fn simple_count(self) -> usize {
        self.digits().0 as usize
    }

    pub fn internal_count(self) -> usize {
        self.digits().1 as usize
    }

    /// Non-consecutive pairs `(Σ_j, Σ_k)` that are not related, at shift 0.
    pub fn unrelated_pairs(self) -> Vec<(i32, i32)> {
        match self {
            ClassCode::C300 => vec![],
            ClassCode::C310 => vec![(0, 2), (0, -2)],
            ClassCode::C311 => vec![(1, -1)],
            ClassCode::C320 => vec![(1, -1), (1, -2), (-1, 2)],
            ClassCode::C100 => vec![(1, -1), (0, -2), (0, 2)],
            ClassCode::C110 => {
                let mut v = non_consecutive_pairs();
                v.retain(|&(j, k)| !same_pair((j, k), (1, -1)));
                v
            }
            ClassCode::C000 => non_consecutive_pairs(),
        }
    }
}

impl fmt::Display for ClassCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c) = self.digits();
        write!(f, "{a}{b}{c}")
    }
}

impl FromStr for ClassCode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassCode::ALL
            .into_iter()
            .find(|c| c.to_string() == s.trim())
            .ok_or_else(|| format!("unknown class code {s:?}"))
    }
}

fn same_pair(x: (i32, i32), y: (i32, i32)) -> bool {
    let n = |p: (i32, i32)| {
        let (a, b) = (p.0.rem_euclid(5), p.1.rem_euclid(5));
        (a.min(b), a.max(b))
    };
    n(x) == n(y)
}

fn non_consecutive_pairs() -> Vec<(i32, i32)> {
    vec![(0, 2), (0, -2), (1, -1), (1, -2), (2, -1)]
}

/// Symmetric 5×5 relation `Σ_j ⇄ Σ_k`, indexed by `k mod 5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorRelation {
    pub matrix: [[bool; 5]; 5],
}

impl SectorRelation {
    /// Relation of a class with decoration shift `m` applied (`k ↦ k + m`).
    pub fn for_class(code: ClassCode, m: i32) -> Self {
        let mut matrix = [[true; 5]; 5];
        for (j, k) in code.unrelated_pairs() {
            let (a, b) = ((j + m).rem_euclid(5) as usize, (k + m).rem_euclid(5) as usize);
            matrix[a][b] = false;
            matrix[b][a] = false;
        }
        Self { matrix }
    }

    pub fn related(&self, j: i32, k: i32) -> bool {
        self.matrix[j.rem_euclid(5) as usize][k.rem_euclid(5) as usize]
    }

    /// Unrelated pairs, each listed once with centred indices.
    pub fn unrelated_pairs(&self) -> Vec<(i32, i32)> {
        let mut out = vec![];
        for j in 0..5 {
            for k in j + 1..5 {
                if !self.matrix[j][k] {
                    out.push((centered(j as i32), centered(k as i32)));
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..5).all(|j| (0..5).all(|k| self.matrix[j][k] == self.matrix[k][j]))
    }
}

/// Relation of a classified graph, from the table row of its class shifted
/// by the decoration.
pub fn sector_relation(g: &StokesComplexGraph) -> SectorRelation {
    SectorRelation::for_class(g.class_code, g.decoration_shift)
}
