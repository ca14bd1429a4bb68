//! Safety relevance of speed and acceleration sign combinations for
//! rear-end collisions.
//!
//! Each matrix is indexed by (follower sign, leader sign). A cell of 1 marks
//! a combination in which a rear-end collision is possible.

use serde::{Deserialize, Serialize};

/// Zero band applied to speeds and accelerations before taking signs.
pub const DEFAULT_ZERO_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub const ALL: [Sign; 3] = [Sign::Negative, Sign::Zero, Sign::Positive];

    /// `|x| <= zero_tol` maps to [`Sign::Zero`].
    pub fn of(x: f64, zero_tol: f64) -> Sign {
        if x.abs() <= zero_tol {
            Sign::Zero
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn symbol(self) -> &'static str {
        match self {
            Sign::Negative => "< 0",
            Sign::Zero => "= 0",
            Sign::Positive => "> 0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Speed,
    Acceleration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RelevanceMatrix {
    pub kind: MatrixKind,
    /// `cells[follower][leader]`, ordered negative, zero, positive.
    pub cells: [[u8; 3]; 3],
}

impl RelevanceMatrix {
    pub const SPEED: RelevanceMatrix = RelevanceMatrix {
        kind: MatrixKind::Speed,
        cells: [[0, 0, 0], [0, 0, 0], [0, 1, 1]],
    };

    pub const ACCELERATION: RelevanceMatrix = RelevanceMatrix {
        kind: MatrixKind::Acceleration,
        cells: [[1, 0, 0], [1, 0, 0], [0, 0, 0]],
    };

    pub fn cell(&self, follower: Sign, leader: Sign) -> u8 {
        self.cells[follower.index()][leader.index()]
    }

    pub fn row_sums(&self) -> [u32; 3] {
        self.cells
            .map(|row| row.iter().map(|&c| u32::from(c)).sum())
    }

    /// Sums over follower signs, one per leader sign.
    pub fn col_sums(&self) -> [u32; 3] {
        let mut out = [0; 3];
        for row in &self.cells {
            for (o, &c) in out.iter_mut().zip(row) {
                *o += u32::from(c);
            }
        }
        out
    }

    pub fn total(&self) -> u32 {
        self.row_sums().iter().sum()
    }

    /// Relevant cells as (follower sign, leader sign), row-major.
    pub fn relevant_cells(&self) -> Vec<(Sign, Sign)> {
        let mut out = Vec::new();
        for f in Sign::ALL {
            for l in Sign::ALL {
                if self.cell(f, l) == 1 {
                    out.push((f, l));
                }
            }
        }
        out
    }
}

pub fn classify_speed(v_leader: f64, v_follower: f64, zero_tol: f64) -> u8 {
    RelevanceMatrix::SPEED.cell(Sign::of(v_follower, zero_tol), Sign::of(v_leader, zero_tol))
}

pub fn classify_accel(a_leader: f64, a_follower: f64, zero_tol: f64) -> u8 {
    RelevanceMatrix::ACCELERATION.cell(Sign::of(a_follower, zero_tol), Sign::of(a_leader, zero_tol))
}

/// Instantaneous kinematic state of both vehicles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicSample {
    pub v_leader: f64,
    pub v_follower: f64,
    pub a_leader: f64,
    pub a_follower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinationHits {
    pub label: String,
    pub speed_cell: (Sign, Sign),
    pub accel_cell: (Sign, Sign),
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub samples: usize,
    pub speed_relevant: usize,
    pub accel_relevant: usize,
    pub combinations: Vec<CombinationHits>,
    pub covered: usize,
    pub total: usize,
    pub fraction: f64,
}

/// Counts how often each of the four relevant speed x acceleration
/// combinations is hit. Speed and acceleration relevance are also counted
/// independently of each other.
pub fn coverage_report(samples: &[KinematicSample], zero_tol: f64) -> CoverageReport {
    let speed_cells = RelevanceMatrix::SPEED.relevant_cells();
    let accel_cells = RelevanceMatrix::ACCELERATION.relevant_cells();

    let mut combinations: Vec<CombinationHits> = speed_cells
        .iter()
        .flat_map(|&sc| accel_cells.iter().map(move |&ac| (sc, ac)))
        .map(|(sc, ac)| CombinationHits {
            label: format!(
                "v_F {}, v_L {}, a_F {}, a_L {}",
                sc.0.symbol(),
                sc.1.symbol(),
                ac.0.symbol(),
                ac.1.symbol()
            ),
            speed_cell: sc,
            accel_cell: ac,
            hits: 0,
        })
        .collect();

    let mut speed_relevant = 0;
    let mut accel_relevant = 0;
    for s in samples {
        let sc = (
            Sign::of(s.v_follower, zero_tol),
            Sign::of(s.v_leader, zero_tol),
        );
        let ac = (
            Sign::of(s.a_follower, zero_tol),
            Sign::of(s.a_leader, zero_tol),
        );
        speed_relevant += usize::from(RelevanceMatrix::SPEED.cell(sc.0, sc.1));
        accel_relevant += usize::from(RelevanceMatrix::ACCELERATION.cell(ac.0, ac.1));
        if let Some(c) = combinations
            .iter_mut()
            .find(|c| c.speed_cell == sc && c.accel_cell == ac)
        {
            c.hits += 1;
        }
    }

    let total = combinations.len();
    let covered = combinations.iter().filter(|c| c.hits > 0).count();
    CoverageReport {
        samples: samples.len(),
        speed_relevant,
        accel_relevant,
        combinations,
        covered,
        total,
        fraction: covered as f64 / total as f64,
    }
}
