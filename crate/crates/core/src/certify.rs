//! Assembly of the 1.645 bound: part (a), the pair grid, the pentagon
//! witness for the lower side, and a report that re-evaluates every numeric
//! inequality of the reduction and checks each required certificate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::CertifyError;
use crate::geom::{max_triple_width, satisfies_t3, width, Point2, DELTA_FP};
use crate::john::{max_arc_gap_unchecked, simplex_condition, TriState};
use crate::search::{Certificate, Mode, Verdict, TAU};

/// The bound established when every sub-result is in place.
pub const TARGET_BOUND: f64 = 1.645;

/// Shrink factor applied before the grid is consulted.
pub const SHRINK: f64 = 0.995;

/// Resolution of the grid (c) center round the perturbation budget relies on.
pub const CENTER_RESOLUTION: u32 = 1920;

/// Part (a): three points in John position on `τB` form a regular triangle of
/// height `1.5τ > 2`, and only equally spaced triples are in John position.
/// The spacing claim is checked over all triples of a `grid`-point angle grid
/// with the first angle fixed at 0 (the condition is rotation invariant).
pub fn verify_part_a() -> bool {
    part_a_height() > 2.0 + DELTA_FP && part_a_spacing_holds(360)
}

pub fn part_a_height() -> f64 {
    1.5 * TAU
}

pub fn part_a_spacing_holds(grid: u32) -> bool {
    let step = 2.0 * PI / grid as f64;
    for i in 1..grid {
        for j in i + 1..grid {
            let a = [0.0, i as f64 * step, j as f64 * step];
            if simplex_condition(&a, 1e-6) == TriState::Yes && (max_arc_gap_unchecked(&a) - 2.0 * PI / 3.0).abs() > 1e-6
            {
                return false;
            }
        }
    }
    true
}

/// Pairs `(r1, r2)` on a square grid of the given step inside a box, with
/// `r1 >= r2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairGrid {
    pub step: f64,
    pub r1_range: (f64, f64),
    pub r2_range: (f64, f64),
}

impl PairGrid {
    /// `[1.62, 3] × [1.62, 2]`.
    pub fn standard(step: f64) -> Self {
        Self { step, r1_range: (1.62, 3.0), r2_range: (1.62, 2.0) }
    }

    /// Grid index of `v`, if `v` is a multiple of the step within `DELTA_FP`.
    pub fn index_of(&self, v: f64) -> Option<i64> {
        let q = v / self.step;
        let i = q.round();
        ((q - i).abs() <= DELTA_FP).then_some(i as i64)
    }

    /// Inclusive index range of the multiples inside `[lo, hi]`, snapping
    /// endpoints that are multiples up to `DELTA_FP`.
    fn index_range(&self, (lo, hi): (f64, f64)) -> (i64, i64) {
        let first = self.index_of(lo).unwrap_or_else(|| (lo / self.step).ceil() as i64);
        let last = self.index_of(hi).unwrap_or_else(|| (hi / self.step).floor() as i64);
        (first, last)
    }
}

/// Sorted lexicographically by `(r1, r2)`.
pub fn enumerate_pair_grid(g: &PairGrid) -> Vec<(f64, f64)> {
    assert!(g.step > 0.0 && g.step.is_finite());
    let (a1, b1) = g.index_range(g.r1_range);
    let (a2, b2) = g.index_range(g.r2_range);
    let mut out = Vec::new();
    for i in a1..=b1 {
        for j in a2..=b2.min(i) {
            out.push((i as f64 * g.step, j as f64 * g.step));
        }
    }
    out
}

/// Regular pentagon of side `4/√(τ + 2)`: circumradius `2/√5·2`, every
/// triple of width at most 2, overall width `2τ`.
pub fn regular_pentagon_witness() -> Vec<Point2> {
    regular_pentagon(4.0 / (TAU + 2.0).sqrt())
}

pub fn regular_pentagon(side: f64) -> Vec<Point2> {
    let r = side / (2.0 * (PI / 5.0).sin());
    (0..5)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / 5.0 + PI / 2.0;
            Point2::new(r * t.cos(), r * t.sin())
        })
        .collect()
}

/// Half the width of a set with property `T(B, 3)` but no smaller than `τ`:
/// the lower side of the blow-up constant.
pub fn pentagon_lower_bound() -> Result<f64, CertifyError> {
    let p = regular_pentagon_witness();
    if !satisfies_t3(&p, 1.0 + DELTA_FP) {
        return Err(CertifyError::WitnessFailed(format!("max triple width {} exceeds 2", max_triple_width(&p))));
    }
    let half = width(&p) / 2.0;
    if half < TAU - 1e-9 {
        return Err(CertifyError::WitnessFailed(format!("width/2 = {half} is below τ")));
    }
    Ok(half)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs + DELTA_FP < rhs`.
    pub holds: bool,
}

impl InequalityCheck {
    fn less(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.to_string(), lhs, rhs, holds: lhs + DELTA_FP < rhs }
    }
}

/// The numeric inequalities of the reduction, for a pair grid of `step`.
pub fn inequality_chain(step: f64) -> Vec<InequalityCheck> {
    let r2_min = 1.62;
    vec![
        InequalityCheck::less("2 < 1.5·τ (part a triangle height)", 2.0, part_a_height()),
        InequalityCheck::less("(1.62 + step)/1.62 · τ < 1.635", (r2_min + step) / r2_min * TAU, 1.635),
        InequalityCheck::less(
            "(1.62 + step)/(0.995·1.62) · τ < 1.645",
            (r2_min + step) / (SHRINK * r2_min) * TAU,
            TARGET_BOUND,
        ),
        InequalityCheck::less(
            "3·π/1920 < 0.005 (perturbation budget with r1' <= 3)",
            3.0 * PI / CENTER_RESOLUTION as f64,
            0.005,
        ),
        InequalityCheck::less("τ < 1.645", TAU, TARGET_BOUND),
    ]
}

#[derive(Clone, Debug, Default)]
pub struct BoundInputs {
    pub part_a: Option<bool>,
    pub lemma15: Vec<Certificate>,
    pub grid_b: Vec<Certificate>,
    pub grid_c: Vec<Certificate>,
}

impl BoundInputs {
    /// Sorts certificates by mode.
    pub fn from_certificates(part_a: Option<bool>, certs: impl IntoIterator<Item = Certificate>) -> Self {
        let mut out = BoundInputs { part_a, ..Default::default() };
        for c in certs {
            match c.mode {
                Mode::Lemma15 => out.lemma15.push(c),
                Mode::GridB => out.grid_b.push(c),
                Mode::GridC => out.grid_c.push(c),
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundStatus {
    Complete,
    Partial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubResult {
    pub name: String,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub status: BoundStatus,
    /// Present only when `status` is `Complete`.
    pub bound: Option<f64>,
    pub pair_grid: PairGrid,
    pub pairs_required: usize,
    pub grid_b_covered: usize,
    pub grid_c_covered: usize,
    pub inequalities: Vec<InequalityCheck>,
    pub sub_results: Vec<SubResult>,
    pub gaps: Vec<String>,
}

/// Listed gaps are capped; the coverage counts carry the full picture.
const MAX_LISTED_GAPS: usize = 50;

/// Checks every certificate, matches grid certificates to grid pairs and
/// reports `Complete` with the 1.645 bound only when nothing is missing.
pub fn assemble_bound(inputs: &BoundInputs, grid: &PairGrid) -> Result<BoundReport, CertifyError> {
    let all = inputs.lemma15.iter().chain(&inputs.grid_b).chain(&inputs.grid_c);
    for c in all {
        c.validate().map_err(|e| {
            CertifyError::InconsistentInputs(format!("{} certificate for ({}, {}): {e}", c.mode.name(), c.r1, c.r2))
        })?;
    }
    let misfiled = inputs
        .lemma15
        .iter()
        .map(|c| (c, Mode::Lemma15))
        .chain(inputs.grid_b.iter().map(|c| (c, Mode::GridB)))
        .chain(inputs.grid_c.iter().map(|c| (c, Mode::GridC)))
        .find(|(c, m)| c.mode != *m);
    if let Some((c, m)) = misfiled {
        return Err(CertifyError::InconsistentInputs(format!(
            "{} certificate supplied as {}",
            c.mode.name(),
            m.name()
        )));
    }

    let mut gaps = Vec::new();
    let mut sub_results = Vec::new();

    let part_a = inputs.part_a == Some(true);
    sub_results.push(SubResult { name: "part (a)".into(), verified: part_a });
    if !part_a {
        gaps.push("part (a) not verified".into());
    }

    let lemma15 = inputs
        .lemma15
        .iter()
        .any(|c| c.verdict == Verdict::Empty && (c.r1 - 3.0).abs() <= DELTA_FP && (c.r2 - 1.62).abs() <= DELTA_FP);
    sub_results.push(SubResult { name: "lemma15 at (3, 1.62)".into(), verified: lemma15 });
    if !lemma15 {
        gaps.push("no Empty lemma15 certificate at (3, 1.62)".into());
    }

    let pairs = enumerate_pair_grid(grid);
    let covers = |c: &Certificate, r1: f64, r2: f64| {
        c.verdict == Verdict::Empty
            && (c.r1 - r1).abs() <= DELTA_FP
            && (c.r2 - r2).abs() <= DELTA_FP
            && c.config.rho <= TAU + DELTA_FP
    };
    let mut covered = [0usize; 2];
    for (slot, (label, certs)) in [("grid (b)", &inputs.grid_b), ("grid (c)", &inputs.grid_c)].into_iter().enumerate() {
        let mut missing = 0usize;
        for &(r1, r2) in &pairs {
            let ok = certs
                .iter()
                .any(|c| covers(c, r1, r2) && (slot == 0 || c.config.center_check_n == Some(CENTER_RESOLUTION)));
            if ok {
                covered[slot] += 1;
            } else {
                missing += 1;
                if gaps.len() < MAX_LISTED_GAPS {
                    gaps.push(format!("{label} pair ({r1:.3}, {r2:.3}) has no Empty certificate"));
                }
            }
        }
        sub_results.push(SubResult {
            name: format!("{label}: {}/{} pairs", covered[slot], pairs.len()),
            verified: missing == 0 && !pairs.is_empty(),
        });
        if pairs.is_empty() {
            gaps.push(format!("{label}: pair grid is empty"));
        }
    }

    let inequalities = inequality_chain(grid.step);
    for q in inequalities.iter().filter(|q| !q.holds) {
        gaps.push(format!("inequality fails: {} ({} vs {})", q.name, q.lhs, q.rhs));
    }

    let complete = sub_results.iter().all(|s| s.verified) && inequalities.iter().all(|q| q.holds);
    Ok(BoundReport {
        status: if complete { BoundStatus::Complete } else { BoundStatus::Partial },
        bound: complete.then_some(TARGET_BOUND),
        pair_grid: *grid,
        pairs_required: pairs.len(),
        grid_b_covered: covered[0],
        grid_c_covered: covered[1],
        inequalities,
        sub_results,
        gaps,
    })
}
