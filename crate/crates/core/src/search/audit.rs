//! Soundness sampling: re-checks each prune reason's defining predicate on
//! exact tuples drawn from the interior of pruned cubes.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::cube::AngleCube;
use super::rules::{PruneReason, RuleSet};
use crate::geom::{convex_hull, hull_width, max_triple_width, Point2};
use crate::john::{five_values, functional, max_arc_gap_unchecked};
use crate::region::{region_contains, RegionQuery};

/// Deterministic bottom-k samples of pruned cubes, keyed by a hash of the
/// cube: an overall sample plus a smaller one per reason so rare reasons
/// are represented.
#[derive(Clone, Debug)]
pub struct AuditSample {
    overall: BottomK,
    per_reason: BTreeMap<PruneReason, BottomK>,
    per_reason_k: usize,
}

#[derive(Clone, Debug, Default)]
struct BottomK {
    k: usize,
    heap: BinaryHeap<(u64, AngleCube, PruneReason)>,
}

impl BottomK {
    fn new(k: usize) -> Self {
        Self { k, heap: BinaryHeap::new() }
    }

    fn offer(&mut self, h: u64, cube: AngleCube, reason: PruneReason) {
        if self.heap.len() < self.k {
            self.heap.push((h, cube, reason));
        } else if let Some(top) = self.heap.peek() {
            if (h, cube) < (top.0, top.1) {
                self.heap.pop();
                self.heap.push((h, cube, reason));
            }
        }
    }
}

impl AuditSample {
    pub fn new(overall: usize, per_reason: usize) -> Self {
        Self { overall: BottomK::new(overall), per_reason: BTreeMap::new(), per_reason_k: per_reason }
    }

    pub fn offer(&mut self, reason: PruneReason, cube: AngleCube) {
        let h = cube.mix_hash();
        self.overall.offer(h, cube, reason);
        let k = self.per_reason_k;
        self.per_reason.entry(reason).or_insert_with(|| BottomK::new(k)).offer(h, cube, reason);
    }

    /// Sampled cubes in a fixed order.
    pub fn cubes(&self) -> Vec<(AngleCube, PruneReason)> {
        let all: BTreeSet<(AngleCube, PruneReason)> = self
            .overall
            .heap
            .iter()
            .chain(self.per_reason.values().flat_map(|b| b.heap.iter()))
            .map(|&(_, c, r)| (c, r))
            .collect();
        all.into_iter().collect()
    }

    pub fn len(&self) -> usize {
        self.cubes().len()
    }

    pub fn is_empty(&self) -> bool {
        self.overall.heap.is_empty()
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SoundnessReport {
    pub cubes_checked: u64,
    pub pairs_checked: u64,
    pub pairs_by_reason: BTreeMap<PruneReason, u64>,
    pub violation_count: u64,
    /// First few violations, human readable.
    pub violations: Vec<String>,
}

impl SoundnessReport {
    pub fn is_clean(&self) -> bool {
        self.violation_count == 0
    }
}

const MAX_REPORTED: usize = 20;

/// Region checks: random points of `E` per tuple.
const REGION_PROBES: usize = 48;

/// Draws `tuples_per_cube` sorted tuples from the open interior of each
/// sampled cube (one tuple, the center, for center-round prunes) and checks
/// the reason's predicate on the exact tuple.
pub fn check_soundness(rules: &RuleSet, sample: &AuditSample, tuples_per_cube: usize, seed: u64) -> SoundnessReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SoundnessReport::default();
    for (cube, reason) in sample.cubes() {
        report.cubes_checked += 1;
        let tuples: Vec<Vec<f64>> = if reason == PruneReason::CenterCheckPassed {
            vec![cube.center_angles()]
        } else {
            (0..tuples_per_cube).map(|_| interior_tuple(&cube, &mut rng)).collect()
        };
        for alphas in tuples {
            report.pairs_checked += 1;
            *report.pairs_by_reason.entry(reason).or_default() += 1;
            if let Err(msg) = check_pair(rules, &cube, reason, &alphas, &mut rng) {
                report.violation_count += 1;
                if report.violations.len() < MAX_REPORTED {
                    report.violations.push(format!("{reason:?} cube [{cube}] tuple {alphas:?}: {msg}"));
                }
            }
        }
    }
    report
}

/// Uniform in each open arc, then sorted (so coordinates sharing an arc stay
/// inside the cube).
pub fn interior_tuple(cube: &AngleCube, rng: &mut impl Rng) -> Vec<f64> {
    let mut a: Vec<f64> = (0..cube.k())
        .map(|i| {
            let (lo, hi) = cube.arc(i);
            lo + (hi - lo) * rng.gen_range(1e-9..1.0 - 1e-9)
        })
        .collect();
    a.sort_by(f64::total_cmp);
    a
}

fn ellipse_points(rules: &RuleSet, alphas: &[f64]) -> Vec<Point2> {
    alphas.iter().map(|a| Point2::new(rules.r1 * a.cos(), rules.r2 * a.sin())).collect()
}

fn check_pair(
    rules: &RuleSet,
    cube: &AngleCube,
    reason: PruneReason,
    alphas: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    match reason {
        PruneReason::TransversalViolated => {
            let w = max_triple_width(&ellipse_points(rules, alphas));
            if w > 2.0 {
                Ok(())
            } else {
                Err(format!("max triple width {w} <= 2"))
            }
        }
        PruneReason::JohnInfeasible => john_transfers(cube, alphas),
        PruneReason::LargeArc => {
            let g = max_arc_gap_unchecked(alphas);
            if g > 2.0 * PI / 3.0 {
                Ok(())
            } else {
                Err(format!("max gap {g} <= 2π/3"))
            }
        }
        PruneReason::RegionVerified => region_transfers(rules, cube, alphas, rng),
        PruneReason::CenterCheckPassed => center_recheck(rules, alphas, rng),
    }
}

/// The sign split (k = 5) or the sign of `F` (k = 4) seen at the center
/// persists at the tuple.
fn john_transfers(cube: &AngleCube, alphas: &[f64]) -> Result<(), String> {
    let beta = cube.center_angles();
    match cube.k() {
        5 => {
            let c = five_values(&beta.clone().try_into().expect("k = 5"));
            let v = five_values(&alphas.try_into().expect("k = 5"));
            let imax = argmax(&c);
            let imin = argmax(&c.map(|x| -x));
            if v[imax] > 0.0 && v[imin] < 0.0 {
                Ok(())
            } else {
                Err(format!("values {v:?} lost the split of {c:?}"))
            }
        }
        4 => {
            let c = functional(beta[0], beta[1], beta[2], beta[3]);
            let v = functional(alphas[0], alphas[1], alphas[2], alphas[3]);
            if v != 0.0 && v.signum() == c.signum() {
                Ok(())
            } else {
                Err(format!("F = {v} but center F = {c}"))
            }
        }
        k => Err(format!("no John rule for k = {k}")),
    }
}

fn argmax(v: &[f64; 5]) -> usize {
    (0..5).fold(0, |best, i| if v[i] > v[best] { i } else { best })
}

fn sample_in_ellipse(rules: &RuleSet, rng: &mut ChaCha8Rng) -> Point2 {
    loop {
        let (u, v): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if u * u + v * v <= 1.0 {
            return Point2::new(rules.r1 * u, rules.r2 * v);
        }
    }
}

/// `R(Z') ∩ E ⊆ R(Z, ε)` on random probes, and the hull of the probes found
/// in `R(Z') ∩ E` (with the members of `Z'` itself) has width at most `2ρ`.
fn region_transfers(rules: &RuleSet, cube: &AngleCube, alphas: &[f64], rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = cube.n() as f64;
    let eps = rules.r1 * PI / n;
    let center = ellipse_points(rules, &cube.center_angles());
    let exact = ellipse_points(rules, alphas);
    let wide = RegionQuery::new(center, eps, rules.r1, rules.r2).map_err(|e| e.to_string())?;
    let tight = RegionQuery::new(exact.clone(), 0.0, rules.r1, rules.r2).map_err(|e| e.to_string())?;
    region_members_ok(rules, &tight, Some(&wide), &exact, rng)
}

fn region_members_ok(
    rules: &RuleSet,
    tight: &RegionQuery,
    wide: Option<&RegionQuery>,
    exact: &[Point2],
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    let mut members: Vec<Point2> = exact.iter().copied().filter(|&z| region_contains(tight, z)).collect();
    for _ in 0..REGION_PROBES {
        let x = sample_in_ellipse(rules, rng);
        if region_contains(tight, x) {
            if let Some(w) = wide {
                if !region_contains(w, x) {
                    return Err(format!("probe {x:?} in R(Z') but not in R(Z, ε)"));
                }
            }
            members.push(x);
        }
    }
    let w = hull_width(&convex_hull(&members));
    if w <= 2.0 * rules.rho {
        Ok(())
    } else {
        Err(format!("members of R(Z') ∩ E span width {w} > 2ρ"))
    }
}

/// Re-derives the center verdict from directly evaluated angles.
fn center_recheck(rules: &RuleSet, beta: &[f64], rng: &mut ChaCha8Rng) -> Result<(), String> {
    let d = rules.delta;
    if max_arc_gap_unchecked(beta) > 2.0 * PI / 3.0 {
        return Ok(());
    }
    let john = match beta.len() {
        5 => {
            let v = five_values(&beta.try_into().expect("k = 5"));
            v.iter().any(|&x| x > d) && v.iter().any(|&x| x < -d)
        }
        4 => functional(beta[0], beta[1], beta[2], beta[3]).abs() > d,
        _ => false,
    };
    if john {
        return Ok(());
    }
    let z = ellipse_points(rules, beta);
    if max_triple_width(&z) > 2.0 {
        return Ok(());
    }
    let q = RegionQuery::new(z.clone(), 0.0, rules.r1, rules.r2).map_err(|e| e.to_string())?;
    region_members_ok(rules, &q, None, &z, rng)
}
