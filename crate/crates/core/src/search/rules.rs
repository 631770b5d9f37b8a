use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::cube::AngleCube;
use crate::geom::{max_triple_width, Point2, DELTA_FP};
use crate::region::{region_satisfies_t, RegionQuery, RegionSettings, RegionVerdict};

/// Golden ratio `(1 + √5)/2`.
pub const TAU: f64 = 1.618_033_988_749_895;

/// Why a cube was discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PruneReason {
    TransversalViolated,
    JohnInfeasible,
    LargeArc,
    RegionVerified,
    CenterCheckPassed,
}

impl PruneReason {
    pub const ALL: [PruneReason; 5] = [
        PruneReason::TransversalViolated,
        PruneReason::JohnInfeasible,
        PruneReason::LargeArc,
        PruneReason::RegionVerified,
        PruneReason::CenterCheckPassed,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "lemma15")]
    Lemma15,
    #[serde(rename = "grid-b")]
    GridB,
    #[serde(rename = "grid-c")]
    GridC,
}

impl Mode {
    /// Number of angle coordinates per cube.
    pub fn k(self) -> usize {
        match self {
            Mode::GridB => 4,
            Mode::Lemma15 | Mode::GridC => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Lemma15 => "lemma15",
            Mode::GridB => "grid-b",
            Mode::GridC => "grid-c",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lemma15" => Ok(Mode::Lemma15),
            "grid-b" => Ok(Mode::GridB),
            "grid-c" => Ok(Mode::GridC),
            other => Err(format!("unknown mode {other:?} (expected lemma15, grid-b or grid-c)")),
        }
    }
}

/// What a round does with one cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubeOutcome {
    Pruned(PruneReason),
    Subdivide,
    /// Center round only: no exact check applied.
    Unresolved,
}

/// `cos(πm/n)` and `sin(πm/n)` for `m` in `0..2n`. Every angle the rules
/// evaluate at a cube center is an integer multiple of `π/n`.
#[derive(Clone, Debug)]
pub struct RoundTable {
    n: u32,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl RoundTable {
    pub fn new(n: u32) -> Self {
        let (cos, sin) = (0..2 * n)
            .map(|m| {
                let t = PI * m as f64 / n as f64;
                (t.cos(), t.sin())
            })
            .unzip();
        Self { n, cos, sin }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    fn wrap(&self, m: i64) -> usize {
        m.rem_euclid(2 * self.n as i64) as usize
    }

    #[inline]
    pub fn cos(&self, m: i64) -> f64 {
        self.cos[self.wrap(m)]
    }

    #[inline]
    pub fn sin(&self, m: i64) -> f64 {
        self.sin[self.wrap(m)]
    }

    /// `F` at the centers with indices `a, b, c, d`; the half-offsets of the
    /// centers cancel in every argument.
    #[inline]
    fn functional(&self, a: i64, b: i64, c: i64, d: i64) -> f64 {
        self.cos(a + b - c - d) + self.cos(a - b + c - d) + self.cos(a - b - c + d)
    }

    /// The five signed values at the center of a `k = 5` cube.
    pub fn five_values(&self, cube: &AngleCube) -> [f64; 5] {
        let p: Vec<i64> = cube.indices().iter().map(|&x| x as i64).collect();
        [
            self.functional(p[0], p[1], p[2], p[3]),
            self.functional(p[1], p[2], p[3], p[4]),
            -self.functional(p[2], p[3], p[4], p[0]),
            self.functional(p[3], p[4], p[0], p[1]),
            -self.functional(p[4], p[0], p[1], p[2]),
        ]
    }

    /// `F(β1, β2, β3, β4)` at the center of a `k = 4` cube.
    pub fn four_value(&self, cube: &AngleCube) -> f64 {
        let p = cube.indices();
        self.functional(p[0] as i64, p[1] as i64, p[2] as i64, p[3] as i64)
    }

    /// Center points `(r1 cos β_i, r2 sin β_i)` with `β_i = π(2p_i + 1)/n`.
    pub fn center_points(&self, cube: &AngleCube, r1: f64, r2: f64) -> Vec<Point2> {
        cube.indices()
            .iter()
            .map(|&p| {
                let m = 2 * p as i64 + 1;
                Point2::new(r1 * self.cos(m), r2 * self.sin(m))
            })
            .collect()
    }
}

/// The pruning rules of one campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleSet {
    pub mode: Mode,
    pub r1: f64,
    pub r2: f64,
    /// Radius whose `T(rho B)` the region rule certifies.
    pub rho: f64,
    pub region: RegionSettings,
    pub delta: f64,
    /// Grid (c): resolution at which only the center is examined.
    pub center_check_n: Option<u32>,
    /// `lemma15` mode: also discard cubes with a gap above `2π/3`.
    pub lemma15_large_arc: bool,
}

impl RuleSet {
    pub fn new(mode: Mode, r1: f64, r2: f64) -> Self {
        Self {
            mode,
            r1,
            r2,
            rho: TAU,
            region: RegionSettings::default_for(r1),
            delta: DELTA_FP,
            center_check_n: (mode == Mode::GridC).then_some(1920),
            lemma15_large_arc: true,
        }
    }

    pub fn is_center_round(&self, n: u32) -> bool {
        self.mode == Mode::GridC && self.center_check_n == Some(n)
    }

    pub fn evaluate(&self, cube: &AngleCube, table: &RoundTable) -> CubeOutcome {
        debug_assert_eq!(cube.n(), table.n());
        if self.is_center_round(cube.n()) {
            match self.center_check(cube, table) {
                Some(r) => CubeOutcome::Pruned(r),
                None => CubeOutcome::Unresolved,
            }
        } else {
            match self.prune(cube, table) {
                Some(r) => CubeOutcome::Pruned(r),
                None => CubeOutcome::Subdivide,
            }
        }
    }

    /// First applicable rule at a branching round, cheapest first.
    pub fn prune(&self, cube: &AngleCube, table: &RoundTable) -> Option<PruneReason> {
        let n = cube.n() as f64;
        let john_margin = 3.0 * PI / n + self.delta;
        let eps = self.r1 * PI / n;
        match self.mode {
            Mode::Lemma15 => {
                if self.lemma15_large_arc && large_arc(cube) {
                    return Some(PruneReason::LargeArc);
                }
                if split_signs(&table.five_values(cube), john_margin) {
                    return Some(PruneReason::JohnInfeasible);
                }
                self.transversal(cube, table, eps).then_some(PruneReason::TransversalViolated)
            }
            Mode::GridB | Mode::GridC => {
                if large_arc(cube) {
                    return Some(PruneReason::LargeArc);
                }
                let john = if self.mode == Mode::GridB {
                    table.four_value(cube).abs() > john_margin
                } else {
                    split_signs(&table.five_values(cube), john_margin)
                };
                if john {
                    return Some(PruneReason::JohnInfeasible);
                }
                if self.transversal(cube, table, eps) {
                    return Some(PruneReason::TransversalViolated);
                }
                self.region_verified(cube, table, eps).then_some(PruneReason::RegionVerified)
            }
        }
    }

    /// Exact checks at the center tuple itself (no inflation). Any success
    /// discharges the cube.
    pub fn center_check(&self, cube: &AngleCube, table: &RoundTable) -> Option<PruneReason> {
        let ok = large_arc(cube)
            || match cube.k() {
                5 => split_signs(&table.five_values(cube), self.delta),
                4 => table.four_value(cube).abs() > self.delta,
                _ => false,
            }
            || self.transversal(cube, table, 0.0)
            || self.region_verified(cube, table, 0.0);
        ok.then_some(PruneReason::CenterCheckPassed)
    }

    /// Center points fail `T((1 + eps)B, 3)` beyond the float slack.
    fn transversal(&self, cube: &AngleCube, table: &RoundTable, eps: f64) -> bool {
        let z = table.center_points(cube, self.r1, self.r2);
        max_triple_width(&z) > 2.0 * (1.0 + eps) + self.delta
    }

    fn region_verified(&self, cube: &AngleCube, table: &RoundTable, eps: f64) -> bool {
        let z = table.center_points(cube, self.r1, self.r2);
        match RegionQuery::new(z, eps, self.r1, self.r2) {
            Ok(q) => region_satisfies_t(&q, self.rho, &self.region) == RegionVerdict::Verified,
            Err(_) => false,
        }
    }
}

/// Some value above `margin` and some below `−margin`.
#[inline]
fn split_signs(values: &[f64; 5], margin: f64) -> bool {
    values.iter().any(|&v| v > margin) && values.iter().any(|&v| v < -margin)
}

/// Some circular center gap exceeds `2π/3`, decided on integers: with `n`
/// a multiple of 3, index gap `m` with `3m > n` leaves every interior tuple
/// of the cube with a gap strictly above `2π/3`.
#[inline]
pub fn large_arc(cube: &AngleCube) -> bool {
    3 * cube.max_index_gap() > cube.n()
}

/// The transversal and John rules only; campaigns add the large-arc rule by
/// default (see [`RuleSet::lemma15_large_arc`]).
pub fn prune_lemma15(c: &AngleCube, r1: f64, r2: f64) -> Option<PruneReason> {
    let rules = RuleSet { lemma15_large_arc: false, ..RuleSet::new(Mode::Lemma15, r1, r2) };
    rules.prune(c, &RoundTable::new(c.n()))
}

pub fn prune_grid_b(c: &AngleCube, r1: f64, r2: f64, rho: f64) -> Option<PruneReason> {
    let rules = RuleSet { rho, ..RuleSet::new(Mode::GridB, r1, r2) };
    rules.prune(c, &RoundTable::new(c.n()))
}

pub fn prune_grid_c(c: &AngleCube, r1: f64, r2: f64, rho: f64) -> Option<PruneReason> {
    let rules = RuleSet { rho, ..RuleSet::new(Mode::GridC, r1, r2) };
    rules.prune(c, &RoundTable::new(c.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::john::{five_values, functional};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cube(n: u32, p: &[u32]) -> AngleCube {
        AngleCube::new(n, p).unwrap()
    }

    fn random_cube(rng: &mut ChaCha8Rng, n: u32, k: usize) -> AngleCube {
        let mut p: Vec<u32> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        p.sort();
        cube(n, &p)
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &n in &[60u32, 120, 480, 1920] {
            let t = RoundTable::new(n);
            for _ in 0..200 {
                let c = random_cube(&mut rng, n, 5);
                let b: [f64; 5] = c.center_angles().try_into().unwrap();
                let direct = five_values(&b);
                for (x, y) in t.five_values(&c).iter().zip(direct) {
                    assert!((x - y).abs() < 1e-12);
                }
                let c4 = random_cube(&mut rng, n, 4);
                let b = c4.center_angles();
                assert!((t.four_value(&c4) - functional(b[0], b[1], b[2], b[3])).abs() < 1e-12);
                for (z, beta) in t.center_points(&c, 3.0, 1.62).iter().zip(c.center_angles()) {
                    assert!((z.x - 3.0 * beta.cos()).abs() < 1e-12);
                    assert!((z.y - 1.62 * beta.sin()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lemma15_transversal_example() {
        // Three centers near 0, 2π/3, 4π/3 on the (3, 1.62) ellipse: a wide
        // triangle whose min altitude far exceeds 2(1 + 3π/60).
        let c = cube(60, &[0, 0, 20, 20, 40]);
        let t = RoundTable::new(60);
        let z = t.center_points(&c, 3.0, 1.62);
        assert!(max_triple_width(&z) > 2.4);
        let vals = t.five_values(&c);
        let john = split_signs(&vals, 3.0 * PI / 60.0 + DELTA_FP);
        let expect = if john { PruneReason::JohnInfeasible } else { PruneReason::TransversalViolated };
        assert_eq!(prune_lemma15(&c, 3.0, 1.62), Some(expect));
    }

    #[test]
    fn lemma15_pentagon_not_pruned_by_john() {
        // Regular pentagon: all five values ≈ +0.5, so no sign split.
        let n = 60;
        let c = cube(n, &[0, 12, 24, 36, 48]);
        let t = RoundTable::new(n);
        let v = t.five_values(&c);
        assert!(v.iter().all(|&x| (x - 0.5).abs() < 1e-12));
        assert!(!split_signs(&v, 3.0 * PI / 60.0));
    }

    #[test]
    fn lemma15_sign_split_is_john_infeasible() {
        // Search a small grid for a center whose values split well beyond
        // the margin.
        let n = 60;
        let t = RoundTable::new(n);
        let c = super::super::cube::initial_cubes(5, n)
            .find(|c| {
                let v = t.five_values(c);
                v.iter().any(|&x| x > 0.9) && v.iter().any(|&x| x < -0.9)
            })
            .unwrap();
        assert_eq!(prune_lemma15(&c, 3.0, 1.62), Some(PruneReason::JohnInfeasible));
    }

    #[test]
    fn grid_b_examples() {
        // Gaps 1/12 of the circle each: wrap gap 3π/2 > 2π/3.
        let c = cube(24, &[0, 2, 4, 6]);
        assert_eq!(prune_grid_b(&c, 1.65, 1.65, TAU), Some(PruneReason::LargeArc));
        // No large arc; |F| well above 3π/120.
        let n = 120;
        let t = RoundTable::new(n);
        let c = super::super::cube::initial_cubes(4, n).find(|c| !large_arc(c) && t.four_value(c).abs() > 0.3).unwrap();
        assert_eq!(prune_grid_b(&c, 1.65, 1.65, TAU), Some(PruneReason::JohnInfeasible));
    }

    #[test]
    fn grid_b_region_rule_on_small_ellipse() {
        // A disk of radius below tau satisfies T(tau B) outright, so any cube
        // that reaches the region rule is discharged by it.
        let n = 24;
        let t = RoundTable::new(n);
        let rules = RuleSet::new(Mode::GridB, 1.6, 1.6);
        let mut seen = 0;
        for c in super::super::cube::initial_cubes(4, n) {
            let r = rules.prune(&c, &t);
            assert!(r.is_some());
            seen += (r == Some(PruneReason::RegionVerified)) as usize;
        }
        assert!(seen > 0);
    }

    #[test]
    fn large_arc_integer_rule() {
        assert!(large_arc(&cube(12, &[0, 5, 6, 7])));
        assert!(!large_arc(&cube(12, &[0, 4, 8, 8])));
        assert!(large_arc(&cube(12, &[0, 0, 4, 7])));
    }

    #[test]
    fn large_arc_holds_in_cube_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let n = 6 * rng.gen_range(2..40);
            let c = random_cube(&mut rng, n, 4);
            if !large_arc(&c) {
                continue;
            }
            for _ in 0..5 {
                let mut a: Vec<f64> = (0..4)
                    .map(|i| {
                        let (lo, hi) = c.arc(i);
                        lo + (hi - lo) * rng.gen_range(1e-9..1.0 - 1e-9)
                    })
                    .collect();
                a.sort_by(f64::total_cmp);
                assert!(crate::john::max_arc_gap_unchecked(&a) > 2.0 * PI / 3.0);
            }
        }
    }

    #[test]
    fn center_round_only_in_grid_c() {
        let r = RuleSet::new(Mode::GridC, 1.65, 1.65);
        assert!(r.is_center_round(1920));
        assert!(!r.is_center_round(960));
        assert!(!RuleSet::new(Mode::GridB, 1.65, 1.65).is_center_round(1920));
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [Mode::Lemma15, Mode::GridB, Mode::GridC] {
            assert_eq!(m.name().parse::<Mode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!("grid-d".parse::<Mode>().is_err());
    }
}
