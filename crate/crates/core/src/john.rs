//! Minimality criteria for the unit disk as the minimum-area ellipse of a few
//! points on the unit circle.
//!
//! Points `(cos α, sin α)` are lifted to `(cos α, sin α, cos 2α, sin 2α)`; the
//! unit disk is the minimum-area ellipse of the points exactly when the origin
//! of ℝ⁴ lies in the convex hull of the lifts. For four and five points the
//! condition collapses to sign conditions on the three-cosine functional
//! [`functional`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::JohnError;
use crate::geom::DELTA_FP;

/// Three-valued answer of a margin-guarded test. `Unknown` always means
/// "refine further"; it is never read as a yes or a no.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TriState {
    Yes,
    No,
    Unknown,
}

/// `cos ½(a1+a2−a3−a4) + cos ½(a1−a2+a3−a4) + cos ½(a1−a2−a3+a4)`.
#[inline]
pub fn functional(a1: f64, a2: f64, a3: f64, a4: f64) -> f64 {
    (0.5 * (a1 + a2 - a3 - a4)).cos() + (0.5 * (a1 - a2 + a3 - a4)).cos() + (0.5 * (a1 - a2 - a3 + a4)).cos()
}

/// The five signed values whose common sign characterises 5-point
/// configurations, evaluated with raw (unwrapped) angles. The alternating
/// signs account for the wrap of `α1` past `2π`.
#[inline]
pub fn five_values(a: &[f64; 5]) -> [f64; 5] {
    [
        functional(a[0], a[1], a[2], a[3]),
        functional(a[1], a[2], a[3], a[4]),
        -functional(a[2], a[3], a[4], a[0]),
        functional(a[3], a[4], a[0], a[1]),
        -functional(a[4], a[0], a[1], a[2]),
    ]
}

/// Sign classification of the five values with a margin band around 0.
pub fn classify_five_values(values: &[f64; 5], margin: f64) -> TriState {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max > margin && min < -margin {
        TriState::No
    } else if min > margin || max < -margin {
        TriState::Yes
    } else {
        TriState::Unknown
    }
}

/// `k` angles in radians, `3 <= k <= 5`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleTuple {
    alphas: Vec<f64>,
}

impl AngleTuple {
    pub fn new(alphas: Vec<f64>) -> Result<Self, JohnError> {
        if !(3..=5).contains(&alphas.len()) {
            return Err(JohnError::BadArity(alphas.len()));
        }
        Ok(Self { alphas })
    }

    /// Builds the tuple and checks `0 <= α1 < … < αk < 2π`.
    pub fn ordered(alphas: Vec<f64>) -> Result<Self, JohnError> {
        let t = Self::new(alphas)?;
        t.check_ordered()?;
        Ok(t)
    }

    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn is_ordered(&self) -> bool {
        let a = &self.alphas;
        a.iter().all(|x| x.is_finite()) && a[0] >= 0.0 && a[a.len() - 1] < 2.0 * PI && a.windows(2).all(|w| w[0] < w[1])
    }

    pub fn check_ordered(&self) -> Result<(), JohnError> {
        if self.is_ordered() {
            Ok(())
        } else {
            Err(JohnError::NotOrdered(self.alphas.clone()))
        }
    }

    fn expect_k(&self, k: usize) -> Result<(), JohnError> {
        if self.k() != k {
            return Err(JohnError::WrongArity { expected: k, got: self.k() });
        }
        self.check_ordered()
    }
}

/// `F(α1, α2, α3, α4)` for an ordered 4-tuple. Zero is necessary for the
/// unit disk to be the minimum-area ellipse of the four points with all four
/// carrying positive weight.
pub fn four_point_john_residual(t: &AngleTuple) -> Result<f64, JohnError> {
    t.expect_k(4)?;
    let a = t.alphas();
    Ok(functional(a[0], a[1], a[2], a[3]))
}

pub fn five_point_values(t: &AngleTuple) -> Result<[f64; 5], JohnError> {
    t.expect_k(5)?;
    let a = t.alphas();
    Ok(five_values(&[a[0], a[1], a[2], a[3], a[4]]))
}

/// `Yes` if all five values share a sign beyond `margin`, `No` if two values
/// of opposite sign both exceed it, `Unknown` otherwise.
pub fn is_john_five(t: &AngleTuple, margin: f64) -> Result<TriState, JohnError> {
    Ok(classify_five_values(&five_point_values(t)?, margin))
}

/// Largest circular gap `α_{i+1} − α_i` with `α_{k+1} = α_1 + 2π`. A gap
/// above `2π/3` rules the unit disk out as the minimum-area ellipse.
pub fn max_arc_gap(t: &AngleTuple) -> Result<f64, JohnError> {
    t.check_ordered()?;
    Ok(max_arc_gap_unchecked(t.alphas()))
}

/// [`max_arc_gap`] without the ordering check; `alphas` must be sorted.
pub fn max_arc_gap_unchecked(alphas: &[f64]) -> f64 {
    let k = alphas.len();
    let wrap = alphas[0] + 2.0 * PI - alphas[k - 1];
    alphas.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

pub type LiftedPoint = [f64; 4];

#[inline]
pub fn lift(alpha: f64) -> LiftedPoint {
    let (s, c) = alpha.sin_cos();
    let (s2, c2) = (2.0 * alpha).sin_cos();
    [c, s, c2, s2]
}

/// Whether the origin of ℝ⁴ lies in the convex hull of the lifted points.
///
/// `Yes` when a convex combination hitting the origin exists with every weight
/// `>= margin`; `No` when the hull stays at Euclidean distance `> margin` from
/// the origin (the nearest hull point gives a separating functional with that
/// slack); `Unknown` in between.
pub fn simplex_condition(alphas: &[f64], margin: f64) -> TriState {
    if alphas.is_empty() {
        return TriState::No;
    }
    let pts: Vec<LiftedPoint> = alphas.iter().map(|&a| lift(a)).collect();
    let dist = hull_distance_to_origin(&pts);
    if dist > margin.max(DELTA_FP) {
        return TriState::No;
    }
    if dist > DELTA_FP {
        return TriState::Unknown;
    }
    match max_min_weight(&pts) {
        Some(w) if w + DELTA_FP >= margin => TriState::Yes,
        _ => TriState::Unknown,
    }
}

/// Euclidean distance from the origin to the convex hull of `pts`.
///
/// The nearest point lies in the relative interior of a face spanned by an
/// affinely independent subset, where it is the nearest point of that
/// subset's affine hull; with at most five points every subset is tried.
pub fn hull_distance_to_origin(pts: &[LiftedPoint]) -> f64 {
    let k = pts.len();
    assert!(k <= 8, "subset enumeration is meant for tiny inputs");
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if let Some((weights, point)) = affine_nearest(pts, &idx) {
            if weights.iter().all(|&w| w >= -1e-12) {
                best = best.min(norm4(&point));
            }
        }
    }
    best
}

fn norm4(p: &LiftedPoint) -> f64 {
    p.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Nearest point to the origin on the affine hull of `pts[idx]`, with its
/// affine weights. `None` for affinely dependent subsets.
fn affine_nearest(pts: &[LiftedPoint], idx: &[usize]) -> Option<(Vec<f64>, LiftedPoint)> {
    let x0 = pts[idx[0]];
    if idx.len() == 1 {
        return Some((vec![1.0], x0));
    }
    let s = idx.len() - 1;
    let d = DMatrix::from_fn(4, s, |r, c| pts[idx[c + 1]][r] - x0[r]);
    let gram = d.transpose() * &d;
    let svd = gram.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin <= 1e-10 * smax {
        return None;
    }
    let rhs = -(d.transpose() * DVector::from_column_slice(&x0));
    let t = gram.lu().solve(&rhs)?;
    let mut weights = Vec::with_capacity(idx.len());
    weights.push(1.0 - t.sum());
    weights.extend(t.iter().copied());
    let mut point = x0;
    for (c, &tc) in t.iter().enumerate() {
        for (r, v) in point.iter_mut().enumerate() {
            *v += tc * d[(r, c)];
        }
    }
    Some((weights, point))
}

/// Largest achievable minimum weight over convex combinations of `pts` that
/// hit the origin (least-squares sense), or `None` if none exists.
fn max_min_weight(pts: &[LiftedPoint]) -> Option<f64> {
    let k = pts.len();
    let a = DMatrix::from_fn(5, k, |r, c| if r < 4 { pts[c][r] } else { 1.0 });
    let b = DVector::from_fn(5, |r, _| if r == 4 { 1.0 } else { 0.0 });
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref()?;
    let vt = svd.v_t.as_ref()?;
    let sv = &svd.singular_values;
    let smax = sv.max();
    let rank_tol = 1e-10 * smax.max(1.0);

    let mut lambda0 = DVector::zeros(k);
    let mut null_rows = Vec::new();
    for i in 0..sv.len() {
        if sv[i] > rank_tol {
            let coef = u.column(i).dot(&b) / sv[i];
            lambda0 += vt.row(i).transpose() * coef;
        } else {
            null_rows.push(i);
        }
    }
    if (&a * &lambda0 - &b).norm() > 1e-8 {
        return None;
    }
    let m = null_rows.len();
    if m == 0 {
        return Some(lambda0.min());
    }
    let null = DMatrix::from_fn(k, m, |r, c| vt[(null_rows[c], r)]);

    // max t s.t. λ0 + N y >= t: the optimum sits on a vertex where m + 1
    // constraints are tight.
    let mut best: Option<f64> = None;
    for active in combinations(k, m + 1) {
        let sys = DMatrix::from_fn(m + 1, m + 1, |r, c| if c < m { null[(active[r], c)] } else { -1.0 });
        let rhs = DVector::from_fn(m + 1, |r, _| -lambda0[active[r]]);
        let Some(sol) = sys.lu().solve(&rhs) else { continue };
        let y = sol.rows(0, m);
        let t = sol[m];
        let feasible = (0..k).all(|i| lambda0[i] + (null.row(i) * y)[(0, 0)] - t >= -1e-12);
        if feasible && best.is_none_or(|bt| t > bt) {
            best = Some(t);
        }
    }
    best
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Determinant of the 4×4 matrix whose columns are the lifted points.
/// Test-only cross-check: its sign tracks the sign of [`functional`].
pub fn delta_determinant(t: &AngleTuple) -> Result<f64, JohnError> {
    t.expect_k(4)?;
    let cols: Vec<LiftedPoint> = t.alphas().iter().map(|&a| lift(a)).collect();
    let m = Matrix4::from_fn(|r, c| cols[c][r]);
    Ok(m.determinant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pentagon() -> AngleTuple {
        AngleTuple::ordered((0..5).map(|i| 2.0 * PI * i as f64 / 5.0).collect()).unwrap()
    }

    fn square() -> AngleTuple {
        AngleTuple::ordered(vec![0.0, PI / 2.0, PI, 1.5 * PI]).unwrap()
    }

    fn random_ordered(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
        let mut a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        a.sort_by(f64::total_cmp);
        a
    }

    #[test]
    fn functional_examples() {
        assert!(functional(0.0, PI / 2.0, PI, 1.5 * PI).abs() < 1e-12);
        // cos 144° + cos 72° + cos 0°
        let direct = (144f64).to_radians().cos() + (72f64).to_radians().cos() + 1.0;
        let f = functional(0.0, 0.4 * PI, 0.8 * PI, 1.2 * PI);
        assert!((f - 0.5).abs() < 1e-12);
        assert!((f - direct).abs() < 1e-12);
    }

    #[test]
    fn functional_shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1_000 {
            let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let t = rng.gen_range(-10.0..10.0);
            let f0 = functional(a[0], a[1], a[2], a[3]);
            let f1 = functional(a[0] + 2.0 * t, a[1] + 2.0 * t, a[2] + 2.0 * t, a[3] + 2.0 * t);
            assert!((f0 - f1).abs() < 1e-12);
        }
    }

    #[test]
    fn pentagon_values_are_one_half() {
        let v = five_point_values(&pentagon()).unwrap();
        for x in v {
            assert!((x - 0.5).abs() < 1e-12, "{v:?}");
        }
        assert_eq!(is_john_five(&pentagon(), 0.1).unwrap(), TriState::Yes);
    }

    #[test]
    fn classification_bands() {
        assert_eq!(classify_five_values(&[0.4, -0.4, 0.3, 0.3, 0.3], 0.1), TriState::No);
        assert_eq!(classify_five_values(&[0.05, 0.4, 0.3, 0.3, 0.3], 0.1), TriState::Unknown);
        assert_eq!(classify_five_values(&[-0.2, -0.4, -0.3, -0.3, -0.3], 0.1), TriState::Yes);
    }

    #[test]
    fn ordering_is_enforced() {
        let bad = AngleTuple::new(vec![0.0, 2.0, 1.0, 3.0]).unwrap();
        assert!(matches!(four_point_john_residual(&bad), Err(JohnError::NotOrdered(_))));
        let wrapped = AngleTuple::new(vec![0.0, 1.0, 2.0 * PI]).unwrap();
        assert!(max_arc_gap(&wrapped).is_err());
        assert!(AngleTuple::new(vec![0.0, 1.0]).is_err());
        assert!(matches!(five_point_values(&square()), Err(JohnError::WrongArity { .. })));
    }

    #[test]
    fn four_point_residual_examples() {
        assert!(four_point_john_residual(&square()).unwrap().abs() < 1e-12);
        let t = AngleTuple::ordered(vec![0.0, PI / 3.0, PI, 4.0 * PI / 3.0]).unwrap();
        let r = four_point_john_residual(&t).unwrap();
        assert!((r - functional(0.0, PI / 3.0, PI, 4.0 * PI / 3.0)).abs() == 0.0);
        assert!(r.abs() > 0.1);
    }

    #[test]
    fn cyclic_shift_preserves_zero_set() {
        // Rotating the starting point of an ordered 4-tuple (shifting φ cyclically)
        // keeps a zero residual at zero.
        let base = [0.0, PI / 2.0, PI, 1.5 * PI];
        for shift in 0..4 {
            let mut a: Vec<f64> = (0..4).map(|i| base[(i + shift) % 4]).collect();
            for i in 1..4 {
                while a[i] <= a[i - 1] {
                    a[i] += 2.0 * PI;
                }
            }
            assert!(functional(a[0], a[1], a[2], a[3]).abs() < 1e-12);
        }
        // A non-square rectangle is not a John configuration: F = cos x.
        let g = |x: f64| functional(0.0, x, PI, PI + x);
        assert!((g(0.3) - 0.3f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn arc_gap_examples() {
        assert!((max_arc_gap(&pentagon()).unwrap() - 0.4 * PI).abs() < 1e-12);
        let t = AngleTuple::ordered(vec![0.0, PI / 6.0, PI / 3.0]).unwrap();
        assert!((max_arc_gap(&t).unwrap() - 5.0 * PI / 3.0).abs() < 1e-12);
        let tri = AngleTuple::ordered(vec![0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]).unwrap();
        assert!((max_arc_gap(&tri).unwrap() - 2.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_examples() {
        assert_eq!(simplex_condition(pentagon().alphas(), 0.0), TriState::Yes);
        assert_eq!(simplex_condition(pentagon().alphas(), 0.19), TriState::Yes);
        assert_eq!(simplex_condition(square().alphas(), 0.0), TriState::Yes);
        assert_eq!(simplex_condition(square().alphas(), 0.24), TriState::Yes);
        assert_eq!(simplex_condition(&[0.2, 0.7, 1.3], 0.0), TriState::No);
        let tri = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
        assert_eq!(simplex_condition(&tri, 0.3), TriState::Yes);
        assert_eq!(simplex_condition(&[0.0, PI / 2.0, PI], 0.0), TriState::No);
    }

    #[test]
    fn simplex_handles_repeated_points() {
        // A repeated vertex splits its weight; the best split keeps 1/6 each.
        let a = [0.0, 0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
        assert_eq!(simplex_condition(&a, 0.15), TriState::Yes);
        assert_eq!(simplex_condition(&a, 0.2), TriState::Unknown);
    }

    #[test]
    fn separated_configurations_are_refuted() {
        // Everything inside a half circle: a linear functional separates.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let k = rng.gen_range(3..=5);
            let mut a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..PI - 0.1)).collect();
            a.sort_by(f64::total_cmp);
            assert_ne!(simplex_condition(&a, 0.0), TriState::Yes);
        }
    }

    #[test]
    fn lipschitz_bound_for_functional() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &eps in &[1e-3, 1e-2, 0.1] {
            for _ in 0..2_000 {
                let a: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
                let b: Vec<f64> = a.iter().map(|x| x + rng.gen_range(-eps..=eps)).collect();
                let d = (functional(a[0], a[1], a[2], a[3]) - functional(b[0], b[1], b[2], b[3])).abs();
                assert!(d <= 3.0 * eps);
            }
        }
    }

    #[test]
    fn five_values_permute_under_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let a = random_ordered(&mut rng, 5);
            let v = five_values(&[a[0], a[1], a[2], a[3], a[4]]);
            // Rotate labels: (a2, a3, a4, a5, a1 + 2π) is again ordered.
            let b = [a[1], a[2], a[3], a[4], a[0] + 2.0 * PI];
            let w = five_values(&b);
            let mut vs = v.map(f64::abs);
            let mut ws = w.map(f64::abs);
            vs.sort_by(f64::total_cmp);
            ws.sort_by(f64::total_cmp);
            for (x, y) in vs.iter().zip(&ws) {
                assert!((x - y).abs() < 1e-12);
            }
            // The common-sign property is label independent.
            assert_eq!(classify_five_values(&v, 0.0), classify_five_values(&w, 0.0));
        }
    }

    #[test]
    fn determinant_vanishes_on_square() {
        assert!(delta_determinant(&square()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn determinant_vanishes_where_functional_does() {
        // Solve F(0, x, 3, 5) = 0 for x in (0, 3) by bisection, then check Δ.
        let g = |x: f64| functional(0.0, x, 3.0, 5.0);
        let (mut lo, mut hi) = (0.01, 2.99);
        assert!(g(lo).signum() != g(hi).signum());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid).signum() == g(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        let t = AngleTuple::ordered(vec![0.0, x, 3.0, 5.0]).unwrap();
        assert!(delta_determinant(&t).unwrap().abs() < 1e-8);
    }
}
