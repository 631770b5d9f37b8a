//! Certified outer approximation of `R(Z, ε) ∩ E`, the set of points `x` in the
//! ellipse `E` for which `{x} ∪ Z` has every triple of width at most
//! `2(1 + ε)`, and an upper bound on the width of its convex hull.
//!
//! Cells are discarded only on certified grounds: the triple width is
//! 1-Lipschitz in `x`, so a cell whose center violates a pair constraint by
//! more than the cell's half-diagonal (plus [`DELTA_FP`]) contains no member.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::RegionError;
use crate::geom::{convex_hull, hull_width, max_triple_width, min_altitude, Ellipse, Point2, DELTA_FP};

/// Membership query for `R(Z, eps) ∩ E` with `E = {x²/r1² + y²/r2² <= 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionQuery {
    z: Vec<Point2>,
    eps: f64,
    ellipse: Ellipse,
    z_max_triple: f64,
}

impl RegionQuery {
    pub fn new(z: Vec<Point2>, eps: f64, r1: f64, r2: f64) -> Result<Self, RegionError> {
        if z.is_empty() {
            return Err(RegionError::EmptyZ);
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(RegionError::BadEpsilon(eps));
        }
        let ellipse = Ellipse::axis_aligned(r1, r2)?;
        let z_max_triple = max_triple_width(&z);
        Ok(Self { z, eps, ellipse, z_max_triple })
    }

    pub fn z(&self) -> &[Point2] {
        &self.z
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn ellipse(&self) -> &Ellipse {
        &self.ellipse
    }

    /// `2(1 + eps)`: the width every triple may reach.
    #[inline]
    pub fn threshold(&self) -> f64 {
        2.0 * (1.0 + self.eps)
    }

    /// `Z` itself fails `T((1 + eps)B, 3)` beyond the float slack, so the
    /// region is certifiably empty.
    pub fn is_flagged_empty(&self) -> bool {
        self.z_max_triple > self.threshold() + DELTA_FP
    }

    #[inline]
    fn pair_widths(&self, x: Point2) -> impl Iterator<Item = f64> + '_ {
        let z = &self.z;
        (0..z.len()).flat_map(move |i| (i + 1..z.len()).map(move |j| min_altitude(x, z[i], z[j])))
    }
}

/// Exact membership of `x` in `R(Z, eps)` (the ellipse is not consulted).
pub fn region_contains(q: &RegionQuery, x: Point2) -> bool {
    let thr = q.threshold();
    q.z_max_triple <= thr && q.pair_widths(x).all(|w| w <= thr)
}

/// Axis-aligned square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub cx: f64,
    pub cy: f64,
    pub half_side: f64,
}

impl Cell {
    pub fn new(cx: f64, cy: f64, half_side: f64) -> Self {
        debug_assert!(half_side > 0.0);
        Self { cx, cy, half_side }
    }

    pub fn center(&self) -> Point2 {
        Point2::new(self.cx, self.cy)
    }

    pub fn half_diagonal(&self) -> f64 {
        self.half_side * std::f64::consts::SQRT_2
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_side * self.half_side
    }

    pub fn contains(&self, p: Point2) -> bool {
        (p.x - self.cx).abs() <= self.half_side && (p.y - self.cy).abs() <= self.half_side
    }

    pub fn corners(&self) -> [Point2; 4] {
        let h = self.half_side;
        [
            Point2::new(self.cx - h, self.cy - h),
            Point2::new(self.cx + h, self.cy - h),
            Point2::new(self.cx + h, self.cy + h),
            Point2::new(self.cx - h, self.cy + h),
        ]
    }

    /// SW, SE, NW, NE.
    pub fn children(&self) -> [Cell; 4] {
        let h = 0.5 * self.half_side;
        [
            Cell::new(self.cx - h, self.cy - h, h),
            Cell::new(self.cx + h, self.cy - h, h),
            Cell::new(self.cx - h, self.cy + h, h),
            Cell::new(self.cx + h, self.cy + h, h),
        ]
    }

    fn range_x(&self) -> (f64, f64) {
        (self.cx - self.half_side, self.cx + self.half_side)
    }

    fn range_y(&self) -> (f64, f64) {
        (self.cy - self.half_side, self.cy + self.half_side)
    }
}

fn min_sq_on(lo: f64, hi: f64) -> f64 {
    if lo <= 0.0 && hi >= 0.0 {
        0.0
    } else {
        (lo * lo).min(hi * hi)
    }
}

fn max_sq_on(lo: f64, hi: f64) -> f64 {
    (lo * lo).max(hi * hi)
}

/// Exact minimum of `x²/r1² + y²/r2²` over the cell.
fn ellipse_level_min(e: &Ellipse, c: &Cell) -> f64 {
    let (xl, xh) = c.range_x();
    let (yl, yh) = c.range_y();
    min_sq_on(xl, xh) / (e.r1 * e.r1) + min_sq_on(yl, yh) / (e.r2 * e.r2)
}

fn ellipse_level_max(e: &Ellipse, c: &Cell) -> f64 {
    let (xl, xh) = c.range_x();
    let (yl, yh) = c.range_y();
    max_sq_on(xl, xh) / (e.r1 * e.r1) + max_sq_on(yl, yh) / (e.r2 * e.r2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellStatus {
    Out,
    Keep,
}

/// `Out` only when the cell certifiably misses `R(Z, eps) ∩ E`.
pub fn classify_cell(q: &RegionQuery, c: &Cell) -> CellStatus {
    classify(q, c, false)
}

fn classify(q: &RegionQuery, c: &Cell, known_inside_e: bool) -> CellStatus {
    if q.is_flagged_empty() {
        return CellStatus::Out;
    }
    if !known_inside_e && ellipse_level_min(&q.ellipse, c) > 1.0 + DELTA_FP {
        return CellStatus::Out;
    }
    let limit = q.threshold() + c.half_diagonal() + DELTA_FP;
    if q.pair_widths(c.center()).any(|w| w > limit) {
        return CellStatus::Out;
    }
    let corners = c.corners();
    let z = &q.z;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            if pair_width_lower(&corners, z[i], z[j]) > q.threshold() + DELTA_FP {
                return CellStatus::Out;
            }
        }
    }
    CellStatus::Keep
}

/// Lower bound of `width({x, a, b}) = |(a − x) × (b − x)| / longest side`
/// over the cell. The cross product is affine in `x`, so its smallest
/// modulus over the square is 0 or attained at a corner; the longest side is
/// convex in `x` and peaks at a corner.
fn pair_width_lower(corners: &[Point2; 4], a: Point2, b: Point2) -> f64 {
    let cross = corners.map(|x| (a - x).cross(b - x));
    let min_area = if cross.iter().all(|&v| v > 0.0) || cross.iter().all(|&v| v < 0.0) {
        cross.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    } else {
        return 0.0;
    };
    let longest_sq = corners.iter().fold((a - b).norm_sq(), |m, &x| m.max((x - a).norm_sq()).max((x - b).norm_sq()));
    if longest_sq == 0.0 {
        0.0
    } else {
        min_area / longest_sq.sqrt()
    }
}

/// Every point of the cell is in `R(Z, eps)`; refining it cannot shrink the
/// cover.
fn cell_inside_region(q: &RegionQuery, c: &Cell) -> bool {
    let limit = q.threshold() - c.half_diagonal();
    q.pair_widths(c.center()).all(|w| w <= limit)
}

/// Points whose convex hull contains `cell ∩ E`. Cells crossing `∂E` are
/// clipped by tangent half-planes `u.x x / r1 + u.y y / r2 <= 1` (`u` a unit
/// vector), each of which contains `E`. The tangents are spread between the
/// directions of the cell's corners in the normalized frame.
fn clipped_outline(e: &Ellipse, cell: &Cell, out: &mut Vec<Point2>) {
    let corners = cell.corners();
    if ellipse_level_max(e, cell) <= 1.0 {
        out.extend_from_slice(&corners);
        return;
    }
    let unit = |p: Point2| {
        let v = Point2::new(p.x / e.r1, p.y / e.r2);
        v * (1.0 / v.norm())
    };
    if cell.contains(Point2::new(0.0, 0.0)) {
        out.extend_from_slice(&corners);
        return;
    }
    let mid = unit(cell.center());
    let (mut lo, mut hi) = (mid, mid);
    for &p in &corners {
        let u = unit(p);
        if mid.cross(u) < mid.cross(lo) {
            lo = u;
        }
        if mid.cross(u) > mid.cross(hi) {
            hi = u;
        }
    }
    if lo.dot(mid) < 0.5 || hi.dot(mid) < 0.5 {
        out.extend_from_slice(&corners);
        return;
    }
    const TANGENTS: usize = 6;
    // Each clip adds at most one vertex.
    let mut buf = [[Point2::default(); 4 + TANGENTS]; 2];
    buf[0][..4].copy_from_slice(&corners);
    let mut len = 4;
    for t in 0..TANGENTS {
        let s = t as f64 / (TANGENTS - 1) as f64;
        let u = lo * (1.0 - s) + hi * s;
        let u = u * (1.0 / u.norm());
        let side = |p: Point2| p.x * u.x / e.r1 + p.y * u.y / e.r2 - 1.0 - DELTA_FP;
        let [src, dst] = &mut buf;
        len = clip_half_plane(&src[..len], side, dst);
        buf.swap(0, 1);
        if len == 0 {
            return;
        }
    }
    out.extend_from_slice(&buf[0][..len]);
}

/// Sutherland-Hodgman step keeping `side(p) <= 0`; `side` is affine. Writes
/// the clipped polygon into `out` and returns its length.
fn clip_half_plane(poly: &[Point2], side: impl Fn(Point2) -> f64, out: &mut [Point2]) -> usize {
    let mut len = 0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out[len] = a;
            len += 1;
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            out[len] = a + (b - a) * (sa / (sa - sb));
            len += 1;
        }
    }
    len
}

/// Like [`region_width_upper_bound`], with cells crossing `∂E` first clipped
/// to a polygon containing their part of `E`. Still an upper bound on the
/// width of `conv(R(Z, eps) ∩ E)`, and never larger than the unclipped one.
pub fn clipped_width_upper_bound(q: &RegionQuery, oa: &OuterApprox) -> f64 {
    let mut pts = Vec::with_capacity(oa.cells.len() * 4);
    for c in &oa.cells {
        clipped_outline(&q.ellipse, &c.cell, &mut pts);
    }
    hull_width(&convex_hull(&pts))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverStats {
    pub tested: u64,
    pub kept: u64,
    pub discarded: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetainedCell {
    pub depth: u32,
    pub cell: Cell,
}

/// Union of retained cells; contains `R(Z, eps) ∩ E`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OuterApprox {
    pub cells: Vec<RetainedCell>,
    pub max_depth_used: u32,
    pub stats: CoverStats,
}

impl OuterApprox {
    /// No cell survived: the region is certifiably empty.
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.cells.iter().map(|c| c.cell.area()).sum()
    }

    pub fn covers(&self, p: Point2) -> bool {
        self.cells.iter().any(|c| c.cell.contains(p))
    }

    /// `depth,cx,cy,half_side` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth,cx,cy,half_side\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{}", c.depth, c.cell.cx, c.cell.cy, c.cell.half_side);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSettings {
    pub max_depth: u32,
    /// Cells smaller than this are retained without further refinement.
    pub min_half_side: f64,
}

impl RegionSettings {
    pub const DEFAULT_MAX_DEPTH: u32 = 9;

    /// Depth 9 and `r1 / 2048`.
    pub fn default_for(r1: f64) -> Self {
        Self { max_depth: Self::DEFAULT_MAX_DEPTH, min_half_side: r1 / 2048.0 }
    }
}

/// Quadtree refinement from the square `[−r1, r1]²`, which contains the
/// bounding box of `E`.
pub fn outer_approx(q: &RegionQuery, max_depth: u32, min_half_side: f64) -> OuterApprox {
    let mut builder = CoverBuilder::new(q);
    while builder.step(max_depth, min_half_side) {}
    builder.finish()
}

/// Width of the convex hull of all retained cell corners (0 for an empty
/// cover). Upper-bounds the width of `conv(R(Z, eps) ∩ E)`.
pub fn region_width_upper_bound(oa: &OuterApprox) -> f64 {
    let corners: Vec<Point2> = oa.cells.iter().flat_map(|c| c.cell.corners()).collect();
    hull_width(&convex_hull(&corners))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionVerdict {
    Verified,
    Unknown,
}

/// Certifies that `R(Z, eps) ∩ E` satisfies `T(rho B)`, i.e. its width is at
/// most `2 rho`. Never refutes: failure to certify is `Unknown`.
///
/// The cover's hull is taken after clipping boundary cells to `E` (see
/// [`clipped_width_upper_bound`]). Refinement stops at the first depth whose
/// cover already has hull width `<= 2 rho − DELTA_FP`; the cover only shrinks with depth, so this decides
/// the same as checking the final cover. Symmetrically, it gives up as soon as
/// exact members of the region (points of `Z`, probes, cell centers, corners
/// of cells inside the region) already span more than that, since every cover
/// contains them. Cells inside the members' hull are not refined: the final
/// hull contains them regardless.
pub fn region_satisfies_t(q: &RegionQuery, rho: f64, settings: &RegionSettings) -> RegionVerdict {
    let target = 2.0 * rho - DELTA_FP;
    if q.is_flagged_empty() || 2.0 * q.ellipse.r2 <= target {
        return RegionVerdict::Verified;
    }
    let mut builder = CoverBuilder::new(q);
    builder.track_members();
    if builder.member_width() > target {
        return RegionVerdict::Unknown;
    }
    loop {
        let more = builder.step(settings.max_depth, settings.min_half_side);
        if builder.member_width() > target {
            return RegionVerdict::Unknown;
        }
        if builder.current_width_bound() <= target {
            return RegionVerdict::Verified;
        }
        if !more {
            return RegionVerdict::Unknown;
        }
    }
}

/// Level-synchronous quadtree. After each step, retained ∪ frontier covers
/// the region.
struct CoverBuilder<'a> {
    q: &'a RegionQuery,
    depth: u32,
    frontier: Vec<(Cell, bool)>,
    retained: Vec<RetainedCell>,
    retained_hull: Vec<Point2>,
    stats: CoverStats,
    max_depth_used: u32,
    /// Hull of known exact members, when tracked. Cells inside it cannot
    /// move the final hull and are retained without refinement.
    members: Option<Vec<Point2>>,
}

impl<'a> CoverBuilder<'a> {
    fn new(q: &'a RegionQuery) -> Self {
        let h = q.ellipse.r1.max(q.ellipse.r2);
        Self {
            q,
            depth: 0,
            frontier: vec![(Cell::new(0.0, 0.0, h), false)],
            retained: Vec::new(),
            retained_hull: Vec::new(),
            stats: CoverStats::default(),
            max_depth_used: 0,
            members: None,
        }
    }

    /// Seeds the member hull with `Z` and exact members among probes on `∂E`
    /// and on a coarse grid, where the widest members usually sit.
    fn track_members(&mut self) {
        const BOUNDARY_PROBES: usize = 512;
        const GRID_PROBES: usize = 16;
        let q = self.q;
        let e = &q.ellipse;
        let boundary = (0..BOUNDARY_PROBES)
            .map(|i| e.boundary_point(std::f64::consts::TAU * i as f64 / BOUNDARY_PROBES as f64))
            .filter(|&p| e.level(p) <= 1.0);
        let grid = (0..GRID_PROBES * GRID_PROBES)
            .map(|i| {
                let (u, v) = ((i % GRID_PROBES) as f64, (i / GRID_PROBES) as f64);
                let t = |w: f64| 2.0 * (w + 0.5) / GRID_PROBES as f64 - 1.0;
                Point2::new(e.r1 * t(u), e.r2 * t(v))
            })
            .filter(|&p| e.level(p) <= 1.0);
        let found: Vec<Point2> =
            q.z.iter().copied().chain(boundary).chain(grid).filter(|&p| region_contains(q, p)).collect();
        self.members = Some(convex_hull(&found));
    }

    fn member_width(&self) -> f64 {
        self.members.as_deref().map_or(0.0, hull_width)
    }

    fn inside_members(&self, cell: &Cell) -> bool {
        match self.members.as_deref() {
            Some(hull) if hull.len() >= 3 => cell
                .corners()
                .iter()
                .all(|&p| (0..hull.len()).all(|i| (hull[(i + 1) % hull.len()] - hull[i]).cross(p - hull[i]) >= 0.0)),
            _ => false,
        }
    }

    /// Classifies the current frontier. Returns whether another level remains.
    fn step(&mut self, max_depth: u32, min_half_side: f64) -> bool {
        if self.frontier.is_empty() {
            return false;
        }
        let depth = self.depth;
        let mut next = Vec::with_capacity(self.frontier.len() * 2);
        let mut new_corners: Vec<Point2> = Vec::new();
        let mut new_members = self.members.as_ref().map(|_| Vec::new());
        for (cell, in_e) in std::mem::take(&mut self.frontier) {
            self.stats.tested += 1;
            if classify(self.q, &cell, in_e) == CellStatus::Out {
                self.stats.discarded += 1;
                continue;
            }
            self.stats.kept += 1;
            self.max_depth_used = depth;
            let in_e = in_e || ellipse_level_max(&self.q.ellipse, &cell) <= 1.0;
            let settled = in_e && cell_inside_region(self.q, &cell);
            if let Some(found) = new_members.as_mut() {
                let c = cell.center();
                if settled {
                    found.extend(cell.corners());
                } else if self.q.ellipse.level(c) <= 1.0 && region_contains(self.q, c) {
                    found.push(c);
                }
            }
            if settled || depth >= max_depth || cell.half_side < min_half_side || self.inside_members(&cell) {
                self.retained.push(RetainedCell { depth, cell });
                clipped_outline(&self.q.ellipse, &cell, &mut new_corners);
            } else {
                next.extend(cell.children().into_iter().map(|c| (c, in_e)));
            }
        }
        if !new_corners.is_empty() {
            new_corners.extend_from_slice(&self.retained_hull);
            self.retained_hull = convex_hull(&new_corners);
        }
        if let (Some(hull), Some(mut found)) = (self.members.as_mut(), new_members) {
            if !found.is_empty() {
                found.extend_from_slice(hull);
                *hull = convex_hull(&found);
            }
        }
        self.frontier = next;
        self.depth += 1;
        !self.frontier.is_empty()
    }

    fn current_width_bound(&self) -> f64 {
        if self.frontier.is_empty() {
            return hull_width(&self.retained_hull);
        }
        let mut pts = self.retained_hull.clone();
        for (c, _) in &self.frontier {
            clipped_outline(&self.q.ellipse, c, &mut pts);
        }
        hull_width(&convex_hull(&pts))
    }

    fn finish(self) -> OuterApprox {
        OuterApprox { cells: self.retained, max_depth_used: self.max_depth_used, stats: self.stats }
    }
}
