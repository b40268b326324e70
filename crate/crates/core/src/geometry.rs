//! Map geometry: positions, rectangles, the street-cross map and the circular
//! single-BS map, region-of-interest labelling and uniform sampling.
//!
//! Labels follow the hypothesis convention used throughout the crate:
//! `0` means the transmitter is inside the region of interest (A0, hypothesis
//! H0) and `1` means it is anywhere else on the map (A1, hypothesis H1).
//! The region of interest is a closed set, so points on its boundary are
//! labelled `0`.

use rand::Rng;

use crate::error::{Error, Result};

/// Label of a point inside the region of interest.
pub const INSIDE: u8 = 0;
/// Label of a point outside the region of interest.
pub const OUTSIDE: u8 = 1;

/// A point on the map plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        distance(*self, *other)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Euclidean distance between two positions.
pub fn distance(p: Position, q: Position) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

/// Axis-aligned closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    min: Position,
    max: Position,
}

impl Rectangle {
    pub fn new(min: Position, max: Position) -> Result<Self> {
        let finite = [min.x, min.y, max.x, max.y].iter().all(|v| v.is_finite());
        if !finite || min.x >= max.x || min.y >= max.y {
            return Err(Error::Geometry(format!(
                "rectangle needs min < max on both axes, got ({}, {})..({}, {})",
                min.x, min.y, max.x, max.y
            )));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> Position {
        self.min
    }

    pub fn max(&self) -> Position {
        self.max
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn centroid(&self) -> Position {
        Position::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    /// Closed-set membership.
    pub fn contains(&self, p: Position) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_rect(&self, other: &Rectangle) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn corners(&self) -> [Position; 4] {
        [
            self.min,
            Position::new(self.max.x, self.min.y),
            self.max,
            Position::new(self.min.x, self.max.y),
        ]
    }

    /// Point of the rectangle closest to `p`.
    pub fn nearest_point(&self, p: Position) -> Position {
        Position::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
        )
    }

    pub fn clamp(&self, p: Position) -> Position {
        self.nearest_point(p)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Position {
        Position::new(
            self.min.x + rng.random::<f64>() * self.width(),
            self.min.y + rng.random::<f64>() * self.height(),
        )
    }
}

/// Which part of the map to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// The region of interest A0.
    Inside,
    /// Its complement A1 within the map.
    Outside,
    /// The whole map.
    Whole,
}

/// Common interface of the map geometries.
pub trait Scenario: Send + Sync {
    /// Bounding box of the map.
    fn bounds(&self) -> Rectangle;

    /// Whether `p` belongs to the map.
    fn contains(&self, p: Position) -> bool;

    /// Region of interest A0.
    fn roi(&self) -> &Rectangle;

    /// Area of the whole map.
    fn map_area(&self) -> f64;

    fn bs_positions(&self) -> &[Position];

    /// Whether the link between `ue` and base station `bs_index` is line of sight.
    fn is_los(&self, ue: Position, bs_index: usize) -> bool;

    /// Same geometry with a different base-station placement.
    fn with_bs_positions(&self, bs: Vec<Position>) -> Self
    where
        Self: Sized;

    fn n_bs(&self) -> usize {
        self.bs_positions().len()
    }

    fn roi_area(&self) -> f64 {
        self.roi().area()
    }

    fn outside_area(&self) -> f64 {
        self.map_area() - self.roi_area()
    }

    /// Hypothesis label of a map position: [`INSIDE`] or [`OUTSIDE`].
    fn in_roi(&self, p: Position) -> Result<u8> {
        if !self.contains(p) {
            return Err(Error::OutOfMap { x: p.x, y: p.y });
        }
        Ok(if self.roi().contains(p) { INSIDE } else { OUTSIDE })
    }

    /// Uniform draw over `region` by rejection from its bounding box.
    fn sample_uniform<R: Rng + ?Sized>(&self, region: Region, rng: &mut R) -> Position
    where
        Self: Sized,
    {
        match region {
            // A0 is a rectangle inside the map, so its bounding box never rejects.
            Region::Inside => self.roi().sample(rng),
            Region::Outside => loop {
                let p = self.bounds().sample(rng);
                if self.contains(p) && !self.roi().contains(p) {
                    return p;
                }
            },
            Region::Whole => loop {
                let p = self.bounds().sample(rng);
                if self.contains(p) {
                    return p;
                }
            },
        }
    }
}

/// Square map split by a horizontal and a vertical street into four square
/// buildings, with the region of interest inside the lower-left building.
///
/// The map spans `[0, map_side]²`. Streets are line-of-sight corridors; every
/// other position is non line of sight.
#[derive(Debug, Clone, PartialEq)]
pub struct StreetScenario {
    map_side: f64,
    building_side: f64,
    street_width: f64,
    roi: Rectangle,
    bs_positions: Vec<Position>,
    horizontal_street: Rectangle,
    vertical_street: Rectangle,
}

impl StreetScenario {
    pub const PAPER_MAP_SIDE: f64 = 525.0;
    pub const PAPER_BUILDING_SIDE: f64 = 255.0;
    pub const PAPER_STREET_WIDTH: f64 = 15.0;

    pub fn new(
        map_side: f64,
        building_side: f64,
        street_width: f64,
        roi: Rectangle,
        bs_positions: Vec<Position>,
    ) -> Result<Self> {
        if !(map_side > 0.0 && building_side > 0.0 && street_width > 0.0) {
            return Err(Error::Geometry("map dimensions must be positive".into()));
        }
        if (2.0 * building_side + street_width - map_side).abs() > 1e-9 * map_side {
            return Err(Error::Geometry(format!(
                "2*building_side + street_width must equal map_side ({} + {} != {})",
                2.0 * building_side,
                street_width,
                map_side
            )));
        }
        let lower_left = Rectangle::new(
            Position::new(0.0, 0.0),
            Position::new(building_side, building_side),
        )?;
        if !lower_left.contains_rect(&roi) {
            return Err(Error::Geometry(
                "region of interest must lie inside the lower-left building".into(),
            ));
        }
        let horizontal_street = Rectangle::new(
            Position::new(0.0, building_side),
            Position::new(map_side, building_side + street_width),
        )?;
        let vertical_street = Rectangle::new(
            Position::new(building_side, 0.0),
            Position::new(building_side + street_width, map_side),
        )?;
        let scenario = Self {
            map_side,
            building_side,
            street_width,
            roi,
            bs_positions: Vec::new(),
            horizontal_street,
            vertical_street,
        };
        for bs in &bs_positions {
            if !scenario.in_street(*bs) {
                return Err(Error::Geometry(format!(
                    "base station ({}, {}) is not on a street",
                    bs.x, bs.y
                )));
            }
        }
        Ok(Self {
            bs_positions,
            ..scenario
        })
    }

    /// 525 m map, 255 m buildings, 15 m streets, default ROI and the five
    /// default base stations.
    pub fn paper_default() -> Self {
        let (side, b, w) = (
            Self::PAPER_MAP_SIDE,
            Self::PAPER_BUILDING_SIDE,
            Self::PAPER_STREET_WIDTH,
        );
        Self::new(
            side,
            b,
            w,
            Self::default_roi(b).expect("valid default roi"),
            Self::default_bs_positions(b, w),
        )
        .expect("valid default scenario")
    }

    /// Inner quarter of the lower-left building: the quadrant that touches
    /// the building center and faces the street intersection.
    pub fn default_roi(building_side: f64) -> Result<Rectangle> {
        let half = 0.5 * building_side;
        Rectangle::new(
            Position::new(half, half),
            Position::new(building_side, building_side),
        )
    }

    /// One base station at the midpoint of each street arm plus one at the
    /// intersection center. Order: west, east, south, north, center.
    pub fn default_bs_positions(building_side: f64, street_width: f64) -> Vec<Position> {
        let mid_street = building_side + 0.5 * street_width;
        let near_arm = 0.5 * building_side;
        let far_arm = building_side + street_width + 0.5 * building_side;
        vec![
            Position::new(near_arm, mid_street),
            Position::new(far_arm, mid_street),
            Position::new(mid_street, near_arm),
            Position::new(mid_street, far_arm),
            Position::new(mid_street, mid_street),
        ]
    }

    pub fn map_side(&self) -> f64 {
        self.map_side
    }

    pub fn building_side(&self) -> f64 {
        self.building_side
    }

    pub fn street_width(&self) -> f64 {
        self.street_width
    }

    /// The two street rectangles: horizontal first, vertical second.
    pub fn streets(&self) -> [Rectangle; 2] {
        [self.horizontal_street, self.vertical_street]
    }

    pub fn in_street(&self, p: Position) -> bool {
        self.horizontal_street.contains(p) || self.vertical_street.contains(p)
    }
}

impl Scenario for StreetScenario {
    fn bounds(&self) -> Rectangle {
        Rectangle {
            min: Position::new(0.0, 0.0),
            max: Position::new(self.map_side, self.map_side),
        }
    }

    fn contains(&self, p: Position) -> bool {
        self.bounds().contains(p)
    }

    fn roi(&self) -> &Rectangle {
        &self.roi
    }

    fn map_area(&self) -> f64 {
        self.map_side * self.map_side
    }

    fn bs_positions(&self) -> &[Position] {
        &self.bs_positions
    }

    /// LOS iff some street contains both the UE and the base station. A base
    /// station at the intersection therefore sees both streets, and one placed
    /// inside a building (possible during planning) sees none.
    fn is_los(&self, ue: Position, bs_index: usize) -> bool {
        let bs = self.bs_positions[bs_index];
        self.streets()
            .iter()
            .any(|street| street.contains(ue) && street.contains(bs))
    }

    /// Planning candidates may sit anywhere on the map, not only on streets.
    fn with_bs_positions(&self, bs: Vec<Position>) -> Self {
        Self {
            bs_positions: bs,
            ..self.clone()
        }
    }
}

/// Disk of radius `r_out` centered at the origin with a rectangular region of
/// interest inside it. Every link is line of sight.
#[derive(Debug, Clone, PartialEq)]
pub struct CircularScenario {
    r_out: f64,
    roi: Rectangle,
    r_min: f64,
    bs_positions: Vec<Position>,
}

impl CircularScenario {
    pub const PAPER_R_OUT: f64 = 40.0;
    pub const PAPER_ROI_SIDE: f64 = 25.0;
    pub const PAPER_R_MIN: f64 = 4.0;

    /// Disk of radius `r_out` with the given region of interest and a single
    /// base station at the origin.
    pub fn new(r_out: f64, roi: Rectangle) -> Result<Self> {
        if !(r_out > 0.0 && r_out.is_finite()) {
            return Err(Error::Geometry("r_out must be positive".into()));
        }
        if roi.corners().iter().any(|c| c.norm() > r_out) {
            return Err(Error::Geometry(
                "region of interest must lie inside the outer circle".into(),
            ));
        }
        let r_min = roi.nearest_point(Position::default()).norm();
        Ok(Self {
            r_out,
            roi,
            r_min,
            bs_positions: vec![Position::default()],
        })
    }

    /// Places an `l × h` region of interest whose upper-left corner sits at
    /// distance `r_min` from the origin along the −45° diagonal, so that this
    /// corner is also the region's nearest point to the base station.
    pub fn with_corner_at(r_out: f64, l: f64, h: f64, r_min: f64) -> Result<Self> {
        if !(r_min >= 0.0) {
            return Err(Error::Geometry("r_min must be nonnegative".into()));
        }
        let d = r_min / std::f64::consts::SQRT_2;
        let roi = Rectangle::new(Position::new(d, -d - h), Position::new(d + l, -d))?;
        Self::new(r_out, roi)
    }

    /// 40 m disk with a 25 × 25 m region of interest at 4 m.
    pub fn paper_default() -> Self {
        Self::with_corner_at(
            Self::PAPER_R_OUT,
            Self::PAPER_ROI_SIDE,
            Self::PAPER_ROI_SIDE,
            Self::PAPER_R_MIN,
        )
        .expect("valid default circular scenario")
    }

    pub fn r_out(&self) -> f64 {
        self.r_out
    }

    /// Distance from the origin to the nearest point of the region of interest.
    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// Distance from the origin to the farthest point of the region of interest.
    pub fn r_max(&self) -> f64 {
        self.roi
            .corners()
            .iter()
            .map(Position::norm)
            .fold(0.0, f64::max)
    }
}

impl Scenario for CircularScenario {
    fn bounds(&self) -> Rectangle {
        Rectangle {
            min: Position::new(-self.r_out, -self.r_out),
            max: Position::new(self.r_out, self.r_out),
        }
    }

    fn contains(&self, p: Position) -> bool {
        p.norm() <= self.r_out
    }

    fn roi(&self) -> &Rectangle {
        &self.roi
    }

    fn map_area(&self) -> f64 {
        std::f64::consts::PI * self.r_out * self.r_out
    }

    fn bs_positions(&self) -> &[Position] {
        &self.bs_positions
    }

    fn is_los(&self, _ue: Position, _bs_index: usize) -> bool {
        true
    }

    fn with_bs_positions(&self, bs: Vec<Position>) -> Self {
        Self {
            bs_positions: bs,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Position::new(0.0, 0.0), Position::new(3.0, 4.0)), 5.0);
        let p = Position::new(12.5, -7.0);
        assert_eq!(distance(p, p), 0.0);
        let d = distance(Position::new(0.0, 0.0), Position::new(525.0, 525.0));
        assert!((d - 525.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn in_roi_examples() {
        let s = StreetScenario::paper_default();
        assert_eq!(s.in_roi(s.roi().centroid()).unwrap(), INSIDE);
        assert_eq!(s.in_roi(Position::new(525.0, 525.0)).unwrap(), OUTSIDE);
        // Boundary points and corners are inside (closed set).
        let roi = *s.roi();
        for c in roi.corners() {
            assert_eq!(s.in_roi(c).unwrap(), INSIDE);
        }
        let edge = Position::new(roi.min().x, roi.centroid().y);
        assert_eq!(s.in_roi(edge).unwrap(), INSIDE);
        let just_out = Position::new(roi.min().x - 1e-9, roi.centroid().y);
        assert_eq!(s.in_roi(just_out).unwrap(), OUTSIDE);
        assert!(matches!(
            s.in_roi(Position::new(-1.0, 3.0)),
            Err(Error::OutOfMap { .. })
        ));
    }

    #[test]
    fn los_rules() {
        let s = StreetScenario::paper_default();
        // West arm BS (index 0) sees along the horizontal street.
        assert!(s.is_los(Position::new(10.0, 260.0), 0));
        assert!(s.is_los(Position::new(500.0, 265.0), 0));
        assert!(!s.is_los(Position::new(262.5, 10.0), 0));
        // Inside a building: NLOS to everyone.
        let in_building = Position::new(100.0, 100.0);
        for n in 0..s.n_bs() {
            assert!(!s.is_los(in_building, n));
        }
        // Center BS sees both streets.
        assert!(s.is_los(Position::new(20.0, 262.0), 4));
        assert!(s.is_los(Position::new(262.0, 500.0), 4));
        assert!(!s.is_los(Position::new(400.0, 400.0), 4));
    }

    #[test]
    fn street_union_area() {
        let s = StreetScenario::paper_default();
        let [h, v] = s.streets();
        let overlap = s.street_width() * s.street_width();
        let union = h.area() + v.area() - overlap;
        assert!((union - (525f64.powi(2) - 4.0 * 255f64.powi(2))).abs() < 1e-9);
    }

    #[test]
    fn street_validation() {
        let roi = StreetScenario::default_roi(255.0).unwrap();
        assert!(StreetScenario::new(500.0, 255.0, 15.0, roi, vec![]).is_err());
        let bad_bs = vec![Position::new(100.0, 100.0)];
        assert!(StreetScenario::new(525.0, 255.0, 15.0, roi, bad_bs).is_err());
        let outside_roi =
            Rectangle::new(Position::new(300.0, 300.0), Position::new(320.0, 320.0)).unwrap();
        assert!(StreetScenario::new(525.0, 255.0, 15.0, outside_roi, vec![]).is_err());
    }

    #[test]
    fn rectangle_rejects_degenerate() {
        assert!(Rectangle::new(Position::new(0.0, 0.0), Position::new(0.0, 1.0)).is_err());
        assert!(Rectangle::new(Position::new(0.0, 2.0), Position::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn circular_default_geometry() {
        let c = CircularScenario::paper_default();
        assert!((c.r_min() - 4.0).abs() < 1e-12);
        assert!((c.roi().width() - 25.0).abs() < 1e-12);
        assert!(c.r_max() <= c.r_out());
        // The upper-left corner is the nearest point.
        let ul = Position::new(c.roi().min().x, c.roi().max().y);
        assert!((ul.norm() - 4.0).abs() < 1e-12);
        assert_eq!(c.in_roi(c.roi().centroid()).unwrap(), INSIDE);
        assert_eq!(c.in_roi(Position::new(-30.0, 0.0)).unwrap(), OUTSIDE);
        assert!(c.in_roi(Position::new(30.0, 30.0)).is_err());
    }

    #[test]
    fn sampled_centroid_matches() {
        let s = StreetScenario::paper_default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let (mut sx, mut sy) = (0.0, 0.0);
        for _ in 0..n {
            let p = s.sample_uniform(Region::Inside, &mut rng);
            assert_eq!(s.in_roi(p).unwrap(), INSIDE);
            sx += p.x;
            sy += p.y;
        }
        let c = s.roi().centroid();
        assert!((sx / n as f64 - c.x).abs() < 0.01 * c.x);
        assert!((sy / n as f64 - c.y).abs() < 0.01 * c.y);
    }

    #[test]
    fn outside_samples_are_outside() {
        let s = StreetScenario::paper_default();
        let c = CircularScenario::paper_default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20_000 {
            assert_eq!(s.in_roi(s.sample_uniform(Region::Outside, &mut rng)).unwrap(), OUTSIDE);
            assert_eq!(c.in_roi(c.sample_uniform(Region::Outside, &mut rng)).unwrap(), OUTSIDE);
            assert!(c.contains(c.sample_uniform(Region::Whole, &mut rng)));
        }
    }

    proptest! {
        #[test]
        fn triangle_inequality(
            ax in -1e3..1e3f64, ay in -1e3..1e3f64,
            bx in -1e3..1e3f64, by in -1e3..1e3f64,
            cx in -1e3..1e3f64, cy in -1e3..1e3f64,
        ) {
            let (a, b, c) = (Position::new(ax, ay), Position::new(bx, by), Position::new(cx, cy));
            prop_assert!(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
            prop_assert_eq!(distance(a, b), distance(b, a));
        }

        #[test]
        fn labels_partition_map(x in 0.0..=525.0f64, y in 0.0..=525.0f64) {
            let s = StreetScenario::paper_default();
            let p = Position::new(x, y);
            let label = s.in_roi(p).unwrap();
            prop_assert_eq!(label == INSIDE, s.roi().contains(p));
        }
    }
}
