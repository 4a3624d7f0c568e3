//! Positions, user mobility and the HAPS / terrestrial distance geometry.

use core::f64::consts::{PI, TAU};

use rand::Rng;

use crate::{Error, Result};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// A point in meters; `z` is the height above ground.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Distance between the ground projections of `self` and `other`.
    pub fn horizontal_distance(&self, other: &Position) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Rectangular simulation area anchored at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub const fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn contains(&self, p: &Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width / 2.0, self.height / 2.0)
    }

    pub fn square_meters(&self) -> f64 {
        self.width * self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MobilityMode {
    Stationary,
    Pedestrian,
    Cycler,
    Vehicular,
}

impl MobilityMode {
    pub const ALL: [MobilityMode; 4] = [
        MobilityMode::Stationary,
        MobilityMode::Pedestrian,
        MobilityMode::Cycler,
        MobilityMode::Vehicular,
    ];
}

/// Speeds per mode, the mode mix used at placement and the per-step heading jitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityParams {
    pub pedestrian_speed: f64,
    pub cycler_speed: f64,
    pub vehicular_speed: f64,
    /// Relative weights of Stationary, Pedestrian, Cycler, Vehicular.
    pub mode_mix: [f64; 4],
    /// Half-width (radians) of the uniform heading perturbation per step.
    pub heading_jitter: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            pedestrian_speed: 1.0,
            cycler_speed: 4.0,
            vehicular_speed: 14.0,
            mode_mix: [0.25; 4],
            heading_jitter: 0.2,
        }
    }
}

impl MobilityParams {
    pub fn speed(&self, mode: MobilityMode) -> f64 {
        match mode {
            MobilityMode::Stationary => 0.0,
            MobilityMode::Pedestrian => self.pedestrian_speed,
            MobilityMode::Cycler => self.cycler_speed,
            MobilityMode::Vehicular => self.vehicular_speed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityState {
    pub mode: MobilityMode,
    /// Meters per second; zero exactly when the mode is stationary.
    pub speed: f64,
    /// Radians in `[0, 2π)`.
    pub heading: f64,
}

impl MobilityState {
    pub fn new(mode: MobilityMode, speed: f64, heading: f64) -> Self {
        let speed = if mode == MobilityMode::Stationary { 0.0 } else { speed };
        Self { mode, speed, heading: wrap_heading(heading) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct User {
    pub id: usize,
    pub position: Position,
    pub mobility: MobilityState,
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_heading(heading: f64) -> f64 {
    let mut h = heading % TAU;
    if h < 0.0 {
        h += TAU;
    }
    // tiny negative inputs round up to exactly TAU
    if h >= TAU { 0.0 } else { h }
}

/// Elevation angle in degrees of `haps` as seen from `user`.
///
/// Returns exactly 90° when the user sits at the HAPS nadir.
pub fn elevation_angle(user: &Position, haps: &Position) -> f64 {
    let horizontal = user.horizontal_distance(haps);
    if horizontal == 0.0 {
        return 90.0;
    }
    libm::atan2(haps.z - user.z, horizontal).to_degrees()
}

/// Slant range between a ground terminal and a platform at altitude `altitude`
/// seen under elevation `theta_deg`, on a spherical Earth of radius `earth_radius`.
pub fn slant_distance(theta_deg: f64, altitude: f64, earth_radius: f64) -> Result<f64> {
    if !(theta_deg > 0.0 && theta_deg <= 90.0) {
        return Err(Error::InvalidElevation(theta_deg));
    }
    let rs = earth_radius * libm::sin(theta_deg.to_radians());
    Ok(libm::sqrt(rs * rs + altitude * altitude + 2.0 * altitude * earth_radius) - rs)
}

/// Horizontal and 3D distance between a user and a small cell.
pub fn terrestrial_distances(user: &Position, sc: &Position) -> (f64, f64) {
    let d2 = user.horizontal_distance(sc);
    let dz = sc.z - user.z;
    (d2, libm::hypot(d2, dz))
}

/// Advances one user by `dt` seconds.
///
/// The user moves `speed * dt` along its heading and bounces off the area
/// borders (specular reflection). Afterwards the heading is perturbed by a
/// uniform draw in `[-jitter, jitter]`; stationary users are left untouched
/// and consume no random numbers.
pub fn step_mobility<R: Rng + ?Sized>(user: &User, dt: f64, area: &Area, jitter: f64, rng: &mut R) -> User {
    let m = user.mobility;
    if m.mode == MobilityMode::Stationary || m.speed == 0.0 {
        return *user;
    }
    let step = m.speed * dt;
    let mut x = user.position.x + step * libm::cos(m.heading);
    let mut y = user.position.y + step * libm::sin(m.heading);
    let mut heading = m.heading;

    let (x2, flip_x) = reflect(x, area.width);
    let (y2, flip_y) = reflect(y, area.height);
    x = x2;
    y = y2;
    if flip_x {
        heading = PI - heading;
    }
    if flip_y {
        heading = -heading;
    }
    if jitter > 0.0 {
        heading += rng.random_range(-jitter..=jitter);
    }

    User {
        id: user.id,
        position: Position::new(x, y, user.position.z),
        mobility: MobilityState { heading: wrap_heading(heading), ..m },
    }
}

/// Folds a coordinate back into `[0, len]`; the flag reports an odd number of bounces.
fn reflect(mut v: f64, len: f64) -> (f64, bool) {
    let mut flipped = false;
    while v < 0.0 || v > len {
        if v < 0.0 {
            v = -v;
        } else {
            v = 2.0 * len - v;
        }
        flipped = !flipped;
    }
    (v, flipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const H: f64 = 20_000.0;

    #[test]
    fn zenith_is_exactly_ninety() {
        let haps = Position::new(250.0, 250.0, H);
        assert_eq!(elevation_angle(&Position::new(250.0, 250.0, 0.0), &haps), 90.0);
    }

    #[test]
    fn isoceles_geometry_is_forty_five() {
        let haps = Position::new(0.0, 0.0, H);
        assert_relative_eq!(elevation_angle(&Position::new(H, 0.0, 0.0), &haps), 45.0, epsilon = 1e-12);
    }

    #[test]
    fn corner_elevation() {
        let haps = Position::new(250.0, 250.0, H);
        // atan(20000 / (250·√2)) evaluated at 30 digits
        assert_relative_eq!(
            elevation_angle(&Position::new(0.0, 0.0, 0.0), &haps),
            88.987_249_630_363_63,
            epsilon = 1e-9
        );
    }

    #[test]
    fn slant_distance_anchors() {
        assert_relative_eq!(slant_distance(90.0, H, EARTH_RADIUS_M).unwrap(), H, max_relative = 1e-9);
        // high-precision evaluation of the spherical-Earth slant range
        assert_relative_eq!(
            slant_distance(30.0, H, EARTH_RADIUS_M).unwrap(),
            39_813.976_964_103_26,
            max_relative = 1e-9
        );
        assert_eq!(slant_distance(90.0, 0.0, EARTH_RADIUS_M).unwrap(), 0.0);
    }

    #[test]
    fn slant_distance_rejects_non_positive_elevation() {
        assert_eq!(slant_distance(0.0, H, EARTH_RADIUS_M), Err(Error::InvalidElevation(0.0)));
        assert!(slant_distance(-5.0, H, EARTH_RADIUS_M).is_err());
        assert!(slant_distance(90.5, H, EARTH_RADIUS_M).is_err());
    }

    #[test]
    fn slant_distance_decreases_on_degree_grid() {
        let mut prev = f64::INFINITY;
        for deg in 1..=90 {
            let d = slant_distance(deg as f64, H, EARTH_RADIUS_M).unwrap();
            assert!(d < prev, "not decreasing at {deg}°");
            prev = d;
        }
    }

    #[test]
    fn terrestrial_distance_cases() {
        let sc = Position::new(100.0, 100.0, 10.0);
        assert_eq!(terrestrial_distances(&Position::new(100.0, 100.0, 1.5), &sc), (0.0, 8.5));
        let (d2, d3) = terrestrial_distances(&Position::new(0.0, 0.0, 0.0), &Position::new(30.0, 0.0, 40.0));
        assert_eq!((d2, d3), (30.0, 50.0));
        let (d2, d3) = terrestrial_distances(&Position::new(0.0, 0.0, 1.5), &Position::new(100.0, 0.0, 10.0));
        assert_eq!(d2, 100.0);
        assert_relative_eq!(d3, 100.360_599_838_781_35, epsilon = 1e-9);
    }

    fn user(mode: MobilityMode, x: f64, y: f64, speed: f64, heading: f64) -> User {
        User { id: 0, position: Position::new(x, y, 1.5), mobility: MobilityState::new(mode, speed, heading) }
    }

    #[test]
    fn stationary_user_does_not_move() {
        let area = Area::new(500.0, 500.0);
        let u = user(MobilityMode::Stationary, 10.0, 20.0, 5.0, 1.0);
        assert_eq!(u.mobility.speed, 0.0);
        let mut rng = stream(1, Stream::Mobility);
        assert_eq!(step_mobility(&u, 1.0, &area, 0.2, &mut rng), u);
    }

    #[test]
    fn straight_step_without_jitter() {
        let area = Area::new(500.0, 500.0);
        let mut rng = stream(1, Stream::Mobility);
        let next = step_mobility(&user(MobilityMode::Pedestrian, 250.0, 250.0, 1.0, 0.0), 1.0, &area, 0.0, &mut rng);
        assert_relative_eq!(next.position.x, 251.0);
        assert_relative_eq!(next.position.y, 250.0);
    }

    #[test]
    fn boundary_reflection() {
        let area = Area::new(500.0, 500.0);
        let mut rng = stream(1, Stream::Mobility);
        let next = step_mobility(&user(MobilityMode::Vehicular, 499.5, 250.0, 14.0, 0.0), 1.0, &area, 0.0, &mut rng);
        assert_relative_eq!(next.position.x, 486.5);
        assert_relative_eq!(next.position.y, 250.0, epsilon = 1e-9);
        assert_relative_eq!(next.mobility.heading, PI);
    }

    proptest! {
        #[test]
        fn users_stay_inside_area(
            x in 0.0..500.0f64,
            y in 0.0..500.0f64,
            heading in 0.0..TAU,
            speed in 0.0..40.0f64,
            seed in any::<u64>(),
        ) {
            let area = Area::new(500.0, 500.0);
            let mut rng = stream(seed, Stream::Mobility);
            let mut u = user(MobilityMode::Vehicular, x, y, speed, heading);
            for _ in 0..200 {
                u = step_mobility(&u, 1.0, &area, 0.3, &mut rng);
                prop_assert!(area.contains(&u.position));
                prop_assert!((0.0..TAU).contains(&u.mobility.heading));
            }
        }

        #[test]
        fn elevation_inside_area_stays_near_zenith(x in 0.0..=500.0f64, y in 0.0..=500.0f64) {
            let haps = Position::new(250.0, 250.0, H);
            let theta = elevation_angle(&Position::new(x, y, 1.5), &haps);
            prop_assert!(theta > 88.9 && theta <= 90.0);
        }
    }
}
