use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::{wrap_angle, Real};

/// Radar pose; velocity is constant over one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T> {
    pub position: Vec3<T>,
    /// Radians in [-π, π).
    pub heading: T,
    /// m/s.
    pub velocity: Vec3<T>,
}

impl<T: Real> Pose<T> {
    pub fn new(position: Vec3<T>, heading: T, velocity: Vec3<T>) -> Self {
        Pose {
            position,
            heading: wrap_angle(heading),
            velocity,
        }
    }

    pub fn at_rest(position: Vec3<T>, heading: T) -> Self {
        Pose::new(position, heading, Vec3::zero())
    }
}

/// Piecewise-linear robot trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    waypoints: Vec<(T, Pose<T>)>,
}

impl<T: Real> Trajectory<T> {
    /// Validates ordering and size. Waypoint velocities are ignored; they are
    /// recomputed per segment.
    pub fn new(waypoints: Vec<(T, Pose<T>)>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::Validation("trajectory needs at least 2 waypoints".into()));
        }
        for w in waypoints.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Validation(format!(
                    "waypoint times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if waypoints
            .iter()
            .any(|(t, p)| !t.is_finite() || !p.position.is_finite() || !p.heading.is_finite())
        {
            return Err(Error::Validation("trajectory contains non-finite values".into()));
        }
        let waypoints = waypoints
            .into_iter()
            .map(|(t, p)| (t, Pose::new(p.position, p.heading, Vec3::zero())))
            .collect();
        Ok(Trajectory { waypoints })
    }

    pub fn waypoints(&self) -> &[(T, Pose<T>)] {
        &self.waypoints
    }

    pub fn start_time(&self) -> T {
        self.waypoints[0].0
    }

    pub fn end_time(&self) -> T {
        self.waypoints[self.waypoints.len() - 1].0
    }

    /// Pose at time `t`: linear position, shortest-arc heading, and the
    /// constant velocity of the bracketing segment. At a waypoint time the
    /// waypoint's position and heading are returned exactly; the velocity is
    /// that of the segment starting there (the last segment at the end).
    pub fn state(&self, t: T) -> Result<Pose<T>> {
        let (t0, t1) = (self.start_time(), self.end_time());
        if !(t >= t0 && t <= t1) {
            return Err(Error::Domain(format!("time {t} s outside trajectory [{t0}, {t1}] s")));
        }
        // index of the segment [i, i+1] containing t
        let seg = match self
            .waypoints
            .binary_search_by(|(wt, _)| wt.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(self.waypoints.len() - 2),
            Err(i) => i - 1,
        };
        let (ta, a) = self.waypoints[seg];
        let (tb, b) = self.waypoints[seg + 1];
        let dt = tb - ta;
        let velocity = (b.position - a.position) / dt;
        if t == ta {
            return Ok(Pose::new(a.position, a.heading, velocity));
        }
        if t == tb {
            return Ok(Pose::new(b.position, b.heading, velocity));
        }
        let s = (t - ta) / dt;
        let position = a.position + (b.position - a.position) * s;
        let heading = a.heading + wrap_angle(b.heading - a.heading) * s;
        Ok(Pose::new(position, heading, velocity))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn traj(points: &[(f64, [f64; 3], f64)]) -> Trajectory<f64> {
        Trajectory::new(
            points
                .iter()
                .map(|&(t, p, h)| (t, Pose::at_rest(Vec3::new(p[0], p[1], p[2]), h)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn waypoint_time_returns_waypoint() {
        let tr = traj(&[(0.0, [0.1, 0.2, 0.5], 0.3), (0.7, [1.3, -0.4, 0.5], 1.1), (2.0, [2.0, 2.0, 0.5], -2.0)]);
        let p = tr.state(0.7).unwrap();
        assert_eq!(p.position, Vec3::new(1.3, -0.4, 0.5));
        assert_eq!(p.heading, 1.1);
        let p = tr.state(2.0).unwrap();
        assert_eq!(p.position, Vec3::new(2.0, 2.0, 0.5));
    }

    #[test]
    fn linear_motion_velocity() {
        let tr = traj(&[(0.0, [0.0, 0.0, 0.5], 0.0), (1.0, [1.0, 0.0, 0.5], 0.0)]);
        for &t in &[0.0, 0.25, 0.5, 0.99, 1.0] {
            assert_eq!(tr.state(t).unwrap().velocity, Vec3::new(1.0, 0.0, 0.0));
        }
    }

    #[test]
    fn heading_wraps_through_pi() {
        let tr = traj(&[(0.0, [0.0; 3], -3.0), (1.0, [0.0; 3], 3.0)]);
        let h = tr.state(0.5).unwrap().heading;
        // unit-vector slerp oracle: the mean direction of -3 and +3 rad
        let (s, c) = ((-3.0f64).sin() + 3.0f64.sin(), (-3.0f64).cos() + 3.0f64.cos());
        let oracle = s.atan2(c);
        let diff = wrap_angle(h - oracle).abs();
        assert!(diff < 1e-12, "{h} vs {oracle}");
        assert!((h.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_is_domain_error() {
        let tr = traj(&[(0.0, [0.0; 3], 0.0), (1.0, [1.0, 0.0, 0.0], 0.0)]);
        assert!(matches!(tr.state(1.5), Err(Error::Domain(_))));
        assert!(matches!(tr.state(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_waypoints() {
        let one = vec![(0.0, Pose::at_rest(Vec3::<f64>::zero(), 0.0))];
        assert!(Trajectory::new(one).is_err());
        let unordered = vec![
            (1.0, Pose::at_rest(Vec3::<f64>::zero(), 0.0)),
            (1.0, Pose::at_rest(Vec3::zero(), 0.0)),
        ];
        assert!(Trajectory::new(unordered).is_err());
    }

    #[test]
    fn continuity_at_small_steps() {
        let tr = traj(&[(0.0, [0.0, 0.0, 0.5], 2.9), (1.0, [1.0, 2.0, 0.5], -2.9), (3.0, [4.0, 2.0, 0.5], 0.0)]);
        let mut t = 0.0;
        while t + 1e-6 <= 3.0 {
            let a = tr.state(t).unwrap();
            let b = tr.state(t + 1e-6).unwrap();
            assert!(a.position.distance(b.position) < 1e-5);
            assert!(wrap_angle(a.heading - b.heading).abs() < 1e-5);
            t += 0.01;
        }
    }
}
