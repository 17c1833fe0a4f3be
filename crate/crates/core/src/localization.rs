//! Particle-filter localization against a known map of reflector landmarks.
//!
//! Features carry no landmark identity. Each feature is scored against every
//! landmark the particle can see and keeps the best match, or a constant
//! clutter floor when no landmark explains it. Weights live in log space
//! during the update and are renormalized afterwards.
//!
//! # Random streams
//!
//! A filter seeded with `s` draws from ChaCha8 `seed_from_u64(s)`. The
//! initial cloud uses stream `u64::MAX`; step `k` (counting from zero) uses
//! stream `k` for both the motion noise and the resampling offset.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dsp::Feature;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::{wrap_angle, Real};
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle<T> {
    pub x: T,
    pub y: T,
    pub heading: T,
    pub weight: T,
}

/// 2D pose estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseEstimate<T> {
    pub x: T,
    pub y: T,
    pub heading: T,
}

/// Known reflector positions.
#[derive(Debug, Clone)]
pub struct LandmarkMap<T> {
    landmarks: Vec<Vec3<T>>,
}

impl<T: Real> LandmarkMap<T> {
    pub fn new(landmarks: Vec<Vec3<T>>) -> Result<Self> {
        if landmarks.is_empty() {
            return Err(Error::Validation("landmark map is empty".into()));
        }
        if landmarks.iter().any(|l| !l.is_finite()) {
            return Err(Error::Validation("landmark position is not finite".into()));
        }
        Ok(LandmarkMap { landmarks })
    }

    /// Landmarks taken from the scene's reflectors, in scene order.
    pub fn from_scene(scene: &Scene<T>) -> Result<Self> {
        Self::new(scene.reflectors().iter().map(|r| r.position).collect())
    }

    pub fn landmarks(&self) -> &[Vec3<T>] {
        &self.landmarks
    }
}

/// Robot displacement between two steps, in the robot frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Odometry<T> {
    /// m, along the mean heading of the step.
    pub forward: T,
    /// rad
    pub turn: T,
}

/// Per-axis standard deviations of the motion noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionNoise<T> {
    pub x: T,
    pub y: T,
    pub heading: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfParams<T> {
    pub particles: usize,
    /// Range measurement std, m.
    pub sigma_range: T,
    /// Radial velocity measurement std, m/s.
    pub sigma_velocity: T,
    /// Likelihood assigned to a feature no visible landmark explains.
    pub clutter_floor: T,
    pub motion_noise: MotionNoise<T>,
    /// Height of the radar above the floor, m.
    pub radar_height: T,
}

impl<T: Real> Default for PfParams<T> {
    fn default() -> Self {
        PfParams {
            particles: 2000,
            sigma_range: T::lit(0.1),
            sigma_velocity: T::lit(0.1),
            clutter_floor: T::lit(1e-3),
            motion_noise: MotionNoise {
                x: T::lit(0.02),
                y: T::lit(0.02),
                heading: T::lit(0.02),
            },
            radar_height: T::lit(0.5),
        }
    }
}

impl<T: Real> PfParams<T> {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.particles == 0 {
            bad.push("particle count must be positive".to_string());
        }
        for (name, v) in [("sigma_range", self.sigma_range), ("sigma_velocity", self.sigma_velocity)] {
            if !(v > T::zero() && v.is_finite()) {
                bad.push(format!("{name} must be positive (got {v})"));
            }
        }
        if !(self.clutter_floor >= T::zero() && self.clutter_floor.is_finite()) {
            bad.push(format!("clutter_floor must be >= 0 (got {})", self.clutter_floor));
        }
        let n = self.motion_noise;
        if [n.x, n.y, n.heading].iter().any(|v| !(*v >= T::zero() && v.is_finite())) {
            bad.push("motion noise std must be >= 0".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad.join("; ")))
        }
    }
}

/// Moves every particle by the odometry plus Gaussian noise. Weights are kept.
pub fn predict<T: Real>(
    particles: &mut [Particle<T>],
    odometry: Odometry<T>,
    noise: MotionNoise<T>,
    rng: &mut ChaCha8Rng,
) {
    let half = T::lit(0.5);
    for p in particles.iter_mut() {
        let mid = p.heading + half * odometry.turn;
        let ex = noise.x * T::standard_normal(rng);
        let ey = noise.y * T::standard_normal(rng);
        let eh = noise.heading * T::standard_normal(rng);
        p.x = p.x + odometry.forward * mid.cos() + ex;
        p.y = p.y + odometry.forward * mid.sin() + ey;
        p.heading = wrap_angle(p.heading + odometry.turn + eh);
    }
}

fn log_gaussian<T: Real>(d: T, sigma: T) -> T {
    let z = d / sigma;
    -T::lit(0.5) * z * z - (sigma * (T::TAU()).sqrt()).ln()
}

/// Log-likelihood of all features for a radar at `position` moving at
/// `speed` along `heading`.
pub fn log_likelihood<T: Real>(
    position: Vec3<T>,
    heading: T,
    speed: T,
    features: &[Feature<T>],
    map: &LandmarkMap<T>,
    scene: Option<&Scene<T>>,
    params: &PfParams<T>,
) -> T {
    let velocity = Vec3::new(heading.cos(), heading.sin(), T::zero()) * speed;
    let predicted: Vec<(T, T)> = map
        .landmarks
        .iter()
        .filter(|&&m| scene.is_none_or(|s| s.los_visible(position, m)))
        .filter_map(|&m| {
            let offset = m - position;
            let r = offset.norm();
            (r > T::zero()).then(|| (r, velocity.dot(offset / r)))
        })
        .collect();
    let floor = params.clutter_floor.ln();
    features
        .iter()
        .map(|f| {
            predicted
                .iter()
                .map(|&(r, v)| {
                    log_gaussian(f.range - r, params.sigma_range) + log_gaussian(f.velocity - v, params.sigma_velocity)
                })
                .fold(floor, T::max)
        })
        .sum()
}

/// Multiplies each weight by the feature likelihood and renormalizes.
/// Returns `true` when every weight vanished and the set was reset to uniform.
pub fn update<T: Real>(
    particles: &mut [Particle<T>],
    features: &[Feature<T>],
    map: &LandmarkMap<T>,
    scene: Option<&Scene<T>>,
    speed: T,
    params: &PfParams<T>,
) -> bool {
    if particles.is_empty() {
        return false;
    }
    let logs: Vec<T> = particles
        .par_iter()
        .map(|p| {
            let pos = Vec3::new(p.x, p.y, params.radar_height);
            p.weight.ln() + log_likelihood(pos, p.heading, speed, features, map, scene, params)
        })
        .collect();
    let max = logs.iter().copied().fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
    if !max.is_finite() {
        let u = T::one() / T::from_usize(particles.len()).unwrap();
        particles.iter_mut().for_each(|p| p.weight = u);
        return true;
    }
    let mut total = T::zero();
    for (p, &l) in particles.iter_mut().zip(&logs) {
        p.weight = (l - max).exp();
        total = total + p.weight;
    }
    particles.iter_mut().for_each(|p| p.weight = p.weight / total);
    false
}

/// Effective sample size 1/Σw².
pub fn effective_sample_size<T: Real>(particles: &[Particle<T>]) -> T {
    let s: T = particles.iter().map(|p| p.weight * p.weight).sum();
    T::one() / s
}

/// Systematic resampling with offset `u0 ∈ [0, 1)`: output `i` copies the
/// particle whose cumulative weight interval contains `(i + u0)/N`.
pub fn systematic_resample<T: Real>(particles: &[Particle<T>], u0: T) -> Vec<Particle<T>> {
    let n = particles.len();
    let nf = T::from_usize(n).unwrap();
    let w = T::one() / nf;
    let mut out = Vec::with_capacity(n);
    let mut cumulative = particles[0].weight;
    let mut j = 0;
    for i in 0..n {
        let target = (T::from_usize(i).unwrap() + u0) / nf;
        while target >= cumulative && j + 1 < n {
            j += 1;
            cumulative = cumulative + particles[j].weight;
        }
        // rounding can leave the last intervals empty; never copy a zero-weight particle
        while particles[j].weight <= T::zero() && j > 0 {
            j -= 1;
        }
        out.push(Particle { weight: w, ..particles[j] });
    }
    out
}

/// Resamples when the effective sample size drops below half the count.
/// Returns whether resampling happened.
pub fn resample<T: Real>(particles: &mut Vec<Particle<T>>, rng: &mut ChaCha8Rng) -> bool {
    let n = particles.len();
    if n == 0 || effective_sample_size(particles) >= T::from_usize(n).unwrap() / T::lit(2.0) {
        return false;
    }
    let u0 = T::standard_uniform(rng);
    *particles = systematic_resample(particles, u0);
    true
}

/// Weighted mean position and circular mean heading.
pub fn estimate<T: Real>(particles: &[Particle<T>]) -> PoseEstimate<T> {
    let (mut x, mut y, mut s, mut c, mut w) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for p in particles {
        x = x + p.weight * p.x;
        y = y + p.weight * p.y;
        s = s + p.weight * p.heading.sin();
        c = c + p.weight * p.heading.cos();
        w = w + p.weight;
    }
    PoseEstimate {
        x: x / w,
        y: y / w,
        heading: s.atan2(c),
    }
}

/// Mean 2D Euclidean distance between matching samples of two trajectories.
pub fn rmse<T: Real>(estimated: &[(T, T)], truth: &[(T, T)]) -> Result<T> {
    if estimated.len() != truth.len() {
        return Err(Error::Domain(format!(
            "trajectory lengths differ ({} vs {})",
            estimated.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    let sum: T = estimated
        .iter()
        .zip(truth)
        .map(|(a, b)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
        .sum();
    Ok(sum / T::from_usize(truth.len()).unwrap())
}

/// Outcome of one filter step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T> {
    pub estimate: PoseEstimate<T>,
    pub effective_sample_size: T,
    pub resampled: bool,
    pub diverged: bool,
}

/// Particle filter with its own deterministic random streams.
#[derive(Debug, Clone)]
pub struct ParticleFilter<T> {
    particles: Vec<Particle<T>>,
    params: PfParams<T>,
    seed: u64,
    step: u64,
}

impl<T: Real> ParticleFilter<T> {
    /// Gaussian cloud around `start` with per-axis spread.
    pub fn around(start: PoseEstimate<T>, spread: MotionNoise<T>, params: PfParams<T>, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let w = T::one() / T::from_usize(params.particles).unwrap();
        let particles = (0..params.particles)
            .map(|_| Particle {
                x: start.x + spread.x * T::standard_normal(&mut rng),
                y: start.y + spread.y * T::standard_normal(&mut rng),
                heading: wrap_angle(start.heading + spread.heading * T::standard_normal(&mut rng)),
                weight: w,
            })
            .collect();
        Ok(ParticleFilter {
            particles,
            params,
            seed,
            step: 0,
        })
    }

    pub fn particles(&self) -> &[Particle<T>] {
        &self.particles
    }

    pub fn params(&self) -> &PfParams<T> {
        &self.params
    }

    pub fn estimate(&self) -> PoseEstimate<T> {
        estimate(&self.particles)
    }

    /// Predict with `odometry`, weight with `features`, resample if needed.
    /// `speed` is the forward speed at measurement time, m/s.
    pub fn step(
        &mut self,
        odometry: Odometry<T>,
        speed: T,
        features: &[Feature<T>],
        map: &LandmarkMap<T>,
        scene: Option<&Scene<T>>,
    ) -> StepReport<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.step);
        self.step += 1;
        predict(&mut self.particles, odometry, self.params.motion_noise, &mut rng);
        let diverged = update(&mut self.particles, features, map, scene, speed, &self.params);
        let ess = effective_sample_size(&self.particles);
        let resampled = resample(&mut self.particles, &mut rng);
        StepReport {
            estimate: self.estimate(),
            effective_sample_size: ess,
            resampled,
            diverged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(n: usize) -> Vec<Particle<f64>> {
        (0..n)
            .map(|i| Particle {
                x: i as f64 * 0.1,
                y: 1.0 - i as f64 * 0.05,
                heading: 0.0,
                weight: 1.0 / n as f64,
            })
            .collect()
    }

    fn zero_noise() -> MotionNoise<f64> {
        MotionNoise { x: 0.0, y: 0.0, heading: 0.0 }
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn predict_identity_and_translation() {
        let mut p = cloud(5);
        let before = p.clone();
        predict(&mut p, Odometry { forward: 0.0, turn: 0.0 }, zero_noise(), &mut rng());
        assert_eq!(p, before);
        predict(&mut p, Odometry { forward: 1.0, turn: 0.0 }, zero_noise(), &mut rng());
        for (a, b) in p.iter().zip(&before) {
            assert!((a.x - b.x - 1.0).abs() < 1e-15 && a.y == b.y && a.weight == b.weight);
        }
    }

    #[test]
    fn predict_noise_statistics() {
        let mut p: Vec<Particle<f64>> = vec![Particle { x: 0.0, y: 0.0, heading: 0.0, weight: 1e-4 }; 10_000];
        let noise = MotionNoise { x: 0.05, y: 0.0, heading: 0.0 };
        predict(&mut p, Odometry { forward: 0.0, turn: 0.0 }, noise, &mut rng());
        let mean = p.iter().map(|q| q.x).sum::<f64>() / 1e4;
        let var = p.iter().map(|q| (q.x - mean).powi(2)).sum::<f64>() / (1e4 - 1.0);
        assert!((var.sqrt() / 0.05 - 1.0).abs() < 0.05);
    }

    fn one_landmark() -> LandmarkMap<f64> {
        LandmarkMap::new(vec![Vec3::new(2.0, 2.0, 2.5)]).unwrap()
    }

    #[test]
    fn empty_features_and_clutter_leave_weights() {
        let params = PfParams::default();
        let mut p = cloud(10);
        p[3].weight = 0.2;
        let total: f64 = p.iter().map(|q| q.weight).sum();
        p.iter_mut().for_each(|q| q.weight /= total);
        let before = p.clone();
        assert!(!update(&mut p, &[], &one_landmark(), None, 0.0, &params));
        for (a, b) in p.iter().zip(&before) {
            assert!((a.weight - b.weight).abs() < 1e-15);
        }
        let clutter = [Feature { range: 500.0, velocity: 3.0, amplitude: 1.0 }];
        update(&mut p, &clutter, &one_landmark(), None, 0.0, &params);
        for (a, b) in p.iter().zip(&before) {
            assert!((a.weight - b.weight).abs() < 1e-15);
        }
    }

    #[test]
    fn divergence_resets_uniform() {
        let params = PfParams { clutter_floor: 0.0, ..PfParams::default() };
        let mut p = cloud(4);
        let clutter = [Feature { range: 500.0, velocity: 3.0, amplitude: 1.0 }];
        // far outside any Gaussian: exp underflows, log stays finite, so force -inf with zero weights
        p.iter_mut().for_each(|q| q.weight = 0.0);
        assert!(update(&mut p, &clutter, &one_landmark(), None, 0.0, &params));
        assert!(p.iter().all(|q| q.weight == 0.25));
    }

    /// Posterior on a dense grid computed without the filter code paths.
    #[test]
    fn posterior_concentrates_near_truth() {
        let map = LandmarkMap::new(vec![
            Vec3::new(1.0, 1.0, 2.9),
            Vec3::new(6.0, 1.5, 2.9),
            Vec3::new(5.0, 5.0, 2.9),
        ])
        .unwrap();
        let truth: (f64, f64) = (3.2, 2.4);
        let h: f64 = 0.5;
        let features: Vec<Feature<f64>> = map
            .landmarks()
            .iter()
            .map(|m| {
                let d = ((m.x - truth.0).powi(2) + (m.y - truth.1).powi(2) + (m.z - h).powi(2)).sqrt();
                Feature { range: d, velocity: 0.0, amplitude: 1.0 }
            })
            .collect();
        let params = PfParams { sigma_range: 0.05, ..PfParams::default() };
        let mut particles = Vec::new();
        for i in 0..80 {
            for j in 0..60 {
                particles.push(Particle { x: i as f64 * 0.1, y: j as f64 * 0.1, heading: 0.0, weight: 1.0 });
            }
        }
        let n = particles.len() as f64;
        particles.iter_mut().for_each(|p| p.weight = 1.0 / n);
        update(&mut particles, &features, &map, None, 0.0, &params);
        let best = particles.iter().max_by(|a, b| a.weight.total_cmp(&b.weight)).unwrap();

        // independent grid posterior with known correspondences
        let (mut gx, mut gy, mut gl) = (0.0, 0.0, f64::MIN);
        for i in 0..80 {
            for j in 0..60 {
                let (x, y) = (i as f64 * 0.1, j as f64 * 0.1);
                let l: f64 = map
                    .landmarks()
                    .iter()
                    .zip(&features)
                    .map(|(m, f)| {
                        let d = ((m.x - x).powi(2) + (m.y - y).powi(2) + (m.z - h).powi(2)).sqrt();
                        -(f.range - d).powi(2)
                    })
                    .sum();
                if l > gl {
                    (gx, gy, gl) = (x, y, l);
                }
            }
        }
        assert!((best.x - gx).abs() < 1e-9 && (best.y - gy).abs() < 1e-9);
        assert!(((best.x - truth.0).powi(2) + (best.y - truth.1).powi(2)).sqrt() <= 2.0 * 0.05 + 0.071);
        let s: f64 = particles.iter().map(|p| p.weight).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doppler_term_uses_heading() {
        let map = one_landmark();
        let params = PfParams::default();
        let pos = Vec3::new(0.0, 2.0, 2.5);
        // landmark straight ahead along +x: full closing speed
        let f = [Feature { range: 2.0, velocity: 0.5, amplitude: 1.0 }];
        let toward = log_likelihood(pos, 0.0, 0.5, &f, &map, None, &params);
        let away = log_likelihood(pos, std::f64::consts::PI, 0.5, &f, &map, None, &params);
        assert!(toward > away);
    }

    #[test]
    fn resampling_rules() {
        let mut uniform = cloud(8);
        assert!(!resample(&mut uniform, &mut rng()));
        let mut degenerate = cloud(6);
        degenerate.iter_mut().for_each(|p| p.weight = 0.0);
        degenerate[4].weight = 1.0;
        assert!(resample(&mut degenerate, &mut rng()));
        assert!(degenerate.iter().all(|p| p.x == 0.4 && (p.weight - 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn systematic_index_arithmetic() {
        let mut p = cloud(4);
        for (q, w) in p.iter_mut().zip([0.5, 0.5, 0.0, 0.0]) {
            q.weight = w;
        }
        for k in 0..100 {
            let u0 = k as f64 / 100.0;
            let out = systematic_resample(&p, u0);
            assert_eq!(out.len(), 4);
            // targets (i+u0)/4 for i = 0..3: two below 0.5, two above
            let xs: Vec<f64> = out.iter().map(|q| q.x).collect();
            assert_eq!(xs, vec![0.0, 0.0, 0.1, 0.1], "u0 = {u0}");
        }
    }

    #[test]
    fn estimate_cases() {
        let single = [Particle { x: 1.0, y: 2.0, heading: 0.3, weight: 1.0 }];
        assert_eq!(estimate(&single), PoseEstimate { x: 1.0, y: 2.0, heading: 0.3 });
        let pair: [Particle<f64>; 2] = [
            Particle { x: 0.0, y: 0.0, heading: 3.1, weight: 0.5 },
            Particle { x: 0.0, y: 0.0, heading: -3.1, weight: 0.5 },
        ];
        let h = estimate(&pair).heading;
        assert!((h.abs() - std::f64::consts::PI).abs() < 1e-9, "{h}");
        let sym: Vec<Particle<f64>> = [(-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)]
            .iter()
            .map(|&(dx, dy)| Particle { x: 2.0 + dx, y: 3.0 + dy, heading: 0.0, weight: 0.25 })
            .collect();
        let e = estimate(&sym);
        assert!((e.x - 2.0).abs() < 1e-12 && (e.y - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rmse_cases() {
        let a: [(f64, f64); 2] = [(0.0, 0.0), (1.0, 1.0)];
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b = [(0.1, 0.0), (1.0, 1.1)];
        assert!((rmse(&b, &a).unwrap() - 0.1).abs() < 1e-12);
        let c = [(3.0, 4.0), (1.0, 1.0)];
        assert!((rmse(&c, &a).unwrap() - 2.5).abs() < 1e-12);
        assert!(rmse(&a[..1], &a).is_err());
    }

    #[test]
    fn converges_with_exact_measurements() {
        let map = LandmarkMap::new(vec![
            Vec3::new(1.0, 1.0, 2.9),
            Vec3::new(7.0, 1.0, 2.9),
            Vec3::new(7.0, 5.0, 2.9),
            Vec3::new(1.0, 5.0, 2.9),
        ])
        .unwrap();
        let params = PfParams {
            particles: 500,
            motion_noise: MotionNoise { x: 0.0, y: 0.0, heading: 0.0 },
            ..PfParams::default()
        };
        let start = PoseEstimate { x: 2.0, y: 2.0, heading: 0.0 };
        let spread = MotionNoise { x: 0.3, y: 0.3, heading: 0.0 };
        let mut pf = ParticleFilter::around(start, spread, params, 5).unwrap();
        let mut err = 0.0;
        for k in 0..10 {
            let truth = (2.0 + 0.1 * (k + 1) as f64, 2.0);
            let features: Vec<Feature<f64>> = map
                .landmarks()
                .iter()
                .map(|m| {
                    let off = Vec3::new(m.x - truth.0, m.y - truth.1, m.z - 0.5);
                    Feature { range: off.norm(), velocity: 0.5 * off.x / off.norm(), amplitude: 1.0 }
                })
                .collect();
            let r = pf.step(Odometry { forward: 0.1, turn: 0.0 }, 0.5, &features, &map, None);
            err = ((r.estimate.x - truth.0).powi(2) + (r.estimate.y - truth.1).powi(2)).sqrt();
        }
        assert!(err < 0.1, "{err}");
    }

    #[test]
    fn filter_is_seed_deterministic() {
        let map = one_landmark();
        let run = || {
            let mut pf = ParticleFilter::around(
                PoseEstimate { x: 0.0, y: 0.0, heading: 0.0 },
                MotionNoise { x: 0.2, y: 0.2, heading: 0.1 },
                PfParams { particles: 300, ..PfParams::default() },
                9,
            )
            .unwrap();
            let f = [Feature { range: 3.0, velocity: 0.1, amplitude: 1.0 }];
            (0..5)
                .map(|_| pf.step(Odometry { forward: 0.05, turn: 0.01 }, 0.5, &f, &map, None).estimate)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
