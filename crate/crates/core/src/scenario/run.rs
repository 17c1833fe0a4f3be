use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{DspOptions, ScenarioConfig};
use crate::antenna::AntennaPattern;
use crate::baseband::{synthesize_frame, BasebandFrame, RadarConfig};
use crate::channel::{apply_antenna_gain, dump_paths, launch_directions, trace_paths, PathContribution, RayBundle, TraceOptions};
use crate::dsp::{
    detect_peaks, doppler_fft, estimate_noise_floor, features_from_csv, features_to_csv, gaussian_blur, range_fft, Feature,
    RangeDopplerMap,
};
use crate::error::{read_text, Error, Result};
use crate::localization::{rmse, LandmarkMap, Odometry, ParticleFilter, PfParams, PoseEstimate};
use crate::matrix_io::{load_matrix, matrix_to_csv, save_matrix, MatrixHeader, MatrixKind};
use crate::reflector::reflector_contributions;
use crate::scalar::wrap_angle;
use crate::scene::{load_scenario, Pose, Scene, Trajectory};

/// Mixed into the master seed for the particle filter, which must not share
/// ChaCha streams with the baseband noise.
pub const PF_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Range-Doppler products of one frame.
#[derive(Debug, Clone)]
pub struct Processed {
    pub raw: RangeDopplerMap<f64>,
    pub blurred: Option<RangeDopplerMap<f64>>,
    pub features: Vec<Feature<f64>>,
}

impl Processed {
    /// The map detection ran on.
    pub fn detection_map(&self) -> &RangeDopplerMap<f64> {
        self.blurred.as_ref().unwrap_or(&self.raw)
    }
}

/// Everything computed for one frame.
#[derive(Debug, Clone)]
pub struct FrameOutput {
    pub index: usize,
    pub time: f64,
    pub pose: Pose<f64>,
    pub contributions: Vec<PathContribution<f64>>,
    pub frame: BasebandFrame<f64>,
    pub processed: Processed,
}

/// Range FFT, Doppler FFT, optional blur and peak detection.
pub fn process_frame(frame: &BasebandFrame<f64>, dsp: &DspOptions) -> Result<Processed> {
    let spec = range_fft(frame, dsp.range_window);
    let raw = doppler_fft(&spec, dsp.doppler_window)?;
    let blurred = if dsp.blur { Some(gaussian_blur(&raw, dsp.blur_sigma)?) } else { None };
    let map = blurred.as_ref().unwrap_or(&raw);
    let peak = map.values.iter().copied().fold(0.0f64, f64::max);
    let floor = estimate_noise_floor(map).max(peak * 10f64.powf(-(dsp.dynamic_range_db + dsp.margin_db) / 10.0));
    let features = detect_peaks(map, floor, dsp.margin_db)?;
    Ok(Processed { raw, blurred, features })
}

/// Loaded scene, trajectory and antenna model ready to synthesize frames.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub scene: Scene<f64>,
    pub trajectory: Trajectory<f64>,
    pub pattern: AntennaPattern<f64>,
    pub radar: RadarConfig<f64>,
    pub bundle: RayBundle<f64>,
    pub trace: TraceOptions<f64>,
    pub dsp: DspOptions,
    pub frame_period: f64,
    pub start_time: f64,
}

impl Simulator {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let scenario = load_scenario::<f64>(&cfg.scenario_path)?;
        let trajectory = scenario.trajectory.ok_or_else(|| {
            Error::Validation(format!("{} has no waypoints", cfg.scenario_path.display()))
        })?;
        let pattern = AntennaPattern::load(&cfg.pattern_path)?;
        Self::new(scenario.scene, trajectory, pattern, cfg)
    }

    pub fn new(scene: Scene<f64>, trajectory: Trajectory<f64>, pattern: AntennaPattern<f64>, cfg: &ScenarioConfig) -> Result<Self> {
        cfg.radar.validate()?;
        Ok(Simulator {
            scene,
            trajectory,
            pattern,
            radar: cfg.radar.clone(),
            bundle: launch_directions(cfg.channel.subdivision)?,
            trace: TraceOptions {
                max_order: cfg.channel.max_order,
                reception: cfg.channel.reception,
                f0: cfg.radar.f0,
            },
            dsp: cfg.dsp.clone(),
            frame_period: cfg.frame_period,
            start_time: cfg.start_time,
        })
    }

    pub fn frame_time(&self, index: usize) -> f64 {
        self.start_time + index as f64 * self.frame_period
    }

    /// Ray-traced paths (with antenna gain) followed by reflector returns.
    pub fn contributions(&self, pose: &Pose<f64>) -> Result<Vec<PathContribution<f64>>> {
        let mut paths = trace_paths(&self.scene, pose, &self.bundle, &self.trace)?;
        apply_antenna_gain(&mut paths, &self.pattern, pose.heading)?;
        paths.extend(reflector_contributions(pose, &self.scene, &self.pattern, &self.radar)?);
        Ok(paths)
    }

    pub fn simulate(&self, index: usize) -> Result<FrameOutput> {
        let run = || {
            let time = self.frame_time(index);
            let pose = self.trajectory.state(time)?;
            let contributions = self.contributions(&pose)?;
            let frame = synthesize_frame(&contributions, &self.radar, index as u64, time)?;
            let processed = process_frame(&frame, &self.dsp)?;
            Ok(FrameOutput {
                index,
                time,
                pose,
                contributions,
                frame,
                processed,
            })
        };
        run().map_err(Error::at_frame(index))
    }
}

/// Odometry between two true poses: turn is the heading change, forward the
/// displacement projected on the mean heading.
pub fn odometry_between(a: &Pose<f64>, b: &Pose<f64>) -> Odometry<f64> {
    let turn = wrap_angle(b.heading - a.heading);
    let mid = a.heading + 0.5 * turn;
    let d = b.position - a.position;
    Odometry {
        forward: d.x * mid.cos() + d.y * mid.sin(),
        turn,
    }
}

/// Speed along the heading.
pub fn forward_speed(pose: &Pose<f64>) -> f64 {
    pose.velocity.x * pose.heading.cos() + pose.velocity.y * pose.heading.sin()
}

/// Particle filter driven by true odometry, producing `trajectory.csv` rows.
struct Tracker {
    pf: ParticleFilter<f64>,
    map: LandmarkMap<f64>,
    previous: Pose<f64>,
    estimates: Vec<(f64, f64)>,
    truth: Vec<(f64, f64)>,
    csv: String,
}

const TRAJECTORY_HEADER: &str = "t,x_true,y_true,x_est,y_est,heading_est,rmse_running\n";

impl Tracker {
    fn new(cfg: &ScenarioConfig, scene: &Scene<f64>, start: &Pose<f64>) -> Result<Self> {
        let params = PfParams {
            radar_height: start.position.z,
            ..cfg.pf.params.clone()
        };
        let init = PoseEstimate {
            x: start.position.x,
            y: start.position.y,
            heading: start.heading,
        };
        Ok(Tracker {
            pf: ParticleFilter::around(init, cfg.pf.init_spread, params, cfg.seed ^ PF_SEED_SALT)?,
            map: LandmarkMap::from_scene(scene)?,
            previous: *start,
            estimates: Vec::new(),
            truth: Vec::new(),
            csv: TRAJECTORY_HEADER.to_string(),
        })
    }

    fn step(&mut self, time: f64, pose: &Pose<f64>, features: &[Feature<f64>], scene: &Scene<f64>) -> Result<()> {
        let odo = odometry_between(&self.previous, pose);
        self.previous = *pose;
        let report = self.pf.step(odo, forward_speed(pose), features, &self.map, Some(scene));
        let e = report.estimate;
        self.estimates.push((e.x, e.y));
        self.truth.push((pose.position.x, pose.position.y));
        let running = rmse(&self.estimates, &self.truth)?;
        let _ = writeln!(
            self.csv,
            "{time},{},{},{},{},{},{running}",
            pose.position.x, pose.position.y, e.x, e.y, e.heading
        );
        Ok(())
    }

    fn mean_error(&self) -> Option<f64> {
        rmse(&self.estimates, &self.truth).ok()
    }
}

/// Summary of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub frames: usize,
    pub detections: Vec<usize>,
    /// Mean 2D position error over all frames, when the filter ran.
    pub mean_error: Option<f64>,
    pub out_dir: PathBuf,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn save_map(dir: &Path, stem: &str, map: &RangeDopplerMap<f64>, cfg: &RadarConfig<f64>, time: f64, csv: bool) -> Result<()> {
    let (rows, cols) = map.values.dim();
    let header = MatrixHeader::for_config(MatrixKind::PowerMap, rows, cols, cfg, time);
    save_matrix(&dir.join(format!("{stem}.bin")), &header, &map.values)?;
    if csv {
        write_file(&dir.join(format!("{stem}.csv")), matrix_to_csv(&map.values).as_bytes())?;
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs every frame of the scenario and writes all artifacts into
/// `cfg.out_dir`. `progress` receives one line per frame.
pub fn run_scenario(cfg: &ScenarioConfig, progress: &mut dyn FnMut(&str)) -> Result<RunSummary> {
    let sim = Simulator::from_config(cfg)?;
    run_with(&sim, cfg, progress)
}

/// [`run_scenario`] with an already loaded simulator.
pub fn run_with(sim: &Simulator, cfg: &ScenarioConfig, progress: &mut dyn FnMut(&str)) -> Result<RunSummary> {
    let out = &cfg.out_dir;
    create_dir(out)?;
    let mut manifest = format!("# radarsim {} run manifest; rerun with `radarsim run --config <this file>`\n", env!("CARGO_PKG_VERSION"));
    // absolute paths so the manifest loads from inside the output directory
    let mut rerun = cfg.clone();
    for p in [&mut rerun.scenario_path, &mut rerun.pattern_path, &mut rerun.out_dir] {
        *p = std::path::absolute(&*p).map_err(|source| Error::Io {
            path: p.clone(),
            source,
        })?;
    }
    manifest.push_str(&rerun.to_toml());
    write_file(&out.join("manifest.toml"), manifest.as_bytes())?;

    let mut tracker: Option<Tracker> = None;
    let mut detections = Vec::with_capacity(cfg.frames);
    for k in 0..cfg.frames {
        let f = sim.simulate(k)?;
        let export = || -> Result<()> {
            let e = &cfg.export;
            if e.frames {
                let (m, n) = f.frame.samples.dim();
                let h = MatrixHeader::for_config(MatrixKind::Frame, m, n, &f.frame.config, f.time);
                save_matrix(&out.join(format!("frame_{k:04}.bin")), &h, &f.frame.samples)?;
            }
            if e.maps {
                save_map(out, &format!("rdmap_{k:04}"), &f.processed.raw, &sim.radar, f.time, e.map_csv)?;
                if let Some(b) = &f.processed.blurred {
                    save_map(out, &format!("rdmap_blur_{k:04}"), b, &sim.radar, f.time, e.map_csv)?;
                }
            }
            if e.paths {
                write_file(&out.join(format!("paths_{k:04}.txt")), dump_paths(&f.contributions).as_bytes())?;
            }
            write_file(
                &out.join(format!("detections_{k:04}.csv")),
                features_to_csv(&f.processed.features).as_bytes(),
            )
        };
        export().map_err(Error::at_frame(k))?;

        if cfg.pf.enabled {
            let mut step = || -> Result<()> {
                if tracker.is_none() {
                    tracker = Some(Tracker::new(cfg, &sim.scene, &f.pose)?);
                }
                tracker.as_mut().unwrap().step(f.time, &f.pose, &f.processed.features, &sim.scene)
            };
            step().map_err(Error::at_frame(k))?;
        }
        detections.push(f.processed.features.len());
        let mut line = format!(
            "frame {k}: t = {:.3} s, {} paths, {} detections",
            f.time,
            f.contributions.len(),
            f.processed.features.len()
        );
        if let Some(err) = tracker.as_ref().and_then(Tracker::mean_error) {
            let _ = write!(line, ", mean error {err:.3} m");
        }
        progress(&line);
    }
    if let Some(t) = &tracker {
        write_file(&out.join("trajectory.csv"), t.csv.as_bytes())?;
    }
    Ok(RunSummary {
        frames: cfg.frames,
        detections,
        mean_error: tracker.as_ref().and_then(Tracker::mean_error),
        out_dir: out.clone(),
    })
}

/// Replays `detections_XXXX.csv` files from `dir` through the particle filter
/// and writes `trajectory.csv` into `cfg.out_dir`.
pub fn replay_detections(cfg: &ScenarioConfig, dir: &Path) -> Result<RunSummary> {
    let scenario = load_scenario::<f64>(&cfg.scenario_path)?;
    let trajectory = scenario
        .trajectory
        .ok_or_else(|| Error::Validation(format!("{} has no waypoints", cfg.scenario_path.display())))?;
    create_dir(&cfg.out_dir)?;
    let mut tracker: Option<Tracker> = None;
    let mut detections = Vec::new();
    for k in 0..cfg.frames {
        let mut step = || -> Result<usize> {
            let time = cfg.start_time + k as f64 * cfg.frame_period;
            let pose = trajectory.state(time)?;
            let path = dir.join(format!("detections_{k:04}.csv"));
            let features = features_from_csv::<f64>(&read_text(&path)?, &path.display().to_string())?;
            if tracker.is_none() {
                tracker = Some(Tracker::new(cfg, &scenario.scene, &pose)?);
            }
            tracker.as_mut().unwrap().step(time, &pose, &features, &scenario.scene)?;
            Ok(features.len())
        };
        detections.push(step().map_err(Error::at_frame(k))?);
    }
    if let Some(t) = &tracker {
        write_file(&cfg.out_dir.join("trajectory.csv"), t.csv.as_bytes())?;
    }
    Ok(RunSummary {
        frames: cfg.frames,
        detections,
        mean_error: tracker.as_ref().and_then(Tracker::mean_error),
        out_dir: cfg.out_dir.clone(),
    })
}

/// Writes `paths_XXXX.txt` for each frame without synthesizing signals.
pub fn trace_dump(cfg: &ScenarioConfig) -> Result<Vec<PathBuf>> {
    let sim = Simulator::from_config(cfg)?;
    create_dir(&cfg.out_dir)?;
    let mut written = Vec::new();
    for k in 0..cfg.frames {
        let path = cfg.out_dir.join(format!("paths_{k:04}.txt"));
        let step = || -> Result<()> {
            let pose = sim.trajectory.state(sim.frame_time(k))?;
            write_file(&path, dump_paths(&sim.contributions(&pose)?).as_bytes())
        };
        step().map_err(Error::at_frame(k))?;
        written.push(path);
    }
    Ok(written)
}

/// Processes a saved baseband frame and writes `rdmap*`, `detections.csv`
/// into `out_dir`.
pub fn process_frame_file(input: &Path, dsp: &DspOptions, out_dir: &Path, csv: bool) -> Result<Processed> {
    let (header, samples) = load_matrix::<f64>(input)?;
    if header.kind != MatrixKind::Frame {
        return Err(Error::Validation(format!("{} is not a baseband frame", input.display())));
    }
    let config: RadarConfig<f64> = header.radar_config();
    config.validate()?;
    if samples.dim() != (config.samples_per_chirp, config.chirps_per_frame) {
        return Err(Error::Validation(format!("{}: frame shape does not match its header", input.display())));
    }
    let frame = BasebandFrame {
        samples,
        config,
        timestamp: header.timestamp,
    };
    let processed = process_frame(&frame, dsp)?;
    create_dir(out_dir)?;
    save_map(out_dir, "rdmap", &processed.raw, &frame.config, frame.timestamp, csv)?;
    if let Some(b) = &processed.blurred {
        save_map(out_dir, "rdmap_blur", b, &frame.config, frame.timestamp, csv)?;
    }
    write_file(&out_dir.join("detections.csv"), features_to_csv(&processed.features).as_bytes())?;
    Ok(processed)
}

/// Every reason the configuration cannot run; empty when it can.
pub fn validate_config(cfg: &ScenarioConfig) -> Vec<String> {
    let mut d: Vec<String> = cfg.radar.diagnostics();
    if !(cfg.frame_period > 0.0 && cfg.frame_period.is_finite()) {
        d.push(format!("frame_period must be positive (got {} s)", cfg.frame_period));
    }
    if cfg.frames == 0 {
        d.push("frames must be at least 1".into());
    }
    if !cfg.start_time.is_finite() {
        d.push("start_time must be finite".into());
    }
    if cfg.channel.subdivision > crate::channel::bundle::MAX_SUBDIVISION {
        d.push(format!(
            "channel.subdivision {} exceeds {}",
            cfg.channel.subdivision,
            crate::channel::bundle::MAX_SUBDIVISION
        ));
    }
    if cfg.channel.max_order > crate::channel::trace::MAX_ORDER {
        d.push(format!("channel.max_order {} exceeds {}", cfg.channel.max_order, crate::channel::trace::MAX_ORDER));
    }
    if cfg.dsp.doppler_window == crate::dsp::Window::Flattop {
        d.push("dsp.doppler_window must be rectangular or hamming".into());
    }
    if !(cfg.dsp.blur_sigma > 0.0 && cfg.dsp.blur_sigma.is_finite()) {
        d.push("dsp.blur_sigma must be positive".into());
    }
    if !(cfg.dsp.margin_db >= 0.0) {
        d.push("dsp.margin must be >= 0 dB".into());
    }
    if cfg.pf.enabled {
        if let Err(e) = cfg.pf.params.validate() {
            d.push(e.to_string());
        }
    }

    for (what, path) in [("pattern", &cfg.pattern_path), ("scenario", &cfg.scenario_path)] {
        if !path.is_file() {
            d.push(format!("{what} file not found: {}", path.display()));
        }
    }
    if cfg.pattern_path.is_file() {
        match AntennaPattern::<f64>::load(&cfg.pattern_path) {
            Ok(p) => {
                let rel = (p.meta.bandwidth - cfg.radar.bandwidth).abs() / cfg.radar.bandwidth;
                if rel > 1e-6 {
                    d.push(format!(
                        "pattern {} was measured at {} Hz bandwidth, radar uses {} Hz",
                        cfg.pattern_path.display(),
                        p.meta.bandwidth,
                        cfg.radar.bandwidth
                    ));
                }
            }
            Err(e) => d.push(e.to_string()),
        }
    }
    if cfg.scenario_path.is_file() {
        match load_scenario::<f64>(&cfg.scenario_path) {
            Ok(s) => match &s.trajectory {
                None => d.push(format!("{} has no waypoints", cfg.scenario_path.display())),
                Some(t) => {
                    let last = cfg.start_time + cfg.frames.saturating_sub(1) as f64 * cfg.frame_period;
                    if cfg.start_time < t.start_time() || last > t.end_time() {
                        d.push(format!(
                            "frames span [{}, {last}] s but the trajectory covers [{}, {}] s",
                            cfg.start_time,
                            t.start_time(),
                            t.end_time()
                        ));
                    }
                    if cfg.pf.enabled && s.scene.reflectors().is_empty() {
                        d.push("particle filter enabled but the scene has no reflectors".into());
                    }
                    for (wt, w) in t.waypoints() {
                        if !s.scene.faces().is_empty() && !s.scene.contains_point(w.position) {
                            d.push(format!("waypoint at t = {wt} s lies outside the room geometry"));
                        }
                    }
                }
            },
            Err(e) => d.push(e.to_string()),
        }
    }
    d
}
