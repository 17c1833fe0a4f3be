//! Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.
//! Runs without the libtest harness so the lines always print:
//!
//!     cargo test -p radarsim --test acceptance

use std::path::Path;
use std::time::{Duration, Instant};

use ndarray::Array2;
use radarsim::antenna::{AntennaPattern, PatternMeta};
use radarsim::baseband::{noise_sigma, synthesize_frame, BasebandFrame, RadarConfig};
use radarsim::channel::{launch_directions, trace_paths, PathContribution, PathSource, Reception, TraceOptions};
use radarsim::dsp::{average_profiles, doppler_fft, peak_amplitude, range_fft, Window};
use radarsim::geometry::Vec3;
use radarsim::reflector::{radar_equation_loss, reflector_contributions, RcsModel};
use radarsim::scenario::{run_scenario, ScenarioConfig, Simulator};
use radarsim::scene::{rooms, write_mesh, Pose, Reflector, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C: f64 = 299_792_458.0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn point(range: f64, velocity: f64, loss_db: f64, phase: f64) -> PathContribution<f64> {
    PathContribution {
        loss_db,
        distance: 2.0 * range,
        range,
        velocity,
        aoa: (0.0, 0.0),
        phase_cycles: phase,
        source: PathSource::RayTraced,
        faces: vec![],
        departure: Vec3::unit_z(),
        arrival: Vec3::unit_z(),
    }
}

fn argmax(values: &Array2<f64>) -> (usize, usize) {
    let mut best = ((0, 0), f64::MIN);
    for (idx, &v) in values.indexed_iter() {
        if v > best.1 {
            best = (idx, v);
        }
    }
    best.0
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for b in RadarConfig::<f64>::PRESET_BANDWIDTHS {
        let cfg = RadarConfig { seed: 11, ..RadarConfig::preset(b) };
        let frame = synthesize_frame(&[point(4.5, 0.0, 80.0, 0.3)], &cfg, 0, 0.0).unwrap();
        let map = doppler_fft(&range_fft(&frame, Window::Hamming), Window::Hamming).unwrap();
        let (row, col) = argmax(&map.values);
        let expected = 2.0 * b * 4.5 / (cfg.chirp_duration * C) * cfg.samples_per_chirp as f64 * cfg.sample_interval;
        let hit = (row as f64 - expected).abs() <= 1.0 && col == cfg.chirps_per_frame / 2;
        ok &= hit;
        notes.push(format!("{:.1} GHz: bin {row} (expected {expected:.2}), doppler col {col}", b / 1e9));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_range = 0.0f64;
    let mut worst_doppler = 0.0f64;
    for i in 0..100 {
        let cfg = RadarConfig { seed: i, ..RadarConfig::<f64>::preset(2e9) };
        assert_eq!((cfg.samples_per_chirp, cfg.chirps_per_frame), (256, 64));
        let targets: Vec<_> = (0..rng.random_range(0..6))
            .map(|_| {
                point(
                    rng.random_range(0.2..9.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(60.0..110.0),
                    rng.random(),
                )
            })
            .collect();
        let frame = synthesize_frame(&targets, &cfg, i, 0.0).unwrap();
        let spec = range_fft(&frame, Window::Rectangular);
        for n in 0..cfg.chirps_per_frame {
            let energy: f64 = frame.samples.column(n).iter().map(|x| x * x).sum();
            let power: f64 = spec.power.column(n).sum();
            worst_range = worst_range.max((power - energy).abs() / energy);
        }
        let map = doppler_fft(&spec, Window::Rectangular).unwrap();
        for o in 0..spec.power.nrows() {
            let a: f64 = map.values.row(o).sum();
            let b: f64 = spec.power.row(o).sum();
            worst_doppler = worst_doppler.max((a - b).abs() / b);
        }
    }
    outcome(
        worst_range <= 1e-9 && worst_doppler <= 1e-9,
        format!("max relative error: fast time {worst_range:.2e}, slow time {worst_doppler:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let cfg = RadarConfig { seed: 3, ..RadarConfig::<f64>::preset(2e9) };
    let sigma = noise_sigma(&cfg);
    // k_B·T0·F·B_R·R computed from scratch
    let oracle_var = 1.380649e-23 * 290.0 * 10.0 * (1.0 / (2.0 * cfg.sample_interval)) * 50.0;
    let expected = cfg.samples_per_chirp as f64 * oracle_var;
    let frames = 1000;
    let mut total = 0.0;
    for i in 0..frames {
        let frame = synthesize_frame(&[], &cfg, i, 0.0).unwrap();
        let spec = range_fft(&frame, Window::Rectangular);
        total += spec.power.sum() / cfg.chirps_per_frame as f64;
    }
    let mean = total / frames as f64;
    let err_db = 10.0 * (mean / expected).log10();
    outcome(
        err_db.abs() <= 0.2 && (sigma * sigma / oracle_var - 1.0).abs() < 1e-12,
        format!("E[sum R] = {mean:.4e}, M·σ² = {expected:.4e}, error {err_db:+.4} dB over {frames} frames"),
    )
}

/// Independent image-method oracle for an axis-aligned box: every wall
/// sequence of order 1..=2 whose reflection points fall strictly inside the
/// walls and are pairwise distinct. Walls follow the mesh order: y=0, x=X,
/// y=Y, x=0, floor, ceiling.
fn box_mirror_paths(size: [f64; 3], p: [f64; 3]) -> Vec<(Vec<usize>, f64)> {
    let walls: [(usize, f64); 6] = [(1, 0.0), (0, size[0]), (1, size[1]), (0, 0.0), (2, 0.0), (2, size[2])];
    let inside = |q: [f64; 3], axis: usize| {
        (0..3).all(|k| k == axis || (q[k] > 1e-9 && q[k] < size[k] - 1e-9))
    };
    let mut out = Vec::new();
    let mut seqs: Vec<Vec<usize>> = (0..6).map(|a| vec![a]).collect();
    for a in 0..6 {
        for b in 0..6 {
            if a != b {
                seqs.push(vec![a, b]);
            }
        }
    }
    for seq in seqs {
        // image of the radar through each wall in order
        let mut images = Vec::new();
        let mut img = p;
        for &w in &seq {
            let (axis, c) = walls[w];
            img[axis] = 2.0 * c - img[axis];
            images.push(img);
        }
        let mut cur = p;
        let mut pts = vec![[0.0; 3]; seq.len()];
        let mut valid = true;
        for j in (0..seq.len()).rev() {
            let (axis, c) = walls[seq[j]];
            let target = images[j];
            let denom = target[axis] - cur[axis];
            if denom.abs() < 1e-12 {
                valid = false;
                break;
            }
            let t = (c - cur[axis]) / denom;
            if !(t > 1e-12 && t < 1.0 - 1e-12) {
                valid = false;
                break;
            }
            let mut q = [0.0; 3];
            for k in 0..3 {
                q[k] = cur[k] + t * (target[k] - cur[k]);
            }
            q[axis] = c;
            if !inside(q, axis) {
                valid = false;
                break;
            }
            pts[j] = q;
            cur = q;
        }
        if !valid {
            continue;
        }
        let mut nodes = vec![p];
        nodes.extend(pts);
        nodes.push(p);
        let mut d = 0.0;
        for w in nodes.windows(2) {
            let seg = ((0..3).map(|k| (w[1][k] - w[0][k]).powi(2)).sum::<f64>()).sqrt();
            if seg < 1e-9 {
                valid = false;
            }
            d += seg;
        }
        if valid {
            out.push((seq, d));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn criterion_4() -> Outcome {
    let size = [4.0, 5.0, 3.0];
    let radar = [1.3, 1.7, 0.5];
    let scene = rooms::box_room::<f64>(Vec3::new(size[0], size[1], size[2]), vec![]).unwrap();
    let oracle = box_mirror_paths(size, radar);
    let pose = Pose::at_rest(Vec3::new(radar[0], radar[1], radar[2]), 0.0);
    let mut ok = true;
    let mut notes = Vec::new();
    for subdivision in [4, 5] {
        let bundle = launch_directions::<f64>(subdivision).unwrap();
        let opts = TraceOptions {
            max_order: 2,
            reception: Reception::Adaptive,
            f0: 59e9,
        };
        let paths = trace_paths(&scene, &pose, &bundle, &opts).unwrap();
        let mut found: Vec<(Vec<usize>, f64)> = paths.iter().map(|p| (p.faces.iter().map(|f| f / 2).collect(), p.distance)).collect();
        found.sort_by(|a, b| a.0.cmp(&b.0));
        let same_set = found.len() == oracle.len() && found.iter().zip(&oracle).all(|(a, b)| a.0 == b.0);
        let worst = found
            .iter()
            .zip(&oracle)
            .map(|(a, b)| {
                let radius = b.1 * bundle.covering_angle.tan();
                (a.1 - b.1).abs() / radius
            })
            .fold(0.0, f64::max);
        ok &= same_set && worst <= 1.0;
        notes.push(format!(
            "subdivision {subdivision}: {} traced vs {} mirror paths, worst distance error {worst:.1e} radii",
            found.len(),
            oracle.len()
        ));
    }
    outcome(ok, notes.join("; "))
}

fn pattern(bandwidth: f64) -> AntennaPattern<f64> {
    AntennaPattern::synthetic_cosine(
        2.0,
        PatternMeta {
            receiver: 1,
            f0: 59e9,
            bandwidth,
        },
    )
}

fn trihedral(id: u32, x: f64, y: f64, z: f64) -> Reflector<f64> {
    Reflector {
        id,
        position: Vec3::new(x, y, z),
        rcs: RcsModel::Trihedral { edge: 0.1 },
        yaw: 0.0,
    }
}

fn criterion_5() -> Outcome {
    let scene = rooms::l_room(vec![trihedral(1, 4.0, 18.0, 4.9)]).unwrap();
    let cfg = RadarConfig::preset(1e9);
    let pat = pattern(1e9);
    let hidden = reflector_contributions(&Pose::at_rest(Vec3::new(16.0, 4.0, 0.5), 0.0), &scene, &pat, &cfg).unwrap();
    let seen = reflector_contributions(&Pose::at_rest(Vec3::new(5.0, 5.0, 0.5), 0.0), &scene, &pat, &cfg).unwrap();
    outcome(
        hidden.is_empty() && seen.len() == 1,
        format!(
            "around the corner: {} contributions; in line of sight: {}",
            hidden.len(),
            seen.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let lambda = C / 59e9;
    let l1 = radar_equation_loss(0.7, lambda, 2.0, 3.0);
    let l2 = radar_equation_loss(0.7, lambda, 2.0, 6.0);
    let step = l2 - l1;
    let four_pi = 4.0 * std::f64::consts::PI;
    let brute = -10.0 * (lambda * lambda * 1.0 / (four_pi * four_pi * four_pi * 4.0 * 4.0 * 4.0 * 4.0)).log10();
    let l = radar_equation_loss(1.0, lambda, 1.0, 4.0);
    outcome(
        (step - 12.04).abs() <= 0.01 && (l - 102.9).abs() <= 0.1 && (l - brute).abs() < 1e-9,
        format!("doubling adds {step:.4} dB; L(4 m) = {l:.3} dB (formula {brute:.3} dB)"),
    )
}

fn l_room_simulator() -> Simulator {
    let scene = rooms::l_room(vec![
        trihedral(1, 4.0, 5.0, 4.9),
        trihedral(2, 15.0, 5.0, 4.9),
        trihedral(3, 5.0, 15.0, 4.9),
        trihedral(4, 8.0, 9.0, 4.9),
    ])
    .unwrap();
    let trajectory = Trajectory::new(vec![
        (0.0, Pose::at_rest(Vec3::new(3.0, 3.0, 0.5), 0.0)),
        (20.0, Pose::at_rest(Vec3::new(13.0, 3.0, 0.5), 0.0)),
    ])
    .unwrap();
    let mut cfg = ScenarioConfig::new("unused".into(), "unused".into(), 1e9, 3, 0.1);
    cfg.set_seed(1);
    cfg.start_time = 4.0;
    Simulator::new(scene, trajectory, pattern(1e9), &cfg).unwrap()
}

fn criterion_7() -> Outcome {
    let sim = l_room_simulator();
    let frames: Vec<_> = (0..3).map(|k| sim.simulate(k).unwrap()).collect();
    let bin = sim.radar.range_bin_size();
    let vbin = sim.radar.velocity_bin_size();
    // per frame and reflector: range of the detection matching the true return
    let mut tracks: std::collections::BTreeMap<u32, Vec<Option<f64>>> = Default::default();
    for f in &frames {
        for c in &f.contributions {
            if let PathSource::Reflector(id) = c.source {
                let hit = f
                    .processed
                    .features
                    .iter()
                    .filter(|d| (d.range - c.range).abs() <= 2.0 * bin && (d.velocity - c.velocity).abs() <= 2.0 * vbin)
                    .min_by(|a, b| (a.range - c.range).abs().total_cmp(&(b.range - c.range).abs()));
                tracks.entry(id).or_default().push(hit.map(|d| d.range));
            }
        }
    }
    let speed = frames[0].pose.velocity.norm();
    let bound = speed * 0.1 + bin;
    let mut tracked = 0;
    let mut worst: f64 = 0.0;
    for ranges in tracks.values() {
        if ranges.len() == 3 && ranges.iter().all(Option::is_some) {
            tracked += 1;
            for w in ranges.windows(2) {
                worst = worst.max((w[1].unwrap() - w[0].unwrap()).abs());
            }
        }
    }
    outcome(
        tracked >= 2 && worst <= bound,
        format!("{tracked} reflectors tracked over 3 frames, worst drift {worst:.4} m (bound {bound:.4} m)"),
    )
}

fn criterion_8() -> Outcome {
    let mut cfg = RadarConfig { noise: false, ..RadarConfig::<f64>::preset(2e9) };
    cfg.chirps_per_frame = 1;
    let m = cfg.samples_per_chirp as f64;
    let amplitude = 1e-3;
    let mut worst = [0.0f64; 2];
    for (w, window) in [Window::Flattop, Window::Hamming].into_iter().enumerate() {
        for step in 0..=50 {
            let cycles = 40.0 + step as f64 / 100.0;
            let samples = Array2::from_shape_fn((cfg.samples_per_chirp, 1), |(k, _)| {
                amplitude * (std::f64::consts::TAU * cycles * k as f64 / m + 0.4).cos()
            });
            let frame = BasebandFrame {
                samples,
                config: cfg.clone(),
                timestamp: 0.0,
            };
            let profile = average_profiles(&range_fft(&frame, window), 1).unwrap();
            let peak = peak_amplitude(&profile, cycles * profile.bin_size, 1).unwrap();
            let err = 10.0 * (profile.corrected(peak) / (amplitude * amplitude * m / 2.0)).log10();
            worst[w] = worst[w].max(err.abs());
        }
    }
    outcome(
        worst[0] <= 0.05 && worst[1] >= 1.0,
        format!("worst amplitude error: flattop {:.4} dB, hamming {:.3} dB", worst[0], worst[1]),
    )
}

fn write_desk_scenario(dir: &Path) -> ScenarioConfig {
    let tris = rooms::box_triangles::<f64>(Vec3::new(8.0, 6.0, 3.0));
    let faces: Vec<_> = tris.iter().map(|t| (*t, "concrete")).collect();
    std::fs::write(dir.join("desk.mesh"), write_mesh(&faces)).unwrap();
    std::fs::write(
        dir.join("desk.scn"),
        "mesh desk.mesh\n\
         reflector id=1 pos=2,1.5,2.9 rcs=trihedral:0.1\n\
         reflector id=2 pos=6,1.5,2.9 rcs=trihedral:0.1\n\
         reflector id=3 pos=6,4.5,2.9 rcs=trihedral:0.1\n\
         reflector id=4 pos=2,4.5,2.9 rcs=trihedral:0.1\n\
         waypoint t=0 pos=1.5,2,0.5 heading=0\n\
         waypoint t=3 pos=3,2,0.5 heading=0\n\
         waypoint t=3.5 pos=3,2,0.5 heading=1.5707963267948966\n\
         waypoint t=6 pos=3,3.25,0.5 heading=1.5707963267948966\n",
    )
    .unwrap();
    std::fs::write(dir.join("pattern.pat"), pattern(2e9).to_text()).unwrap();
    let mut cfg = ScenarioConfig::new(dir.join("desk.scn"), dir.join("pattern.pat"), 2e9, 50, 0.1);
    cfg.set_seed(7);
    cfg.export.frames = false;
    cfg.export.map_csv = false;
    cfg.export.paths = false;
    cfg
}

fn run_desk(dir: &Path, out: &str, threads: Option<usize>) -> (Option<f64>, Vec<u8>) {
    let mut cfg = write_desk_scenario(dir);
    cfg.out_dir = dir.join(out);
    let run = || run_scenario(&cfg, &mut |_| {}).unwrap();
    let summary = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(run),
        None => run(),
    };
    (summary.mean_error, std::fs::read(cfg.out_dir.join("trajectory.csv")).unwrap())
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (err, csv) = run_desk(dir.path(), "run", None);
    let err = err.unwrap_or(f64::INFINITY);
    let rows = csv.iter().filter(|&&b| b == b'\n').count() - 1;
    outcome(
        err <= 0.30 && rows == 50,
        format!("mean 2D error {err:.4} m over {rows} frames, 2000 particles"),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (_, a) = run_desk(dir.path(), "a", None);
    let (_, b) = run_desk(dir.path(), "b", None);
    let (_, one) = run_desk(dir.path(), "one", Some(1));
    let (_, four) = run_desk(dir.path(), "four", Some(4));
    outcome(
        a == b && a == one && a == four,
        format!(
            "repeat run identical: {}; 1 vs 4 threads identical: {}",
            a == b,
            one == four && a == one
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("1 point-target fidelity", criterion_1, 10),
        ("2 energy conservation", criterion_2, 30),
        ("3 noise calibration", criterion_3, 60),
        ("4 channel oracle", criterion_4, 60),
        ("5 occlusion", criterion_5, 10),
        ("6 radar-equation law", criterion_6, 1),
        ("7 transient consistency", criterion_7, 120),
        ("8 flattop amplitude", criterion_8, 10),
        ("9 localization", criterion_9, 120),
        ("10 determinism", criterion_10, 240),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let passed = result.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] criterion {name}: {} ({:.2} s, limit {limit} s)",
            if passed { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 10 acceptance criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
