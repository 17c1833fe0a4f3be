//! Scenario configuration file (TOML).
//!
//! Physical quantities are strings with a unit; counts are plain integers.
//! Relative paths are resolved against the directory of the config file.
//!
//! ```toml
//! seed = 7
//! frames = 30
//! frame_period = "100 ms"
//! out = "out"
//!
//! [paths]
//! scenario = "l_room.scn"       # mesh, materials, reflectors, waypoints
//! pattern = "pattern_2ghz.pat"
//!
//! [radar]
//! bandwidth = "2 GHz"           # the only required radar key
//! f0 = "59 GHz"
//! chirp_duration = "100 us"
//! chirp_interval = "200 us"
//! samples_per_chirp = 256
//! chirps_per_frame = 64
//! tx_power = "1 mW"
//! noise_figure = "10 dB"
//! impedance = "50 ohm"
//! noise = true
//!
//! [channel]
//! subdivision = 4
//! max_order = 2
//! reception = "adaptive"        # or a fixed radius such as "5 cm"
//!
//! [dsp]
//! range_window = "hamming"
//! doppler_window = "hamming"
//! blur = true
//! blur_sigma = 1.0
//! margin = "12 dB"
//! dynamic_range = "60 dB"
//!
//! [pf]
//! enabled = true
//! particles = 2000
//! sigma_range = "0.1 m"
//! sigma_velocity = "0.1 m/s"
//! clutter_floor = 1e-3
//! motion_noise_xy = "2 cm"
//! motion_noise_heading = "0.02 rad"
//! init_spread_xy = "20 cm"
//! init_spread_heading = "0.1 rad"
//!
//! [export]
//! frames = true
//! maps = true
//! map_csv = true
//! paths = true
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::units::{format_quantity, parse_quantity, Dimension};
use crate::baseband::RadarConfig;
use crate::channel::trace::Reception;
use crate::dsp::Window;
use crate::error::{read_text, Error, Result};
use crate::localization::{MotionNoise, PfParams};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    frames: usize,
    frame_period: String,
    start_time: Option<String>,
    out: Option<String>,
    paths: RawPaths,
    radar: RawRadar,
    #[serde(default)]
    channel: RawChannel,
    #[serde(default)]
    dsp: RawDsp,
    #[serde(default)]
    pf: RawPf,
    #[serde(default)]
    export: RawExport,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPaths {
    scenario: String,
    pattern: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadar {
    bandwidth: String,
    f0: Option<String>,
    chirp_duration: Option<String>,
    sample_interval: Option<String>,
    chirp_interval: Option<String>,
    samples_per_chirp: Option<usize>,
    chirps_per_frame: Option<usize>,
    tx_power: Option<String>,
    noise_figure: Option<String>,
    impedance: Option<String>,
    noise: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    subdivision: Option<u32>,
    max_order: Option<usize>,
    reception: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDsp {
    range_window: Option<String>,
    doppler_window: Option<String>,
    blur: Option<bool>,
    blur_sigma: Option<f64>,
    margin: Option<String>,
    dynamic_range: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPf {
    enabled: Option<bool>,
    particles: Option<usize>,
    sigma_range: Option<String>,
    sigma_velocity: Option<String>,
    clutter_floor: Option<f64>,
    motion_noise_xy: Option<String>,
    motion_noise_heading: Option<String>,
    init_spread_xy: Option<String>,
    init_spread_heading: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExport {
    frames: Option<bool>,
    maps: Option<bool>,
    map_csv: Option<bool>,
    paths: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOptions {
    pub subdivision: u32,
    pub max_order: usize,
    pub reception: Reception<f64>,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        ChannelOptions {
            subdivision: 4,
            max_order: 2,
            reception: Reception::Adaptive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DspOptions {
    pub range_window: Window,
    pub doppler_window: Window,
    pub blur: bool,
    pub blur_sigma: f64,
    /// Detection threshold above the noise floor, dB.
    pub margin_db: f64,
    /// Peaks further than this below the strongest map cell are ignored, dB.
    pub dynamic_range_db: f64,
}

impl Default for DspOptions {
    fn default() -> Self {
        DspOptions {
            range_window: Window::Hamming,
            doppler_window: Window::Hamming,
            blur: true,
            blur_sigma: crate::dsp::DEFAULT_BLUR_SIGMA,
            margin_db: 12.0,
            dynamic_range_db: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfOptions {
    pub enabled: bool,
    /// `radar_height` is replaced by the trajectory's start height at run time.
    pub params: PfParams<f64>,
    pub init_spread: MotionNoise<f64>,
}

impl Default for PfOptions {
    fn default() -> Self {
        PfOptions {
            enabled: true,
            params: PfParams::default(),
            init_spread: MotionNoise {
                x: 0.2,
                y: 0.2,
                heading: 0.1,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportOptions {
    pub frames: bool,
    pub maps: bool,
    pub map_csv: bool,
    pub paths: bool,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            frames: true,
            maps: true,
            map_csv: true,
            paths: true,
        }
    }
}

/// Fully resolved run configuration, SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario_path: PathBuf,
    pub pattern_path: PathBuf,
    /// `radar.seed` always equals [`ScenarioConfig::seed`].
    pub radar: RadarConfig<f64>,
    pub frames: usize,
    pub frame_period: f64,
    pub start_time: f64,
    pub channel: ChannelOptions,
    pub dsp: DspOptions,
    pub pf: PfOptions,
    pub export: ExportOptions,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Config with preset radar parameters for `bandwidth` and default options.
    pub fn new(scenario_path: PathBuf, pattern_path: PathBuf, bandwidth: f64, frames: usize, frame_period: f64) -> Self {
        ScenarioConfig {
            scenario_path,
            pattern_path,
            radar: RadarConfig::preset(bandwidth),
            frames,
            frame_period,
            start_time: 0.0,
            channel: ChannelOptions::default(),
            dsp: DspOptions::default(),
            pf: PfOptions::default(),
            export: ExportOptions::default(),
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.radar.seed = seed;
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    pub fn parse(text: &str, origin: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0);
            Error::format(origin, line, e.message().to_string())
        })?;
        let bad = |msg: String| Error::format(origin, 0, msg);
        let q = |s: &str, dim: Dimension, key: &str| parse_quantity(s, dim).map_err(|m| bad(format!("{key}: {m}")));
        let opt = |s: &Option<String>, dim: Dimension, key: &str, default: f64| match s {
            Some(s) => q(s, dim, key),
            None => Ok(default),
        };

        let bandwidth = q(&raw.radar.bandwidth, Dimension::Frequency, "radar.bandwidth")?;
        let preset = RadarConfig::<f64>::preset(bandwidth);
        let r = &raw.radar;
        let samples_per_chirp = r.samples_per_chirp.unwrap_or(preset.samples_per_chirp);
        let chirp_duration = opt(&r.chirp_duration, Dimension::Time, "radar.chirp_duration", preset.chirp_duration)?;
        let mut radar = RadarConfig {
            f0: opt(&r.f0, Dimension::Frequency, "radar.f0", preset.f0)?,
            bandwidth,
            chirp_duration,
            sample_interval: opt(
                &r.sample_interval,
                Dimension::Time,
                "radar.sample_interval",
                chirp_duration / samples_per_chirp.max(1) as f64,
            )?,
            chirp_interval: opt(&r.chirp_interval, Dimension::Time, "radar.chirp_interval", 2.0 * chirp_duration)?,
            samples_per_chirp,
            chirps_per_frame: r.chirps_per_frame.unwrap_or(preset.chirps_per_frame),
            tx_power: opt(&r.tx_power, Dimension::Power, "radar.tx_power", preset.tx_power)?,
            noise_figure_db: opt(&r.noise_figure, Dimension::Decibel, "radar.noise_figure", preset.noise_figure_db)?,
            impedance: opt(&r.impedance, Dimension::Resistance, "radar.impedance", preset.impedance)?,
            seed: 0,
            noise: r.noise.unwrap_or(true),
        };

        let mut channel = ChannelOptions::default();
        if let Some(s) = raw.channel.subdivision {
            channel.subdivision = s;
        }
        if let Some(o) = raw.channel.max_order {
            channel.max_order = o;
        }
        if let Some(rec) = &raw.channel.reception {
            channel.reception = if rec.trim() == "adaptive" {
                Reception::Adaptive
            } else {
                Reception::Fixed(q(rec, Dimension::Length, "channel.reception")?)
            };
        }

        let mut dsp = DspOptions::default();
        let window = |s: &Option<String>, default: Window| match s {
            Some(s) => s.parse::<Window>().map_err(|e| bad(e.to_string())),
            None => Ok(default),
        };
        dsp.range_window = window(&raw.dsp.range_window, dsp.range_window)?;
        dsp.doppler_window = window(&raw.dsp.doppler_window, dsp.doppler_window)?;
        dsp.blur = raw.dsp.blur.unwrap_or(dsp.blur);
        dsp.blur_sigma = raw.dsp.blur_sigma.unwrap_or(dsp.blur_sigma);
        dsp.margin_db = opt(&raw.dsp.margin, Dimension::Decibel, "dsp.margin", dsp.margin_db)?;
        dsp.dynamic_range_db = opt(&raw.dsp.dynamic_range, Dimension::Decibel, "dsp.dynamic_range", dsp.dynamic_range_db)?;

        let mut pf = PfOptions::default();
        let p = &raw.pf;
        pf.enabled = p.enabled.unwrap_or(pf.enabled);
        pf.params.particles = p.particles.unwrap_or(pf.params.particles);
        pf.params.sigma_range = opt(&p.sigma_range, Dimension::Length, "pf.sigma_range", pf.params.sigma_range)?;
        pf.params.sigma_velocity = opt(&p.sigma_velocity, Dimension::Velocity, "pf.sigma_velocity", pf.params.sigma_velocity)?;
        pf.params.clutter_floor = p.clutter_floor.unwrap_or(pf.params.clutter_floor);
        let xy = opt(&p.motion_noise_xy, Dimension::Length, "pf.motion_noise_xy", pf.params.motion_noise.x)?;
        pf.params.motion_noise = MotionNoise {
            x: xy,
            y: xy,
            heading: opt(&p.motion_noise_heading, Dimension::Angle, "pf.motion_noise_heading", pf.params.motion_noise.heading)?,
        };
        let spread = opt(&p.init_spread_xy, Dimension::Length, "pf.init_spread_xy", pf.init_spread.x)?;
        pf.init_spread = MotionNoise {
            x: spread,
            y: spread,
            heading: opt(&p.init_spread_heading, Dimension::Angle, "pf.init_spread_heading", pf.init_spread.heading)?,
        };

        let d = ExportOptions::default();
        let export = ExportOptions {
            frames: raw.export.frames.unwrap_or(d.frames),
            maps: raw.export.maps.unwrap_or(d.maps),
            map_csv: raw.export.map_csv.unwrap_or(d.map_csv),
            paths: raw.export.paths.unwrap_or(d.paths),
        };

        let seed = raw.seed.unwrap_or(0);
        radar.seed = seed;
        Ok(ScenarioConfig {
            scenario_path: base_dir.join(&raw.paths.scenario),
            pattern_path: base_dir.join(&raw.paths.pattern),
            radar,
            frames: raw.frames,
            frame_period: q(&raw.frame_period, Dimension::Time, "frame_period")?,
            start_time: opt(&raw.start_time, Dimension::Time, "start_time", 0.0)?,
            channel,
            dsp,
            pf,
            export,
            out_dir: base_dir.join(raw.out.as_deref().unwrap_or("out")),
            seed,
        })
    }

    /// TOML text that [`ScenarioConfig::parse`] turns back into this config.
    pub fn to_toml(&self) -> String {
        use toml::{Table, Value};
        let s = |v: &str| Value::String(v.to_string());
        let qv = |v: f64, d: Dimension| Value::String(format_quantity(v, d));
        let path = |p: &Path| Value::String(p.display().to_string());
        let int = |v: usize| Value::Integer(v as i64);

        let mut root = Table::new();
        root.insert("seed".into(), Value::Integer(self.seed as i64));
        root.insert("frames".into(), int(self.frames));
        root.insert("frame_period".into(), qv(self.frame_period, Dimension::Time));
        root.insert("start_time".into(), qv(self.start_time, Dimension::Time));
        root.insert("out".into(), path(&self.out_dir));

        let mut paths = Table::new();
        paths.insert("scenario".into(), path(&self.scenario_path));
        paths.insert("pattern".into(), path(&self.pattern_path));
        root.insert("paths".into(), Value::Table(paths));

        let r = &self.radar;
        let mut radar = Table::new();
        radar.insert("bandwidth".into(), qv(r.bandwidth, Dimension::Frequency));
        radar.insert("f0".into(), qv(r.f0, Dimension::Frequency));
        radar.insert("chirp_duration".into(), qv(r.chirp_duration, Dimension::Time));
        radar.insert("sample_interval".into(), qv(r.sample_interval, Dimension::Time));
        radar.insert("chirp_interval".into(), qv(r.chirp_interval, Dimension::Time));
        radar.insert("samples_per_chirp".into(), int(r.samples_per_chirp));
        radar.insert("chirps_per_frame".into(), int(r.chirps_per_frame));
        radar.insert("tx_power".into(), qv(r.tx_power, Dimension::Power));
        radar.insert("noise_figure".into(), qv(r.noise_figure_db, Dimension::Decibel));
        radar.insert("impedance".into(), qv(r.impedance, Dimension::Resistance));
        radar.insert("noise".into(), Value::Boolean(r.noise));
        root.insert("radar".into(), Value::Table(radar));

        let mut ch = Table::new();
        ch.insert("subdivision".into(), Value::Integer(self.channel.subdivision as i64));
        ch.insert("max_order".into(), int(self.channel.max_order));
        ch.insert(
            "reception".into(),
            match self.channel.reception {
                Reception::Adaptive => s("adaptive"),
                Reception::Fixed(r) => qv(r, Dimension::Length),
            },
        );
        root.insert("channel".into(), Value::Table(ch));

        let d = &self.dsp;
        let mut dsp = Table::new();
        dsp.insert("range_window".into(), s(&d.range_window.to_string()));
        dsp.insert("doppler_window".into(), s(&d.doppler_window.to_string()));
        dsp.insert("blur".into(), Value::Boolean(d.blur));
        dsp.insert("blur_sigma".into(), Value::Float(d.blur_sigma));
        dsp.insert("margin".into(), qv(d.margin_db, Dimension::Decibel));
        dsp.insert("dynamic_range".into(), qv(d.dynamic_range_db, Dimension::Decibel));
        root.insert("dsp".into(), Value::Table(dsp));

        let p = &self.pf;
        let mut pf = Table::new();
        pf.insert("enabled".into(), Value::Boolean(p.enabled));
        pf.insert("particles".into(), int(p.params.particles));
        pf.insert("sigma_range".into(), qv(p.params.sigma_range, Dimension::Length));
        pf.insert("sigma_velocity".into(), qv(p.params.sigma_velocity, Dimension::Velocity));
        pf.insert("clutter_floor".into(), Value::Float(p.params.clutter_floor));
        pf.insert("motion_noise_xy".into(), qv(p.params.motion_noise.x, Dimension::Length));
        pf.insert("motion_noise_heading".into(), qv(p.params.motion_noise.heading, Dimension::Angle));
        pf.insert("init_spread_xy".into(), qv(p.init_spread.x, Dimension::Length));
        pf.insert("init_spread_heading".into(), qv(p.init_spread.heading, Dimension::Angle));
        root.insert("pf".into(), Value::Table(pf));

        let e = &self.export;
        let mut ex = Table::new();
        ex.insert("frames".into(), Value::Boolean(e.frames));
        ex.insert("maps".into(), Value::Boolean(e.maps));
        ex.insert("map_csv".into(), Value::Boolean(e.map_csv));
        ex.insert("paths".into(), Value::Boolean(e.paths));
        root.insert("export".into(), Value::Table(ex));

        toml::to_string(&root).expect("config tables always serialize")
    }
}
