//! Writes the demo scenarios into a directory (default `scenarios/`):
//! the L-shaped room and a desk-scale box room, each with a mesh, a scenario
//! file, a synthetic antenna pattern and a run config.
//!
//! cargo run -p radarsim --example make_demo -- scenarios

use std::path::{Path, PathBuf};

use radarsim::antenna::{AntennaPattern, PatternMeta};
use radarsim::geometry::Vec3;
use radarsim::scene::{rooms, write_mesh};

fn write(dir: &Path, name: &str, text: &str) {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    println!("wrote {}", path.display());
}

fn mesh(triangles: &[radarsim::geometry::Triangle<f64>]) -> String {
    let faces: Vec<_> = triangles.iter().map(|t| (*t, "concrete")).collect();
    write_mesh(&faces)
}

fn pattern(bandwidth: f64) -> String {
    let meta = PatternMeta {
        receiver: 1,
        f0: 59e9,
        bandwidth,
    };
    AntennaPattern::synthetic_cosine(2.0, meta).to_text()
}

const L_ROOM_SCENARIO: &str = "\
# L-shaped room, 20 x 20 x 5 m, four ceiling reflectors.
mesh l_room.mesh
reflector id=1 pos=4,5,4.9 rcs=trihedral:0.1
reflector id=2 pos=15,5,4.9 rcs=trihedral:0.1
reflector id=3 pos=5,15,4.9 rcs=trihedral:0.1
reflector id=4 pos=8,9,4.9 rcs=trihedral:0.1
waypoint t=0 pos=3,3,0.5 heading=0
waypoint t=20 pos=13,3,0.5 heading=0
waypoint t=23 pos=13,3,0.5 heading=1.5707963267948966
waypoint t=35 pos=13,9,0.5 heading=1.5707963267948966
";

const L_ROOM_CONFIG: &str = r#"# Drive through the L-shaped hall, turning at the far end.
seed = 1
frames = 30
frame_period = "100 ms"
out = "out/l_room"

[paths]
scenario = "l_room.scn"
pattern = "pattern_1ghz.pat"

[radar]
bandwidth = "1 GHz"
f0 = "59 GHz"
chirp_duration = "100 us"
chirp_interval = "200 us"
samples_per_chirp = 256
chirps_per_frame = 64
tx_power = "1 mW"
noise_figure = "10 dB"
impedance = "50 ohm"

[channel]
subdivision = 4
max_order = 2

[dsp]
range_window = "hamming"
doppler_window = "hamming"
blur = true
margin = "12 dB"
"#;

const DESK_SCENARIO: &str = "\
# Desk-scale box room, 8 x 6 x 3 m, four ceiling reflectors.
mesh desk.mesh
reflector id=1 pos=2,1.5,2.9 rcs=trihedral:0.1
reflector id=2 pos=6,1.5,2.9 rcs=trihedral:0.1
reflector id=3 pos=6,4.5,2.9 rcs=trihedral:0.1
reflector id=4 pos=2,4.5,2.9 rcs=trihedral:0.1
waypoint t=0 pos=1.5,2,0.5 heading=0
waypoint t=3 pos=3,2,0.5 heading=0
waypoint t=3.5 pos=3,2,0.5 heading=1.5707963267948966
waypoint t=6 pos=3,3.25,0.5 heading=1.5707963267948966
";

const DESK_CONFIG: &str = r#"# Desk-scale localization run.
seed = 7
frames = 50
frame_period = "100 ms"
out = "out/desk"

[paths]
scenario = "desk.scn"
pattern = "pattern_2ghz.pat"

[radar]
bandwidth = "2 GHz"

[channel]
subdivision = 4
max_order = 2

[pf]
particles = 2000
sigma_range = "0.1 m"
sigma_velocity = "0.1 m/s"

[export]
frames = false
map_csv = false
"#;

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "scenarios".into()));
    std::fs::create_dir_all(&dir).expect("create output directory");
    write(&dir, "l_room.mesh", &mesh(&rooms::l_room_triangles::<f64>()));
    write(&dir, "l_room.scn", L_ROOM_SCENARIO);
    write(&dir, "pattern_1ghz.pat", &pattern(1e9));
    write(&dir, "l_room.toml", L_ROOM_CONFIG);
    write(&dir, "desk.mesh", &mesh(&rooms::box_triangles::<f64>(Vec3::new(8.0, 6.0, 3.0))));
    write(&dir, "desk.scn", DESK_SCENARIO);
    write(&dir, "pattern_2ghz.pat", &pattern(2e9));
    write(&dir, "desk.toml", DESK_CONFIG);
}
