//! Text formats for room meshes and scenario files.
//!
//! # Mesh file
//!
//! One record per line, `#` starts a comment:
//!
//! ```text
//! v <x> <y> <z>              # vertex, meters
//! f <i> <j> <k> <material>   # triangle over 1-based vertex indices
//! ```
//!
//! # Scenario file
//!
//! Key-value records, SI units (m, s, rad, S/m):
//!
//! ```text
//! mesh room.mesh                                   # relative to this file
//! material concrete eps_r=5.31 sigma=0.48          # optional; concrete is built in
//! reflector id=1 pos=5,5,4.9 rcs=trihedral:0.1     # analytic RCS, edge length in m
//! reflector id=2 pos=8,3,4.9 rcs=table:octa.rcs yaw=0.0
//! waypoint t=0 pos=2,2,0.5 heading=0
//! ```
//!
//! A scenario without a `mesh` record has empty geometry.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{read_text, Error, Result};
use crate::geometry::{Triangle, Vec3};
use crate::reflector::rcs::{RcsModel, RcsTable};
use crate::scalar::Real;
use crate::scene::{Face, Material, MaterialId, Pose, Reflector, Scene, Trajectory};

/// Parsed scenario: the scene and, when waypoints are present, the trajectory.
#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub scene: Scene<T>,
    pub trajectory: Option<Trajectory<T>>,
    pub mesh_path: Option<PathBuf>,
}

/// Raw mesh contents: triangles with their material names and source lines.
pub struct MeshData<T> {
    pub faces: Vec<(Triangle<T>, String, usize)>,
}

pub fn parse_mesh<T: Real>(text: &str, origin: &str) -> Result<MeshData<T>> {
    let mut vertices: Vec<Vec3<T>> = Vec::new();
    let mut faces = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok[0] {
            "v" => {
                if tok.len() != 4 {
                    return Err(Error::format(origin, line_no, "vertex needs 3 coordinates"));
                }
                let c: Vec<f64> = tok[1..]
                    .iter()
                    .map(|s| parse_f64(s, origin, line_no))
                    .collect::<Result<_>>()?;
                vertices.push(Vec3::from_f64(c[0], c[1], c[2]));
            }
            "f" => {
                if tok.len() != 5 {
                    return Err(Error::format(
                        origin,
                        line_no,
                        "face needs 3 vertex indices and a material name",
                    ));
                }
                let mut v = [Vec3::zero(); 3];
                for (k, s) in tok[1..4].iter().enumerate() {
                    let i: usize = s
                        .parse()
                        .map_err(|_| Error::format(origin, line_no, format!("bad vertex index '{s}'")))?;
                    if i == 0 || i > vertices.len() {
                        return Err(Error::format(
                            origin,
                            line_no,
                            format!("vertex index {i} out of range (have {})", vertices.len()),
                        ));
                    }
                    v[k] = vertices[i - 1];
                }
                faces.push((Triangle::new(v[0], v[1], v[2]), tok[4].to_string(), line_no));
            }
            other => {
                return Err(Error::format(origin, line_no, format!("unknown record '{other}'")));
            }
        }
    }
    Ok(MeshData { faces })
}

/// Serializes triangles in the mesh format. Vertices are not shared.
pub fn write_mesh<T: Real>(faces: &[(Triangle<T>, &str)]) -> String {
    let mut s = String::from("# radarsim mesh: v x y z / f i j k material\n");
    for (i, (t, mat)) in faces.iter().enumerate() {
        for p in [t.a, t.b, t.c] {
            writeln!(s, "v {} {} {}", p.x, p.y, p.z).unwrap();
        }
        let b = 3 * i;
        writeln!(s, "f {} {} {} {}", b + 1, b + 2, b + 3, mat).unwrap();
    }
    s
}

pub fn load_scenario<T: Real>(path: &Path) -> Result<Scenario<T>> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scenario(&text, &path.display().to_string(), base)
}

/// Loads a scenario file and returns its validated scene.
pub fn load_scene<T: Real>(path: &Path) -> Result<Scene<T>> {
    load_scenario(path).map(|s| s.scene)
}

/// Parses scenario text; referenced files are resolved relative to `base_dir`.
pub fn parse_scenario<T: Real>(text: &str, origin: &str, base_dir: &Path) -> Result<Scenario<T>> {
    let mut materials: BTreeMap<String, Material<T>> = BTreeMap::new();
    materials.insert("concrete".into(), Material::concrete());
    let mut mesh_path = None;
    let mut reflectors = Vec::new();
    let mut waypoints = Vec::new();
    let mut tables: HashMap<PathBuf, Arc<RcsTable<T>>> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let head = tok.next().unwrap();
        match head {
            "mesh" => {
                let p = tok
                    .next()
                    .ok_or_else(|| Error::format(origin, line_no, "mesh needs a path"))?;
                mesh_path = Some(base_dir.join(p));
            }
            "material" => {
                let name = tok
                    .next()
                    .ok_or_else(|| Error::format(origin, line_no, "material needs a name"))?;
                let kv = key_values(tok, origin, line_no)?;
                let eps = get_num(&kv, "eps_r", origin, line_no)?;
                let sigma = get_num(&kv, "sigma", origin, line_no)?;
                materials.insert(
                    name.to_string(),
                    Material {
                        permittivity: T::lit(eps),
                        conductivity: T::lit(sigma),
                    },
                );
            }
            "reflector" => {
                let kv = key_values(tok, origin, line_no)?;
                let id = kv
                    .get("id")
                    .and_then(|s| s.parse::<u32>().ok())
                    .ok_or_else(|| Error::format(origin, line_no, "reflector needs integer id="))?;
                let position = get_vec(&kv, "pos", origin, line_no)?;
                let yaw = match kv.get("yaw") {
                    Some(s) => T::lit(parse_f64(s, origin, line_no)?),
                    None => T::zero(),
                };
                let rcs_spec = kv
                    .get("rcs")
                    .ok_or_else(|| Error::format(origin, line_no, "reflector needs rcs="))?;
                let rcs = match rcs_spec.split_once(':') {
                    Some(("trihedral", a)) => RcsModel::Trihedral {
                        edge: T::lit(parse_f64(a, origin, line_no)?),
                    },
                    Some(("table", p)) => {
                        let full = base_dir.join(p);
                        let table = match tables.get(&full) {
                            Some(t) => t.clone(),
                            None => {
                                let t = Arc::new(RcsTable::load(&full)?);
                                tables.insert(full, t.clone());
                                t
                            }
                        };
                        RcsModel::Table(table)
                    }
                    _ => {
                        return Err(Error::format(
                            origin,
                            line_no,
                            format!("rcs must be trihedral:<edge> or table:<path>, got '{rcs_spec}'"),
                        ))
                    }
                };
                reflectors.push(Reflector {
                    id,
                    position,
                    rcs,
                    yaw,
                });
            }
            "waypoint" => {
                let kv = key_values(tok, origin, line_no)?;
                let t = get_num(&kv, "t", origin, line_no)?;
                let pos = get_vec(&kv, "pos", origin, line_no)?;
                let heading = get_num(&kv, "heading", origin, line_no)?;
                waypoints.push((T::lit(t), Pose::at_rest(pos, T::lit(heading))));
            }
            other => {
                return Err(Error::format(origin, line_no, format!("unknown record '{other}'")));
            }
        }
    }

    let mut faces = Vec::new();
    if let Some(mp) = &mesh_path {
        let mesh_origin = mp.display().to_string();
        let mesh: MeshData<T> = parse_mesh(&read_text(mp)?, &mesh_origin)?;
        let ids: HashMap<&str, usize> = materials.keys().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
        for (tri, mat, line) in mesh.faces {
            let id = *ids.get(mat.as_str()).ok_or_else(|| {
                Error::Validation(format!(
                    "{mesh_origin}:{line}: face references undeclared material '{mat}'"
                ))
            })?;
            faces.push(Face {
                triangle: tri,
                material: MaterialId(id),
            });
        }
    }
    let scene = Scene::new(faces, materials, reflectors)?;
    let trajectory = if waypoints.is_empty() {
        None
    } else {
        Some(Trajectory::new(waypoints)?)
    };
    Ok(Scenario {
        scene,
        trajectory,
        mesh_path,
    })
}

fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

fn parse_f64(s: &str, origin: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::format(origin, line, format!("expected a finite number, got '{s}'")))
}

fn key_values<'a>(
    tok: impl Iterator<Item = &'a str>,
    origin: &str,
    line: usize,
) -> Result<HashMap<&'a str, &'a str>> {
    tok.map(|t| {
        t.split_once('=')
            .ok_or_else(|| Error::format(origin, line, format!("expected key=value, got '{t}'")))
    })
    .collect()
}

fn get_num(kv: &HashMap<&str, &str>, key: &str, origin: &str, line: usize) -> Result<f64> {
    let s = kv
        .get(key)
        .ok_or_else(|| Error::format(origin, line, format!("missing {key}=")))?;
    parse_f64(s, origin, line)
}

fn get_vec<T: Real>(kv: &HashMap<&str, &str>, key: &str, origin: &str, line: usize) -> Result<Vec3<T>> {
    let s = kv
        .get(key)
        .ok_or_else(|| Error::format(origin, line, format!("missing {key}=")))?;
    let c: Vec<f64> = s.split(',').map(|v| parse_f64(v.trim(), origin, line)).collect::<Result<_>>()?;
    if c.len() != 3 {
        return Err(Error::format(origin, line, format!("{key} needs 3 comma-separated values")));
    }
    Ok(Vec3::from_f64(c[0], c[1], c[2]))
}
