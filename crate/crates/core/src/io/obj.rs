//! Wavefront OBJ subset: `v` (optionally with RGB), `vn`, `f`; `mtllib` for a
//! single diffuse color. Faces with more than three corners are fan-triangulated.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scene::{Material, Mesh};

#[derive(Default)]
struct Parsed {
    positions: Vec<Vec3>,
    colors: Vec<Option<[u8; 4]>>,
    normals: Vec<Vec3>,
    faces: Vec<Vec<(usize, Option<usize>)>>,
    mtllib: Option<String>,
}

fn parse(text: &str, source: &str) -> Result<Parsed> {
    let mut out = Parsed::default();
    for (lineno, raw) in text.lines().enumerate() {
        let err = |message: String| Error::Parse {
            path: source.to_string(),
            line: lineno + 1,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        let Some(keyword) = tok.next() else { continue };
        let rest: Vec<&str> = tok.collect();
        let floats = |n: usize| -> Result<Vec<f64>> {
            if rest.len() < n {
                return Err(err(format!("`{keyword}` needs {n} numbers")));
            }
            rest.iter()
                .map(|s| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`"))))
                .collect()
        };
        match keyword {
            "v" => {
                let v = floats(3)?;
                out.positions.push(Vec3::new(v[0], v[1], v[2]));
                out.colors.push(if v.len() >= 6 {
                    let c = |x: f64| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
                    Some([c(v[3]), c(v[4]), c(v[5]), 255])
                } else {
                    None
                });
            }
            "vn" => {
                let v = floats(3)?;
                out.normals.push(Vec3::new(v[0], v[1], v[2]));
            }
            "f" => {
                if rest.len() < 3 {
                    return Err(err("face needs at least 3 vertices".into()));
                }
                let mut face = Vec::with_capacity(rest.len());
                for corner in &rest {
                    let mut parts = corner.split('/');
                    let resolve = |s: &str, n: usize, what: &str| -> Result<usize> {
                        let i: i64 = s.parse().map_err(|_| err(format!("bad {what} index `{s}`")))?;
                        let idx = if i > 0 { i - 1 } else { n as i64 + i };
                        if i == 0 || idx < 0 || idx as usize >= n {
                            return Err(err(format!("{what} index {i} out of range")));
                        }
                        Ok(idx as usize)
                    };
                    let v = resolve(parts.next().unwrap_or(""), out.positions.len(), "vertex")?;
                    let _texcoord = parts.next();
                    let n = match parts.next() {
                        Some(s) if !s.is_empty() => Some(resolve(s, out.normals.len(), "normal")?),
                        _ => None,
                    };
                    face.push((v, n));
                }
                out.faces.push(face);
            }
            "mtllib" => out.mtllib = rest.first().map(|s| s.to_string()),
            // texture coordinates, groups, smoothing, materials, lines: not needed
            _ => {}
        }
    }
    Ok(out)
}

fn assemble(p: Parsed, material: Material) -> Result<Mesh> {
    let use_normals = !p.faces.is_empty()
        && p.faces.iter().flatten().all(|(_, n)| n.map(|i| p.normals[i].length() > 0.0).unwrap_or(false));
    let use_colors = !p.colors.is_empty() && p.colors.iter().all(Option::is_some);
    let mut remap: HashMap<(usize, Option<usize>), u32> = HashMap::new();
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut colors = Vec::new();
    let mut triangles = Vec::new();
    for face in &p.faces {
        let mut ids = Vec::with_capacity(face.len());
        for &(v, n) in face {
            let key = (v, if use_normals { n } else { None });
            let id = *remap.entry(key).or_insert_with(|| {
                positions.push(p.positions[v]);
                if use_normals {
                    normals.push(p.normals[n.unwrap()].normalized());
                }
                if use_colors {
                    colors.push(p.colors[v].unwrap());
                }
                (positions.len() - 1) as u32
            });
            ids.push(id);
        }
        for k in 1..ids.len() - 1 {
            triangles.push([ids[0], ids[k], ids[k + 1]]);
        }
    }
    Mesh::new(
        positions,
        use_normals.then_some(normals),
        use_colors.then_some(colors),
        triangles,
        material,
    )
}

/// Parses OBJ text; the mesh gets a white material.
pub fn parse_obj(text: &str) -> Result<Mesh> {
    assemble(parse(text, "<obj>")?, Material::default())
}

/// Loads an OBJ file, taking the first `Kd` of its `mtllib` (when present) as
/// the mesh's diffuse color.
pub fn load_obj(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = parse(&text, &path.display().to_string())?;
    let material = parsed
        .mtllib
        .as_ref()
        .and_then(|lib| std::fs::read_to_string(path.with_file_name(lib)).ok())
        .and_then(|mtl| first_diffuse(&mtl))
        .map(Material::from_diffuse)
        .unwrap_or_default();
    assemble(parsed, material)
}

fn first_diffuse(mtl: &str) -> Option<[f32; 3]> {
    mtl.lines().find_map(|l| {
        let mut t = l.split_whitespace();
        if t.next()? != "Kd" {
            return None;
        }
        let mut c = [0f32; 3];
        for v in &mut c {
            *v = t.next()?.parse::<f32>().ok()?.clamp(0.0, 1.0);
        }
        Some(c)
    })
}

/// Serializes positions, vertex colors, normals and triangles.
pub fn write_obj(mesh: &Mesh) -> String {
    let mut s = String::new();
    for (p, c) in mesh.positions().iter().zip(mesh.colors()) {
        let f = |b: u8| b as f64 / 255.0;
        let _ = writeln!(s, "v {} {} {} {} {} {}", p.x, p.y, p.z, f(c[0]), f(c[1]), f(c[2]));
    }
    for n in mesh.normals() {
        let _ = writeln!(s, "vn {} {} {}", n.x, n.y, n.z);
    }
    for t in mesh.triangles() {
        let [a, b, c] = t.map(|i| i + 1);
        let _ = writeln!(s, "f {a}//{a} {b}//{b} {c}//{c}");
    }
    s
}

pub fn save_obj(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_obj(mesh)).map_err(|e| Error::io(path, e))
}
