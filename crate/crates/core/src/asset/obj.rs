//! Wavefront OBJ reader restricted to `v` and triangular `f` records.

use crate::error::{Error, Result};
use crate::Vec3;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub positions: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[i];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    /// Signed volume and volume centroid via the divergence theorem. Meaningful for closed,
    /// consistently wound meshes.
    pub fn volume_and_centroid(&self) -> (f64, Vec3) {
        let mut vol = 0.0;
        let mut acc = Vec3::zero();
        for i in 0..self.triangles.len() {
            let [a, b, c] = self.triangle(i);
            let v = a.dot(b.cross(c)) / 6.0;
            vol += v;
            acc += (a + b + c) * (v / 4.0);
        }
        if vol.abs() > 0.0 {
            (vol, acc / vol)
        } else {
            (0.0, Vec3::zero())
        }
    }

    /// Writes the mesh as OBJ text.
    pub fn to_obj_string(&self) -> String {
        let mut s = String::with_capacity(self.positions.len() * 40 + self.triangles.len() * 20);
        for p in &self.positions {
            s.push_str(&format!("v {} {} {}\n", p.x, p.y, p.z));
        }
        for t in &self.triangles {
            s.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
        }
        s
    }
}

pub fn read_obj(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, &path.display().to_string())
}

/// Parses OBJ text. `origin` names the source in error messages.
pub fn parse_obj(text: &str, origin: &str) -> Result<TriangleMesh> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut mesh = TriangleMesh::default();
    let mut faces: Vec<(usize, [i64; 3])> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<&str> = parts.collect();
                if coords.len() < 3 {
                    return Err(err(line_no, "vertex record needs 3 coordinates".into()));
                }
                let mut xyz = [0.0; 3];
                for (k, c) in coords.iter().take(3).enumerate() {
                    let v: f64 = c
                        .parse()
                        .map_err(|_| err(line_no, format!("invalid coordinate `{c}`")))?;
                    if !v.is_finite() {
                        return Err(err(line_no, format!("non-finite coordinate `{c}`")));
                    }
                    xyz[k] = v;
                }
                mesh.positions.push(Vec3::from_array(xyz));
            }
            Some("f") => {
                let refs: Vec<&str> = parts.collect();
                if refs.len() != 3 {
                    return Err(err(
                        line_no,
                        format!("face has {} vertices; only triangles are accepted", refs.len()),
                    ));
                }
                let mut tri = [0i64; 3];
                for (k, r) in refs.iter().enumerate() {
                    let head = r.split('/').next().unwrap_or("");
                    tri[k] = head
                        .parse()
                        .map_err(|_| err(line_no, format!("invalid vertex reference `{r}`")))?;
                }
                faces.push((line_no, tri));
            }
            _ => {}
        }
    }

    let n = mesh.positions.len() as i64;
    for (line_no, tri) in faces {
        let mut out = [0u32; 3];
        for k in 0..3 {
            // OBJ indices are 1-based; negative values count back from the latest vertex
            let i = if tri[k] > 0 { tri[k] - 1 } else { n + tri[k] };
            if tri[k] == 0 || i < 0 || i >= n {
                return Err(err(line_no, format!("vertex index {} out of range", tri[k])));
            }
            out[k] = i as u32;
        }
        mesh.triangles.push(out);
    }
    if mesh.triangles.is_empty() {
        return Err(err(0, "mesh has no triangles".into()));
    }
    Ok(mesh)
}
