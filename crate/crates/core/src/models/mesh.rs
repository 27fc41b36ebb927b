use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Isometry3, Point3};

use crate::error::{Error, Result};
use crate::geometry;
use crate::Real;

/// Triangle mesh with vertices in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T: Real> {
    pub vertices: Vec<Point3<T>>,
    pub faces: Vec<[usize; 3]>,
}

impl<T: Real> Mesh<T> {
    /// Builds a mesh, checking face indices and vertex finiteness.
    pub fn new(vertices: Vec<Point3<T>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Self { vertices, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Vertex cloud without connectivity.
    pub fn from_points(vertices: Vec<Point3<T>>) -> Result<Self> {
        Self::new(vertices, Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let n = self.vertices.len();
        if let Some((i, f)) = self
            .faces
            .iter()
            .enumerate()
            .find(|(_, f)| f.iter().any(|&k| k >= n))
        {
            return Err(Error::InvalidMesh(format!(
                "face {i} {f:?} references a vertex >= {n}"
            )));
        }
        if let Some(i) = self
            .vertices
            .iter()
            .position(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn centroid(&self) -> Point3<T> {
        geometry::centroid(&self.vertices)
    }

    pub fn transformed(&self, pose: &Isometry3<T>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| pose * v).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Concatenates meshes, offsetting face indices.
    pub fn concat(parts: &[&Mesh<T>]) -> Self {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for part in parts {
            let offset = vertices.len();
            vertices.extend_from_slice(&part.vertices);
            faces.extend(
                part.faces
                    .iter()
                    .map(|f| [f[0] + offset, f[1] + offset, f[2] + offset]),
            );
        }
        Self { vertices, faces }
    }

    /// Every undirected edge is shared by exactly two faces with opposite orientation.
    pub fn is_watertight(&self) -> bool {
        if self.faces.is_empty() {
            return false;
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                *directed.entry((f[k], f[(k + 1) % 3])).or_default() += 1;
            }
        }
        directed
            .iter()
            .all(|(&(a, b), &count)| count == 1 && directed.get(&(b, a)) == Some(&1))
    }

    pub fn cast<U: Real>(&self) -> Mesh<U> {
        Mesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| geometry::to_point(geometry::to_array(v)))
                .collect(),
            faces: self.faces.clone(),
        }
    }

    /// Serializes as ASCII Wavefront OBJ (`v` and `f` records, 1-based).
    pub fn to_obj_string(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(
                out,
                "v {} {} {}",
                v.x.to_f64_lossy(),
                v.y.to_f64_lossy(),
                v.z.to_f64_lossy()
            );
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }

    /// Parses ASCII OBJ. Only triangular faces are accepted; texture and normal
    /// indices (`f 1/2/3`) are ignored, other record types skipped.
    pub fn parse_obj(text: &str, origin: &Path) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let mut tokens = line.split_whitespace();
            let bad = |msg: &str| Error::format(origin, format!("line {}: {msg}", lineno + 1));
            match tokens.next() {
                Some("v") => {
                    let mut c = [0.0f64; 3];
                    for slot in &mut c {
                        *slot = tokens
                            .next()
                            .ok_or_else(|| bad("vertex needs 3 coordinates"))?
                            .parse()
                            .map_err(|_| bad("unparsable coordinate"))?;
                    }
                    vertices.push(geometry::to_point(c));
                }
                Some("f") => {
                    let idx: Vec<&str> = tokens.collect();
                    if idx.len() != 3 {
                        return Err(bad("only triangular faces are supported"));
                    }
                    let mut face = [0usize; 3];
                    for (slot, tok) in face.iter_mut().zip(idx) {
                        let head = tok.split('/').next().unwrap_or(tok);
                        let i: i64 = head.parse().map_err(|_| bad("unparsable face index"))?;
                        *slot = if i > 0 {
                            (i - 1) as usize
                        } else if i < 0 && (-i) as usize <= vertices.len() {
                            vertices.len() - (-i) as usize
                        } else {
                            return Err(bad("face index out of range"));
                        };
                    }
                    faces.push(face);
                }
                _ => {}
            }
        }
        Mesh::new(vertices, faces).map_err(|e| Error::format(origin, e.to_string()))
    }

    pub fn read_obj(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_obj(&text, path)
    }

    pub fn write_obj(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_obj_string()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> Mesh<f64> {
        Mesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_faces_and_empty() {
        assert!(matches!(
            Mesh::<f64>::new(vec![Point3::origin()], vec![[0, 1, 0]]),
            Err(Error::InvalidMesh(_))
        ));
        assert!(matches!(
            Mesh::<f64>::new(vec![], vec![]),
            Err(Error::EmptyMesh)
        ));
        assert!(Mesh::<f64>::new(vec![Point3::new(f64::NAN, 0.0, 0.0)], vec![]).is_err());
    }

    #[test]
    fn tetrahedron_is_watertight() {
        let t = tetra();
        assert!(t.is_watertight());
        let open = Mesh::new(t.vertices.clone(), t.faces[..3].to_vec()).unwrap();
        assert!(!open.is_watertight());
    }

    #[test]
    fn obj_round_trip() {
        let t = tetra();
        let back = Mesh::<f64>::parse_obj(&t.to_obj_string(), Path::new("mem")).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn obj_rejects_quads_and_accepts_slashes() {
        let quad = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(Mesh::<f64>::parse_obj(quad, Path::new("q")).is_err());
        let tri = "# c\nv 0 0 0\nv 1 0 0\nv 1 1 0\nvn 0 0 1\nf 1//1 2//1 -1//1\n";
        let m = Mesh::<f64>::parse_obj(tri, Path::new("t")).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn concat_offsets_faces() {
        let t = tetra();
        let both = Mesh::concat(&[&t, &t]);
        assert_eq!(both.len(), 8);
        assert_eq!(both.faces[4], [4, 6, 5]);
        assert!(both.is_watertight());
    }
}
