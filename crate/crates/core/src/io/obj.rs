use super::FormatError;
use crate::math::Vec3;
use crate::render::TriMesh;

fn vertex_index(token: &str, count: usize, line: usize) -> Result<usize, FormatError> {
    let head = token.split('/').next().unwrap_or_default();
    let i: i64 = head.parse().map_err(|_| FormatError::new(format!("line {line}: bad vertex index '{token}'")))?;
    let idx = if i > 0 { i - 1 } else { count as i64 + i };
    if i == 0 || idx < 0 || idx as usize >= count {
        return Err(FormatError::new(format!("line {line}: vertex index {i} out of range")));
    }
    Ok(idx as usize)
}

/// Wavefront OBJ with `v` and triangular `f` records; other records are ignored.
pub fn parse_obj(text: &str) -> Result<TriMesh, FormatError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut parts = raw.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| FormatError::new(format!("line {line}: bad vertex coordinate")))?;
                if c.len() != 3 {
                    return Err(FormatError::new(format!("line {line}: vertex needs three coordinates")));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<&str> = parts.collect();
                if idx.len() != 3 {
                    return Err(FormatError::new(format!("line {line}: face has {} vertices, only triangles are accepted", idx.len())));
                }
                let mut t = [0usize; 3];
                for (k, tok) in idx.iter().enumerate() {
                    t[k] = vertex_index(tok, vertices.len(), line)?;
                }
                triangles.push(t);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, triangles).map_err(|e| FormatError::new(e.to_string()))
}

pub fn format_obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        out += &format!("v {} {} {}\n", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        out += &format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}
