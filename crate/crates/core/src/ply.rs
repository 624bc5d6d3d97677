//! Binary little-endian PLY read/write for labeled clouds.
//!
//! Vertices carry `double x/y/z` plus an `int part_label` property. A cloud
//! captured from a camera stores its pose in a header line
//! `comment viewpoint <12 numbers>` (row-major rotation interleaved with
//! translation, matching the JSON pose layout). An optional
//! `uchar red/green/blue` triple supports annotated exports for external
//! viewers; colors are ignored on read.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{LabeledCloud, Point3, RigidPose};

pub fn write_cloud(path: &Path, cloud: &LabeledCloud) -> Result<()> {
    write_impl(path, cloud, None)
}

/// Writes the cloud with a per-vertex RGB color (one triple per point).
pub fn write_cloud_colored(path: &Path, cloud: &LabeledCloud, colors: &[[u8; 3]]) -> Result<()> {
    if colors.len() != cloud.len() {
        return Err(Error::LengthMismatch { lhs: cloud.len(), rhs: colors.len() });
    }
    write_impl(path, cloud, Some(colors))
}

fn write_impl(path: &Path, cloud: &LabeledCloud, colors: Option<&[[u8; 3]]>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(b"ply\n")?;
    w.write_all(b"format binary_little_endian 1.0\n")?;
    if let Some(pose) = &cloud.viewpoint {
        let nums: Vec<String> = pose.to_array().iter().map(|v| format!("{v}")).collect();
        writeln!(w, "comment viewpoint {}", nums.join(" "))?;
    }
    writeln!(w, "element vertex {}", cloud.len())?;
    w.write_all(b"property double x\n")?;
    w.write_all(b"property double y\n")?;
    w.write_all(b"property double z\n")?;
    w.write_all(b"property int part_label\n")?;
    if colors.is_some() {
        w.write_all(b"property uchar red\n")?;
        w.write_all(b"property uchar green\n")?;
        w.write_all(b"property uchar blue\n")?;
    }
    w.write_all(b"end_header\n")?;
    for i in 0..cloud.len() {
        let p = &cloud.points[i];
        w.write_all(&p.x.to_le_bytes())?;
        w.write_all(&p.y.to_le_bytes())?;
        w.write_all(&p.z.to_le_bytes())?;
        w.write_all(&(cloud.labels[i] as i32).to_le_bytes())?;
        if let Some(cs) = colors {
            w.write_all(&cs[i])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum PropKind {
    F64,
    F32,
    I32,
    U8,
}

impl PropKind {
    fn size(self) -> usize {
        match self {
            PropKind::F64 => 8,
            PropKind::F32 => 4,
            PropKind::I32 => 4,
            PropKind::U8 => 1,
        }
    }
}

pub fn read_cloud(path: &Path) -> Result<LabeledCloud> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = Vec::new();
    // The header is ASCII terminated by "end_header\n"; read byte-wise until
    // we see it so the binary payload is untouched.
    loop {
        let mut byte = [0u8; 1];
        if r.read(&mut byte)? == 0 {
            return Err(Error::PlyParse("unterminated header".into()));
        }
        header.push(byte[0]);
        if header.ends_with(b"end_header\n") {
            break;
        }
        if header.len() > 1 << 16 {
            return Err(Error::PlyParse("header too large".into()));
        }
    }
    let header = String::from_utf8(header)
        .map_err(|_| Error::PlyParse("header is not valid UTF-8".into()))?;

    let mut lines = header.lines();
    if lines.next() != Some("ply") {
        return Err(Error::PlyParse("missing ply magic".into()));
    }

    let mut vertex_count: Option<usize> = None;
    let mut props: Vec<(String, PropKind)> = Vec::new();
    let mut viewpoint: Option<RigidPose> = None;
    let mut in_vertex_element = false;

    for line in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", fmt, "1.0"] => {
                if *fmt != "binary_little_endian" {
                    return Err(Error::PlyParse(format!("unsupported format {fmt}")));
                }
            }
            ["comment", "viewpoint", rest @ ..] => {
                if rest.len() != 12 {
                    return Err(Error::PlyParse("viewpoint comment needs 12 numbers".into()));
                }
                let mut nums = [0.0f64; 12];
                for (i, t) in rest.iter().enumerate() {
                    nums[i] = t
                        .parse()
                        .map_err(|_| Error::PlyParse(format!("bad viewpoint number {t}")))?;
                }
                viewpoint = Some(RigidPose::from_array(&nums)?);
            }
            ["comment", ..] => {}
            ["element", "vertex", n] => {
                vertex_count = Some(
                    n.parse()
                        .map_err(|_| Error::PlyParse(format!("bad vertex count {n}")))?,
                );
                in_vertex_element = true;
            }
            ["element", ..] => {
                in_vertex_element = false;
            }
            ["property", ty, name] if in_vertex_element => {
                let kind = match *ty {
                    "double" | "float64" => PropKind::F64,
                    "float" | "float32" => PropKind::F32,
                    "int" | "int32" => PropKind::I32,
                    "uchar" | "uint8" => PropKind::U8,
                    other => {
                        return Err(Error::PlyParse(format!("unsupported property type {other}")))
                    }
                };
                props.push((name.to_string(), kind));
            }
            ["end_header"] => break,
            [] => {}
            _ => return Err(Error::PlyParse(format!("unrecognized header line: {line}"))),
        }
    }

    let vertex_count = vertex_count.ok_or_else(|| Error::PlyParse("no vertex element".into()))?;
    let find = |name: &str| props.iter().position(|(n, _)| n == name);
    let (ix, iy, iz, il) = match (find("x"), find("y"), find("z"), find("part_label")) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Err(Error::PlyParse("missing x/y/z/part_label properties".into())),
    };

    let stride: usize = props.iter().map(|(_, k)| k.size()).sum();
    let offsets: Vec<usize> = props
        .iter()
        .scan(0usize, |acc, (_, k)| {
            let off = *acc;
            *acc += k.size();
            Some(off)
        })
        .collect();

    let mut payload = vec![0u8; stride * vertex_count];
    r.read_exact(&mut payload)
        .map_err(|_| Error::PlyParse("truncated vertex data".into()))?;

    let read_f64 = |row: &[u8], prop: usize| -> Result<f64> {
        let off = offsets[prop];
        Ok(match props[prop].1 {
            PropKind::F64 => f64::from_le_bytes(row[off..off + 8].try_into().unwrap()),
            PropKind::F32 => f32::from_le_bytes(row[off..off + 4].try_into().unwrap()) as f64,
            _ => return Err(Error::PlyParse("coordinate property is not float".into())),
        })
    };

    let mut points = Vec::with_capacity(vertex_count);
    let mut labels = Vec::with_capacity(vertex_count);
    for v in 0..vertex_count {
        let row = &payload[v * stride..(v + 1) * stride];
        points.push(Point3::new(read_f64(row, ix)?, read_f64(row, iy)?, read_f64(row, iz)?));
        let off = offsets[il];
        let label = match props[il].1 {
            PropKind::I32 => {
                let raw = i32::from_le_bytes(row[off..off + 4].try_into().unwrap());
                if raw < 0 {
                    return Err(Error::PlyParse(format!("negative part_label {raw}")));
                }
                raw as u32
            }
            PropKind::U8 => row[off] as u32,
            _ => return Err(Error::PlyParse("part_label property is not integer".into())),
        };
        labels.push(label);
    }

    let mut cloud = LabeledCloud::new(points, labels)?;
    cloud.viewpoint = viewpoint;
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;

    fn sample_cloud() -> LabeledCloud {
        LabeledCloud::new(
            vec![
                Point3::new(0.125, -3.5, 1e-7),
                Point3::new(1.0, 2.0, 3.0),
                Point3::new(-0.001, 0.002, -0.003),
            ],
            vec![0, 2, 1],
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_without_viewpoint() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        let cloud = sample_cloud();
        write_cloud(&path, &cloud).unwrap();
        let back = read_cloud(&path).unwrap();
        assert_eq!(back.points, cloud.points);
        assert_eq!(back.labels, cloud.labels);
        assert!(back.viewpoint.is_none());
    }

    #[test]
    fn roundtrip_with_viewpoint_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.ply");
        let pose = RigidPose::yaw(0.7)
            .compose(&RigidPose::pitch(0.3))
            .compose(&RigidPose::translation_of(Vec3::new(0.11, -0.22, 0.33)));
        let cloud = sample_cloud().with_viewpoint(pose);
        write_cloud(&path, &cloud).unwrap();
        let back = read_cloud(&path).unwrap();
        let got = back.viewpoint.expect("viewpoint survives roundtrip");
        // Display-formatted f64 round-trips exactly.
        assert_eq!(got.to_array(), pose.to_array());
    }

    #[test]
    fn colored_write_reads_back_ignoring_color() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("col.ply");
        let cloud = sample_cloud();
        let colors = vec![[255, 0, 0], [0, 255, 0], [0, 0, 255]];
        write_cloud_colored(&path, &cloud, &colors).unwrap();
        let back = read_cloud(&path).unwrap();
        assert_eq!(back.points, cloud.points);
        assert_eq!(back.labels, cloud.labels);
    }

    #[test]
    fn write_is_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.ply"), dir.path().join("b.ply"));
        let cloud = sample_cloud().with_viewpoint(RigidPose::yaw(1.25));
        write_cloud(&p1, &cloud).unwrap();
        write_cloud(&p2, &cloud).unwrap();
        assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ply");
        std::fs::write(&path, b"not a ply file\n").unwrap();
        assert!(matches!(read_cloud(&path), Err(Error::PlyParse(_))));
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ply");
        let cloud = sample_cloud();
        write_cloud(&path, &cloud).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(read_cloud(&path), Err(Error::PlyParse(_))));
    }
}
