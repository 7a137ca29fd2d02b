use std::io::{self, Write};

use kmr_core::surface::SurfaceMesh;

use crate::format::sig;

/// Writes the mesh as Wavefront OBJ: one `v` line per present sample in
/// row-major grid order, then quad faces in the same order. Samples dropped
/// by the end truncation get no vertex.
pub fn write_obj<W: Write>(mesh: &SurfaceMesh, out: &mut W) -> io::Result<()> {
    write_obj_windows(&[mesh], out)
}

/// Several chart windows in one file, each a separate object (`o window<k>`)
/// with its vertices and faces in the order of [`write_obj`].
pub fn write_obj_windows<W: Write>(meshes: &[&SurfaceMesh], out: &mut W) -> io::Result<()> {
    let Some(first) = meshes.first() else { return Ok(()) };
    let p = &first.params;
    writeln!(
        out,
        "# kmr graph piece theta={} alpha={} grid={}x{} conjugate={} truncation={}",
        sig(p.theta),
        sig(p.alpha),
        first.nu,
        first.nv,
        first.conjugate,
        sig(first.truncation)
    )?;
    let mut next = 1;
    for mesh in meshes {
        if meshes.len() > 1 {
            writeln!(out, "o window{}", mesh.shift)?;
        }
        let mut index = vec![0usize; mesh.samples.len()];
        for (k, s) in mesh.samples.iter().enumerate() {
            if let Some(s) = s {
                let [x, y, z] = s.x.0;
                writeln!(out, "v {} {} {}", sig(x), sig(y), sig(z))?;
                index[k] = next;
                next += 1;
            }
        }
        for q in mesh.quads() {
            writeln!(out, "f {} {} {} {}", index[q[0]], index[q[1]], index[q[2]], index[q[3]])?;
        }
    }
    Ok(())
}

pub fn obj_string(meshes: &[&SurfaceMesh]) -> String {
    let mut buf = Vec::new();
    write_obj_windows(meshes, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}
