//! PathSet persistence.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! magic           12 bytes  b"DFPATHSET\0\0\0"
//! version         u32       1
//! kind            u8        ModelKind discriminant
//! eta,sigma,sigma0 3 x f64
//! f,g,h           each: dim u32, then dim*dim f64 row-major
//! x0              len u32, then f64 entries
//! has_q           u8
//!   q             dim u32, then dim*dim f64 (only if has_q = 1)
//!   regimes       count u32, then f64 values (only if has_q = 1)
//! n_paths         u64
//! horizon         u64
//! per path:       seed u64,
//!                 states (horizon+1)*state_dim f64 row-major,
//!                 observations (horizon+1)*obs_dim f64 row-major,
//!                 regimes (horizon+1) f64 (switching kinds only)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::model::{ModelKind, ModelSpec};
use super::path::{PathSet, SamplePath};

const MAGIC: &[u8; 12] = b"DFPATHSET\0\0\0";
pub const PATHSET_FORMAT_VERSION: u32 = 1;

fn kind_to_u8(kind: ModelKind) -> u8 {
    match kind {
        ModelKind::Linear1D => 0,
        ModelKind::Linear2D => 1,
        ModelKind::NonLinear1D => 2,
        ModelKind::NonLinear2D => 3,
        ModelKind::Switching1D => 4,
        ModelKind::Switching2D => 5,
    }
}

fn kind_from_u8(v: u8) -> Result<ModelKind> {
    Ok(match v {
        0 => ModelKind::Linear1D,
        1 => ModelKind::Linear2D,
        2 => ModelKind::NonLinear1D,
        3 => ModelKind::NonLinear2D,
        4 => ModelKind::Switching1D,
        5 => ModelKind::Switching2D,
        _ => return Err(Error::StoredShape(format!("unknown model kind tag {v}"))),
    })
}

fn write_matrix<W: Write>(w: &mut W, m: &DMatrix<f64>) -> Result<()> {
    w.write_u32::<LittleEndian>(m.nrows() as u32)?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_f64::<LittleEndian>(m[(i, j)])?;
        }
    }
    Ok(())
}

fn read_matrix<R: Read>(r: &mut R) -> Result<DMatrix<f64>> {
    let dim = r.read_u32::<LittleEndian>()? as usize;
    if dim == 0 || dim > 16 {
        return Err(Error::StoredShape(format!("implausible matrix dim {dim}")));
    }
    let mut data = vec![0.0; dim * dim];
    for v in data.iter_mut() {
        *v = r.read_f64::<LittleEndian>()?;
    }
    Ok(DMatrix::from_row_slice(dim, dim, &data))
}

pub fn save_pathset(set: &PathSet, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(PATHSET_FORMAT_VERSION)?;

    let m = &set.model;
    w.write_u8(kind_to_u8(m.kind))?;
    w.write_f64::<LittleEndian>(m.eta)?;
    w.write_f64::<LittleEndian>(m.sigma)?;
    w.write_f64::<LittleEndian>(m.sigma0)?;
    write_matrix(&mut w, &m.f_matrix)?;
    write_matrix(&mut w, &m.g_matrix)?;
    write_matrix(&mut w, &m.h_matrix)?;
    w.write_u32::<LittleEndian>(m.x0.len() as u32)?;
    for v in m.x0.iter() {
        w.write_f64::<LittleEndian>(*v)?;
    }
    match &m.generator_q {
        Some(q) => {
            w.write_u8(1)?;
            write_matrix(&mut w, q)?;
            w.write_u32::<LittleEndian>(m.regime_values.len() as u32)?;
            for v in &m.regime_values {
                w.write_f64::<LittleEndian>(*v)?;
            }
        }
        None => w.write_u8(0)?,
    }

    w.write_u64::<LittleEndian>(set.paths.len() as u64)?;
    w.write_u64::<LittleEndian>(set.horizon as u64)?;
    for p in &set.paths {
        w.write_u64::<LittleEndian>(p.seed)?;
        for v in &p.states {
            w.write_f64::<LittleEndian>(*v)?;
        }
        for v in &p.observations {
            w.write_f64::<LittleEndian>(*v)?;
        }
        if let Some(regimes) = &p.regimes {
            for v in regimes {
                w.write_f64::<LittleEndian>(*v)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_pathset(path: &Path) -> Result<PathSet> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 12];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::StoredShape("bad magic; not a pathset file".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != PATHSET_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: PATHSET_FORMAT_VERSION,
            found: version,
        });
    }

    let kind = kind_from_u8(r.read_u8()?)?;
    let eta = r.read_f64::<LittleEndian>()?;
    let sigma = r.read_f64::<LittleEndian>()?;
    let sigma0 = r.read_f64::<LittleEndian>()?;
    let f_matrix = read_matrix(&mut r)?;
    let g_matrix = read_matrix(&mut r)?;
    let h_matrix = read_matrix(&mut r)?;
    let x0_len = r.read_u32::<LittleEndian>()? as usize;
    if x0_len != kind.state_dim() {
        return Err(Error::StoredShape(format!(
            "x0 length {x0_len} does not match kind {kind}"
        )));
    }
    let mut x0 = DVector::zeros(x0_len);
    for i in 0..x0_len {
        x0[i] = r.read_f64::<LittleEndian>()?;
    }
    let has_q = r.read_u8()?;
    let (generator_q, regime_values) = if has_q == 1 {
        let q = read_matrix(&mut r)?;
        let count = r.read_u32::<LittleEndian>()? as usize;
        let mut vals = vec![0.0; count];
        for v in vals.iter_mut() {
            *v = r.read_f64::<LittleEndian>()?;
        }
        (Some(q), vals)
    } else {
        (None, Vec::new())
    };

    let model = ModelSpec {
        kind,
        eta,
        sigma,
        sigma0,
        f_matrix,
        g_matrix,
        h_matrix,
        x0,
        generator_q,
        regime_values,
    };
    model.validate().map_err(|e| Error::StoredShape(e.to_string()))?;

    let n_paths = r.read_u64::<LittleEndian>()? as usize;
    let horizon = r.read_u64::<LittleEndian>()? as usize;
    let m1 = kind.state_dim();
    let m2 = kind.obs_dim();
    let mut paths = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        let seed = r.read_u64::<LittleEndian>()?;
        let mut states = vec![0.0; (horizon + 1) * m1];
        for v in states.iter_mut() {
            *v = r.read_f64::<LittleEndian>()?;
        }
        let mut observations = vec![0.0; (horizon + 1) * m2];
        for v in observations.iter_mut() {
            *v = r.read_f64::<LittleEndian>()?;
        }
        let regimes = if kind.is_switching() {
            let mut a = vec![0.0; horizon + 1];
            for v in a.iter_mut() {
                *v = r.read_f64::<LittleEndian>()?;
            }
            Some(a)
        } else {
            None
        };
        paths.push(SamplePath {
            state_dim: m1,
            obs_dim: m2,
            states,
            observations,
            regimes,
            seed,
        });
    }

    Ok(PathSet {
        model,
        horizon,
        paths,
    })
}

/// Debug CSV export: `seed,n,x_0..x_{m1-1},y_0..y_{m2-1},alpha`.
///
/// The alpha column is empty for non-switching kinds.
pub fn export_pathset_csv(set: &PathSet, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let m1 = set.model.state_dim();
    let m2 = set.model.obs_dim();
    let mut header = String::from("seed,n");
    for i in 0..m1 {
        header.push_str(&format!(",x_{i}"));
    }
    for i in 0..m2 {
        header.push_str(&format!(",y_{i}"));
    }
    header.push_str(",alpha");
    writeln!(w, "{header}")?;
    for p in &set.paths {
        for n in 0..p.len() {
            let mut line = format!("{},{}", p.seed, n);
            for v in p.state(n) {
                line.push_str(&format!(",{v}"));
            }
            for v in p.observation(n) {
                line.push_str(&format!(",{v}"));
            }
            match &p.regimes {
                Some(a) => line.push_str(&format!(",{}", a[n])),
                None => line.push(','),
            }
            writeln!(w, "{line}")?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::generate_dataset;

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        for kind in [ModelKind::Linear2D, ModelKind::Switching1D] {
            let model = ModelSpec::preset(kind);
            let set = generate_dataset(&model, 4, 20, 42).unwrap();
            let file = dir.path().join(format!("{kind}.dfps"));
            save_pathset(&set, &file).unwrap();
            let loaded = load_pathset(&file).unwrap();
            assert_eq!(loaded.model, set.model);
            assert_eq!(loaded.horizon, set.horizon);
            assert_eq!(loaded.paths, set.paths);
        }
    }

    #[test]
    fn bad_magic_and_version_are_distinct_errors() {
        let dir = tempfile::tempdir().unwrap();
        let model = ModelSpec::preset(ModelKind::Linear1D);
        let set = generate_dataset(&model, 1, 5, 0).unwrap();
        let file = dir.path().join("set.dfps");
        save_pathset(&set, &file).unwrap();

        let mut bytes = std::fs::read(&file).unwrap();
        bytes[0] = b'X';
        std::fs::write(&file, &bytes).unwrap();
        assert!(matches!(load_pathset(&file), Err(Error::StoredShape(_))));

        let mut bytes = std::fs::read(&file).unwrap();
        bytes[0] = b'D';
        bytes[12] = 99;
        std::fs::write(&file, &bytes).unwrap();
        assert!(matches!(
            load_pathset(&file),
            Err(Error::VersionMismatch { found: 99, .. })
        ));
    }

    #[test]
    fn csv_export_has_expected_columns() {
        let dir = tempfile::tempdir().unwrap();
        let model = ModelSpec::preset(ModelKind::Switching2D);
        let set = generate_dataset(&model, 2, 3, 7).unwrap();
        let file = dir.path().join("set.csv");
        export_pathset_csv(&set, &file).unwrap();
        let text = std::fs::read_to_string(&file).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "seed,n,x_0,x_1,y_0,y_1,alpha");
        assert_eq!(lines.count(), 2 * 4);
    }
}
