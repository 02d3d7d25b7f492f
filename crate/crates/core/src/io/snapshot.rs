use std::fs;
use std::path::Path;

use log::warn;
use num_complex::Complex64;

use crate::error::IoError;
use crate::spectral::{make_grid, SpectralField};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"HVNSFLD1";
const HEADER_LEN: usize = 8 + 4 + 5 * 8;
/// Relative Hermitian mismatch tolerated on load.
const HERMITIAN_TOL: f64 = 1e-12;
const DIVERGENCE_TOL: f64 = 1e-8;

/// Run parameters stored alongside a field.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SnapshotMeta {
    pub nu: f64,
    pub eps: f64,
    pub l: f64,
    pub time: f64,
}

/// Byte image of a snapshot file.
pub fn encode_snapshot(field: &SpectralField, meta: &SnapshotMeta) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 3 * grid.len() * 16);
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    for v in [grid.period(), meta.nu, meta.eps, meta.l, meta.time] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for comp in field.coeffs() {
        for z in comp {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<(SpectralField, SnapshotMeta), IoError> {
    if bytes.len() < HEADER_LEN {
        return Err(IoError::Truncated {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let magic: [u8; 8] = bytes[..8].try_into().expect("8-byte slice");
    if &magic != SNAPSHOT_MAGIC {
        return Err(IoError::BadMagic(magic));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().expect("4-byte slice")) as usize;
    let period = f64_at(bytes, 12);
    let meta = SnapshotMeta {
        nu: f64_at(bytes, 20),
        eps: f64_at(bytes, 28),
        l: f64_at(bytes, 36),
        time: f64_at(bytes, 44),
    };
    let grid = make_grid(n, period)?;
    let expected = HEADER_LEN + 3 * grid.len() * 16;
    if bytes.len() != expected {
        return Err(IoError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    let mut at = HEADER_LEN;
    let mut read_component = || {
        (0..grid.len())
            .map(|_| {
                let z = Complex64::new(f64_at(bytes, at), f64_at(bytes, at + 8));
                at += 16;
                z
            })
            .collect::<Vec<_>>()
    };
    let coeffs = [read_component(), read_component(), read_component()];
    let field = SpectralField::from_coeffs(&grid, coeffs)?;

    let scale = field.max_abs_coeff().max(f64::MIN_POSITIVE);
    let defect = field.hermitian_defect() / scale;
    if !(defect <= HERMITIAN_TOL) {
        return Err(IoError::NotHermitian(defect));
    }
    let div = field.max_divergence_ratio();
    if div > DIVERGENCE_TOL {
        warn!("loaded snapshot is not solenoidal (divergence ratio {div:e})");
    }
    Ok((field, meta))
}

pub fn write_snapshot(
    path: impl AsRef<Path>,
    field: &SpectralField,
    meta: &SnapshotMeta,
) -> Result<(), IoError> {
    fs::write(path, encode_snapshot(field, meta))?;
    Ok(())
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<(SpectralField, SnapshotMeta), IoError> {
    decode_snapshot(&fs::read(path)?)
}
