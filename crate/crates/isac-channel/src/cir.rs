//! Channel impulse response tensors and their binary serialization.
//!
//! A [`CirTensor`] holds complex channel coefficients indexed by
//! (rx_element, tx_element, path, time_sample) together with the per-path
//! delays. Paths keep their identity (owning target or cluster), so shared /
//! non-shared components can be split and recombined without losing delay
//! resolution.
//!
//! # Binary layout
//!
//! `write_binary` produces a little-endian file:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "ISACCIR1"
//! 8       1     dtype tag (1 = complex128: two little-endian f64 per value)
//! 9       1     number of dimensions (always 4)
//! 10      32    dims as 4 x u64 LE: rx_elements, tx_elements, paths, time_samples
//! 42      ...   body: interleaved re,im f64 LE, row-major in index order
//!               (rx_element, tx_element, path, time_sample)
//! ```
//!
//! A JSON sidecar (`write_sidecar`) carries the same dims plus units and the
//! per-path delays so the file can be read without this crate.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"ISACCIR1";
const DTYPE_COMPLEX128: u8 = 1;

/// Which physical channel a tensor describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Communication,
    Sensing,
}

/// Which superposition component a tensor holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Total,
    Shared,
    NonShared,
}

/// Identity of one path along the tensor's path axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMeta {
    /// Owning sensing target index (sensing channels).
    pub target: Option<usize>,
    /// Owning communication cluster index (communication channels).
    pub cluster: Option<usize>,
    /// Whether the path belongs to the shared component.
    pub shared: bool,
}

/// Complex channel coefficients indexed by (rx_element, tx_element, path,
/// time_sample), with per-path delays.
#[derive(Debug, Clone, PartialEq)]
pub struct CirTensor {
    pub coefficients: Array4<Complex64>,
    /// Per-path delay in seconds; length equals the path axis.
    pub path_delays: Vec<f64>,
    /// Per-path identity; length equals the path axis.
    pub path_meta: Vec<PathMeta>,
    pub kind: ChannelKind,
    pub component: ComponentKind,
    pub drop_id: u64,
}

impl CirTensor {
    /// An all-empty tensor (zero paths) with the given antenna/time dims.
    pub fn empty(
        rx_elements: usize,
        tx_elements: usize,
        time_samples: usize,
        kind: ChannelKind,
        component: ComponentKind,
        drop_id: u64,
    ) -> Self {
        Self {
            coefficients: Array4::zeros((rx_elements, tx_elements, 0, time_samples)),
            path_delays: Vec::new(),
            path_meta: Vec::new(),
            kind,
            component,
            drop_id,
        }
    }

    /// (rx_elements, tx_elements, paths, time_samples)
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        let d = self.coefficients.dim();
        (d.0, d.1, d.2, d.3)
    }

    pub fn num_paths(&self) -> usize {
        self.dims().2
    }

    /// Total power at the first time sample: sum of |h|^2 over all
    /// (rx, tx, path) entries. Path magnitudes are time-invariant (Doppler
    /// only rotates phase), so the first sample is representative.
    pub fn power(&self) -> f64 {
        let (_, _, _, t) = self.dims();
        if t == 0 {
            return 0.0;
        }
        self.coefficients
            .index_axis(ndarray::Axis(3), 0)
            .iter()
            .map(|c| c.norm_sqr())
            .sum()
    }

    /// Concatenates tensors along the path axis. All parts must agree on
    /// antenna and time dimensions.
    pub fn merge(
        parts: &[&CirTensor],
        kind: ChannelKind,
        component: ComponentKind,
        drop_id: u64,
    ) -> Result<Self> {
        let first = parts.first().ok_or_else(|| {
            Error::Config("cannot merge an empty list of CIR tensors".into())
        })?;
        let (rx, tx, _, ts) = first.dims();
        let total_paths: usize = parts.iter().map(|p| p.num_paths()).sum();
        let mut coefficients = Array4::zeros((rx, tx, total_paths, ts));
        let mut path_delays = Vec::with_capacity(total_paths);
        let mut path_meta = Vec::with_capacity(total_paths);
        let mut offset = 0;
        for part in parts {
            let (prx, ptx, ppaths, pts) = part.dims();
            if (prx, ptx, pts) != (rx, tx, ts) {
                return Err(Error::Config(format!(
                    "CIR dimension mismatch while merging: ({prx},{ptx},_,{pts}) vs ({rx},{tx},_,{ts})"
                )));
            }
            coefficients
                .slice_mut(ndarray::s![.., .., offset..offset + ppaths, ..])
                .assign(&part.coefficients);
            path_delays.extend_from_slice(&part.path_delays);
            path_meta.extend_from_slice(&part.path_meta);
            offset += ppaths;
        }
        Ok(Self {
            coefficients,
            path_delays,
            path_meta,
            kind,
            component,
            drop_id,
        })
    }

    /// A copy containing only the selected path indices, in the given order.
    pub fn select_paths(&self, indices: &[usize], component: ComponentKind) -> Result<Self> {
        let (rx, tx, paths, ts) = self.dims();
        let mut coefficients = Array4::zeros((rx, tx, indices.len(), ts));
        let mut path_delays = Vec::with_capacity(indices.len());
        let mut path_meta = Vec::with_capacity(indices.len());
        for (slot, &idx) in indices.iter().enumerate() {
            if idx >= paths {
                return Err(Error::Config(format!(
                    "path index {idx} out of range ({paths} paths)"
                )));
            }
            coefficients
                .slice_mut(ndarray::s![.., .., slot, ..])
                .assign(&self.coefficients.slice(ndarray::s![.., .., idx, ..]));
            path_delays.push(self.path_delays[idx]);
            path_meta.push(self.path_meta[idx]);
        }
        Ok(Self {
            coefficients,
            path_delays,
            path_meta,
            kind: self.kind,
            component,
            drop_id: self.drop_id,
        })
    }

    /// Writes the documented little-endian binary layout.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let (rx, tx, paths, ts) = self.dims();
        let mut run = || -> std::io::Result<()> {
            w.write_all(MAGIC)?;
            w.write_all(&[DTYPE_COMPLEX128, 4])?;
            for d in [rx, tx, paths, ts] {
                w.write_all(&(d as u64).to_le_bytes())?;
            }
            // Array4 defaults to standard (row-major) layout, so iter() walks
            // the documented index order.
            for c in self.coefficients.iter() {
                w.write_all(&c.re.to_le_bytes())?;
                w.write_all(&c.im.to_le_bytes())?;
            }
            w.flush()
        };
        run().map_err(|e| Error::io(path, e))
    }

    /// Reads a file produced by [`CirTensor::write_binary`]. Path metadata is
    /// not stored in the binary; it is restored as anonymous paths.
    pub fn read_binary(
        path: &Path,
        kind: ChannelKind,
        component: ComponentKind,
        drop_id: u64,
    ) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut run = || -> std::io::Result<CirTensor> {
            let mut magic = [0u8; 8];
            r.read_exact(&mut magic)?;
            if &magic != MAGIC {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    "bad magic",
                ));
            }
            let mut tags = [0u8; 2];
            r.read_exact(&mut tags)?;
            if tags != [DTYPE_COMPLEX128, 4] {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    "unsupported dtype or rank",
                ));
            }
            let mut dims = [0usize; 4];
            for d in dims.iter_mut() {
                let mut b = [0u8; 8];
                r.read_exact(&mut b)?;
                *d = u64::from_le_bytes(b) as usize;
            }
            let n = dims.iter().product::<usize>();
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                let mut re = [0u8; 8];
                let mut im = [0u8; 8];
                r.read_exact(&mut re)?;
                r.read_exact(&mut im)?;
                values.push(Complex64::new(
                    f64::from_le_bytes(re),
                    f64::from_le_bytes(im),
                ));
            }
            let coefficients =
                Array4::from_shape_vec((dims[0], dims[1], dims[2], dims[3]), values)
                    .expect("shape matches element count");
            Ok(CirTensor {
                coefficients,
                path_delays: vec![0.0; dims[2]],
                path_meta: vec![
                    PathMeta {
                        target: None,
                        cluster: None,
                        shared: false,
                    };
                    dims[2]
                ],
                kind,
                component,
                drop_id,
            })
        };
        run().map_err(|e| Error::io(path, e))
    }

    /// Writes the JSON sidecar describing the binary layout.
    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let (rx, tx, paths, ts) = self.dims();
        let sidecar = Sidecar {
            format: "isac-cir".into(),
            version: 1,
            dtype: "complex128".into(),
            byte_order: "little_endian".into(),
            layout: "row_major".into(),
            index_order: vec![
                "rx_element".into(),
                "tx_element".into(),
                "path".into(),
                "time_sample".into(),
            ],
            dims: [rx, tx, paths, ts],
            path_delays_s: self.path_delays.clone(),
            path_meta: self.path_meta.clone(),
            kind: self.kind,
            component: self.component,
            drop_id: self.drop_id,
        };
        let text = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| Error::Config(format!("sidecar serialization failed: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    format: String,
    version: u32,
    dtype: String,
    byte_order: String,
    layout: String,
    index_order: Vec<String>,
    dims: [usize; 4],
    path_delays_s: Vec<f64>,
    path_meta: Vec<PathMeta>,
    kind: ChannelKind,
    component: ComponentKind,
    drop_id: u64,
}
