//! Saved solution states and their binary file format.
//!
//! Layout, all little-endian:
//!
//! | bytes          | content                                        |
//! |----------------|------------------------------------------------|
//! | 4              | magic `SFS1`                                   |
//! | 4              | `u32` version, currently 1                     |
//! | 48             | 6 × `f64` bounds `a1 b1 a2 b2 a3 b3`           |
//! | 12             | 3 × `u32` physical grid sizes                  |
//! | 3              | 3 × `u8` mirror flags (0 or 1)                 |
//! | 8              | `f64` time                                     |
//! | 16 N1 N2 N3    | samples as `(re, im)` `f64` pairs, axis 3 fastest |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{decompose, DomainBox, GridSize, PhysicalField, SpectralField};
use crate::gpe::mirror_extend;

const MAGIC: &[u8; 4] = b"SFS1";
const VERSION: u32 = 1;

/// The wave function on the physical grid at time `t`, with the mirroring
/// needed to rebuild the periodic computational field.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    field: PhysicalField,
    mirror: [bool; 3],
    t: f64,
}

impl Snapshot {
    pub fn new(domain: DomainBox, values: Array3<Complex64>, mirror: [bool; 3], t: f64) -> Result<Self> {
        Ok(Self {
            field: PhysicalField::new(domain, values)?,
            mirror,
            t,
        })
    }

    /// Physical-domain bounds.
    pub fn domain(&self) -> &DomainBox {
        self.field.domain()
    }

    pub fn values(&self) -> &Array3<Complex64> {
        self.field.values()
    }

    pub fn size(&self) -> GridSize {
        self.field.size()
    }

    pub fn mirror(&self) -> [bool; 3] {
        self.mirror
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// The samples on the physical grid.
    pub fn field(&self) -> &PhysicalField {
        &self.field
    }

    /// The mirrored samples on the periodic computational grid.
    pub fn computational_field(&self) -> PhysicalField {
        mirror_extend(&self.field, self.mirror)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        let (a, b) = (self.domain().lower(), self.domain().upper());
        for d in 0..3 {
            w.write_all(&a[d].to_le_bytes())?;
            w.write_all(&b[d].to_le_bytes())?;
        }
        for n in self.size().dims() {
            let n = u32::try_from(n).map_err(|_| Error::MalformedSnapshot(format!("grid size {n} exceeds u32")))?;
            w.write_all(&n.to_le_bytes())?;
        }
        w.write_all(&self.mirror.map(u8::from))?;
        w.write_all(&self.t.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.size().total());
        for v in self.values().iter() {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic, "magic")?;
        if &magic != MAGIC {
            return Err(Error::MalformedSnapshot(format!("bad magic {magic:?}")));
        }
        let version = read_u32(&mut r, "version")?;
        if version != VERSION {
            return Err(Error::MalformedSnapshot(format!("unsupported version {version}")));
        }
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        for d in 0..3 {
            a[d] = read_f64(&mut r, "bounds")?;
            b[d] = read_f64(&mut r, "bounds")?;
        }
        let domain = DomainBox::new(a, b).map_err(|e| Error::MalformedSnapshot(e.to_string()))?;
        let mut n = [0usize; 3];
        for n_d in &mut n {
            *n_d = read_u32(&mut r, "grid size")? as usize;
        }
        let size = GridSize::new(n).map_err(|e| Error::MalformedSnapshot(e.to_string()))?;
        let mut flags = [0u8; 3];
        read_exact(&mut r, &mut flags, "mirror flags")?;
        let mut mirror = [false; 3];
        for (m, &f) in mirror.iter_mut().zip(&flags) {
            *m = match f {
                0 => false,
                1 => true,
                other => return Err(Error::MalformedSnapshot(format!("mirror flag {other} is not 0 or 1"))),
            };
        }
        let t = read_f64(&mut r, "time")?;

        let mut payload = vec![0u8; 16 * size.total()];
        read_exact(&mut r, &mut payload, "samples")?;
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::MalformedSnapshot("trailing bytes after samples".into()));
        }
        let values: Vec<Complex64> = payload
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        let values = Array3::from_shape_vec((n[0], n[1], n[2]), values).expect("payload length matches");
        Self::new(domain, values, mirror, t)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::MalformedSnapshot(format!("truncated while reading {what}")),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R, what: &str) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, what)?;
    Ok(f64::from_le_bytes(b))
}

/// Fourier coefficients of the snapshot on its computational box: mirror,
/// then decompose. The box is available as `domain()` of the result.
pub fn sf2psihat(snap: &Snapshot) -> SpectralField {
    decompose(&snap.computational_field())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::synthesize_regular;
    use crate::gpe::restrict;

    fn sample() -> Snapshot {
        let domain = DomainBox::new([-2.0, 0.0, 1.0], [2.0, 3.0, 2.0]).unwrap();
        let values = Array3::from_shape_fn((4, 2, 6), |(i, j, k)| {
            Complex64::new((i as f64 - 1.5) * 0.3 + k as f64, (j * k) as f64 - 0.25)
        });
        Snapshot::new(domain, values, [true, false, true], 1.25).unwrap()
    }

    #[test]
    fn header_layout() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"SFS1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(bytes[8..16].try_into().unwrap()), -2.0);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2.0);
        assert_eq!(u32::from_le_bytes(bytes[56..60].try_into().unwrap()), 4);
        assert_eq!(&bytes[68..71], &[1, 0, 1]);
        assert_eq!(f64::from_le_bytes(bytes[71..79].try_into().unwrap()), 1.25);
        assert_eq!(bytes.len(), 79 + 16 * 48);
        // Second sample is (0, 0, 1): axis 3 varies fastest.
        let re = f64::from_le_bytes(bytes[95..103].try_into().unwrap());
        assert_eq!(re, sample().values()[[0, 0, 1]].re);
    }

    #[test]
    fn round_trip_is_exact() {
        let snap = sample();
        let mut bytes = Vec::new();
        snap.write_to(&mut bytes).unwrap();
        assert_eq!(Snapshot::read_from(bytes.as_slice()).unwrap(), snap);
    }

    #[test]
    fn rejects_corrupt_input() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Snapshot::read_from(bad.as_slice()), Err(Error::MalformedSnapshot(_))));
        assert!(matches!(
            Snapshot::read_from(&bytes[..bytes.len() - 1]),
            Err(Error::MalformedSnapshot(_))
        ));
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(Snapshot::read_from(longer.as_slice()).is_err());
        let mut flag = bytes;
        flag[69] = 2;
        assert!(Snapshot::read_from(flag.as_slice()).is_err());
    }

    #[test]
    fn constant_snapshot_has_only_zero_mode() {
        let domain = DomainBox::cube(0.0, 2.0).unwrap();
        let c = Complex64::new(0.5, -1.0);
        let plain = Snapshot::new(domain, Array3::from_elem((4, 4, 4), c), [false; 3], 0.0).unwrap();
        let spec = sf2psihat(&plain);
        let z = spec.zero_mode_index();
        assert!((spec.coeffs()[z] - c * 8f64.sqrt()).norm() < 1e-14);

        let mirrored = Snapshot::new(domain, Array3::from_elem((4, 4, 4), c), [true; 3], 0.0).unwrap();
        let spec = sf2psihat(&mirrored);
        assert_eq!(spec.domain(), &DomainBox::cube(0.0, 4.0).unwrap());
        let z = spec.zero_mode_index();
        assert!((spec.coeffs()[z] - c * 64f64.sqrt()).norm() < 1e-13);
        let rest: f64 = spec.coeffs().iter().map(|v| v.norm()).sum::<f64>() - spec.coeffs()[z].norm();
        assert!(rest < 1e-12);
    }

    #[test]
    fn restriction_of_synthesis_recovers_samples() {
        let snap = sample();
        let back = synthesize_regular(&sf2psihat(&snap));
        let restored = restrict(back.values(), snap.size());
        let scale = snap.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in restored.iter().zip(snap.values().iter()) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }
}
