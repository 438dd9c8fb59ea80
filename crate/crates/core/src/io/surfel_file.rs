//! `.bsrf` surfel files.
//!
//! Little-endian, fixed layout:
//!
//! ```text
//! header (20 bytes)
//!   0  magic "BSRF"
//!   4  u32 version (1)
//!   8  u32 surfel count
//!  12  f32 coverage
//!  16  u32 resolution parameter used for extraction
//! record (28 bytes), repeated in array order
//!   0  3 × f32 position
//!  12  3 × f32 normal
//!  24  4 × u8  RGBA
//! ```
//!
//! Records are in progressive order, so any whole-record prefix of a file is a
//! usable array. A file cut short mid-record loads its complete records.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::surfel::{Surfel, SurfelArray};

pub const MAGIC: [u8; 4] = *b"BSRF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;
pub const RECORD_LEN: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfelFileHeader {
    pub version: u32,
    pub surfel_count: u32,
    pub coverage: f32,
    pub resolution: u32,
}

impl SurfelFileHeader {
    fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..8].copy_from_slice(&self.version.to_le_bytes());
        b[8..12].copy_from_slice(&self.surfel_count.to_le_bytes());
        b[12..16].copy_from_slice(&self.coverage.to_le_bytes());
        b[16..20].copy_from_slice(&self.resolution.to_le_bytes());
        b
    }

    fn from_bytes(b: &[u8; HEADER_LEN]) -> Result<Self> {
        if b[0..4] != MAGIC {
            return Err(Error::Format(format!("bad magic {:?}", &b[0..4])));
        }
        let u32_at = |i: usize| u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);
        let version = u32_at(4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        Ok(SurfelFileHeader {
            version,
            surfel_count: u32_at(8),
            coverage: f32::from_le_bytes([b[12], b[13], b[14], b[15]]),
            resolution: u32_at(16),
        })
    }
}

fn encode_record(s: &Surfel, out: &mut [u8; RECORD_LEN]) {
    for (i, v) in s.position.iter().chain(s.normal.iter()).enumerate() {
        out[i * 4..i * 4 + 4].copy_from_slice(&v.to_le_bytes());
    }
    out[24..28].copy_from_slice(&s.color);
}

fn decode_record(b: &[u8; RECORD_LEN]) -> Surfel {
    let f = |i: usize| f32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);
    Surfel {
        position: [f(0), f(4), f(8)],
        normal: [f(12), f(16), f(20)],
        color: [b[24], b[25], b[26], b[27]],
    }
}

/// Writes header and records; returns the number of bytes written.
pub fn write_surfels<W: Write>(array: &SurfelArray, mut w: W) -> Result<u64> {
    let count = u32::try_from(array.len())
        .map_err(|_| Error::InvalidParameter(format!("{} surfels do not fit a u32 count", array.len())))?;
    let header = SurfelFileHeader {
        version: VERSION,
        surfel_count: count,
        coverage: array.coverage,
        resolution: array.source_resolution,
    };
    w.write_all(&header.to_bytes())?;
    let mut rec = [0u8; RECORD_LEN];
    for s in &array.surfels {
        encode_record(s, &mut rec);
        w.write_all(&rec)?;
    }
    w.flush()?;
    Ok((HEADER_LEN + RECORD_LEN * array.len()) as u64)
}

/// Reads as many bytes as available into `buf`, stopping early only at end of stream.
fn read_up_to<R: Read>(r: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Reads the first `min(max_prefix, available, surfel_count)` records.
pub fn read_surfels<R: Read>(mut r: R, max_prefix: Option<usize>) -> Result<SurfelArray> {
    let mut hb = [0u8; HEADER_LEN];
    let got = read_up_to(&mut r, &mut hb)?;
    if got < HEADER_LEN {
        return Err(Error::Format(format!("truncated header ({got} of {HEADER_LEN} bytes)")));
    }
    let header = SurfelFileHeader::from_bytes(&hb)?;
    let want = (header.surfel_count as usize).min(max_prefix.unwrap_or(usize::MAX));
    let mut surfels = Vec::with_capacity(want.min(1 << 24));
    let mut rec = [0u8; RECORD_LEN];
    while surfels.len() < want {
        if read_up_to(&mut r, &mut rec)? < RECORD_LEN {
            break;
        }
        surfels.push(decode_record(&rec));
    }
    Ok(SurfelArray {
        surfels,
        coverage: header.coverage,
        source_resolution: header.resolution,
    })
}

pub fn save_surfels(array: &SurfelArray, path: impl AsRef<Path>) -> Result<u64> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_surfels(array, BufWriter::new(file)).map_err(|e| match e {
        Error::Stream(io) => Error::io(path, io),
        other => other,
    })
}

pub fn load_surfels(path: impl AsRef<Path>, max_prefix: Option<usize>) -> Result<SurfelArray> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_surfels(BufReader::new(file), max_prefix).map_err(|e| match e {
        Error::Stream(io) => Error::io(path, io),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(n: usize) -> SurfelArray {
        SurfelArray {
            surfels: (0..n)
                .map(|i| Surfel {
                    position: [i as f32, -(i as f32) * 0.5, 1.0 / (i as f32 + 1.0)],
                    normal: [0.0, 0.0, 1.0],
                    color: [i as u8, 2, 3, 255],
                })
                .collect(),
            coverage: 0.625,
            source_resolution: 512,
        }
    }

    fn encode(a: &SurfelArray) -> Vec<u8> {
        let mut buf = Vec::new();
        write_surfels(a, &mut buf).unwrap();
        buf
    }

    #[test]
    fn one_surfel_is_48_bytes() {
        let buf = encode(&sample(1));
        assert_eq!(buf.len(), 48);
        assert_eq!(&buf[0..4], b"BSRF");
    }

    #[test]
    fn empty_array_is_header_only() {
        let buf = encode(&sample(0));
        assert_eq!(buf.len(), HEADER_LEN);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 0);
        assert!(read_surfels(&buf[..], None).unwrap().is_empty());
    }

    #[test]
    fn exact_byte_layout() {
        let a = SurfelArray {
            surfels: vec![Surfel { position: [1.0, 2.0, 3.0], normal: [0.0, 1.0, 0.0], color: [10, 20, 30, 40] }],
            coverage: 0.5,
            source_resolution: 256,
        };
        let expected: Vec<u8> = [
            &b"BSRF"[..],
            &1u32.to_le_bytes(),
            &1u32.to_le_bytes(),
            &0.5f32.to_le_bytes(),
            &256u32.to_le_bytes(),
            &1.0f32.to_le_bytes(),
            &2.0f32.to_le_bytes(),
            &3.0f32.to_le_bytes(),
            &0.0f32.to_le_bytes(),
            &1.0f32.to_le_bytes(),
            &0.0f32.to_le_bytes(),
            &[10, 20, 30, 40],
        ]
        .concat();
        assert_eq!(encode(&a), expected);
    }

    #[test]
    fn max_prefix_limits_records() {
        let a = sample(1000);
        let got = read_surfels(&encode(&a)[..], Some(100)).unwrap();
        assert_eq!(got.surfels, a.surfels[..100]);
    }

    #[test]
    fn truncated_mid_record_keeps_whole_records() {
        let a = sample(20);
        let buf = encode(&a);
        let cut = HEADER_LEN + RECORD_LEN * 10 + RECORD_LEN / 2;
        let got = read_surfels(&buf[..cut], None).unwrap();
        assert_eq!(got.len(), 10);
        assert_eq!(got.surfels, a.surfels[..10]);
    }

    #[test]
    fn bad_magic_version_and_short_header_are_errors() {
        let mut buf = encode(&sample(2));
        buf[0] = b'X';
        assert!(matches!(read_surfels(&buf[..], None), Err(Error::Format(_))));
        let mut buf = encode(&sample(2));
        buf[4] = 9;
        assert!(matches!(read_surfels(&buf[..], None), Err(Error::Format(_))));
        let buf = encode(&sample(2));
        assert!(matches!(read_surfels(&buf[..12], None), Err(Error::Format(_))));
    }

    #[test]
    fn file_round_trip_and_path_in_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.bsrf");
        let a = sample(33);
        assert_eq!(save_surfels(&a, &p).unwrap(), (HEADER_LEN + 33 * RECORD_LEN) as u64);
        assert_eq!(load_surfels(&p, None).unwrap(), a);
        let err = load_surfels(dir.path().join("missing.bsrf"), None).unwrap_err();
        assert!(err.to_string().contains("missing.bsrf"));
    }

    proptest! {
        #[test]
        fn any_prefix_equals_leading_elements(
            pts in prop::collection::vec((any::<f32>(), any::<f32>(), any::<f32>(), any::<[u8; 4]>()), 0..200),
            k in 0usize..250,
            cut in 0usize..6000,
        ) {
            let a = SurfelArray {
                surfels: pts.iter().map(|&(x, y, z, c)| Surfel { position: [x, y, z], normal: [z, x, y], color: c }).collect(),
                coverage: 0.25,
                source_resolution: 64,
            };
            let buf = encode(&a);
            let full = read_surfels(&buf[..], None).unwrap();
            // bit-level comparison, NaN payloads included
            prop_assert_eq!(encode(&full), buf.clone());
            let got = read_surfels(&buf[..], Some(k)).unwrap();
            prop_assert_eq!(encode(&got)[HEADER_LEN..].to_vec(), buf[HEADER_LEN..HEADER_LEN + RECORD_LEN * k.min(a.len())].to_vec());
            let cut = HEADER_LEN + cut.min(buf.len() - HEADER_LEN);
            let t = read_surfels(&buf[..cut], None).unwrap();
            prop_assert_eq!(t.len(), (cut - HEADER_LEN) / RECORD_LEN);
        }
    }
}
