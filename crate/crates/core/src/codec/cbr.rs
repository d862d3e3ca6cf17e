//! `.cbr` tensor files, little-endian:
//!
//! ```text
//! "CBR1"  version:u32=1  domain:u32 (0 disk, 1 sphere)  rank:u32  dims:[u32; rank]
//! flags:u32 (bit 0 mask, bit 1 channel affine)
//! [scale_h scale_d offset_h offset_d : f32]   if bit 1
//! payload: f32 × prod(dims), row-major
//! mask: ceil(samples / 8) bytes, LSB first    if bit 0
//! ```

use std::path::Path;

use super::{ChannelAffine, CurvatureTensor};
use crate::confmap::DomainKind;
use crate::error::{Error, Result};

pub const CBR_MAGIC: &[u8; 4] = b"CBR1";
pub const CBR_VERSION: u32 = 1;
const FLAG_MASK: u32 = 1;
const FLAG_AFFINE: u32 = 2;
/// Refuse anything larger than this many values.
const MAX_VALUES: u64 = 1 << 32;

pub fn to_cbr_bytes(t: &CurvatureTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 4 * t.data.len());
    out.extend_from_slice(CBR_MAGIC);
    let put = |v: u32, out: &mut Vec<u8>| out.extend_from_slice(&v.to_le_bytes());
    put(CBR_VERSION, &mut out);
    put(if t.kind == DomainKind::Sphere { 1 } else { 0 }, &mut out);
    put(t.dims.len() as u32, &mut out);
    for &d in &t.dims {
        put(d as u32, &mut out);
    }
    let flags = if t.mask.is_some() { FLAG_MASK } else { 0 } | if t.affine.is_some() { FLAG_AFFINE } else { 0 };
    put(flags, &mut out);
    // the header stores f32 parameters; use exactly those
    let r32 = |v: f64| f64::from(v as f32);
    let aff = t
        .affine
        .map(|a| ChannelAffine { scale: a.scale.map(r32), offset: a.offset.map(r32) })
        .unwrap_or(ChannelAffine::identity());
    if t.affine.is_some() {
        for v in [aff.scale[0], aff.scale[1], aff.offset[0], aff.offset[1]] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    for (k, v) in t.data.iter().enumerate() {
        let c = k % 2;
        out.extend_from_slice(&((v * aff.scale[c] + aff.offset[c]) as f32).to_le_bytes());
    }
    if let Some(mask) = &t.mask {
        let mut bytes = vec![0u8; mask.len().div_ceil(8)];
        for (i, &m) in mask.iter().enumerate() {
            if m {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        out.extend_from_slice(&bytes);
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Truncated { expected: self.pos + n, found: self.buf.len() });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

pub fn from_cbr_bytes(buf: &[u8]) -> Result<CurvatureTensor> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4).map_err(|_| Error::BadMagic)? != CBR_MAGIC {
        return Err(Error::BadMagic);
    }
    let version = r.u32()?;
    if version != CBR_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let kind = match r.u32()? {
        0 => DomainKind::Disk,
        1 => DomainKind::Sphere,
        d => return Err(Error::DimMismatch(format!("unknown domain code {d}"))),
    };
    let rank = r.u32()? as usize;
    if rank == 0 || rank > 8 {
        return Err(Error::DimOverflow);
    }
    let mut dims = Vec::with_capacity(rank);
    let mut count: u64 = 1;
    for _ in 0..rank {
        let d = r.u32()?;
        count = count.checked_mul(d as u64).filter(|&c| c <= MAX_VALUES).ok_or(Error::DimOverflow)?;
        dims.push(d as usize);
    }
    let count = count as usize;
    let flags = r.u32()?;
    if flags & !(FLAG_MASK | FLAG_AFFINE) != 0 {
        return Err(Error::DimMismatch(format!("unknown flags {flags:#x}")));
    }
    let affine = if flags & FLAG_AFFINE != 0 {
        let v: Vec<f64> = (0..4).map(|_| r.f32().map(f64::from)).collect::<Result<_>>()?;
        if v[0] == 0.0 || v[1] == 0.0 {
            return Err(Error::InvalidArgument("zero channel scale".into()));
        }
        Some(ChannelAffine { scale: [v[0], v[1]], offset: [v[2], v[3]] })
    } else {
        None
    };
    let samples = if dims.last() == Some(&2) { count / 2 } else { count };
    let mask_bytes = if flags & FLAG_MASK != 0 { samples.div_ceil(8) } else { 0 };
    let expected = r.pos + 4 * count + mask_bytes;
    if buf.len() != expected {
        return Err(Error::Truncated { expected, found: buf.len() });
    }
    let aff = affine.unwrap_or(ChannelAffine::identity());
    let mut data = Vec::with_capacity(count);
    for k in 0..count {
        let c = k % 2;
        data.push((f64::from(r.f32()?) - aff.offset[c]) / aff.scale[c]);
    }
    let mask = if mask_bytes > 0 {
        let bytes = r.take(mask_bytes)?;
        Some((0..samples).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
    } else {
        None
    };
    let mut t = CurvatureTensor::new(kind, dims, data)?;
    t.mask = mask;
    t.affine = affine;
    Ok(t)
}

pub fn write_cbr(t: &CurvatureTensor, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_cbr_bytes(t))?;
    Ok(())
}

pub fn read_cbr(path: impl AsRef<Path>) -> Result<CurvatureTensor> {
    from_cbr_bytes(&std::fs::read(path)?)
}
