//! Little-endian binary tensor container used by checkpoints.
//!
//! Layout: magic `"VTTM"`, one dtype byte (0 = f32, 1 = f64), one rank
//! byte, `rank` u64 dimension sizes, then the raw values.

use std::io::{Read, Write};

use super::{Data, DType, Tensor};
use crate::error::{Result, VittmError};

const MAGIC: &[u8; 4] = b"VTTM";
// Corrupt headers should fail fast instead of triggering huge allocations.
const MAX_ELEMENTS: u64 = 1 << 33;

pub fn write_tensor<W: Write>(w: &mut W, t: &Tensor) -> Result<()> {
    w.write_all(MAGIC)?;
    let dtype_tag: u8 = match t.dtype() {
        DType::F32 => 0,
        DType::F64 => 1,
    };
    w.write_all(&[dtype_tag, t.rank() as u8])?;
    for &d in t.shape() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    match t.data() {
        Data::F32(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Data::F64(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_tensor<R: Read>(r: &mut R) -> Result<Tensor> {
    let mut magic = [0u8; 4];
    read_exact(r, &mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(VittmError::Format(format!(
            "bad tensor magic {:?}, expected \"VTTM\"",
            magic
        )));
    }
    let mut head = [0u8; 2];
    read_exact(r, &mut head, "dtype/rank header")?;
    let dtype = match head[0] {
        0 => DType::F32,
        1 => DType::F64,
        tag => return Err(VittmError::Format(format!("unknown dtype tag {tag}"))),
    };
    let rank = head[1] as usize;
    let mut shape = Vec::with_capacity(rank);
    let mut numel: u64 = 1;
    for _ in 0..rank {
        let mut b = [0u8; 8];
        read_exact(r, &mut b, "dimension")?;
        let d = u64::from_le_bytes(b);
        numel = numel
            .checked_mul(d)
            .filter(|&n| n <= MAX_ELEMENTS)
            .ok_or_else(|| VittmError::Format("tensor dimensions overflow".into()))?;
        shape.push(d as usize);
    }
    let numel = numel as usize;
    let data = match dtype {
        DType::F32 => {
            let mut v = vec![0f32; numel];
            for x in v.iter_mut() {
                let mut b = [0u8; 4];
                read_exact(r, &mut b, "f32 payload")?;
                *x = f32::from_le_bytes(b);
            }
            Data::F32(v)
        }
        DType::F64 => {
            let mut v = vec![0f64; numel];
            for x in v.iter_mut() {
                let mut b = [0u8; 8];
                read_exact(r, &mut b, "f64 payload")?;
                *x = f64::from_le_bytes(b);
            }
            Data::F64(v)
        }
    };
    Ok(Tensor::from_data(shape, data))
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| VittmError::Format(format!("truncated tensor ({what}): {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_bits() {
        for t in [
            Tensor::new_f64(&[2, 3], vec![1.0, -2.5, 3e-300, f64::MIN_POSITIVE, 0.0, -0.0]).unwrap(),
            Tensor::new_f32(&[4], vec![1.5, -0.0, f32::MAX, 1e-40]).unwrap(),
        ] {
            let mut buf = Vec::new();
            write_tensor(&mut buf, &t).unwrap();
            let back = read_tensor(&mut buf.as_slice()).unwrap();
            assert!(t.bitwise_eq(&back));
        }
    }

    #[test]
    fn bad_magic_and_truncation_are_format_errors() {
        let t = Tensor::ones(&[3], DType::F64);
        let mut buf = Vec::new();
        write_tensor(&mut buf, &t).unwrap();

        let mut corrupt = buf.clone();
        corrupt[0] = b'X';
        assert!(matches!(
            read_tensor(&mut corrupt.as_slice()),
            Err(VittmError::Format(_))
        ));

        let truncated = &buf[..buf.len() - 3];
        assert!(matches!(
            read_tensor(&mut &truncated[..]),
            Err(VittmError::Format(_))
        ));
    }
}
