//! The proper code for extended natural numbers `{-1, 0, 1, 2, ...}`.
//!
//! Codewords fall into two subtrees:
//!
//! * `0` followed by the `c1 - 1` bit big-endian binary of `n + 1`, for
//!   `-1 <= n <= m`. All of these have length `c1 = ceil(log2(m + 2)) + 1`.
//! * `10` followed by the Elias delta codeword of `j`, for `n = m + j`,
//!   `j >= 1`. The length is `floor(log2 j) + 2 floor(log2(floor(log2 j) + 1)) + 3`.
//!
//! The prefix `11` is unused, so the Kraft sum of the whole code is at most 3/4.

use crate::bits::{BitReader, BitString};
use crate::error::{Error, Result};

/// Largest rank whose Elias delta codeword we are prepared to read back.
const MAX_RANK_BITS: u64 = 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PsiCode {
    m: u32,
    c1: u32,
}

fn floor_log2(n: u64) -> u32 {
    debug_assert!(n > 0);
    63 - n.leading_zeros()
}

fn ceil_log2(n: u64) -> u32 {
    debug_assert!(n > 0);
    if n == 1 {
        0
    } else {
        floor_log2(n - 1) + 1
    }
}

/// Length of the Elias delta codeword of `j >= 1`.
fn elias_delta_len(j: u64) -> u64 {
    let l = floor_log2(j);
    u64::from(l + 2 * floor_log2(u64::from(l) + 1) + 1)
}

fn write_elias_delta(out: &mut BitString, j: u64) {
    let bits = floor_log2(j) + 1;
    let header_bits = floor_log2(u64::from(bits));
    out.push_bits(0, header_bits);
    out.push_bits(u64::from(bits), header_bits + 1);
    out.push_bits(j, bits - 1);
}

fn read_elias_delta(reader: &mut BitReader<'_>) -> Result<u64> {
    let mut zeros = 0u32;
    loop {
        match reader.read_bit() {
            Some(false) => {
                zeros += 1;
                if zeros > 6 {
                    return Err(Error::Corrupt("Elias delta header too long".into()));
                }
            }
            Some(true) => break,
            None => return Err(Error::Truncated("inside Elias delta header".into())),
        }
    }
    let rest = reader
        .read_bits(zeros)
        .ok_or_else(|| Error::Truncated("inside Elias delta length".into()))?;
    let bits = (1u64 << zeros) | rest;
    if bits > MAX_RANK_BITS + 1 {
        return Err(Error::Corrupt(format!(
            "rank of {bits} bits is out of range"
        )));
    }
    let low = reader
        .read_bits(bits as u32 - 1)
        .ok_or_else(|| Error::Truncated("inside Elias delta body".into()))?;
    Ok((1u64 << (bits - 1)) | low)
}

impl PsiCode {
    /// Builds the code for an alphabet of `m` terminal symbols.
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("alphabet size must be at least 1".into()));
        }
        let c1 = ceil_log2(u64::from(m) + 2) + 1;
        Ok(Self { m, c1 })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Common codeword length of the symbols `-1..=m`.
    pub fn c1(&self) -> u32 {
        self.c1
    }

    /// Smallest integer `c2` with `|psi(j + m)| <= log2 j + 2 log2 log2 j + c2`
    /// for every `j >= 2`. The supremum is attained at `j = 2`.
    pub const fn c2(&self) -> u32 {
        5
    }

    /// Codeword length of the rank `j >= 1`, i.e. of symbol `m + j`.
    pub fn rank_length(&self, j: u64) -> u64 {
        debug_assert!(j >= 1);
        2 + elias_delta_len(j)
    }

    /// Codeword length of `n`, without building the codeword.
    pub fn length(&self, n: i64) -> Result<u64> {
        if n < -1 {
            return Err(Error::Domain(format!("{n} is not an extended natural")));
        }
        if n <= i64::from(self.m) {
            Ok(u64::from(self.c1))
        } else {
            Ok(self.rank_length((n - i64::from(self.m)) as u64))
        }
    }

    pub fn encode(&self, n: i64) -> Result<BitString> {
        let mut out = BitString::with_capacity(u64::from(self.c1));
        self.encode_into(n, &mut out)?;
        Ok(out)
    }

    /// Appends the codeword of `n` to `out`.
    pub fn encode_into(&self, n: i64, out: &mut BitString) -> Result<()> {
        if n < -1 {
            return Err(Error::Domain(format!("{n} is not an extended natural")));
        }
        if n <= i64::from(self.m) {
            out.push(false);
            out.push_bits((n + 1) as u64, self.c1 - 1);
        } else {
            let j = (n - i64::from(self.m)) as u64;
            if floor_log2(j) as u64 > MAX_RANK_BITS {
                return Err(Error::Domain(format!("rank {j} is too large")));
            }
            out.push(true);
            out.push(false);
            write_elias_delta(out, j);
        }
        Ok(())
    }

    /// Reads one codeword and advances the cursor past it.
    pub fn decode(&self, reader: &mut BitReader<'_>) -> Result<i64> {
        match reader.read_bit() {
            None => Err(Error::Truncated("expected a codeword".into())),
            Some(false) => {
                let v = reader
                    .read_bits(self.c1 - 1)
                    .ok_or_else(|| Error::Truncated("inside fixed-length codeword".into()))?;
                if v > u64::from(self.m) + 1 {
                    return Err(Error::Corrupt(format!(
                        "fixed-length codeword {v} exceeds alphabet of {}",
                        self.m
                    )));
                }
                Ok(v as i64 - 1)
            }
            Some(true) => match reader.read_bit() {
                None => Err(Error::Truncated("inside codeword prefix".into())),
                Some(true) => Err(Error::Corrupt("unused codeword prefix 11".into())),
                Some(false) => {
                    let j = read_elias_delta(reader)?;
                    Ok(i64::from(self.m) + j as i64)
                }
            },
        }
    }
}

const MAGIC: &[u8; 4] = b"MBLK";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 2 + 8;

/// Wraps a payload into the `MBLK` container: magic, version, big-endian
/// `u16` alphabet size, big-endian `u64` bit length, packed payload.
pub fn write_container(code: &PsiCode, payload: &BitString) -> Result<Vec<u8>> {
    let m = u16::try_from(code.m()).map_err(|_| {
        Error::Domain(format!(
            "alphabet size {} does not fit the container",
            code.m()
        ))
    })?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.as_bytes().len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&m.to_be_bytes());
    out.extend_from_slice(&payload.len().to_be_bytes());
    out.extend_from_slice(payload.as_bytes());
    Ok(out)
}

pub fn read_container(data: &[u8]) -> Result<(PsiCode, BitString)> {
    if data.len() < HEADER_LEN {
        return Err(Error::Truncated("container header".into()));
    }
    if &data[..4] != MAGIC {
        return Err(Error::Corrupt("bad magic".into()));
    }
    if data[4] != VERSION {
        return Err(Error::Corrupt(format!("unsupported version {}", data[4])));
    }
    let m = u16::from_be_bytes([data[5], data[6]]);
    let bit_len = u64::from_be_bytes(data[7..15].try_into().unwrap());
    let body = &data[HEADER_LEN..];
    let need = bit_len.div_ceil(8);
    if (body.len() as u64) < need {
        return Err(Error::Truncated("container payload".into()));
    }
    if body.len() as u64 > need {
        return Err(Error::Corrupt("trailing bytes after payload".into()));
    }
    let code =
        PsiCode::new(u32::from(m)).map_err(|_| Error::Corrupt("zero alphabet size".into()))?;
    Ok((code, BitString::from_bytes(body.to_vec(), bit_len)?))
}
