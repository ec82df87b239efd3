//! `MSF1` sequence files: 4-byte magic, `u16` version, `u64` start ordinal,
//! `u64` bit length (all little-endian), then the bits packed LSB-first,
//! padded with zero bits to a whole byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::bits::BitSequence;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"MSF1";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8 + 8;

pub fn write_sequence(seq: &BitSequence, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&seq.start_ordinal().to_le_bytes())?;
    w.write_all(&seq.len().to_le_bytes())?;
    let nbytes = seq.len().div_ceil(8) as usize;
    let mut written = 0;
    for word in seq.words() {
        let b = word.to_le_bytes();
        let k = (nbytes - written).min(8);
        w.write_all(&b[..k])?;
        written += k;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sequence(path: impl AsRef<Path>) -> Result<BitSequence> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; HEADER_LEN];
    read_full(&mut r, &mut head, "header")?;
    if head[..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &head[..4])));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let start = u64::from_le_bytes(head[6..14].try_into().unwrap());
    let len = u64::from_le_bytes(head[14..22].try_into().unwrap());
    if start == 0 {
        return Err(Error::Format("start ordinal 0".into()));
    }
    let nbytes = len.div_ceil(8) as usize;
    let mut payload = vec![0u8; nbytes];
    read_full(&mut r, &mut payload, "payload")?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    if len % 8 != 0 && payload[nbytes - 1] >> (len % 8) != 0 {
        return Err(Error::Format("nonzero pad bits".into()));
    }
    let words = payload
        .chunks(8)
        .map(|c| {
            let mut b = [0u8; 8];
            b[..c.len()].copy_from_slice(c);
            u64::from_le_bytes(b)
        })
        .collect();
    BitSequence::from_words(start, len, words).map_err(|e| Error::Format(e.to_string()))
}

fn read_full(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format(format!("truncated {what}")),
        _ => Error::Io(e),
    })
}
