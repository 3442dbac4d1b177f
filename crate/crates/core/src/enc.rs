//! Canonical byte encoding used everywhere bit-exactness matters: ledger
//! payloads, block hashing, credentials, presentations, wallet backups.
//!
//! Rules (documented in README "Canonical serialization"):
//! - fields appear in declared order, each preceded by its length-prefixed
//!   field name;
//! - byte strings and UTF-8 strings are prefixed with a big-endian u32 length;
//! - fixed-width integers are big-endian (u32/u64);
//! - big integers are minimal big-endian byte strings, length-prefixed;
//! - lists are a big-endian u32 count followed by the items.
//!
//! Decoding is strict: a field name that does not match the declared order,
//! a trailing byte, or a truncated buffer is an error. The ledger's public
//! object guard relies on this strictness.

use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("unexpected end of input at offset {0}")]
    Truncated(usize),
    #[error("expected field `{expected}`, found `{found}`")]
    FieldMismatch { expected: String, found: String },
    #[error("invalid utf-8 in string field")]
    BadUtf8,
    #[error("trailing bytes after value ({0} left)")]
    TrailingBytes(usize),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Default, Clone)]
pub struct Enc {
    buf: Vec<u8>,
}

impl Enc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_bool(&mut self, v: bool) {
        self.buf.push(v as u8);
    }

    pub fn put_bytes(&mut self, b: &[u8]) {
        self.put_u32(b.len() as u32);
        self.buf.extend_from_slice(b);
    }

    pub fn put_str(&mut self, s: &str) {
        self.put_bytes(s.as_bytes());
    }

    pub fn put_int(&mut self, x: &BigUint) {
        self.put_bytes(&x.to_bytes_be());
    }

    /// Announce the next field by name. Decoders check the name.
    pub fn field(&mut self, name: &str) -> &mut Self {
        self.put_str(name);
        self
    }

    pub fn put_count(&mut self, n: usize) {
        self.put_u32(n as u32);
    }
}

pub struct Dec<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Dec<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.pos + n > self.data.len() {
            return Err(DecodeError::Truncated(self.pos));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn bool(&mut self) -> Result<bool, DecodeError> {
        match self.take(1)?[0] {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(DecodeError::Invalid(format!("bad bool byte {b}"))),
        }
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], DecodeError> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    pub fn str(&mut self) -> Result<&'a str, DecodeError> {
        std::str::from_utf8(self.bytes()?).map_err(|_| DecodeError::BadUtf8)
    }

    pub fn int(&mut self) -> Result<BigUint, DecodeError> {
        Ok(BigUint::from_bytes_be(self.bytes()?))
    }

    pub fn count(&mut self) -> Result<usize, DecodeError> {
        Ok(self.u32()? as usize)
    }

    /// Read a field name and require it to match the declared order.
    pub fn field(&mut self, name: &str) -> Result<(), DecodeError> {
        let found = self.str()?;
        if found != name {
            return Err(DecodeError::FieldMismatch {
                expected: name.to_string(),
                found: found.to_string(),
            });
        }
        Ok(())
    }

    pub fn fixed<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let b = self.bytes()?;
        b.try_into()
            .map_err(|_| DecodeError::Invalid(format!("expected {N} bytes, got {}", b.len())))
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        if self.remaining() != 0 {
            return Err(DecodeError::TrailingBytes(self.remaining()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_primitives() {
        let mut e = Enc::new();
        e.put_u64(77);
        e.field("name").put_str("Alice");
        e.put_int(&BigUint::from(1234567890u64));
        e.put_bool(true);
        let bytes = e.into_bytes();

        let mut d = Dec::new(&bytes);
        assert_eq!(d.u64().unwrap(), 77);
        d.field("name").unwrap();
        assert_eq!(d.str().unwrap(), "Alice");
        assert_eq!(d.int().unwrap(), BigUint::from(1234567890u64));
        assert!(d.bool().unwrap());
        d.finish().unwrap();
    }

    #[test]
    fn strict_field_order() {
        let mut e = Enc::new();
        e.field("customer_name").put_str("Alice");
        let bytes = e.into_bytes();
        let mut d = Dec::new(&bytes);
        let err = d.field("schema_id").unwrap_err();
        assert!(matches!(err, DecodeError::FieldMismatch { .. }));
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut e = Enc::new();
        e.put_u32(1);
        e.put_u32(2);
        let bytes = e.into_bytes();
        let mut d = Dec::new(&bytes);
        d.u32().unwrap();
        assert_eq!(d.finish().unwrap_err(), DecodeError::TrailingBytes(4));
    }

    #[test]
    fn truncation_detected() {
        let mut d = Dec::new(&[0, 0, 0, 9, b'x']);
        assert!(matches!(d.bytes().unwrap_err(), DecodeError::Truncated(_)));
    }
}
