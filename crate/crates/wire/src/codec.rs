//! Big-endian cursor types shared by every message, with field paths for error reports.

use byteorder::{BigEndian, ByteOrder, WriteBytesExt};

use crate::WireError;

/// A type with a fixed wire layout.
pub trait Wire: Sized {
    const NAME: &'static str;

    fn write(&self, w: &mut Writer) -> Result<(), WireError>;
    fn read(r: &mut Reader<'_>) -> Result<Self, WireError>;

    fn encode(&self) -> Result<Vec<u8>, WireError> {
        let mut w = Writer::default();
        self.write(&mut w)?;
        Ok(w.into_bytes())
    }

    /// Decodes exactly one value; leftover octets are an error.
    fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(bytes, Self::NAME);
        let value = Self::read(&mut r)?;
        r.finish()?;
        Ok(value)
    }
}

#[derive(Debug, Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u16(&mut self, v: u16) {
        self.buf.write_u16::<BigEndian>(v).expect("vec write");
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.write_u32::<BigEndian>(v).expect("vec write");
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.write_u64::<BigEndian>(v).expect("vec write");
    }

    pub fn pad(&mut self, n: usize) {
        self.buf.resize(self.buf.len() + n, 0);
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    /// Overwrites a length field written earlier as a placeholder.
    pub fn patch_u16(&mut self, at: usize, v: u16) {
        BigEndian::write_u16(&mut self.buf[at..at + 2], v);
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug)]
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: Vec<&'static str>,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8], root: &'static str) -> Self {
        Reader { buf, pos: 0, path: vec![root] }
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn path_to(&self, field: &str) -> String {
        let mut p = self.path.join(".");
        if !field.is_empty() {
            p.push('.');
            p.push_str(field);
        }
        p
    }

    pub fn invalid(&self, field: &str, reason: impl Into<String>) -> WireError {
        WireError::Invalid { path: self.path_to(field), offset: self.pos, reason: reason.into() }
    }

    /// Wraps an error about a value just read.
    pub fn fail(&self, field: &str, err: WireError) -> WireError {
        match err {
            WireError::Nanoseconds(_) => self.invalid(field, err.to_string()),
            other => other,
        }
    }

    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8], WireError> {
        if self.remaining() < n {
            return Err(WireError::Truncated {
                path: self.path_to(field),
                offset: self.buf.len(),
                needed: n - self.remaining(),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self, field: &str) -> Result<u8, WireError> {
        Ok(self.take(1, field)?[0])
    }

    pub fn u16(&mut self, field: &str) -> Result<u16, WireError> {
        Ok(BigEndian::read_u16(self.take(2, field)?))
    }

    pub fn u32(&mut self, field: &str) -> Result<u32, WireError> {
        Ok(BigEndian::read_u32(self.take(4, field)?))
    }

    pub fn u64(&mut self, field: &str) -> Result<u64, WireError> {
        Ok(BigEndian::read_u64(self.take(8, field)?))
    }

    pub fn bytes(&mut self, n: usize, field: &str) -> Result<&'a [u8], WireError> {
        self.take(n, field)
    }

    /// Skips padding. Non-zero pad octets are accepted and logged.
    pub fn pad(&mut self, n: usize, field: &str) -> Result<(), WireError> {
        let at = self.pos;
        let s = self.take(n, field)?;
        if s.iter().any(|&b| b != 0) {
            log::warn!("non-zero padding at offset {at} in {}", self.path_to(field));
        }
        Ok(())
    }

    pub fn peek_u16(&self, ahead: usize) -> Option<u16> {
        let at = self.pos + ahead;
        self.buf.get(at..at + 2).map(BigEndian::read_u16)
    }

    /// Runs `f` with `name` appended to the error path.
    pub fn scoped<T>(&mut self, name: &'static str, f: impl FnOnce(&mut Self) -> Result<T, WireError>) -> Result<T, WireError> {
        self.path.push(name);
        let out = f(self);
        self.path.pop();
        out
    }

    pub fn finish(&self) -> Result<(), WireError> {
        if self.remaining() > 0 {
            return Err(WireError::Trailing { offset: self.pos, extra: self.remaining() });
        }
        Ok(())
    }
}
