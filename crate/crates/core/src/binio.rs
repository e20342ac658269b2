// SPDX-License-Identifier: Apache-2.0

//! Little-endian primitives shared by the graph and index containers.
//!
//! A container is `magic ‖ version ‖ sections… ‖ crc32`, where each section
//! is a `u64` byte length followed by its payload. The trailing CRC-32 covers
//! every preceding byte.

use crate::error::{Error, Result};

#[derive(Default)]
pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn container(magic: &[u8], version: u8) -> Self {
        let mut buf = Vec::with_capacity(1024);
        buf.extend_from_slice(magic);
        buf.push(version);
        Self { buf }
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    /// Writes a length-prefixed section whose payload is produced by `f`.
    pub fn section(&mut self, f: impl FnOnce(&mut Writer)) {
        let at = self.buf.len();
        self.u64(0);
        f(self);
        let len = (self.buf.len() - at - 8) as u64;
        self.buf[at..at + 8].copy_from_slice(&len.to_le_bytes());
    }

    pub fn finish(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf);
        self.u32(crc);
        self.buf
    }
}

pub(crate) struct Reader<'a> {
    kind: &'static str,
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Validates magic, version and checksum, and positions the reader at
    /// the first section.
    pub fn container(kind: &'static str, bytes: &'a [u8], magic: &[u8], version: u8) -> Result<Self> {
        let header = magic.len() + 1;
        if bytes.len() < header + 4 {
            return Err(Error::Format {
                kind,
                msg: format!("file too short ({} bytes)", bytes.len()),
            });
        }
        if &bytes[..magic.len()] != magic {
            return Err(Error::Format {
                kind,
                msg: "bad magic bytes".into(),
            });
        }
        let found = bytes[magic.len()];
        if found != version {
            return Err(Error::Format {
                kind,
                msg: format!("unsupported format version {found} (expected {version})"),
            });
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().unwrap());
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(Error::Checksum { kind, stored, computed });
        }
        Ok(Self {
            kind,
            data: body,
            pos: header,
        })
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format {
            kind: self.kind,
            msg: msg.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(self.err(format!("unexpected end of data at offset {}", self.pos)));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn len_u32(&mut self) -> Result<usize> {
        let n = self.u32()? as usize;
        // every element occupies at least one byte
        if n > self.data.len() - self.pos {
            return Err(self.err(format!("implausible element count {n}")));
        }
        Ok(n)
    }

    pub fn str(&mut self) -> Result<String> {
        let n = self.len_u32()?;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| self.err("invalid UTF-8 string"))
    }

    /// Runs `f` over the next section and checks it consumed exactly the
    /// declared length.
    pub fn section<T>(&mut self, name: &str, f: impl FnOnce(&mut Reader<'a>) -> Result<T>) -> Result<T> {
        let len = self.u64()? as usize;
        let start = self.pos;
        if self.data.len() - start < len {
            return Err(self.err(format!("section {name} overruns the file")));
        }
        let v = f(self)?;
        if self.pos - start != len {
            return Err(self.err(format!(
                "section {name} length mismatch: declared {len}, read {}",
                self.pos - start
            )));
        }
        Ok(v)
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(self.err(format!("{} trailing bytes", self.data.len() - self.pos)));
        }
        Ok(())
    }

    pub fn format_error(&self, msg: impl Into<String>) -> Error {
        self.err(msg)
    }
}
