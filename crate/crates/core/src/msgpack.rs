//! Minimal MessagePack encoder/decoder for the dictionary file format.
//!
//! The file only ever contains maps, arrays, unsigned integers, and UTF-8
//! strings, so this module implements exactly that subset. The encoder always
//! picks the shortest representation for a value, which is what makes
//! dictionary builds byte-for-byte reproducible; a general-purpose library
//! would be free to pick any legal encoding.

use std::fmt;
use std::io::{self, Write};

/// Writes a map header for `len` key/value pairs.
pub(crate) fn write_map_len(w: &mut impl Write, len: usize) -> io::Result<()> {
    if len < 0x10 {
        w.write_all(&[0x80 | len as u8])
    } else if len <= 0xffff {
        w.write_all(&[0xde])?;
        w.write_all(&(len as u16).to_be_bytes())
    } else {
        w.write_all(&[0xdf])?;
        w.write_all(&u32::try_from(len).expect("map too large").to_be_bytes())
    }
}

/// Writes an array header for `len` elements.
pub(crate) fn write_array_len(w: &mut impl Write, len: usize) -> io::Result<()> {
    if len < 0x10 {
        w.write_all(&[0x90 | len as u8])
    } else if len <= 0xffff {
        w.write_all(&[0xdc])?;
        w.write_all(&(len as u16).to_be_bytes())
    } else {
        w.write_all(&[0xdd])?;
        w.write_all(&u32::try_from(len).expect("array too large").to_be_bytes())
    }
}

/// Writes an unsigned integer in its shortest encoding.
pub(crate) fn write_uint(w: &mut impl Write, value: u64) -> io::Result<()> {
    if value < 0x80 {
        w.write_all(&[value as u8])
    } else if value <= 0xff {
        w.write_all(&[0xcc, value as u8])
    } else if value <= 0xffff {
        w.write_all(&[0xcd])?;
        w.write_all(&(value as u16).to_be_bytes())
    } else if value <= 0xffff_ffff {
        w.write_all(&[0xce])?;
        w.write_all(&(value as u32).to_be_bytes())
    } else {
        w.write_all(&[0xcf])?;
        w.write_all(&value.to_be_bytes())
    }
}

/// Writes a UTF-8 string in its shortest encoding.
pub(crate) fn write_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    let len = s.len();
    if len < 0x20 {
        w.write_all(&[0xa0 | len as u8])?;
    } else if len <= 0xff {
        w.write_all(&[0xd9, len as u8])?;
    } else if len <= 0xffff {
        w.write_all(&[0xda])?;
        w.write_all(&(len as u16).to_be_bytes())?;
    } else {
        w.write_all(&[0xdb])?;
        w.write_all(&u32::try_from(len).expect("string too large").to_be_bytes())?;
    }
    w.write_all(s.as_bytes())
}

/// Error produced when a byte stream is not the MessagePack subset we expect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum DecodeError {
    /// The buffer ended in the middle of a value.
    UnexpectedEof { offset: usize },
    /// The next value is not of the type the format calls for at this spot.
    UnexpectedMarker {
        offset: usize,
        marker: u8,
        expected: &'static str,
    },
    /// A string value holds bytes that are not valid UTF-8.
    InvalidUtf8 { offset: usize },
}

impl DecodeError {
    /// Byte offset at which decoding failed.
    pub(crate) fn offset(&self) -> usize {
        match *self {
            DecodeError::UnexpectedEof { offset }
            | DecodeError::UnexpectedMarker { offset, .. }
            | DecodeError::InvalidUtf8 { offset } => offset,
        }
    }
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::UnexpectedEof { offset } => {
                write!(f, "unexpected end of data at byte {offset}")
            }
            DecodeError::UnexpectedMarker {
                offset,
                marker,
                expected,
            } => write!(
                f,
                "expected {expected} at byte {offset}, found marker 0x{marker:02x}"
            ),
            DecodeError::InvalidUtf8 { offset } => {
                write!(f, "string at byte {offset} is not valid UTF-8")
            }
        }
    }
}

impl std::error::Error for DecodeError {}

/// Cursor over a byte slice that decodes the subset written above.
pub(crate) struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Decoder { buf, pos: 0 }
    }

    /// Current byte offset, for error reporting.
    pub(crate) fn position(&self) -> usize {
        self.pos
    }

    /// True once every byte has been consumed.
    pub(crate) fn is_at_end(&self) -> bool {
        self.pos == self.buf.len()
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.buf.len())
            .ok_or(DecodeError::UnexpectedEof { offset: self.pos })?;
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn byte(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn be_u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn be_u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn read_map_len(&mut self) -> Result<usize, DecodeError> {
        let offset = self.pos;
        let marker = self.byte()?;
        match marker {
            0x80..=0x8f => Ok((marker & 0x0f) as usize),
            0xde => Ok(self.be_u16()? as usize),
            0xdf => Ok(self.be_u32()? as usize),
            _ => Err(DecodeError::UnexpectedMarker {
                offset,
                marker,
                expected: "a map",
            }),
        }
    }

    pub(crate) fn read_array_len(&mut self) -> Result<usize, DecodeError> {
        let offset = self.pos;
        let marker = self.byte()?;
        match marker {
            0x90..=0x9f => Ok((marker & 0x0f) as usize),
            0xdc => Ok(self.be_u16()? as usize),
            0xdd => Ok(self.be_u32()? as usize),
            _ => Err(DecodeError::UnexpectedMarker {
                offset,
                marker,
                expected: "an array",
            }),
        }
    }

    pub(crate) fn read_uint(&mut self) -> Result<u64, DecodeError> {
        let offset = self.pos;
        let marker = self.byte()?;
        match marker {
            0x00..=0x7f => Ok(marker as u64),
            0xcc => Ok(self.byte()? as u64),
            0xcd => Ok(self.be_u16()? as u64),
            0xce => Ok(self.be_u32()? as u64),
            0xcf => Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap())),
            _ => Err(DecodeError::UnexpectedMarker {
                offset,
                marker,
                expected: "an unsigned integer",
            }),
        }
    }

    pub(crate) fn read_str(&mut self) -> Result<&'a str, DecodeError> {
        let offset = self.pos;
        let marker = self.byte()?;
        let len = match marker {
            0xa0..=0xbf => (marker & 0x1f) as usize,
            0xd9 => self.byte()? as usize,
            0xda => self.be_u16()? as usize,
            0xdb => self.be_u32()? as usize,
            _ => {
                return Err(DecodeError::UnexpectedMarker {
                    offset,
                    marker,
                    expected: "a string",
                })
            }
        };
        let start = self.pos;
        let bytes = self.take(len)?;
        std::str::from_utf8(bytes).map_err(|_| DecodeError::InvalidUtf8 { offset: start })
    }
}
