//! Byte-stream framing for protocol messages.
//!
//! The envelope already carries the payload length, so a stream transport
//! just reads the 10 fixed bytes, validates them, and then reads exactly
//! the declared payload. Works over anything `Read`/`Write`, including TCP
//! sockets and in-memory pipes; both carry the identical normative bytes.

use std::io::{self, Read, Write};

use super::codec::{ENVELOPE_LEN, MAGIC, MSG_QUERY, MSG_RESPONSE, VERSION};

/// Writes one already-encoded message to a stream.
pub fn write_message<W: Write>(writer: &mut W, message: &[u8]) -> io::Result<()> {
    writer.write_all(message)?;
    writer.flush()
}

/// Reads one framed message from a stream, returning the full message
/// bytes (envelope included) ready for `decode_query`/`decode_response`.
pub fn read_message<R: Read>(reader: &mut R) -> io::Result<Vec<u8>> {
    let mut head = [0u8; ENVELOPE_LEN];
    reader.read_exact(&mut head)?;
    if head[0..4] != MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
    }
    if head[4] != VERSION {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "unsupported version",
        ));
    }
    if head[5] != MSG_QUERY && head[5] != MSG_RESPONSE {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "unknown message type",
        ));
    }
    let len = u32::from_le_bytes(head[6..10].try_into().unwrap()) as usize;
    let mut message = head.to_vec();
    message.resize(ENVELOPE_LEN + len, 0);
    reader.read_exact(&mut message[ENVELOPE_LEN..])?;
    Ok(message)
}
