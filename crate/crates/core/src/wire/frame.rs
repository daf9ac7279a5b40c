// SPDX-License-Identifier: Apache-2.0

//! Frame layout: `u32` big-endian length (tag plus payload), `u8` tag,
//! payload. Bit arrays are a `u32` count followed by the bits packed most
//! significant first, zero padded.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::bits::{pack_bits, unpack_bits};

/// Largest accepted value of the length field.
pub const MAX_FRAME_LEN: usize = 1 << 24;

const HELLO: u8 = 0x01;
const PHOTON_BATCH_REQ: u8 = 0x02;
const MEASURE_SUBMIT: u8 = 0x03;
const OUTCOME_BATCH: u8 = 0x04;
const DECLARATION: u8 = 0x05;
const SIFT_ACK: u8 = 0x06;
const SHIFT: u8 = 0x07;
const CIPHERTEXT: u8 = 0x08;
const ERROR: u8 = 0x7F;

/// Codes carried by `Message::Error`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ErrorCode {
    Phase = 1,
    InvalidParams = 2,
    Decode = 3,
    RestartsExhausted = 4,
    Internal = 5,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    /// Session parameters, Bob to Alice. Angle and loss travel as IEEE-754 bits.
    Hello { theta: f64, n_items: u32, k: u32, loss: f64 },
    /// Alice asks for `count` photons.
    PhotonBatchReq { count: u32 },
    /// Alice's basis per photon of the batch (`true` for the primed basis).
    MeasureSubmit { bases: Vec<bool> },
    /// Per photon: arrival flag and outcome (zero when lost). Shorter than
    /// the request when the raw key completes inside the batch.
    OutcomeBatch { received: Vec<bool>, outcomes: Vec<bool> },
    /// Bob's letter per retained photon.
    Declaration { letters: Vec<bool> },
    /// Number of conclusive raw results; Alice's positions stay private.
    SiftAck { conclusive: u64 },
    Shift { s: u32 },
    Ciphertext { bits: Vec<bool> },
    Error { code: u8, message: String },
}

impl Message {
    pub fn tag(&self) -> u8 {
        match self {
            Message::Hello { .. } => HELLO,
            Message::PhotonBatchReq { .. } => PHOTON_BATCH_REQ,
            Message::MeasureSubmit { .. } => MEASURE_SUBMIT,
            Message::OutcomeBatch { .. } => OUTCOME_BATCH,
            Message::Declaration { .. } => DECLARATION,
            Message::SiftAck { .. } => SIFT_ACK,
            Message::Shift { .. } => SHIFT,
            Message::Ciphertext { .. } => CIPHERTEXT,
            Message::Error { .. } => ERROR,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Message::Hello { .. } => "HELLO",
            Message::PhotonBatchReq { .. } => "PHOTON_BATCH_REQ",
            Message::MeasureSubmit { .. } => "MEASURE_SUBMIT",
            Message::OutcomeBatch { .. } => "OUTCOME_BATCH",
            Message::Declaration { .. } => "DECLARATION",
            Message::SiftAck { .. } => "SIFT_ACK",
            Message::Shift { .. } => "SHIFT",
            Message::Ciphertext { .. } => "CIPHERTEXT",
            Message::Error { .. } => "ERROR",
        }
    }

    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Message::Error {
            code: code as u8,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("truncated frame")]
    Truncated,
    #[error("frame length {0} outside 1..={MAX_FRAME_LEN}")]
    Oversize(usize),
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("malformed {what} payload: {detail}")]
    Malformed { what: &'static str, detail: String },
    #[error("protocol phase violation: expected {expected}, got {got}")]
    Phase { expected: &'static str, got: &'static str },
    #[error("peer aborted with code {code}: {message}")]
    Peer { code: u8, message: String },
    #[error("peer disconnected")]
    Disconnected,
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn put_bits(out: &mut Vec<u8>, bits: &[bool]) -> Result<(), WireError> {
    let n = u32::try_from(bits.len()).map_err(|_| WireError::Oversize(bits.len()))?;
    out.extend_from_slice(&n.to_be_bytes());
    out.extend(pack_bits(bits.iter().copied()));
    Ok(())
}

/// Serializes one message into a complete frame.
pub fn encode_frame(msg: &Message) -> Result<Vec<u8>, WireError> {
    let mut body = vec![msg.tag()];
    match msg {
        Message::Hello { theta, n_items, k, loss } => {
            body.extend_from_slice(&theta.to_bits().to_be_bytes());
            body.extend_from_slice(&n_items.to_be_bytes());
            body.extend_from_slice(&k.to_be_bytes());
            body.extend_from_slice(&loss.to_bits().to_be_bytes());
        }
        Message::PhotonBatchReq { count } => body.extend_from_slice(&count.to_be_bytes()),
        Message::MeasureSubmit { bases } => put_bits(&mut body, bases)?,
        Message::OutcomeBatch { received, outcomes } => {
            if received.len() != outcomes.len() {
                return Err(WireError::Malformed {
                    what: "OUTCOME_BATCH",
                    detail: "flag and outcome counts differ".into(),
                });
            }
            put_bits(&mut body, received)?;
            put_bits(&mut body, outcomes)?;
        }
        Message::Declaration { letters } => put_bits(&mut body, letters)?,
        Message::SiftAck { conclusive } => body.extend_from_slice(&conclusive.to_be_bytes()),
        Message::Shift { s } => body.extend_from_slice(&s.to_be_bytes()),
        Message::Ciphertext { bits } => put_bits(&mut body, bits)?,
        Message::Error { code, message } => {
            body.push(*code);
            body.extend_from_slice(message.as_bytes());
        }
    }
    if body.len() > MAX_FRAME_LEN {
        return Err(WireError::Oversize(body.len()));
    }
    let mut frame = Vec::with_capacity(4 + body.len());
    frame.extend_from_slice(&(body.len() as u32).to_be_bytes());
    frame.extend(body);
    Ok(frame)
}

struct Cursor<'a> {
    what: &'static str,
    rest: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.rest.len() < n {
            return Err(self.malformed(format!("needs {n} more byte(s), has {}", self.rest.len())));
        }
        let (head, tail) = self.rest.split_at(n);
        self.rest = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn bits(&mut self) -> Result<Vec<bool>, WireError> {
        let n = self.u32()? as usize;
        let bytes = self.take(n.div_ceil(8))?;
        unpack_bits(bytes, n).ok_or_else(|| self.malformed("nonzero padding bits".into()))
    }

    fn finish(self) -> Result<(), WireError> {
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(self.malformed(format!("{} trailing byte(s)", self.rest.len())))
        }
    }

    fn malformed(&self, detail: String) -> WireError {
        WireError::Malformed { what: self.what, detail }
    }
}

fn decode_body(tag: u8, payload: &[u8]) -> Result<Message, WireError> {
    let what = match tag {
        HELLO => "HELLO",
        PHOTON_BATCH_REQ => "PHOTON_BATCH_REQ",
        MEASURE_SUBMIT => "MEASURE_SUBMIT",
        OUTCOME_BATCH => "OUTCOME_BATCH",
        DECLARATION => "DECLARATION",
        SIFT_ACK => "SIFT_ACK",
        SHIFT => "SHIFT",
        CIPHERTEXT => "CIPHERTEXT",
        ERROR => "ERROR",
        other => return Err(WireError::UnknownType(other)),
    };
    let mut c = Cursor { what, rest: payload };
    let msg = match tag {
        HELLO => Message::Hello {
            theta: f64::from_bits(c.u64()?),
            n_items: c.u32()?,
            k: c.u32()?,
            loss: f64::from_bits(c.u64()?),
        },
        PHOTON_BATCH_REQ => Message::PhotonBatchReq { count: c.u32()? },
        MEASURE_SUBMIT => Message::MeasureSubmit { bases: c.bits()? },
        OUTCOME_BATCH => {
            let received = c.bits()?;
            let outcomes = c.bits()?;
            if received.len() != outcomes.len() {
                return Err(c.malformed("flag and outcome counts differ".into()));
            }
            Message::OutcomeBatch { received, outcomes }
        }
        DECLARATION => Message::Declaration { letters: c.bits()? },
        SIFT_ACK => Message::SiftAck { conclusive: c.u64()? },
        SHIFT => Message::Shift { s: c.u32()? },
        CIPHERTEXT => Message::Ciphertext { bits: c.bits()? },
        _ => {
            let code = c.take(1)?[0];
            let text = std::str::from_utf8(c.rest).map_err(|e| c.malformed(e.to_string()))?;
            c.rest = &[];
            Message::Error {
                code,
                message: text.to_owned(),
            }
        }
    };
    c.finish()?;
    Ok(msg)
}

/// Parses exactly one complete frame.
pub fn decode_frame(bytes: &[u8]) -> Result<Message, WireError> {
    if bytes.len() < 4 {
        return Err(WireError::Truncated);
    }
    let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
    if len == 0 || len > MAX_FRAME_LEN {
        return Err(WireError::Oversize(len));
    }
    let body = &bytes[4..];
    if body.len() < len {
        return Err(WireError::Truncated);
    }
    if body.len() > len {
        return Err(WireError::Malformed {
            what: "frame",
            detail: format!("{} byte(s) beyond the declared length", body.len() - len),
        });
    }
    decode_body(body[0], &body[1..])
}

pub fn write_frame<W: Write>(w: &mut W, msg: &Message) -> Result<(), WireError> {
    w.write_all(&encode_frame(msg)?)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame. A clean end of stream before the first byte is
/// `Disconnected`; one inside a frame is `Truncated`.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Message, WireError> {
    let mut head = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut head[got..]) {
            Ok(0) if got == 0 => return Err(WireError::Disconnected),
            Ok(0) => return Err(WireError::Truncated),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) if is_disconnect(&e) => return Err(WireError::Disconnected),
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(head) as usize;
    if len == 0 || len > MAX_FRAME_LEN {
        return Err(WireError::Oversize(len));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => WireError::Truncated,
        _ => WireError::Io(e),
    })?;
    decode_body(body[0], &body[1..])
}

fn is_disconnect(e: &io::Error) -> bool {
    matches!(
        e.kind(),
        io::ErrorKind::ConnectionReset | io::ErrorKind::ConnectionAborted | io::ErrorKind::BrokenPipe
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shift_layout() {
        let f = encode_frame(&Message::Shift { s: 2 }).unwrap();
        assert_eq!(hex::encode(&f), "000000050700000002");
    }

    #[test]
    fn declaration_layout() {
        let f = encode_frame(&Message::Declaration {
            letters: vec![true, false, true, true],
        })
        .unwrap();
        assert_eq!(hex::encode(&f), "000000060500000004b0");
    }

    #[test]
    fn hello_layout() {
        let f = encode_frame(&Message::Hello {
            theta: 0.5,
            n_items: 7,
            k: 2,
            loss: 0.0,
        })
        .unwrap();
        assert_eq!(f.len(), 4 + 1 + 8 + 4 + 4 + 8);
        assert_eq!(&f[5..13], &0.5f64.to_bits().to_be_bytes());
    }

    #[test]
    fn decode_errors() {
        assert!(matches!(decode_frame(&[0, 0, 0]), Err(WireError::Truncated)));
        assert!(matches!(decode_frame(&[0, 0, 0, 5, 7, 0]), Err(WireError::Truncated)));
        assert!(matches!(decode_frame(&[0, 0, 0, 1, 0x42]), Err(WireError::UnknownType(0x42))));
        assert!(matches!(decode_frame(&[0x01, 0, 0, 1, 7]), Err(WireError::Oversize(_))));
        assert!(matches!(decode_frame(&[0, 0, 0, 0]), Err(WireError::Oversize(0))));
        // SHIFT with a 3-byte payload.
        assert!(matches!(decode_frame(&[0, 0, 0, 4, 7, 0, 0, 2]), Err(WireError::Malformed { .. })));
        // One bit declared, padding bit set.
        assert!(matches!(
            decode_frame(&[0, 0, 0, 6, 5, 0, 0, 0, 1, 0xC0]),
            Err(WireError::Malformed { .. })
        ));
        let mut f = encode_frame(&Message::Shift { s: 1 }).unwrap();
        f.push(0);
        assert!(matches!(decode_frame(&f), Err(WireError::Malformed { .. })));
    }

    #[test]
    fn stream_reads() {
        let mut buf = Vec::new();
        write_frame(&mut buf, &Message::SiftAck { conclusive: 9 }).unwrap();
        write_frame(&mut buf, &Message::error(ErrorCode::Phase, "x")).unwrap();
        let mut r = buf.as_slice();
        assert_eq!(read_frame(&mut r).unwrap(), Message::SiftAck { conclusive: 9 });
        assert_eq!(
            read_frame(&mut r).unwrap(),
            Message::Error {
                code: 1,
                message: "x".into()
            }
        );
        assert!(matches!(read_frame(&mut r), Err(WireError::Disconnected)));
        let mut cut: &[u8] = &buf[..6];
        assert!(matches!(read_frame(&mut cut), Err(WireError::Truncated)));
    }

    fn bits() -> impl Strategy<Value = Vec<bool>> {
        prop::collection::vec(any::<bool>(), 0..300)
    }

    fn finite() -> impl Strategy<Value = f64> {
        any::<f64>().prop_filter("NaN never compares equal", |x| !x.is_nan())
    }

    fn message() -> impl Strategy<Value = Message> {
        prop_oneof![
            (finite(), any::<u32>(), any::<u32>(), finite()).prop_map(|(theta, n_items, k, loss)| Message::Hello {
                theta,
                n_items,
                k,
                loss,
            }),
            any::<u32>().prop_map(|count| Message::PhotonBatchReq { count }),
            bits().prop_map(|bases| Message::MeasureSubmit { bases }),
            bits().prop_flat_map(|r| {
                let n = r.len();
                prop::collection::vec(any::<bool>(), n).prop_map(move |o| Message::OutcomeBatch {
                    received: r.clone(),
                    outcomes: o,
                })
            }),
            bits().prop_map(|letters| Message::Declaration { letters }),
            any::<u64>().prop_map(|conclusive| Message::SiftAck { conclusive }),
            any::<u32>().prop_map(|s| Message::Shift { s }),
            bits().prop_map(|bits| Message::Ciphertext { bits }),
            (any::<u8>(), ".{0,40}").prop_map(|(code, message)| Message::Error { code, message }),
        ]
    }

    proptest! {
        #[test]
        fn round_trip(m in message()) {
            let f = encode_frame(&m).unwrap();
            prop_assert_eq!(decode_frame(&f).unwrap(), m);
        }
    }
}
