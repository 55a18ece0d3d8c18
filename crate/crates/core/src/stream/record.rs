use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::ParseError;
use crate::keyspace::Key;

const FIELDS: [&str; 9] = [
    "ts", "src", "dst", "sport", "dport", "proto", "packets", "bytes", "ttl",
];

/// One flow record: `ts,src,dst,sport,dport,proto,packets,bytes[,ttl]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRecord {
    /// Seconds since the epoch.
    pub ts: f64,
    pub src: Key,
    pub dst: Key,
    pub sport: u16,
    pub dport: u16,
    pub proto: u8,
    pub packets: u64,
    pub bytes: u64,
    pub ttl: Option<u8>,
}

fn error(field: usize, message: String) -> ParseError {
    ParseError {
        line: None,
        field,
        name: FIELDS[field - 1],
        message,
    }
}

fn field<T: FromStr>(raw: Option<&str>, at: usize) -> Result<T, ParseError>
where
    T::Err: std::fmt::Display,
{
    let raw = raw.ok_or_else(|| error(at, "missing".into()))?;
    raw.trim()
        .parse::<T>()
        .map_err(|e| error(at, format!("{raw:?}: {e}")))
}

/// Parses one CSV line. Addresses may be dotted quads or unsigned decimals.
pub fn parse_record(line: &str) -> Result<FlowRecord, ParseError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let mut parts = line.split(',');
    let ts: f64 = field(parts.next(), 1)?;
    if !ts.is_finite() {
        return Err(error(1, format!("{ts} is not a finite timestamp")));
    }
    let src: Key = field(parts.next(), 2)?;
    let dst: Key = field(parts.next(), 3)?;
    let sport: u16 = field(parts.next(), 4)?;
    let dport: u16 = field(parts.next(), 5)?;
    let proto: u8 = field(parts.next(), 6)?;
    let packets: u64 = field(parts.next(), 7)?;
    let bytes: u64 = field(parts.next(), 8)?;
    if bytes > 0 && packets == 0 {
        return Err(error(7, format!("zero packets cannot carry {bytes} bytes")));
    }
    let ttl = match parts.next() {
        None => None,
        Some(raw) if raw.trim().is_empty() => None,
        some => Some(field::<u8>(some, 9)?),
    };
    if parts.next().is_some() {
        return Err(ParseError {
            line: None,
            field: 10,
            name: "end",
            message: "too many fields".into(),
        });
    }
    Ok(FlowRecord {
        ts,
        src,
        dst,
        sport,
        dport,
        proto,
        packets,
        bytes,
        ttl,
    })
}

/// Writes the CSV form read by [`parse_record`], without a line terminator.
pub fn format_record(r: &FlowRecord) -> String {
    let mut s = String::with_capacity(64);
    let _ = write!(
        s,
        "{},{},{},{},{},{},{},{}",
        r.ts, r.src, r.dst, r.sport, r.dport, r.proto, r.packets, r.bytes
    );
    if let Some(ttl) = r.ttl {
        let _ = write!(s, ",{ttl}");
    }
    s
}
