//! Binary record files.
//!
//! A file starts with an 8-byte header: the magic `QKDR`, a little-endian
//! `u16` format version (1), a kind byte (1 pulses, 2 clicks) and a zero
//! byte. Records follow back to back, 18 bytes each, little-endian:
//!
//! | offset | type | pulses                | clicks                         |
//! |--------|------|-----------------------|--------------------------------|
//! | 0      | u64  | pulse index           | pulse slot                     |
//! | 8      | u8   | photon count          | bit 0 dark, bit 1 during scan  |
//! | 9      | u8   | `basis << 1 \| bit`   | detector id                    |
//! | 10     | f64  | timestamp, s          | timestamp, s                   |

use std::io::{Read, Write};

use super::{Basis, ClickRecord, PulseRecord, SimError};

pub const RECORD_BYTES: usize = 18;
const MAGIC: &[u8; 4] = b"QKDR";
const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Pulses = 1,
    Clicks = 2,
}

fn write_header(w: &mut impl Write, kind: RecordKind) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[kind as u8, 0])
}

fn write_record(w: &mut impl Write, index: u64, flags: u8, basis_bit: u8, t: f64) -> std::io::Result<()> {
    let mut buf = [0u8; RECORD_BYTES];
    buf[..8].copy_from_slice(&index.to_le_bytes());
    buf[8] = flags;
    buf[9] = basis_bit;
    buf[10..].copy_from_slice(&t.to_le_bytes());
    w.write_all(&buf)
}

fn read_records(r: &mut impl Read, kind: RecordKind) -> Result<Vec<(u64, u8, u8, f64)>, SimError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    if data.len() < 8 || &data[..4] != MAGIC {
        return Err(SimError::Format("missing record header".into()));
    }
    let version = u16::from_le_bytes([data[4], data[5]]);
    if version != VERSION {
        return Err(SimError::Format(format!("unsupported version {version}")));
    }
    if data[6] != kind as u8 {
        return Err(SimError::Format(format!(
            "expected kind {}, found {}",
            kind as u8, data[6]
        )));
    }
    let body = &data[8..];
    if body.len() % RECORD_BYTES != 0 {
        return Err(SimError::Format(format!(
            "{} trailing bytes",
            body.len() % RECORD_BYTES
        )));
    }
    Ok(body
        .chunks_exact(RECORD_BYTES)
        .map(|c| {
            (
                u64::from_le_bytes(c[..8].try_into().unwrap()),
                c[8],
                c[9],
                f64::from_le_bytes(c[10..].try_into().unwrap()),
            )
        })
        .collect())
}

pub fn write_pulse_records<'a>(
    w: &mut impl Write,
    records: impl IntoIterator<Item = &'a PulseRecord>,
) -> std::io::Result<()> {
    write_header(w, RecordKind::Pulses)?;
    for p in records {
        write_record(
            w,
            p.pulse_index,
            p.photon_count,
            (p.basis.index() << 1) | p.bit,
            p.timestamp_s,
        )?;
    }
    Ok(())
}

pub fn read_pulse_records(r: &mut impl Read) -> Result<Vec<PulseRecord>, SimError> {
    read_records(r, RecordKind::Pulses)?
        .into_iter()
        .map(|(i, flags, bb, t)| {
            if flags > 2 || bb > 3 {
                return Err(SimError::Format(format!("bad pulse record at index {i}")));
            }
            Ok(PulseRecord {
                pulse_index: i,
                basis: Basis::from_index(bb >> 1),
                bit: bb & 1,
                photon_count: flags,
                timestamp_s: t,
            })
        })
        .collect()
}

pub fn write_click_records<'a>(
    w: &mut impl Write,
    records: impl IntoIterator<Item = &'a ClickRecord>,
) -> std::io::Result<()> {
    write_header(w, RecordKind::Clicks)?;
    for c in records {
        let flags = u8::from(c.is_dark) | (u8::from(c.during_scan) << 1);
        write_record(w, c.pulse_index, flags, c.detector_id, c.timestamp_s)?;
    }
    Ok(())
}

pub fn read_click_records(r: &mut impl Read) -> Result<Vec<ClickRecord>, SimError> {
    read_records(r, RecordKind::Clicks)?
        .into_iter()
        .map(|(i, flags, det, t)| {
            if flags > 3 || det > 3 {
                return Err(SimError::Format(format!("bad click record at slot {i}")));
            }
            Ok(ClickRecord {
                pulse_index: i,
                detector_id: det,
                timestamp_s: t,
                is_dark: flags & 1 == 1,
                during_scan: flags & 2 == 2,
            })
        })
        .collect()
}
