use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// One address event. Polarity is `+1` or `−1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub t: i64,
    pub x: u32,
    pub y: u32,
    pub polarity: i8,
}

/// A recording from an event sensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    pub width: u32,
    pub height: u32,
    pub label: usize,
    pub events: Vec<Event>,
    /// Recording span `[start, end]` in ticks. When absent the span runs
    /// from the first to the last event.
    pub span: Option<(i64, i64)>,
}

impl EventStream {
    pub fn validate(&self) -> Result<()> {
        for (n, e) in self.events.iter().enumerate() {
            if e.x >= self.width || e.y >= self.height {
                return Err(Error::contract(format!(
                    "event {n} at ({}, {}) outside {}x{} sensor",
                    e.x, e.y, self.width, self.height
                )));
            }
            if e.polarity != 1 && e.polarity != -1 {
                return Err(Error::contract(format!(
                    "event {n} has polarity {}",
                    e.polarity
                )));
            }
            if n > 0 && e.t < self.events[n - 1].t {
                return Err(Error::contract(format!("event {n} goes back in time")));
            }
        }
        if let Some((a, b)) = self.span {
            if b < a {
                return Err(Error::contract(format!("span [{a}, {b}] is reversed")));
            }
        }
        Ok(())
    }

    /// `[start, end]` of the recording, or `None` for an empty stream without
    /// an explicit span.
    pub fn time_span(&self) -> Option<(i64, i64)> {
        self.span.or_else(|| {
            let first = self.events.first()?;
            let last = self.events.last()?;
            Some((first.t, last.t))
        })
    }
}

const TEXT_TAG: &str = "EVENTS";
const BINARY_MAGIC: &[u8; 4] = b"MCEV";
const BINARY_VERSION: u8 = 1;

/// Text form: a header line `EVENTS <width> <height> <label> [<start> <end>]`
/// followed by one `t x y p` line per event.
pub fn write_event_text(path: &Path, stream: &EventStream) -> Result<()> {
    stream.validate()?;
    let mut out = format!(
        "{TEXT_TAG} {} {} {}",
        stream.width, stream.height, stream.label
    );
    if let Some((a, b)) = stream.span {
        out.push_str(&format!(" {a} {b}"));
    }
    out.push('\n');
    for e in &stream.events {
        out.push_str(&format!("{} {} {} {}\n", e.t, e.x, e.y, e.polarity));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Packed little-endian form: magic `MCEV`, version byte, `u32` width,
/// height and label, a span flag byte with `i64` start and end, a `u64`
/// event count, then per event `i64 t, u16 x, u16 y, i8 p`.
pub fn write_event_binary(path: &Path, stream: &EventStream) -> Result<()> {
    stream.validate()?;
    if stream.width > u16::MAX as u32 + 1 || stream.height > u16::MAX as u32 + 1 {
        return Err(Error::contract(
            "binary event format holds at most 65536x65536 sensors",
        ));
    }
    let mut buf = Vec::with_capacity(40 + stream.events.len() * 13);
    buf.extend_from_slice(BINARY_MAGIC);
    buf.push(BINARY_VERSION);
    buf.extend_from_slice(&stream.width.to_le_bytes());
    buf.extend_from_slice(&stream.height.to_le_bytes());
    buf.extend_from_slice(&(stream.label as u32).to_le_bytes());
    let (has_span, (a, b)) = match stream.span {
        Some(s) => (1u8, s),
        None => (0u8, (0, 0)),
    };
    buf.push(has_span);
    buf.extend_from_slice(&a.to_le_bytes());
    buf.extend_from_slice(&b.to_le_bytes());
    buf.extend_from_slice(&(stream.events.len() as u64).to_le_bytes());
    for e in &stream.events {
        buf.extend_from_slice(&e.t.to_le_bytes());
        buf.extend_from_slice(&(e.x as u16).to_le_bytes());
        buf.extend_from_slice(&(e.y as u16).to_le_bytes());
        buf.push(e.polarity as u8);
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Reads either event format, detected from the leading magic bytes.
pub fn read_event_file(path: &Path) -> Result<EventStream> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let stream = if bytes.starts_with(BINARY_MAGIC) {
        parse_binary(path, &bytes)?
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::data(path, "not UTF-8 text"))?;
        parse_text(path, text)?
    };
    stream
        .validate()
        .map_err(|e| Error::data(path, e.to_string()))?;
    Ok(stream)
}

fn parse_text(path: &Path, text: &str) -> Result<EventStream> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::data(path, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&TEXT_TAG) || !(fields.len() == 4 || fields.len() == 6) {
        return Err(Error::data(
            path,
            "header must be `EVENTS <width> <height> <label> [<start> <end>]`",
        ));
    }
    let bad = |what: &str| Error::data(path, format!("bad {what} in header"));
    let width = fields[1].parse().map_err(|_| bad("width"))?;
    let height = fields[2].parse().map_err(|_| bad("height"))?;
    let label = fields[3].parse().map_err(|_| bad("label"))?;
    let span = if fields.len() == 6 {
        Some((
            fields[4].parse().map_err(|_| bad("span start"))?,
            fields[5].parse().map_err(|_| bad("span end"))?,
        ))
    } else {
        None
    };
    let mut events = Vec::new();
    for (n, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        let parsed = (f.len() == 4)
            .then(|| {
                Some(Event {
                    t: f[0].parse().ok()?,
                    x: f[1].parse().ok()?,
                    y: f[2].parse().ok()?,
                    polarity: f[3].parse().ok()?,
                })
            })
            .flatten();
        events.push(
            parsed
                .ok_or_else(|| Error::data(path, format!("line {}: expected `t x y p`", n + 1)))?,
        );
    }
    Ok(EventStream {
        width,
        height,
        label,
        events,
        span,
    })
}

fn parse_binary(path: &Path, bytes: &[u8]) -> Result<EventStream> {
    let short = || Error::data(path, "truncated binary event file");
    let mut pos = 4;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes.get(pos..pos + n).ok_or_else(short)?;
        pos += n;
        Ok(s)
    };
    let version = take(1)?[0];
    if version != BINARY_VERSION {
        return Err(Error::data(path, format!("unsupported version {version}")));
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap());
    let i64_at = |s: &[u8]| i64::from_le_bytes(s.try_into().unwrap());
    let width = u32_at(take(4)?);
    let height = u32_at(take(4)?);
    let label = u32_at(take(4)?) as usize;
    let has_span = take(1)?[0];
    let a = i64_at(take(8)?);
    let b = i64_at(take(8)?);
    let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let mut events = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let rec = take(13)?;
        events.push(Event {
            t: i64_at(&rec[0..8]),
            x: u16::from_le_bytes([rec[8], rec[9]]) as u32,
            y: u16::from_le_bytes([rec[10], rec[11]]) as u32,
            polarity: rec[12] as i8,
        });
    }
    if pos != bytes.len() {
        return Err(Error::data(path, "trailing bytes after events"));
    }
    Ok(EventStream {
        width,
        height,
        label,
        events,
        span: (has_span != 0).then_some((a, b)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_stream() -> impl Strategy<Value = EventStream> {
        (
            1u32..40,
            1u32..40,
            0usize..10,
            prop::collection::vec((0i64..50, any::<u32>(), any::<u32>(), any::<bool>()), 0..60),
            any::<bool>(),
        )
            .prop_map(|(w, h, label, raw, with_span)| {
                let mut t = 0;
                let events: Vec<Event> = raw
                    .into_iter()
                    .map(|(dt, x, y, on)| {
                        t += dt;
                        Event {
                            t,
                            x: x % w,
                            y: y % h,
                            polarity: if on { 1 } else { -1 },
                        }
                    })
                    .collect();
                let span = with_span.then_some((-5, t + 5));
                EventStream {
                    width: w,
                    height: h,
                    label,
                    events,
                    span,
                }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn both_formats_round_trip(stream in arb_stream()) {
            let dir = tempfile::tempdir().unwrap();
            let text = dir.path().join("a.evt");
            let bin = dir.path().join("a.evb");
            write_event_text(&text, &stream).unwrap();
            write_event_binary(&bin, &stream).unwrap();
            prop_assert_eq!(&read_event_file(&text).unwrap(), &stream);
            prop_assert_eq!(&read_event_file(&bin).unwrap(), &stream);
        }
    }

    #[test]
    fn rejects_invalid_streams() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.evt");
        std::fs::write(&p, "EVENTS 4 4 0\n5 1 1 1\n3 1 1 1\n").unwrap();
        assert!(matches!(read_event_file(&p), Err(Error::Data { .. })));
        std::fs::write(&p, "EVENTS 4 4 0\n5 9 1 1\n").unwrap();
        assert!(read_event_file(&p).is_err());
        std::fs::write(&p, "EVENTS 4 4\n").unwrap();
        assert!(read_event_file(&p).is_err());
        std::fs::write(&p, b"MCEV\x01\x04\x00").unwrap();
        assert!(read_event_file(&p).is_err());
    }
}
